"""Catalog of quantum operations and semigroup generators on Fock truncations."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb, exp, factorial, sqrt

import numpy as np

from . import linalg
from .errors import FaithfulnessError, ParameterError, StateError
from .linalg import kron_sandwich, spectral_norm
from .semigroup import GklsGenerator, Superoperator

__all__ = [
    "TruncationSpec",
    "KrausChannel",
    "TruncationWarning",
    "annihilation",
    "number_operator",
    "coherent_state",
    "depolarizing",
    "oscillator_conjugation",
    "attenuator",
    "qou_generator",
    "jaynes_cummings_generator",
    "emission_absorption_generator",
    "two_photon_generator",
    "hs_embed",
    "volterra_contraction",
    "geometric_state",
    "parity_geometric_states",
    "jaynes_cummings_stationary_state",
]

PAD_LEVELS = 4


class TruncationWarning(UserWarning):
    """Emitted when truncation leakage exceeds the declared tolerance."""


@dataclass(frozen=True)
class TruncationSpec:
    """Fock cutoff and allowed leakage."""

    dim: int
    leakage_tol: float = 1e-6

    def __post_init__(self):
        if self.dim < 2:
            raise ParameterError(f"Fock cutoff must be at least 2, got {self.dim}")


@dataclass(frozen=True)
class KrausChannel:
    """Quantum operation given by a list of Kraus operators."""

    dim: int
    kraus_ops: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        for k in ops:
            if k.shape != (self.dim, self.dim):
                raise ParameterError(f"Kraus operator shape {k.shape} != dim {self.dim}")
        object.__setattr__(self, "kraus_ops", ops)
        total = sum(k.conj().T @ k for k in ops)
        w = np.linalg.eigvalsh((total + total.conj().T) / 2)
        if w.max() > 1 + 1e-10:
            raise ParameterError(
                f"channel is trace increasing: max eigenvalue of sum K*K is {w.max():.12f}"
            )

    @property
    def completeness_defect(self):
        total = sum(k.conj().T @ k for k in self.kraus_ops)
        return spectral_norm(total - np.eye(self.dim))

    def to_superoperator(self):
        return Superoperator.from_kraus(self.kraus_ops)

    def apply(self, x):
        return self.to_superoperator().apply(x)


# -- Fock-space building blocks ---------------------------------------------


def annihilation(d):
    a = np.zeros((d, d), dtype=complex)
    for n in range(d - 1):
        a[n, n + 1] = sqrt(n + 1)
    return a


def number_operator(d):
    return np.diag(np.arange(d, dtype=complex))


def _padded(build, d, pad=PAD_LEVELS):
    """Build an operator at dimension d+pad and crop to d x d."""
    big = build(d + pad)
    return big[:d, :d]


def coherent_state(alpha, d, tail_tol=1e-12):
    """Truncated coherent state vector, renormalized when tail mass > tail_tol."""
    amps = np.zeros(d, dtype=complex)
    amps[0] = exp(-abs(alpha) ** 2 / 2)
    for n in range(1, d):
        amps[n] = amps[n - 1] * alpha / sqrt(n)
    norm2 = float(np.vdot(amps, amps).real)
    if 1 - norm2 > tail_tol:
        amps = amps / sqrt(norm2)
    return amps


def _require_density(sigma, tol=1e-10):
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise StateError(f"state must be square, got shape {sigma.shape}")
    if np.linalg.norm(sigma - sigma.conj().T) > tol:
        raise StateError("state is not Hermitian")
    w = np.linalg.eigvalsh((sigma + sigma.conj().T) / 2)
    if w.min() < -tol:
        raise StateError(f"state is not PSD (min eigenvalue {w.min():.3e})")
    if abs(np.trace(sigma).real - 1.0) > tol:
        raise StateError(f"state trace is {np.trace(sigma).real:.12f}, expected 1")
    return sigma


# -- catalog channels --------------------------------------------------------


def depolarizing(p, sigma):
    """Generalized depolarizing channel rho -> (1-p) rho + p tr(rho) sigma."""
    if not 0 <= p < 1:
        raise ParameterError(f"p must lie in [0, 1), got {p}")
    sigma = _require_density(sigma)
    d = sigma.shape[0]
    m = (1 - p) * np.eye(d * d, dtype=complex) + p * np.outer(
        linalg.vec(sigma), linalg.vec(np.eye(d))
    )
    return Superoperator(m, d)


def oscillator_conjugation(k, omega, trunc):
    """Unitary conjugation by one period-fraction of the harmonic oscillator.

    The evolution time is t = 2 pi / (k omega), so that peripheral spectrum
    of the channel is the set of k-th roots of unity and the spectral
    projector at e^{-2 pi i j / k} masks matrix elements with n - m = j mod k.
    """
    if k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    if omega <= 0:
        raise ParameterError(f"omega must be positive, got {omega}")
    d = trunc.dim
    t = 2 * np.pi / (k * omega)
    energies = omega * (np.arange(d) + 0.5)
    u = np.diag(np.exp(-1j * t * energies))
    return Superoperator.from_conjugation(u)


def attenuator(t, trunc):
    """Bosonic attenuator channel at attenuation parameter e^{-t}.

    Kraus operators use the explicit matrix-element form
    K_l = sum_m sqrt(binom(m+l, m)) (1-e^{-t})^{l/2} e^{-t m / 2} |m><m+l|
    truncated to D levels; the completeness defect is exposed on the channel
    and compared against the declared leakage tolerance.
    """
    if t <= 0:
        raise ParameterError(f"attenuation time must be positive, got {t}")
    d = trunc.dim
    eta = exp(-t)
    kraus = []
    for l in range(d):
        k = np.zeros((d, d), dtype=complex)
        for m in range(d - l):
            k[m, m + l] = sqrt(comb(m + l, m)) * (1 - eta) ** (l / 2) * eta ** (m / 2)
        kraus.append(k)
    chan = KrausChannel(d, tuple(kraus))
    if chan.completeness_defect > trunc.leakage_tol:
        warnings.warn(
            f"attenuator at t={t}, D={d}: completeness defect "
            f"{chan.completeness_defect:.3e} exceeds leakage tolerance "
            f"{trunc.leakage_tol:.1e}",
            TruncationWarning,
            stacklevel=2,
        )
    return chan


def geometric_state(nu, d):
    """Geometric thermal state (1-nu) sum nu^n |n><n| truncated and renormalized."""
    if not 0 <= nu < 1:
        raise ParameterError(f"nu must lie in [0, 1), got {nu}")
    p = (1 - nu) * nu ** np.arange(d)
    p = p / p.sum()
    return np.diag(p.astype(complex))


def qou_generator(lam, mu, trunc):
    """Quantum Ornstein-Uhlenbeck generator with Lindblads mu*a and lam*a^dagger.

    Requires 0 < lam < mu so that a faithful geometric invariant state with
    ratio nu = lam^2 / mu^2 exists.
    """
    if not 0 < lam < mu:
        raise ParameterError(
            f"need 0 < lambda < mu for a faithful invariant state, got "
            f"lambda={lam}, mu={mu}"
        )
    d = trunc.dim
    a = _padded(annihilation, d)
    return GklsGenerator(
        dim=d,
        hamiltonian=np.zeros((d, d), dtype=complex),
        lindblads=(mu * a, lam * a.conj().T),
    )


def jaynes_cummings_generator(mu, lam, r, phi, trunc):
    """Jaynes-Cummings dissipative model on a Fock truncation.

    Lindblads are mu*a, lam*a^dagger, R cos(phi sqrt(a a^dagger)) and the
    raising operator R a^dagger sinc-type term whose nonzero elements are
    <n+1| L4 |n> = R sin(phi sqrt(n+1)); at the vacuum the analytic limit of
    sin(phi sqrt(x))/sqrt(x) as x -> 0 (namely phi) is used so no 0/0 occurs.
    """
    if not 0 <= lam < mu:
        raise ParameterError(f"need lambda < mu, got lambda={lam}, mu={mu}")
    if r < 0 or phi < 0:
        raise ParameterError(f"need R, phi >= 0, got R={r}, phi={phi}")
    d = trunc.dim
    a = _padded(annihilation, d)
    adag = a.conj().T
    n_plus_1 = np.arange(1, d + 1, dtype=float)
    l3 = r * np.diag(np.cos(phi * np.sqrt(n_plus_1))).astype(complex)

    def sinc_sqrt(x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, phi)
        pos = x > 0
        out[pos] = np.sin(phi * np.sqrt(x[pos])) / np.sqrt(x[pos])
        return out

    # a^dagger f(a a^dagger) = f(a^dagger a) a^dagger, elements sin(phi sqrt(n+1))
    l4 = r * (adag @ np.diag(sinc_sqrt(n_plus_1)).astype(complex))
    return GklsGenerator(
        dim=d,
        hamiltonian=np.zeros((d, d), dtype=complex),
        lindblads=(mu * a, lam * adag, l3, l4),
    )


def jaynes_cummings_stationary_state(mu, lam, r, phi, d):
    """Stationary state with weights proportional to the birth/death product."""
    weights = np.empty(d)
    weights[0] = 1.0
    for n in range(1, d):
        num = lam**2 * n + r**2 * np.sin(phi * sqrt(n)) ** 2
        weights[n] = weights[n - 1] * num / (mu**2 * n)
    weights /= weights.sum()
    return np.diag(weights.astype(complex))


def emission_absorption_generator(nu, mu, xi, trunc):
    """Emission-absorption model: Lindblads nu*N and mu*a, drive H = xi (a + a^dagger)."""
    if nu <= 0 or mu <= 0:
        raise ParameterError(f"need nu, mu > 0, got nu={nu}, mu={mu}")
    d = trunc.dim
    a = _padded(annihilation, d)
    h = xi * (a + a.conj().T)
    return GklsGenerator(
        dim=d,
        hamiltonian=h,
        lindblads=(nu * (a.conj().T @ a), mu * a),
    )


def two_photon_generator(kappa, mu, lam, trunc):
    """Two-photon absorption/emission: b = a^2, rates mu (down) / lam (up), H = kappa b^dagger b."""
    if not 0 <= lam < mu:
        raise ParameterError(f"need lambda < mu, got lambda={lam}, mu={mu}")
    d = trunc.dim
    a = _padded(annihilation, d)
    b = _padded(lambda n: annihilation(n) @ annihilation(n), d)
    h = kappa * (b.conj().T @ b)
    return GklsGenerator(dim=d, hamiltonian=h, lindblads=(mu * b, lam * b.conj().T))


def parity_geometric_states(mu, lam, d):
    """Even/odd invariant states of the two-photon flow, truncated and renormalized."""
    nu = lam / mu
    even = np.zeros(d)
    odd = np.zeros(d)
    for k in range(d):
        if 2 * k < d:
            even[2 * k] = nu ** (2 * k)
        if 2 * k + 1 < d:
            odd[2 * k + 1] = nu ** (2 * k)
    even /= even.sum()
    odd /= odd.sum()
    return np.diag(even.astype(complex)), np.diag(odd.astype(complex))


def hs_embed(t_super, rho, min_eig=1e-250):
    """Conjugate a superoperator by the weighting x -> rho^{1/4} x rho^{1/4}.

    Returns T^HS with T^HS o i_rho = i_rho o T as matrices, plus the
    Hilbert-Schmidt-norm contraction diagnostic ||T^HS||_2.

    Detailed balance with respect to an invariant state rho makes the
    *Heisenberg-picture* map self-adjoint under this embedding; pass
    ``generator.adjoint()`` when that symmetry is wanted.

    The conjugation is done in the eigenbasis of rho, where the weights are
    diagonal and the similarity reduces to an elementwise ratio scaling; this
    stays accurate even for extremely small (but positive) eigenvalues of rho,
    since only ratios between entries actually coupled by T enter.
    """
    rho = np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    if w.min() <= min_eig:
        raise FaithfulnessError(
            f"state is not faithful (min eigenvalue {w.min():.3e} <= {min_eig:.1e})"
        )
    basis = kron_sandwich(v.conj().T, v.conj().T)  # X -> V* X V
    basis_inv = kron_sandwich(v, v)
    t_diagbasis = basis @ t_super.matrix @ basis_inv
    # weight of the matrix unit |i><j| in the eigenbasis is (w_i w_j)^{1/4}
    d = t_super.dim
    log_w = np.log(w)
    idx_i = np.tile(np.arange(d), d)
    idx_j = np.repeat(np.arange(d), d)
    log_weight = 0.25 * (log_w[idx_i] + log_w[idx_j])
    scale = np.exp(log_weight[:, None] - log_weight[None, :])
    embedded_diag = t_diagbasis * scale
    embedded = Superoperator(basis_inv @ embedded_diag @ basis, d)
    return embedded, float(spectral_norm(embedded.matrix))


def volterra_contraction(grid_points):
    """Left-endpoint discretization of (I + Volterra)^{-1} on [0, 1].

    V_h is strictly lower triangular with entries h = 1/grid_points, hence
    nilpotent, so every eigenvalue of M = (I + V_h)^{-1} equals 1 exactly
    while the defect ||I - M|| stays bounded away from zero. Returns
    (M, ||M||, ||I - M||) with norms in the discrete L^2 (spectral) sense.
    """
    if grid_points < 8:
        raise ParameterError(f"need at least 8 grid points, got {grid_points}")
    h = 1.0 / grid_points
    v = np.tril(np.full((grid_points, grid_points), h, dtype=complex), k=-1)
    m = np.linalg.solve(np.eye(grid_points) + v, np.eye(grid_points))
    return m, spectral_norm(m), spectral_norm(np.eye(grid_points) - m)
