"""Dense complex linear-algebra substrate.

Matrices are plain complex numpy arrays. The vectorization convention is
column-stacking: the matrix unit |i><j| maps to the basis vector with index
j*d + i, so that vec(A X B) = (B^T kron A) vec(X).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ContourError, DimensionError, NumericalError, ResolventSingularError

__all__ = [
    "ContourSpec",
    "vec",
    "unvec",
    "kron_sandwich",
    "require_square",
    "check_finite",
    "mat_exp",
    "eig",
    "resolvent",
    "contour_integral",
    "norms",
    "spectral_norm",
    "trace_norm",
    "hs_norm",
    "induced_trace_norm_lb",
]


@dataclass(frozen=True)
class ContourSpec:
    """Circular contour for spectral quadrature."""

    center: complex
    radius: float
    quadrature_points: int = 256

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"contour radius must be positive, got {self.radius}")
        if self.quadrature_points < 16:
            raise ValueError(
                f"need at least 16 quadrature points, got {self.quadrature_points}"
            )

    def nodes(self, count=None):
        n = self.quadrature_points if count is None else count
        theta = 2.0 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * theta)


def require_square(a, what="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {a.shape}")
    return a


def check_finite(a, what="result"):
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise NumericalError(f"{what} contains non-finite entries")
    return a


def vec(x):
    """Column-stacking vectorization: |i><j| -> e_{j*d+i}."""
    x = np.asarray(x, dtype=complex)
    return x.reshape(-1, order="F")


def unvec(v, d=None):
    v = np.asarray(v, dtype=complex).reshape(-1)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise DimensionError(f"cannot unvec length {v.size} into {d}x{d}")
    return v.reshape((d, d), order="F")


def kron_sandwich(a, b):
    """Matrix of X -> A X B under column-stacking, i.e. B^T kron A."""
    return np.kron(np.asarray(b, dtype=complex).T, np.asarray(a, dtype=complex))


def mat_exp(a):
    """Matrix exponential via scaling-and-squaring with Pade approximation."""
    a = require_square(a, "exponent")
    return check_finite(scipy.linalg.expm(a), "matrix exponential")


def _eig_sort_order(w):
    # modulus descending, then argument ascending; ties broken by real/imag
    # parts so repeated calls give identical orderings.
    mod = np.abs(w)
    arg = np.angle(w)
    return np.lexsort((w.imag, w.real, arg, -mod))


def eig(a):
    """Eigendecomposition with deterministic ordering.

    Returns (eigenvalues, right eigenvector matrix, complex Schur form),
    eigenvalues sorted by descending modulus then ascending argument.
    """
    a = require_square(a)
    try:
        w, v = scipy.linalg.eig(a)
        schur_t, _ = scipy.linalg.schur(a, output="complex")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    order = _eig_sort_order(w)
    w = w[order]
    v = v[:, order]
    scale = max(np.linalg.norm(a, 2), 1.0)
    resid = np.linalg.norm(a @ v - v * w[None, :], axis=0)
    if np.any(resid > 1e-9 * scale * np.sqrt(a.shape[0])):
        raise NumericalError(
            f"eigenpair residual too large: max {resid.max():.3e} "
            f"(scale {scale:.3e})"
        )
    return w, v, schur_t


def resolvent(a, z):
    """(z - A)^{-1}, refusing to invert when z is numerically in the spectrum."""
    a = require_square(a)
    d = a.shape[0]
    shifted = z * np.eye(d) - a
    smin = np.linalg.svd(shifted, compute_uv=False)[-1]
    scale = max(abs(z), np.linalg.norm(a, 2), 1.0)
    if smin <= 1e-12 * scale:
        raise ResolventSingularError(
            f"z={z} is within numerical distance of Spec(A) "
            f"(min singular value {smin:.3e})",
            min_singular_value=smin,
        )
    r = scipy.linalg.solve(shifted, np.eye(d))
    return check_finite(r, "resolvent")


def contour_integral(f, spec, adaptive=True, tol=1e-10, max_points=4096):
    """Trapezoid approximation of (1/2 pi i) * contour integral of f.

    On the circle the rule reads (1/N) sum_k f(z_k) (z_k - center); for f
    holomorphic up to poles strictly inside, the error decays exponentially
    in the node count. Node count is doubled until successive estimates
    differ by less than ``tol`` in Frobenius norm (capped at ``max_points``).
    """

    def estimate(n):
        nodes = spec.nodes(n)
        acc = None
        for z in nodes:
            try:
                val = np.asarray(f(z), dtype=complex)
            except Exception as exc:
                raise ContourError(f"integrand evaluation failed at z={z}: {exc}") from exc
            term = val * (z - spec.center)
            acc = term if acc is None else acc + term
        return acc / n

    n = spec.quadrature_points
    current = estimate(n)
    if not adaptive:
        return check_finite(current, "contour integral")
    while n < max_points:
        n *= 2
        refined = estimate(n)
        if np.linalg.norm(refined - current) < tol:
            return check_finite(refined, "contour integral")
        current = refined
    return check_finite(current, "contour integral")


def norms(a):
    """(spectral, trace, Hilbert-Schmidt) norms from one SVD."""
    a = np.asarray(a, dtype=complex)
    s = np.linalg.svd(a, compute_uv=False)
    return float(s[0]) if s.size else 0.0, float(s.sum()), float(np.sqrt((s**2).sum()))


def spectral_norm(a):
    return norms(a)[0]


def trace_norm(a):
    return norms(a)[1]


def hs_norm(a):
    return float(np.linalg.norm(np.asarray(a), "fro"))


def _haar_state(rng, d):
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return psi / np.linalg.norm(psi)


def induced_trace_norm_lb(
    s_matrix, d, sample_count=512, seed=0, ascent_steps=50, step_size=0.2
):
    """Lower bound on the trace-norm -> trace-norm induced norm of a superoperator.

    Samples random pure states, evaluates the trace norm of the image of each
    projector, then runs projected gradient ascent from the best sample. The
    ascent direction uses the polar factor U of the image X = U|X|, whose
    pullback through the adjoint map is the gradient of psi -> ||S(psi psi*)||_1.
    Deterministic given the seed; exact on the sampled states.
    """
    s_matrix = require_square(np.asarray(s_matrix, dtype=complex), "superoperator")
    if s_matrix.shape[0] != d * d:
        raise DimensionError(
            f"superoperator matrix is {s_matrix.shape[0]}x{s_matrix.shape[0]}, "
            f"expected {d * d}x{d * d}"
        )
    rng = np.random.default_rng(seed)

    def value(psi):
        x = unvec(s_matrix @ vec(np.outer(psi, psi.conj())), d)
        return trace_norm(x), x

    best_val = 0.0
    best_psi = None
    for _ in range(sample_count):
        psi = _haar_state(rng, d)
        val, _ = value(psi)
        if val > best_val:
            best_val, best_psi = val, psi
    if best_psi is None:
        return 0.0

    adj = s_matrix.conj().T
    psi = best_psi
    cur = best_val
    for _ in range(ascent_steps):
        _, x = value(psi)
        u_pol, _, vh = np.linalg.svd(x)
        polar_u = u_pol @ vh
        grad_op = unvec(adj @ vec(polar_u), d)
        grad = grad_op @ psi
        trial = psi + step_size * grad
        nrm = np.linalg.norm(trial)
        if nrm < 1e-14:
            break
        trial /= nrm
        val, _ = value(trial)
        if val > cur:
            psi, cur = trial, val
    return float(max(cur, best_val))
