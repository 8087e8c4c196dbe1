"""Peripheral-spectrum analysis of contractions.

Spectral projectors onto near-unit-modulus eigenvalue clusters, their
quasi-nilpotent parts, gap estimation, Zeno-admissibility classification,
ergodic averages, and power-convergence diagnostics.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ContourError, EstimationError, NoGapError
from .linalg import (
    ContourSpec,
    contour_integral,
    eig,
    induced_trace_norm_lb,
    mat_exp,
    resolvent,
    spectral_norm,
    trace_norm,
    unvec,
    vec,
)
from .semigroup import Superoperator

PERIPHERAL_TOL = 1e-8
CLUSTER_TOL = 1e-7
NILPOTENT_ZERO_TOL = 1e-8
PROJECTOR_CROSS_CHECK_TOL = 1e-7


def _as_matrix(m):
    """Accept either a Superoperator or a plain square array."""
    if isinstance(m, Superoperator):
        return m.matrix
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class PeripheralReport:
    """Spectral decomposition of a contraction at the unit circle.

    peripheral_eigs pairs each cluster representative with its algebraic
    multiplicity.  gap_delta is the largest modulus among non-peripheral
    eigenvalues (0.0 when the peripheral part exhausts the spectrum).
    admissible means: a gap below 1 exists and every quasi-nilpotent part
    vanishes numerically.
    """

    dim: int
    peripheral_eigs: tuple
    projectors: tuple
    quasi_nilpotent_norms: tuple
    gap_delta: float
    admissible: bool
    cross_check_defect: float
    contraction_defect: float = 0.0
    notes: tuple = field(default_factory=tuple)

    @property
    def cluster_count(self):
        return len(self.peripheral_eigs)

    def peripheral_sum(self):
        """Sum of the peripheral projectors (complement of the bulk)."""
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for p in self.projectors:
            total = total + _as_matrix(p)
        return total

    def to_dict(self):
        return {
            "dim": self.dim,
            "peripheral_eigs": [
                {"value": [lam.real, lam.imag], "multiplicity": int(mult)}
                for lam, mult in self.peripheral_eigs
            ],
            "quasi_nilpotent_norms": [float(x) for x in self.quasi_nilpotent_norms],
            "gap_delta": float(self.gap_delta),
            "admissible": bool(self.admissible),
            "cross_check_defect": float(self.cross_check_defect),
            "contraction_defect": float(self.contraction_defect),
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class PowerConvergenceReport:
    """Outcome of iterating a contraction on a panel of test states.

    mode is a trichotomy: "uniform" (operator-level residuals decay),
    "strong-on-samples" (the given states converge but an operator-norm
    lower bound stays large), or "divergent" (no trend on the samples).
    The classification is relative to the supplied states; it is never a
    universal statement about the map.
    """

    mode: str
    limit_projector_estimate: object
    residuals: tuple
    operator_lower_bounds: tuple

    def to_dict(self):
        return {
            "mode": self.mode,
            "residuals": [[int(n), float(r)] for n, r in self.residuals],
            "operator_lower_bounds": [
                [int(n), float(r)] for n, r in self.operator_lower_bounds
            ],
        }


def _cluster(values, tol):
    """Greedy clustering of complex values: chains closer than tol merge."""
    order = np.argsort(values.real + 1e-9 * values.imag)
    groups = []
    for idx in order:
        z = values[idx]
        for group in groups:
            if min(abs(z - values[j]) for j in group) <= tol:
                group.append(idx)
                break
        else:
            groups.append([idx])
    return groups


def _schur_cluster_projector(matrix, predicate):
    """Spectral projector onto the eigenvalues selected by predicate.

    Uses a sorted Schur form and a Sylvester solve, which stays accurate
    for defective clusters where eigenvector bases are ill-conditioned.
    """
    d = matrix.shape[0]
    t, z, sdim = scipy.linalg.schur(matrix, output="complex", sort=predicate)
    if sdim == 0:
        return np.zeros((d, d), dtype=complex)
    if sdim == d:
        return np.eye(d, dtype=complex)
    a = t[:sdim, :sdim]
    b = t[:sdim, sdim:]
    c = t[sdim:, sdim:]
    r = scipy.linalg.solve_sylvester(a, -c, b)
    block = np.zeros((d, d), dtype=complex)
    block[:sdim, :sdim] = np.eye(sdim)
    block[:sdim, sdim:] = r
    return z @ block @ z.conj().T


def _contour_projector(matrix, center, radius, eigenvalues):
    """Resolvent contour quadrature around one cluster."""
    margin = min(
        (abs(lam - center) - radius for lam in eigenvalues if abs(lam - center) > radius),
        default=radius,
    )
    if margin <= 0:
        raise ContourError(
            f"an eigenvalue sits on the contour (center {center:.6g}, radius {radius:.3e})"
        )
    spec = ContourSpec(center=center, radius=radius)
    return contour_integral(lambda zz: resolvent(matrix, zz), spec)


def peripheral_analysis(m, peripheral_tol=PERIPHERAL_TOL, cluster_tol=CLUSTER_TOL):
    """Classify the peripheral spectrum of a contraction.

    Eigenvalues of modulus >= 1 - peripheral_tol are clustered within
    cluster_tol; each cluster gets a spectral projector computed twice
    (contour quadrature and Schur-sorted invariant subspace) and the two
    are cross-checked.  The quasi-nilpotent part of cluster j is
    N_j = (lambda_j - M) P_j.

    Raises NoGapError when a peripheral cluster cannot be separated from
    the bulk by a contour of radius >= 10 * cluster_tol; that situation
    is, by definition, not admissible.
    """
    matrix = _as_matrix(m)
    d = matrix.shape[0]
    notes = []

    contraction_defect = 0.0
    if isinstance(m, Superoperator):
        lb = induced_trace_norm_lb(matrix, m.dim, sample_count=64, ascent_steps=20)
        contraction_defect = max(0.0, lb - 1.0)
        if contraction_defect > 1e-6:
            warnings.warn(
                f"map does not look like a contraction (induced-norm lower bound "
                f"{lb:.6f})",
                stacklevel=2,
            )
            notes.append(f"contraction lower bound {lb:.6f} exceeds 1")

    w, _, _ = eig(matrix)
    moduli = np.abs(w)
    peripheral_mask = moduli >= 1.0 - peripheral_tol
    peripheral_idx = np.nonzero(peripheral_mask)[0]
    bulk = w[~peripheral_mask]
    gap_delta = float(np.max(moduli[~peripheral_mask])) if bulk.size else 0.0

    if peripheral_idx.size == 0:
        # Everything decays; the peripheral sum is empty and trivially Jordan-free.
        return PeripheralReport(
            dim=d,
            peripheral_eigs=(),
            projectors=(),
            quasi_nilpotent_norms=(),
            gap_delta=gap_delta,
            admissible=gap_delta < 1.0 - peripheral_tol,
            cross_check_defect=0.0,
            contraction_defect=contraction_defect,
            notes=tuple(notes),
        )

    groups = _cluster(w[peripheral_idx], cluster_tol)
    groups = [[peripheral_idx[j] for j in g] for g in groups]

    eigs = []
    projectors = []
    nil_norms = []
    cross_defect = 0.0
    for group in groups:
        members = w[group]
        center = complex(np.mean(members))
        extent = max(abs(z - center) for z in members)
        excluded = [w[j] for j in range(d) if j not in group]
        eigs.append((center, len(group)))

        if not excluded:
            # The cluster exhausts the spectrum: any enclosing contour
            # yields the identity, so skip the quadrature.
            p_matrix = np.eye(d, dtype=complex)
        else:
            dist = min(abs(z - center) for z in excluded) - extent
            if dist < 2 * 10 * cluster_tol:
                raise NoGapError(
                    f"peripheral cluster at {center:.6g} is only {dist:.3e} away "
                    f"from the nearest excluded eigenvalue; not separable "
                    f"(not admissible)"
                )
            radius = extent + dist / 2
            p_contour = _contour_projector(matrix, center, radius, w)
            selected = {complex(w[j]) for j in group}

            def predicate(z):
                return min(abs(z - s) for s in selected) <= min(
                    abs(z - complex(x)) for x in excluded
                )

            p_schur = _schur_cluster_projector(matrix, predicate)
            defect = spectral_norm(p_contour - p_schur)
            cross_defect = max(cross_defect, float(defect))
            if defect > PROJECTOR_CROSS_CHECK_TOL:
                notes.append(
                    f"projector cross-check defect {defect:.3e} at cluster {center:.6g}"
                )
            p_matrix = p_contour
        nil = (center * np.eye(d) - matrix) @ p_matrix
        nil_norms.append(float(spectral_norm(nil)))
        if isinstance(m, Superoperator):
            projectors.append(Superoperator(p_matrix, m.dim))
        else:
            projectors.append(p_matrix)

    gap_exists = gap_delta < 1.0 - peripheral_tol
    admissible = gap_exists and max(nil_norms) <= NILPOTENT_ZERO_TOL
    return PeripheralReport(
        dim=d,
        peripheral_eigs=tuple(eigs),
        projectors=tuple(projectors),
        quasi_nilpotent_norms=tuple(nil_norms),
        gap_delta=gap_delta,
        admissible=admissible,
        cross_check_defect=cross_defect,
        contraction_defect=contraction_defect,
        notes=tuple(notes),
    )


def bulk_projector(m, report):
    """Contour projector around the non-peripheral spectrum.

    Complements report.peripheral_sum(); the two add up to the identity.
    """
    matrix = _as_matrix(m)
    if report.gap_delta == 0.0:
        return np.zeros_like(matrix)
    radius = (report.gap_delta + 1.0) / 2
    w, _, _ = eig(matrix)
    return _contour_projector(matrix, 0.0, radius, w)


def ergodic_average(m, n, x):
    """Mean ergodic average A_n x = (1/n) sum_{k<n} M^k x."""
    if n < 1:
        raise ValueError("n must be >= 1")
    matrix = _as_matrix(m)
    d = int(round(np.sqrt(matrix.shape[0])))
    v = vec(np.asarray(x, dtype=complex))
    acc = v.copy()
    cur = v
    for _ in range(n - 1):
        cur = matrix @ cur
        acc += cur
    return unvec(acc / n, d)


def _estimate_limit_projector(matrix, squarings=14, rank_tol=1e-7):
    """Limit of M^n by repeated squaring, with a rank-stability check.

    Squares until the iterate stabilizes; among the last stable iterates the
    lower-rank candidate wins ties.  Raises EstimationError when the
    numerical rank keeps changing (no stable limit at this precision).
    """
    cur = matrix.copy()
    history = []
    for _ in range(squarings):
        nxt = cur @ cur
        history.append(nxt)
        if spectral_norm(nxt - cur) < 1e-10 * max(1.0, spectral_norm(nxt)):
            cur = nxt
            break
        cur = nxt
    tail = history[-3:]
    ranks = [int(np.sum(np.linalg.svd(h, compute_uv=False) > rank_tol)) for h in tail]
    if len(set(ranks)) != 1:
        raise EstimationError(
            f"power-limit rank estimate unstable over final squarings: {ranks}"
        )
    # tie-break toward the lower-rank candidate (trailing transients excluded)
    best = min(tail, key=lambda h: np.sum(np.linalg.svd(h, compute_uv=False) > rank_tol))
    return best


def power_convergence(m, test_states, n_max=64):
    """Classify power convergence of a contraction on sample states.

    The limit candidate comes from peripheral_analysis when the peripheral
    spectrum is the single eigenvalue 1 with vanishing quasi-nilpotent part,
    and from repeated-squaring extrapolation otherwise.  Residuals
    ||M^n x - P x||_1 on a geometric n-grid drive a ratio test; an
    operator-level trace-norm lower bound of M^n - P separates uniform from
    merely sample-wise convergence.
    """
    if not test_states:
        raise ValueError("test_states must be nonempty")
    matrix = _as_matrix(m)
    d = int(round(np.sqrt(matrix.shape[0])))
    states = []
    for x in test_states:
        x = np.asarray(x, dtype=complex)
        tn = trace_norm(x)
        if abs(tn - 1.0) > 1e-8:
            raise ValueError(f"test state has trace norm {tn:.6f}, expected 1")
        states.append(x)

    p_hat = None
    try:
        report = peripheral_analysis(m)
        if (
            report.cluster_count == 1
            and abs(report.peripheral_eigs[0][0] - 1.0) < 1e-6
            and max(report.quasi_nilpotent_norms) <= NILPOTENT_ZERO_TOL
        ):
            p_hat = _as_matrix(report.projectors[0])
    except NoGapError:
        p_hat = None
    if p_hat is None:
        try:
            p_hat = _estimate_limit_projector(matrix)
        except EstimationError:
            p_hat = np.zeros_like(matrix)

    n_grid = sorted({2**k for k in range(0, 20) if 2**k <= n_max} | {n_max})
    residuals = []
    op_lbs = []
    cur = {id(x): vec(x) for x in states}
    limits = {id(x): p_hat @ vec(x) for x in states}
    n_prev = 0
    for n in n_grid:
        for _ in range(n - n_prev):
            for key in cur:
                cur[key] = matrix @ cur[key]
        n_prev = n
        worst = max(
            trace_norm(unvec(cur[id(x)] - limits[id(x)], d)) for x in states
        )
        residuals.append((n, float(worst)))
        power = np.linalg.matrix_power(matrix, n) - p_hat
        op_lbs.append(
            (n, float(induced_trace_norm_lb(power, d, sample_count=64, ascent_steps=20)))
        )

    tail = [r for _, r in residuals[-5:]]
    ratios = [b / a for a, b in zip(tail, tail[1:]) if a > 1e-14]
    decaying = (not ratios) or max(ratios) < 1.0
    if not decaying and tail[-1] > 1e-10:
        mode = "divergent"
    else:
        late_lbs = [r for n, r in op_lbs if n >= 5]
        lb_small = all(r <= 1.0 for r in late_lbs)
        mode = "uniform" if lb_small else "strong-on-samples"

    if isinstance(m, Superoperator):
        p_obj = Superoperator(p_hat, m.dim)
    else:
        p_obj = p_hat
    return PowerConvergenceReport(
        mode=mode,
        limit_projector_estimate=p_obj,
        residuals=tuple(residuals),
        operator_lower_bounds=tuple(op_lbs),
    )


def time_dependent_projector(m, l_super, t, contour):
    """Spectral projector of M e^{tL} for the cluster inside the contour.

    The contour must keep all eigenvalues of M e^{tL} away from the curve;
    an eigenvalue within 1e-10 of it raises ContourError.
    """
    m_matrix = _as_matrix(m)
    l_matrix = _as_matrix(l_super)
    a = m_matrix @ mat_exp(t * l_matrix)
    w, _, _ = eig(a)
    dist = np.abs(np.abs(w - contour.center) - contour.radius)
    if np.min(dist) < 1e-10:
        offender = w[int(np.argmin(dist))]
        raise ContourError(
            f"eigenvalue {offender:.8g} lies on the contour "
            f"(center {contour.center}, radius {contour.radius})"
        )
    return contour_integral(lambda z: resolvent(a, z), contour)


def projector_derivative(m, l_super, contour):
    """Contour formula for dP/dt at t = 0 along A(t) = M e^{tL}.

    P'(0) = (1/2 pi i) oint R(z) M L R(z) dz with R(z) = (z - M)^{-1}.
    """
    m_matrix = _as_matrix(m)
    l_matrix = _as_matrix(l_super)
    ml = m_matrix @ l_matrix

    def integrand(z):
        r = resolvent(m_matrix, z)
        return r @ ml @ r

    return contour_integral(integrand, contour)


def projector_expansion_check(m, l_super, contour, t_values=(1e-2, 1e-3, 1e-4)):
    """First-order Taylor check for the perturbed spectral projector.

    Returns per-t defects ||P(t) - P(0) - t P'(0)|| together with the fitted
    quadratic constants defect / t^2, which should be stable across t.
    """
    p0 = time_dependent_projector(m, l_super, 0.0, contour)
    dp = projector_derivative(m, l_super, contour)
    rows = []
    for t in t_values:
        pt = time_dependent_projector(m, l_super, t, contour)
        defect = float(spectral_norm(pt - p0 - t * dp))
        idem = float(spectral_norm(pt @ pt - pt))
        rows.append({"t": t, "defect": defect, "c_fit": defect / t**2, "idem_defect": idem})
    return {"rows": rows, "p0": p0, "dp": dp}
