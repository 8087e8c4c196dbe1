"""Zeno products, their limit objects, error curves, and side lemmas.

Central object: the alternating product (M e^{tL/n})^n of a quantum
operation M and a semigroup step, evaluated on states.  The limit
objects implemented are the peripheral sum (admissible-contraction
case), the strong limit e^{tPLP}P, and the Yosida-regularized variant
with k growing like n^beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, EstimationError, ValidationError
from .linalg import (
    induced_trace_norm_lb,
    mat_exp,
    spectral_norm,
    trace_norm,
    unvec,
    vec,
)
from .semigroup import Superoperator, yosida
from .spectral import PeripheralReport, _as_matrix, peripheral_analysis

DELTA_TILDE_MARGIN = 0.05
DELTA_TILDE_CAP = 0.999
CURVATURE_TOL = 0.05


def delta_tilde(gap_delta):
    """Working radius above the gap: delta + 0.05, capped below 1."""
    return min(gap_delta + DELTA_TILDE_MARGIN, DELTA_TILDE_CAP)


@dataclass(frozen=True)
class ZenoRunConfig:
    """One Zeno-product experiment.

    limit_mode selects the limit object: "theorem1" (peripheral sum),
    "theorem2" (strong limit e^{tPLP}P), or "theorem3_yosida"
    (peripheral sum with the Yosida approximant at k = ceil(n^beta)).
    """

    channel: Superoperator
    generator: Superoperator
    total_time: float
    n_grid: tuple
    initial_state: np.ndarray
    limit_mode: str = "theorem1"
    beta: float = 1.0 / 3.0

    def __post_init__(self):
        n_grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", n_grid)
        if not n_grid or any(n < 1 for n in n_grid):
            raise ValidationError("n_grid must be nonempty with all entries >= 1")
        if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
            raise ValidationError("n_grid must be strictly ascending")
        if self.limit_mode not in ("theorem1", "theorem2", "theorem3_yosida"):
            raise ValidationError(f"unknown limit_mode {self.limit_mode!r}")
        if self.total_time < 0:
            raise ValidationError("total_time must be >= 0")
        rho = np.asarray(self.initial_state, dtype=complex)
        object.__setattr__(self, "initial_state", rho)
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise ValidationError(
                f"initial state must have unit trace (got {np.trace(rho).real:.12f})"
            )
        if np.linalg.norm(rho - rho.conj().T) > 1e-10:
            raise ValidationError("initial state must be Hermitian")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ValidationError("initial state must be positive semidefinite")


@dataclass(frozen=True)
class ZenoErrorCurve:
    """Sampled Zeno error versus n, with a log-log slope fit.

    samples hold (n, trace-norm error); excluded_samples lists any n whose
    error was exactly zero (log-fit cannot use them).  fitted_slope and its
    confidence half-width come from ordinary least squares over fit_window.
    """

    samples: tuple
    fitted_slope: float
    slope_half_width: float
    fit_window: tuple
    excluded_samples: tuple = field(default_factory=tuple)

    def to_rows(self):
        return [(int(n), float(e)) for n, e in self.samples]


def fit_loglog_slope(samples, curvature_tol=CURVATURE_TOL, min_points=4):
    """OLS slope of log(error) against log(n) over the flattest window.

    Scans trailing windows and keeps the largest one whose quadratic
    curvature coefficient stays below curvature_tol; returns
    (slope, half_width, (n_lo, n_hi)).  Needs at least min_points usable
    samples, else returns (nan, nan, None).
    """
    usable = [(n, e) for n, e in samples if e > 0]
    if len(usable) < min_points:
        return float("nan"), float("nan"), None
    log_n = np.log([n for n, _ in usable])
    log_e = np.log([e for _, e in usable])
    best = None
    for start in range(0, len(usable) - min_points + 1):
        x = log_n[start:]
        y = log_e[start:]
        quad = np.polyfit(x, y, 2)
        if abs(quad[0]) < curvature_tol or start == len(usable) - min_points:
            coeffs, cov = np.polyfit(x, y, 1, cov=True)
            half_width = float(np.sqrt(cov[0, 0]))
            best = (float(coeffs[0]), half_width, (usable[start][0], usable[-1][0]))
            break
    return best


def zeno_product_apply(m, l_super, t, n, x, diagnostics=None):
    """Apply the Zeno product (M e^{tL/n})^n to a matrix x.

    Evaluated by n alternating applications of the two factors with a
    single matrix exponential, never by powering the composite; when a
    dict is passed as diagnostics it receives the trace and positivity
    drift of the final state.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if t < 0:
        raise ValidationError("t must be >= 0")
    m_matrix = _as_matrix(m)
    l_matrix = _as_matrix(l_super)
    d = int(round(np.sqrt(m_matrix.shape[0])))
    step = mat_exp((t / n) * l_matrix)
    v = vec(np.asarray(x, dtype=complex))
    for _ in range(n):
        v = m_matrix @ (step @ v)
    out = unvec(v, d)
    if diagnostics is not None:
        tr0 = complex(np.trace(np.asarray(x, dtype=complex)))
        tr1 = complex(np.trace(out))
        diagnostics["trace_drift"] = abs(tr1 - tr0)
        diagnostics["trace_decrease"] = max(0.0, tr0.real - tr1.real)
        herm = (out + out.conj().T) / 2
        diagnostics["negativity"] = max(0.0, -float(np.linalg.eigvalsh(herm).min()))
    return out


def zeno_limit_theorem1(m, l_super, t, report):
    """The n-indexed Zeno limit family for an admissible contraction.

    Returns a callable n -> Superoperator evaluating
    sum_j e^{t P_j L P_j} lambda_j^n P_j, plus (as .composed_form) the
    equivalent expression e^{t sum_j P_j L P_j} M^n used for cross-checks.
    """
    if not isinstance(report, PeripheralReport):
        raise TypeError("report must come from peripheral_analysis")
    if not report.admissible:
        raise AdmissibilityError(
            "theorem-1 limit needs an admissible contraction "
            f"(gap {report.gap_delta:.4f}, max quasi-nilpotent "
            f"{max(report.quasi_nilpotent_norms, default=0.0):.2e})"
        )
    m_matrix = _as_matrix(m)
    l_matrix = _as_matrix(l_super)
    d = m_matrix.shape[0]
    dim = m.dim if isinstance(m, Superoperator) else int(round(np.sqrt(d)))

    blocks = []
    effective_sum = np.zeros((d, d), dtype=complex)
    for (lam, _), proj in zip(report.peripheral_eigs, report.projectors):
        p = _as_matrix(proj)
        plp = p @ l_matrix @ p
        blocks.append((lam, mat_exp(t * plp), p))
        effective_sum += plp
    composed_pre = mat_exp(t * effective_sum)

    def family(n):
        total = np.zeros((d, d), dtype=complex)
        for lam, ex, p in blocks:
            total += (lam**n) * (ex @ p)
        return Superoperator(total, dim)

    def composed_form(n):
        return Superoperator(composed_pre @ np.linalg.matrix_power(m_matrix, n), dim)

    family.composed_form = composed_form
    family.report = report
    return family


def zeno_limit_strong(m, p, l_super, t, test_states=None):
    """Strong-limit object e^{tPLP} P for a power-convergent contraction.

    When test_states are given, the premise M^n x -> P x is verified on
    them first (residual at n = 512 below 1e-6), raising EstimationError
    otherwise.
    """
    m_matrix = _as_matrix(m)
    p_matrix = _as_matrix(p)
    l_matrix = _as_matrix(l_super)
    d = p_matrix.shape[0]
    dim = p.dim if isinstance(p, Superoperator) else int(round(np.sqrt(d)))
    idem = spectral_norm(p_matrix @ p_matrix - p_matrix)
    if idem > 1e-8:
        raise ValidationError(f"P is not idempotent (defect {idem:.3e})")
    if test_states is not None:
        n_check = 512
        power = np.linalg.matrix_power(m_matrix, n_check)
        sdim = int(round(np.sqrt(d)))
        for x in test_states:
            r = trace_norm(unvec((power - p_matrix) @ vec(np.asarray(x, complex)), sdim))
            if r > 1e-6:
                raise EstimationError(
                    f"M^n does not converge to P on a test state "
                    f"(residual {r:.3e} at n = {n_check})"
                )
    plp = p_matrix @ l_matrix @ p_matrix
    return Superoperator(mat_exp(t * plp) @ p_matrix, dim)


def _curve_from_errors(samples, excluded):
    fit = fit_loglog_slope(samples)
    if fit is None or fit[2] is None:
        return ZenoErrorCurve(
            samples=tuple(samples),
            fitted_slope=float("nan"),
            slope_half_width=float("nan"),
            fit_window=(),
            excluded_samples=tuple(excluded),
        )
    slope, half_width, window = fit
    return ZenoErrorCurve(
        samples=tuple(samples),
        fitted_slope=slope,
        slope_half_width=half_width,
        fit_window=window,
        excluded_samples=tuple(excluded),
    )


def zeno_error_curve(cfg, report=None, limit_projector=None):
    """Zeno error against the configured limit object over cfg.n_grid.

    Per n: error = || (M e^{tL/n})^n rho0  -  limit_n rho0 ||_1.  The
    theorem-1 and theorem3_yosida modes need an admissible peripheral
    report (computed here when not supplied); theorem2 needs the strong
    limit projector P (estimated from the peripheral analysis when the
    peripheral spectrum is exactly {1}).
    """
    m, l_super, t = cfg.channel, cfg.generator, cfg.total_time
    rho0 = cfg.initial_state
    if cfg.limit_mode in ("theorem1", "theorem3_yosida"):
        if report is None:
            report = peripheral_analysis(m)
        if cfg.limit_mode == "theorem1":
            family = zeno_limit_theorem1(m, l_super, t, report)
            limits = {n: family(n) for n in cfg.n_grid}
        else:
            limits = {
                n: _theorem3_limit(m, l_super, t, n, cfg.beta, report)
                for n in cfg.n_grid
            }
    else:
        if limit_projector is None:
            if report is None:
                report = peripheral_analysis(m)
            if report.cluster_count != 1 or abs(report.peripheral_eigs[0][0] - 1) > 1e-6:
                raise EstimationError(
                    "theorem2 mode needs a single peripheral eigenvalue 1 "
                    "or an explicit limit_projector"
                )
            limit_projector = report.projectors[0]
        strong = zeno_limit_strong(m, limit_projector, l_super, t)
        limits = {n: strong for n in cfg.n_grid}

    samples = []
    excluded = []
    for n in cfg.n_grid:
        approx = zeno_product_apply(m, l_super, t, n, rho0)
        target = limits[n].apply(rho0)
        err = float(trace_norm(approx - target))
        if err == 0.0:
            excluded.append(n)
        samples.append((n, err))
    return _curve_from_errors(samples, excluded)


def _theorem3_limit(m, l_super, t, n, beta, report):
    """Peripheral sum with L replaced by its Yosida approximant at k = ceil(n^beta)."""
    k = max(1, math.ceil(n**beta))
    l_k, _ = yosida(l_super, k)
    family = zeno_limit_theorem1(m, l_k, t, report)
    return family(n)


def zeno_theorem3_yosida(cfg, report=None):
    """Error curve for the Yosida-regularized limit family (k = ceil(n^beta))."""
    if cfg.limit_mode != "theorem3_yosida":
        raise ValidationError("config limit_mode must be theorem3_yosida")
    return zeno_error_curve(cfg, report=report)


def theorem1_bound_check(m, l_super, t, rho0, fit_n, test_ns, report=None):
    """Fit the theorem-1 constant at one n and test the bound at larger n.

    The bound is error <= C_hat (||L|| n^{-2/3} + ||L||^2 / n + dtilde^{n+1})
    with ||L|| the spectral-norm proxy and dtilde = gap + 0.05.  Returns a
    dict with the fitted constant, per-n margins, and a pass flag.
    """
    if report is None:
        report = peripheral_analysis(m)
    family = zeno_limit_theorem1(m, l_super, t, report)
    l_norm = spectral_norm(_as_matrix(l_super))
    dt = delta_tilde(report.gap_delta)

    def envelope(n):
        return l_norm * n ** (-2.0 / 3.0) + l_norm**2 / n + dt ** (n + 1)

    def error_at(n):
        approx = zeno_product_apply(m, l_super, t, n, rho0)
        return float(trace_norm(approx - family(n).apply(rho0)))

    c_hat = error_at(fit_n) / envelope(fit_n)
    rows = []
    ok = True
    for n in test_ns:
        err = error_at(n)
        bound = c_hat * envelope(n)
        rows.append({"n": n, "error": err, "bound": bound})
        if err > bound * (1 + 1e-9):
            ok = False
    return {"c_hat": c_hat, "delta_tilde": dt, "rows": rows, "ok": ok}


def chernoff_check(k_super, x, n_list):
    """Chernoff-style comparison of K^n with e^{n(K-1)} on one matrix.

    Verifies ||K^n x - e^{n(K-1)} x||_1 <= 2 n^{1/3} ||(K-1)x||_1 per n and
    reports the max ratio (trivially 0/0 -> 0 when x is a fixed point).
    """
    k_matrix = _as_matrix(k_super)
    d = int(round(np.sqrt(k_matrix.shape[0])))
    x = np.asarray(x, dtype=complex)
    v = vec(x)
    defect = trace_norm(unvec(k_matrix @ v - v, d))
    rows = []
    max_ratio = 0.0
    for n in n_list:
        lhs = trace_norm(
            unvec(
                np.linalg.matrix_power(k_matrix, n) @ v
                - mat_exp(n * (k_matrix - np.eye(k_matrix.shape[0]))) @ v,
                d,
            )
        )
        rhs = 2.0 * n ** (1.0 / 3.0) * defect
        ratio = 0.0 if rhs == 0.0 and lhs == 0.0 else (lhs / rhs if rhs > 0 else np.inf)
        rows.append({"n": int(n), "lhs": float(lhs), "rhs": float(rhs), "ratio": float(ratio)})
        max_ratio = max(max_ratio, ratio)
    return {"max_ratio": float(max_ratio), "rows": rows, "ok": max_ratio <= 1.0}


def simplex_count(n, k, counts):
    """Number of index tuples 1 <= i_1 <= ... in the constrained k-simplex.

    counts = (N_1, ..., N_k, N_{k+1}) gives the minimum gaps: tuples
    (i_1, ..., i_k) with i_1 >= N_1, i_{j+1} - i_j >= N_{j+1} for j < k and
    i_k <= n - N_{k+1}.  Closed form: C(m + k, k) with
    m = n - N_{k+1} - sum_{j<=k} N_j.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    counts = [int(c) for c in counts]
    if len(counts) != k + 1:
        raise ValidationError(f"need k+1 = {k + 1} counts, got {len(counts)}")
    m = n - counts[k] - sum(counts[:k])
    if m < 0:
        return 0
    return math.comb(m + k, k)


def simplex_count_bruteforce(n, k, counts):
    """Direct enumeration of the constrained simplex (small n only)."""
    counts = [int(c) for c in counts]
    total = 0
    stack = [(0, 0)]  # (depth, previous index)
    while stack:
        depth, prev = stack.pop()
        if depth == k:
            total += 1
            continue
        lo = prev + counts[depth] if depth > 0 else counts[0]
        hi = n - counts[k] - sum(counts[depth + 1 : k])
        for i in range(lo, hi + 1):
            stack.append((depth + 1, i))
    return total


def dyadic_counterexample(t, n_grid, terms=40):
    """Scalar Zeno amplitudes of the dyadic-phase counterexample.

    v_n = (sum_{k=1}^{terms} 2^{-k} e^{i t 2^k / n})^n.  Returns the list of
    (n, v_n) plus an oscillation diagnostic over the last 10 samples of
    |v_n| and arg v_n — a non-settling witness when the grid is dyadic.
    """
    if terms < 10:
        raise ValidationError("terms must be >= 10")
    ks = np.arange(1, terms + 1)
    rows = []
    for n in n_grid:
        base = np.sum(2.0 ** (-ks) * np.exp(1j * t * 2.0**ks / n))
        v = complex(base**n)
        rows.append((int(n), v))
    tail = [abs(v) for _, v in rows[-10:]]
    diag = {
        "modulus_oscillation": float(max(tail) - min(tail)) if tail else 0.0,
        "arg_oscillation": float(
            max(np.angle(v) for _, v in rows[-10:]) - min(np.angle(v) for _, v in rows[-10:])
        )
        if rows
        else 0.0,
    }
    return rows, diag


def survival_probability_decomposition(pi, l_super, t, n):
    """Leakage term of the projective-measurement survival decomposition.

    For M(rho) = pi rho pi the survival probability after n steps splits
    into the Zeno product term and the one-escape correction
    p'_n = tr(((1-P) e^{tL/n})^{n-1} P e^{tL/n} rho), which is O(1/n).
    Returns p'_n for rho = pi / tr(pi).
    """
    pi = np.asarray(pi, dtype=complex)
    d = pi.shape[0]
    from .linalg import kron_sandwich

    p_super = kron_sandwich(pi, pi)
    q_super = np.eye(d * d) - p_super
    l_matrix = _as_matrix(l_super)
    step = mat_exp((t / n) * l_matrix)
    rho = pi / np.trace(pi)
    v = p_super @ (step @ vec(rho))
    for _ in range(n - 1):
        v = q_super @ (step @ v)
    return float(np.real(np.trace(unvec(v, d))))


def random_cptp(d, rng, env_dim=None):
    """Random CPTP map from a Haar-ish Stinespring isometry."""
    env = env_dim or d
    g = rng.normal(size=(d * env, d)) + 1j * rng.normal(size=(d * env, d))
    q, _ = np.linalg.qr(g)
    kraus = [q[l * d : (l + 1) * d, :] for l in range(env)]
    from .semigroup import Superoperator as S

    total = sum(np.kron(k.conj(), k) for k in kraus)
    return S(total, d)


def random_gkls(d, rng, strength=1.0, lindblad_count=2):
    """Random GKLS generator with Gaussian Hamiltonian and jump operators."""
    from .semigroup import GklsGenerator, lindbladian

    h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = strength * (h + h.conj().T) / 2
    ls = [
        strength * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
        for _ in range(lindblad_count)
    ]
    return lindbladian(GklsGenerator(d, h, ls))


def random_contraction(d, rng):
    """Random contraction on C^d: Gaussian matrix with singular values clipped to 1."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    u, s, vh = np.linalg.svd(g)
    return u @ np.diag(np.minimum(s, 1.0)) @ vh


def random_admissible_pair(d, rng, mix=0.8, max_gap=0.3, strength=0.1):
    """Random (channel, generator) pair with an admissible channel.

    A random CPTP map is mixed with the rank-one projector onto its own
    fixed point, which pushes every defective peripheral structure into
    the bulk; pairs failing the admissibility classification or exceeding
    max_gap are resampled.  Keeping the gap small and the generator mild
    keeps the error envelope in its power-law regime on moderate grids.
    """
    for _ in range(64):
        base = random_cptp(d, rng)
        w, v = np.linalg.eig(base.matrix)
        idx = int(np.argmin(np.abs(w - 1.0)))
        sigma = unvec(v[:, idx], d)
        sigma = (sigma + sigma.conj().T) / 2
        tr = np.trace(sigma).real
        if abs(tr) < 1e-8:
            continue
        sigma = sigma / tr
        if np.linalg.eigvalsh(sigma).min() < -1e-10:
            continue
        fixed = np.outer(vec(sigma), vec(np.eye(d)).conj())
        m = Superoperator((1 - mix) * base.matrix + mix * fixed, d)
        report = peripheral_analysis(m)
        if report.admissible and report.gap_delta <= max_gap:
            l_super = random_gkls(d, rng, strength=strength)
            return m, l_super, report
    raise EstimationError("failed to sample an admissible channel in 64 attempts")
