"""The alpha-regular typical position by damped fixed-point iteration, plus
random Gelfand number estimators and regularity reports.

The map F sends a diagonal determinant-one T to the diagonal map putting
[K, T^{-1} B_2]_theta into SAA ell-position; a fixed point T = F(T) makes
[T(K), B_2]_theta itself ell-positioned.  Iterates are averaged in log
space, T_{m+1} = T_m^{1-beta} F(T_m)^beta, which stays exactly on the
diagonal det-1 manifold; convergence is monitored by
||log T - log F(T)||_inf and divergent runs are reported, never hidden.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bodies as bd
from .gaussian import GaussianSample, ell, ell_star
from .interpolation import InterpolationPair, interpolate, phi, theta_of_alpha
from .positions import PositionMap, balance_scale, solve_ell_position
from .subspaces import haar_grassmannian_batch, section_out_radii

__all__ = [
    "FixedPointResult",
    "GelfandEstimate",
    "RegularityReport",
    "fixed_point_map",
    "find_regular_position",
    "balanced_interpolant_functionals",
    "ell_position_certificate",
    "section_radius_sample",
    "random_gelfand",
    "gelfand_upper",
    "regularity_report",
]


def _require_tractable_unconditional(K):
    form = K.as_weighted_lp()
    if form is None or not K.unconditional:
        raise ValueError("body must be a tractable unconditional family (weighted l_p / diagonal ellipsoid)")
    return form


def _interpolant_for(K_form, theta, log_t):
    pK, sK = K_form
    # T^{-1} B_2 is the diagonal ellipsoid ||t * x||_2 <= 1, i.e. scales t
    s_T = np.exp(log_t)
    pair = InterpolationPair(bd.WeightedLp(pK, sK), bd.WeightedLp(2.0, s_T), theta)
    return interpolate(pair)


def fixed_point_map(K, T: PositionMap, theta: float, sample: GaussianSample, *,
                    solver_tol: float = 1e-8, start=None, threads: int = 1) -> PositionMap:
    """F(T): the diagonal det-1 map putting [K, T^{-1} B_2]_theta in SAA ell-position."""
    form = _require_tractable_unconditional(K)
    if not T.diagonal:
        raise ValueError("T must be diagonal")
    Kth = _interpolant_for(form, theta, T.log_diag())
    res = solve_ell_position(
        Kth, sample, mode="diagonal", tol=solver_tol, start=start,
        threads=threads, compute_product=False,
    )
    return res.T


@dataclass
class FixedPointResult:
    T: PositionMap
    alpha: float
    theta: float
    residual: float
    iterations: int
    converged: bool
    balance: float
    body: bd.ConvexBody          # the position body a * T(K)
    sample: GaussianSample
    trace: list = field(default_factory=list)


def find_regular_position(
    K: bd.ConvexBody,
    alpha: float,
    *,
    sample: GaussianSample | None = None,
    seed: int = 0,
    samples: int = 20000,
    beta: float = 0.5,
    tol: float = 1e-5,
    max_iter: int = 200,
    solver_tol: float = 1e-8,
    threads: int = 1,
) -> FixedPointResult:
    """Damped iteration T_{m+1} = T_m^(1-beta) F(T_m)^beta on diagonal maps.

    On success [T(K), B_2]_theta is in SAA ell-position to solver tolerance,
    and the returned position body is a*T(K) with the balance scale a
    equalizing ell and ell* of the interpolant.
    """
    form = _require_tractable_unconditional(K)
    pK, sK = form
    theta = theta_of_alpha(alpha)
    if sample is None:
        sample = GaussianSample(seed, samples, K.dim)
    n = K.dim
    log_t = np.zeros(n)
    warm = None
    s_prev = None
    trace = []
    residual = np.inf
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        Kth = _interpolant_for(form, theta, log_t)
        s_now = np.log(Kth.scales)
        start = None if warm is None else warm - (s_now - s_prev)
        res = solve_ell_position(
            Kth, sample, mode="diagonal", tol=solver_tol, start=start,
            threads=threads, compute_product=False,
        )
        warm, s_prev = res.T._chart_solution, s_now
        f = np.log(np.diag(res.T.matrix))
        residual = float(np.abs(log_t - f).max())
        trace.append(residual)
        if residual <= tol:
            converged = True
            break
        log_t = (1.0 - beta) * log_t + beta * f
        log_t -= log_t.mean()

    T = PositionMap.from_diag(np.exp(log_t), normalize=True)
    TK = bd.WeightedLp(pK, sK / np.diag(T.matrix))
    a = balance_scale(TK, theta, sample, threads=threads)
    body = bd.WeightedLp(pK, TK.scales / a)
    return FixedPointResult(
        T=T, alpha=float(alpha), theta=theta, residual=residual,
        iterations=iterations, converged=converged, balance=a, body=body,
        sample=sample, trace=trace,
    )


def balanced_interpolant_functionals(result: FixedPointResult, *, threads: int = 1):
    """(ell, ell*, sqrt(2 n Phi(theta))) for the balanced interpolant
    [Kbar, B_2]_theta.

    The two functionals must agree within Monte Carlo error (that is what the
    balance scale enforces); the third value is the reference bound both are
    compared against, recorded only, since the SAA position is approximate.
    """
    n = result.body.dim
    Kth = interpolate(InterpolationPair(result.body, bd.WeightedLp(2.0, np.ones(n)), result.theta))
    l = ell(Kth, 1, result.sample, threads=threads)
    ls = ell_star(Kth, 1, result.sample, threads=threads)
    bound = float(np.sqrt(2.0 * n * phi(result.theta)))
    return l, ls, bound


def ell_position_certificate(result: FixedPointResult, K: bd.ConvexBody, *,
                             solver_tol: float = 1e-8, threads: int = 1) -> float:
    """||log T'||_inf for T' the SAA ell-position map of [T(K), B_2]_theta.

    Near a fixed point this re-solve must return (close to) the identity.
    """
    form = _require_tractable_unconditional(K)
    pK, sK = form
    t = np.diag(result.T.matrix)
    TK_form = (pK, sK / t)
    Kth = _interpolant_for(TK_form, result.theta, np.zeros(K.dim))
    res = solve_ell_position(Kth, result.sample, mode="diagonal", tol=solver_tol,
                             threads=threads, compute_product=False)
    return float(np.abs(np.log(np.diag(res.T.matrix))).max())


# ----------------------------------------------------------------------
# random Gelfand numbers
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class GelfandEstimate:
    value: float
    ci: tuple
    level: float
    clamped: bool
    k: int
    samples: int
    c: float


def section_radius_sample(K, k: int, samples: int, rng, *, starts=8, iters=50, probes=48):
    """R(K cap F) over Haar F in G_{n, n-k+1}: an (samples,) array."""
    n = K.dim
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    m = n - k + 1
    if m == n:
        return np.full(samples, K.radii.R)
    bases = haar_grassmannian_batch(rng, n, m, samples)
    sub = np.random.default_rng(rng.integers(2**63))
    return section_out_radii(K, bases, rng=sub, starts=starts, iters=iters, probes=probes)


def _upper_quantile(values, q):
    """Smallest R with #(values > R)/len <= q."""
    v = np.sort(values)
    s = v.size
    m = s - int(np.floor(q * s))
    return float(v[max(m - 1, 0)])


def random_gelfand(K, k: int, samples: int, c: float = 0.5, *, rng=None, seed=0,
                   bootstrap: int = 200, clamp: int = 10, values=None, **opts) -> GelfandEstimate:
    """Empirical quantile of R(K cap F) at level max(exp(-c k), clamp/samples),
    with a bootstrap confidence interval; clamping is recorded."""
    if samples < 100:
        raise ValueError("need at least 100 subspace samples")
    rng = np.random.default_rng(np.random.SeedSequence([seed, k])) if rng is None else rng
    if values is None:
        values = section_radius_sample(K, k, samples, rng, **opts)
    q_nominal = float(np.exp(-c * k))
    q = max(q_nominal, clamp / samples)
    cr = _upper_quantile(values, q)
    idx = rng.integers(0, samples, size=(bootstrap, samples))
    boots = np.sort(values[idx], axis=1)
    m = samples - int(np.floor(q * samples))
    stats = boots[:, max(m - 1, 0)]
    ci = (float(np.percentile(stats, 2.5)), float(np.percentile(stats, 97.5)))
    return GelfandEstimate(cr, ci, q, q > q_nominal, k, samples, c)


def gelfand_upper(K, k: int, samples: int, *, rng=None, seed=0, values=None, **opts) -> float:
    """min over sampled subspaces of R(K cap F): an upper bound on c_k, reported as a bound."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, k, 1])) if rng is None else rng
    if values is None:
        values = section_radius_sample(K, k, samples, rng, **opts)
    return float(values.min())


# ----------------------------------------------------------------------
# regularity report
# ----------------------------------------------------------------------


@dataclass
class RegularityReport:
    alpha: float
    c: float
    n: int
    k_grid: list
    cr: dict                 # {"body": [GelfandEstimate...], "polar": [...]}
    upper: dict              # {"body": [float...], "polar": [...]}
    slopes: dict             # least-squares exponent of log cr vs log(n/k)
    P_emp: float

    def cr_values(self, which):
        return np.array([g.value for g in self.cr[which]])


def default_k_grid(n: int):
    """Powers of two in [1, n/2]."""
    ks = []
    k = 1
    while k <= n // 2:
        ks.append(k)
        k *= 2
    return ks


def regularity_report(Kbar, alpha: float, k_grid=None, samples: int = 600,
                      c: float = 0.5, seed: int = 0, **opts) -> RegularityReport:
    """Per-k random Gelfand estimates for the position body and its polar,
    the fitted regularity exponent, and the measured constant
    P_emp = max_k k^alpha cr_k / n^alpha over both bodies."""
    n = Kbar.dim
    if k_grid is None:
        k_grid = default_k_grid(n)
    duo = {"body": Kbar, "polar": Kbar.polar()}
    cr = {name: [] for name in duo}
    upper = {name: [] for name in duo}
    for bi, (name, B) in enumerate(duo.items()):
        for k in k_grid:
            rng = np.random.default_rng(np.random.SeedSequence([seed, bi, int(k)]))
            values = section_radius_sample(B, int(k), samples, rng, **opts)
            cr[name].append(random_gelfand(B, int(k), samples, c, rng=rng, values=values))
            upper[name].append(float(values.min()))
    logs = np.log(np.asarray(k_grid, dtype=float) / n)
    slopes = {}
    for name in duo:
        y = np.log(np.array([g.value for g in cr[name]]))
        slopes[name] = float(np.polyfit(-logs, y, 1)[0])
    P_emp = max(
        (k / n) ** alpha * g.value
        for name in duo
        for k, g in zip(k_grid, cr[name])
    )
    return RegularityReport(
        alpha=float(alpha), c=float(c), n=n, k_grid=list(map(int, k_grid)),
        cr=cr, upper=upper, slopes=slopes, P_emp=float(P_emp),
    )
