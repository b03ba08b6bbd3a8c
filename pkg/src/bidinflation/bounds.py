"""Closed-form revenue bounds and grid verifiers for the two improvement theorems.

All "for every q* (and beta)" statements are checked on explicit grids; nothing
here is a symbolic proof.  Lower bounds are fractions of the peak revenue
``R*`` unless a function takes ``r_star`` explicitly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from bidinflation import revenue as rev
from bidinflation.curves import RevenueCurve
from bidinflation.quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate


class VerificationError(AssertionError):
    """A bound or case constant fails at a grid point."""


class HypothesisError(ValueError):
    """Inputs lie outside a lemma's hypothesis."""


# -- single-expression bounds ------------------------------------------------


def bk_ratio(n: int) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    return (n - 1) / n


def spanloss_gap(q_star: float, r_star: float, n: int) -> float:
    """Upper bound on ``OPT - SPA`` revenue."""
    return r_star * (1.0 - q_star) ** (n - 1)


def spa_ratio_lb(q_star: float, n: int, with_flag: bool = False):
    """Lower bound on SPA/OPT given the monopoly quantile.

    At ``q_star = 0`` returns the limit ``(n-1)/n``; ``with_flag`` also returns
    whether the limit was used.
    """
    if not 0.0 <= q_star <= 1.0:
        raise ValueError("q_star outside [0, 1]")
    if q_star == 0.0:
        out = (n - 1) / n
        return (out, True) if with_flag else out
    # expm1/log1p keep accuracy for tiny q_star
    a = -math.expm1((n - 1) * math.log1p(-q_star)) if q_star < 1 else 1.0
    b = -math.expm1(n * math.log1p(-q_star)) if q_star < 1 else 1.0
    out = a / b
    return (out, False) if with_flag else out


def _require_below_inv_n(q_star, n):
    if not 0.0 <= q_star < 1.0 / n:
        raise HypothesisError(f"q_star={q_star!r} not in [0, 1/{n})")


def inflated_tail_integral(q_star: float, n: int, delta: float,
                           cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``integral_{q*}^1 (1-q)^(n-1) / (1+delta q)^n dq`` by quadrature."""
    return integrate(lambda q: (1.0 - q) ** (n - 1) / (1.0 + delta * q) ** n,
                     q_star, 1.0, (), cfg)


def inflated_tail_integral_closed(q_star: float) -> float:
    """Closed form of the tail integral for ``n = 2, delta = 1``."""
    return 2.0 / (q_star + 1.0) + math.log((q_star + 1.0) / 2.0) - 1.0


def inflated_spa_rev_lb(q_star: float, r_star: float, n: int, delta: float,
                        cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Lower bound on delta-inflated SPA revenue for ``q_star < 1/n``."""
    _require_below_inv_n(q_star, n)
    integral = inflated_tail_integral(q_star, n, delta, cfg)
    if n == 2 and delta == 1.0:
        closed = inflated_tail_integral_closed(q_star)
        if abs(closed - integral) > 1e-10:
            raise rev.IntegrationMismatch(
                f"tail integral {integral!r} vs closed form {closed!r} at q*={q_star!r}")
    d = delta
    bracket = ((1.0 - (1.0 + d) * q_star) ** (n - 1)
               - (1.0 - (1.0 + d) * q_star / (1.0 + d * q_star)) ** (n - 1)
               + (n - 1) * (1.0 + d) / (1.0 - q_star) * integral)
    return n * r_star * bracket


def delta1_ratio_lb(q_star: float, n: int) -> float:
    """Weaker closed-form ratio bound for the 1-inflated SPA, ``q_star < 1/n``."""
    _require_below_inv_n(q_star, n)
    q = q_star
    return ((1.0 - 2.0 * q) ** (n - 1)
            - (1.0 - 2.0 * q / (1.0 + q)) ** (n - 1)
            + (n - 1) * (1.0 - q) ** (n - 1) / (n * (1.0 + q) ** n)
            + (n - 1) / (n * (1.0 - q))
            * ((1.0 - 1.0 / n ** 2) ** (-n) - (1.0 - q * q) ** (-n))
            * (1.0 - 1.0 / n) ** (2 * n))


def composite_mixed_ratio_lb(q_star: float, n: int, epsilon: float, delta: float,
                             cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Ratio bound for the (epsilon, delta)-inflated SPA, using ``OPT <= n R*``.

    The inflated branch contributes at least zero revenue, so a negative
    bound for it is replaced by 0.
    """
    inflated = max(0.0, inflated_spa_rev_lb(q_star, 1.0, n, delta, cfg) / n)
    return (1.0 - epsilon) * spa_ratio_lb(q_star, n) + epsilon * inflated


def blowsample_ratio_lb(q_star: float) -> float:
    """Ratio bound for posting twice the sample, ``q_star in [0, 1/2]``."""
    if not 0.0 <= q_star <= 0.5:
        raise HypothesisError(f"q_star={q_star!r} not in [0, 1/2]")
    q = q_star
    return -2.0 * q + 2.0 * q / (1.0 + q) + 2.0 / (1.0 - q) * inflated_tail_integral_closed(q)


def shade_rev_lb(q_star, beta, rho):
    """Revenue fraction of rho-shaded post-the-sample (vectorised)."""
    q, b = np.asarray(q_star, float), np.asarray(beta, float)
    out = (1.0 - rho) * ((q + 1.0) / 2.0 - b * q) + q * b * rho
    return float(out) if out.ndim == 0 else out


def pts_rev_lb(q_star, beta, rho):
    """Revenue fraction of plain post-the-sample (vectorised)."""
    out = 0.5 * (1.0 + np.asarray(q_star, float) * rho * np.asarray(beta, float))
    return float(out) if out.ndim == 0 else out


def _blowsample_array(q):
    return (-2.0 * q + 2.0 * q / (1.0 + q)
            + 2.0 / (1.0 - q) * (2.0 / (q + 1.0) + np.log((q + 1.0) / 2.0) - 1.0))


def shade_beta(curve: RevenueCurve, rho: float) -> float:
    """Fraction of ``R*`` earned by posting ``v*/(1-rho)``."""
    _, vs, rs = curve.monopoly
    return curve.posting_revenue(vs / (1.0 - rho)) / rs


# -- curve-level checks -------------------------------------------------------


@dataclass
class BoundReport:
    name: str
    inputs: dict
    bound: float
    exact: float | None = None
    kind: str = "lower"  # "lower": bound <= exact; "upper": exact <= bound
    tol: float = 1e-8
    sound: bool | None = None

    def __post_init__(self):
        if self.exact is not None and self.sound is None:
            if self.kind == "lower":
                self.sound = self.bound <= self.exact + self.tol
            else:
                self.sound = self.exact <= self.bound + self.tol

    def to_dict(self):
        return asdict(self)


def quant_bound_check(curve: RevenueCurve, delta: float, grid=1001, tol: float = 1e-10):
    """Violations of the two quantile bounds for values a factor ``1+delta`` apart.

    ``grid`` is either a point count for a uniform grid on ``[0, 1]`` or an
    explicit array of quantiles.  Returns a list of ``(which, q, lhs, rhs)``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    qs, vs, _ = curve.monopoly
    out = []
    lhs = curve.quantile_of(vs / (1.0 + delta))
    if lhs > (1.0 + delta) * qs + tol:
        out.append((1, qs, lhs, (1.0 + delta) * qs))
    q = np.linspace(0.0, 1.0, grid) if np.isscalar(grid) else np.asarray(grid, float)
    q = q[(q >= qs) & (q > 0.0)]
    lhs = curve.quantile_of(curve.value_at(q) / (1.0 + delta))
    rhs = (1.0 + delta) * q / (1.0 + delta * q)
    for i in np.nonzero(lhs < rhs - tol)[0]:
        out.append((2, float(q[i]), float(lhs[i]), float(rhs[i])))
    return out


def curve_bound_reports(curve: RevenueCurve, n: int = 2, deltas=(1.0,), rho: float = 0.01,
                        cfg: QuadratureConfig = DEFAULT_CONFIG, tol: float = 1e-8):
    """Every applicable lower/upper bound for ``curve`` against exact revenues."""
    qs, _, rs = curve.monopoly
    reports = []
    opt = rev.optimal_revenue(curve, n, cfg)
    spa = rev.spa_revenue(curve, n, cfg)
    base = {"q_star": qs, "r_star": rs, "n": n}
    reports.append(BoundReport("spanloss_gap", base, spanloss_gap(qs, rs, n),
                               opt - spa, kind="upper", tol=tol))
    reports.append(BoundReport("spa_ratio_lb", base, spa_ratio_lb(qs, n),
                               rev.ratio(spa, opt), tol=tol))
    reports.append(BoundReport("bk_ratio", {"n": n}, bk_ratio(n), rev.ratio(spa, opt), tol=tol))
    if qs < 1.0 / n:
        for d in deltas:
            exact = rev.inflated_spa_revenue(curve, n, d, cfg)
            reports.append(BoundReport("inflated_spa_rev_lb", {**base, "delta": d},
                                       inflated_spa_rev_lb(qs, rs, n, d, cfg), exact, tol=tol))
            if d == 1.0:
                reports.append(BoundReport("delta1_ratio_lb", base, delta1_ratio_lb(qs, n),
                                           rev.ratio(exact, opt), tol=tol))
    beta = shade_beta(curve, rho)
    one = {"q_star": qs, "r_star": rs}
    if qs <= 0.5:
        reports.append(BoundReport("blowsample_ratio_lb", one, blowsample_ratio_lb(qs) * rs,
                                   rev.pts_revenue(curve, 2.0, cfg), tol=tol))
    sb = {**one, "beta": beta, "rho": rho}
    reports.append(BoundReport("shade_rev_lb", sb, shade_rev_lb(qs, beta, rho) * rs,
                               rev.pts_revenue(curve, 1.0 - rho, cfg), tol=tol))
    reports.append(BoundReport("pts_rev_lb", sb, pts_rev_lb(qs, beta, rho) * rs,
                               rev.pts_revenue(curve, 1.0, cfg), tol=tol))
    return reports


def bk_theorem_check(curve: RevenueCurve, n: int, cfg: QuadratureConfig = DEFAULT_CONFIG,
                     tol: float = 1e-9) -> bool:
    """SPA with one extra bidder earns at least the n-bidder optimum."""
    return rev.spa_revenue(curve, n + 1, cfg) >= rev.optimal_revenue(curve, n, cfg) - tol


# -- theorem verifiers ----------------------------------------------------------


@dataclass
class Theorem31Result:
    n: int
    epsilon: float
    delta: float
    r0: float
    q_bar: float
    gamma: float
    certified_margin: float
    worst_q_star: float
    composite_min: float

    def to_dict(self):
        return asdict(self)


def theorem31_verify(n: int, cfg: QuadratureConfig = DEFAULT_CONFIG,
                     grid_points: int = 10_000, bisect_iters: int = 60,
                     epsilon: float | None = None, delta: float = 1.0) -> Theorem31Result:
    """Certify that an (epsilon, delta)-inflated SPA beats ``(n-1)/n`` on every regular curve.

    With ``epsilon=None`` the mixture is built constructively (delta = 1):
    pick the q* range where the 1-inflated bound clears the midpoint between
    ``(n-1)/n`` and its q*=0 value, and weight the inflated branch by the SPA
    gain at the end of that range.  Otherwise the given pair is certified.
    The margin is the minimum over a q* grid on ``[0, 1/n)`` of the composite
    bound minus ``(n-1)/n``; above ``1/n`` the SPA branch alone is credited.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    base = bk_ratio(n)
    r0 = delta1_ratio_lb(0.0, n)
    if epsilon is not None:
        if not 0 <= epsilon <= 1:
            raise ValueError("epsilon must be a probability")
        return _certify_mixture(n, base, r0, float("nan"), float("nan"), float(epsilon),
                                float(delta), cfg, grid_points)
    if not r0 > base:
        raise VerificationError(f"q*=0 bound {r0!r} does not exceed {base!r}")
    target = 0.5 * (base + r0)
    # largest q_bar with delta1_ratio_lb >= target on [0, q_bar]
    lo, hi = 0.0, 1.0 / n
    probe = np.linspace(0.0, hi, 2001)[:-1]
    vals = np.array([delta1_ratio_lb(q, n) for q in probe])
    below = np.nonzero(vals < target)[0]
    if len(below):
        hi = float(probe[below[0]])
        lo = float(probe[below[0] - 1])
    else:
        lo = float(probe[-1])
    for _ in range(bisect_iters):
        mid = 0.5 * (lo + hi)
        if delta1_ratio_lb(mid, n) >= target:
            lo = mid
        else:
            hi = mid
    q_bar = lo
    gamma = spa_ratio_lb(q_bar, n) / base - 1.0
    if not gamma > 0:
        raise VerificationError(f"no SPA improvement at q_bar={q_bar!r}")
    epsilon = gamma / (2.0 * (1.0 + gamma))
    return _certify_mixture(n, base, r0, q_bar, gamma, epsilon, 1.0, cfg, grid_points)


def _certify_mixture(n, base, r0, q_bar, gamma, epsilon, delta, cfg, grid_points):
    grid = np.arange(grid_points) * ((1.0 / n) / grid_points)
    comp = np.array([composite_mixed_ratio_lb(float(q), n, epsilon, delta, cfg) for q in grid])
    i = int(np.argmin(comp))
    # q* >= 1/n: only the SPA branch is credited, and its bound increases in q*
    beyond = (1.0 - epsilon) * spa_ratio_lb(1.0 / n, n)
    margin = min(float(comp[i]), beyond) - base
    if not margin > 0:
        raise VerificationError(
            f"non-positive margin {margin!r} for n={n} at q*={float(grid[i])!r}")
    return Theorem31Result(n, epsilon, delta, r0, q_bar, gamma, margin,
                           float(grid[i]), float(comp[i]))


@dataclass(frozen=True)
class Theorem42Grid:
    q_step: float = 1e-4
    beta_step: float = 1e-3
    q_max: float = 0.5
    q_split: float = 0.02
    beta_split: float = 0.05
    case_a: float = 0.505
    case_b: float = 0.518
    case_c: float = 0.500005
    target_margin: float = 5e-9


@dataclass
class Theorem42Result:
    zeta: float
    rho: float
    epsilon: float
    delta: float
    case_a_min: float
    case_a_argmin: tuple
    case_b_min: float
    case_b_argmin: tuple
    case_c_min: float
    case_constant_margin: float
    certified_margin: float
    worst_point: tuple
    grid_points: int

    def to_dict(self):
        return asdict(self)


def theorem42_verify(zeta: float = 0.8e-6, rho: float = 0.01, epsilon: float = 0.2e-6,
                     delta: float = 1.0, grid: Theorem42Grid = Theorem42Grid()) -> Theorem42Result:
    """Reproduce the three-case analysis and certify the composed guarantee.

    The shaded/inflated mix is credited in the ratio ``zeta : epsilon``; the
    inflated bound is only available for ``delta = 1``.
    """
    if delta != 1.0:
        raise HypothesisError("the inflated post-the-sample bound needs delta = 1")
    if not rho < 0.5:
        raise HypothesisError("beta-monotonicity needs rho < 1/2")
    nq = int(round(grid.q_max / grid.q_step))
    nb = int(round(1.0 / grid.beta_step))
    q = np.arange(nq + 1) * grid.q_step
    b = np.arange(nb + 1) * grid.beta_step
    Q, B = np.meshgrid(q, b, indexing="ij")

    w = zeta + epsilon
    share = zeta / w
    shade = shade_rev_lb(Q, B, rho)
    blow = np.broadcast_to(_blowsample_array(q)[:, None], Q.shape)
    mix = share * shade + (1.0 - share) * blow
    pts = pts_rev_lb(Q, B, rho)

    in_a = Q <= grid.q_split + 1e-12
    in_b = B <= grid.beta_split + 1e-12
    in_c = ~in_a & ~in_b

    def region_min(values, mask):
        vals = np.where(mask, values, np.inf)
        k = np.unravel_index(int(np.argmin(vals)), vals.shape)
        return float(vals[k]), (float(Q[k]), float(B[k]))

    a_min, a_at = region_min(mix, in_a)
    b_min, b_at = region_min(mix, in_b)
    c_min, _ = region_min(pts, in_c)
    for label, got, need, at in (("A", a_min, grid.case_a, a_at), ("B", b_min, grid.case_b, b_at)):
        if got < need:
            raise VerificationError(f"case {label} bound {got!r} < {need} at (q*, beta)={at}")
    if c_min < grid.case_c - 1e-15:
        raise VerificationError(f"case C bound {c_min!r} < {grid.case_c}")

    # composed guarantee, written as excess over 1/2 to avoid cancellation;
    # plain post-the-sample is credited its case C bound there and 1/2 elsewhere
    excess = ((1.0 - w) * np.where(in_c, pts - 0.5, 0.0)
              + zeta * (np.maximum(shade, 0.0) - 0.5)
              + epsilon * (np.maximum(blow, 0.0) - 0.5))
    k = np.unravel_index(int(np.argmin(excess)), excess.shape)
    certified = float(excess[k])
    case_margin = min(w * (min(grid.case_a, grid.case_b) - 0.5),
                      (1.0 - w) * grid.case_c - 0.5)
    if certified < grid.target_margin:
        raise VerificationError(
            f"composed margin {certified!r} < {grid.target_margin} at {(float(Q[k]), float(B[k]))}")
    return Theorem42Result(zeta, rho, epsilon, delta, a_min, a_at, b_min, b_at, c_min,
                           case_margin, certified, (float(Q[k]), float(B[k])), int(Q.size))


def reports_to_jsonl(reports) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in reports)
