"""Worst-case distributions for a mechanism and mixture-parameter tuning.

Triangle scans report *family* minima.  The piecewise-linear perturbation
search is a heuristic adversary; neither is a proof of a global worst case.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from bidinflation import bounds, report
from bidinflation import revenue as rev
from bidinflation.curves import CurveError, PiecewiseLinearCurve, TriangleCurve, check_concavity
from bidinflation.mechanisms import (
    SPA,
    InflatedSPA,
    MechanismSpec,
    MixedInflatedSPA,
    PostTheSample,
)
from bidinflation.quadrature import DEFAULT_CONFIG, QuadratureConfig


@dataclass(frozen=True)
class SearchConfig:
    q_step: float = 1e-3
    q_min: float = 0.0  # grid starts at the first positive multiple of q_step above q_min
    q_max: float = 1.0  # exclusive
    knots: int = 9
    iterations: int = 200
    seed: int = 0
    r_star: float = 1.0
    restarts: int = 1

    def __post_init__(self):
        if not self.q_step > 0:
            raise ValueError("q_step must be positive")
        if self.knots < 3:
            raise ValueError("need at least three knots")

    def q_grid(self):
        lo = int(np.floor(self.q_min / self.q_step + 1e-9)) + 1
        hi = int(np.ceil(self.q_max / self.q_step - 1e-9))
        return [round(i * self.q_step, 12) for i in range(lo, hi)]


@dataclass
class ScanResult:
    mechanism: dict
    n: int
    q_star: list
    ratio: list
    bounds: dict = field(default_factory=dict)  # bound name -> list aligned with q_star

    @property
    def min_ratio(self) -> float:
        return min(self.ratio)

    @property
    def argmin(self) -> float:
        return self.q_star[int(np.argmin(self.ratio))]

    def to_dict(self):
        return {"mechanism": self.mechanism, "n": self.n, "min_ratio": self.min_ratio,
                "argmin_q_star": self.argmin, "q_star": self.q_star, "ratio": self.ratio,
                "bounds": self.bounds}

    def rows(self):
        names = sorted(self.bounds)
        for i, q in enumerate(self.q_star):
            yield [q, self.ratio[i]] + [self.bounds[k][i] for k in names]

    def header(self):
        return ["q_star", "ratio"] + [f"bound_{k}" for k in sorted(self.bounds)]


def scan_to_csv(result: ScanResult) -> str:
    return report.to_csv(result.header(), result.rows())


def witness(spec: MechanismSpec, n: int, curve, claimed: float,
            qcfg: QuadratureConfig = DEFAULT_CONFIG, tol: float = 1e-8) -> float:
    """Re-evaluate a reported worst case from scratch; raise if it does not reproduce."""
    fresh = rev.mechanism_ratio(spec, curve, n, qcfg)
    if abs(fresh - claimed) > tol:
        raise ArithmeticError(f"witness {curve!r} gives {fresh!r}, reported {claimed!r}")
    return fresh


def _triangle_bounds(spec: MechanismSpec, n: int, q: float, cfg):
    """Paper bounds (as ratios) applicable to a triangle with apex at ``q``."""
    out = {}
    if isinstance(spec, SPA):
        out["spa_ratio_lb"] = bounds.spa_ratio_lb(q, n)
    elif isinstance(spec, InflatedSPA) and q < 1.0 / n:
        out["inflated_spa_rev_lb"] = bounds.inflated_spa_rev_lb(q, 1.0, n, spec.delta, cfg) / n
    elif isinstance(spec, MixedInflatedSPA) and q < 1.0 / n:
        out["composite_mixed_ratio_lb"] = bounds.composite_mixed_ratio_lb(
            q, n, spec.epsilon, spec.delta, cfg)
    elif isinstance(spec, PostTheSample):
        if spec.alpha == 1.0:
            out["pts_rev_lb"] = bounds.pts_rev_lb(q, 0.0, 0.01)
        elif spec.alpha == 2.0 and q <= 0.5:
            out["blowsample_ratio_lb"] = bounds.blowsample_ratio_lb(q)
    return out


def scan_triangles(spec: MechanismSpec, n: int, cfg: SearchConfig = SearchConfig(),
                   qcfg: QuadratureConfig = DEFAULT_CONFIG) -> ScanResult:
    """Exact ratio of ``spec`` on ``TriangleCurve(q*, r_star)`` over the q* grid."""
    qs, ratios, bnds = [], [], {}
    grid = cfg.q_grid()
    for q in grid:
        curve = TriangleCurve(q, cfg.r_star)
        ratios.append(rev.mechanism_ratio(spec, curve, n, qcfg))
        qs.append(q)
        for k, v in _triangle_bounds(spec, n, q, qcfg).items():
            bnds.setdefault(k, [None] * len(grid))[len(qs) - 1] = v
    return ScanResult(spec.to_dict(), n, qs, ratios, bnds)


# -- perturbation search over piecewise-linear curves ------------------------------


def concave_majorant(q, r):
    """Upper concave hull of the points ``(q_i, r_i)`` evaluated back at ``q``."""
    hull = []
    for p in zip(q, r):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) <= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    hq, hr = zip(*hull)
    return np.interp(q, hq, hr)


def _project(q, r, r_star):
    r = np.maximum(np.asarray(r, float), 0.0)
    r[0] = r[-1] = 0.0
    r = concave_majorant(q, r)
    peak = r.max()
    if not peak > 0:
        raise CurveError("projection collapsed the curve to zero")
    return r * (r_star / peak)


def _curve(q, r):
    return PiecewiseLinearCurve(list(zip(q.tolist(), r.tolist())))


def perturb_search(spec: MechanismSpec, n: int, start: PiecewiseLinearCurve,
                   cfg: SearchConfig = SearchConfig(),
                   qcfg: QuadratureConfig = DEFAULT_CONFIG):
    """Local search lowering the exact ratio by nudging knot revenues.

    Moves: one interior knot's revenue changes by ``+-step * R*``, then the
    knots are projected onto their concave majorant and rescaled to peak
    ``R*``.  A move is kept only if it strictly lowers the ratio.  The step
    halves after a sweep without improvement; each restart begins from the
    best curve so far with a random jitter.  Returns ``(curve, ratio)``.
    """
    q = np.array([k[0] for k in start.knots])
    r = np.array([k[1] for k in start.knots])
    best_curve = start
    best = rev.mechanism_ratio(spec, start, n, qcfg)
    if cfg.iterations <= 0 or len(q) < 3:
        return start, best
    r_star = float(r.max())
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    budget = cfg.iterations
    cur_r, cur = r.copy(), best
    for restart in range(max(1, cfg.restarts)):
        if restart:
            cur_r = np.array([k[1] for k in best_curve.knots])
            cur_r[1:-1] *= 1.0 + 0.1 * rng.uniform(-1, 1, len(cur_r) - 2)
            try:
                cur_r = _project(q, cur_r, r_star)
                cur = rev.mechanism_ratio(spec, _curve(q, cur_r), n, qcfg)
            except CurveError:
                continue
            budget -= 1
        step = 0.1
        while budget > 0 and step > 1e-6:
            improved = False
            for i in rng.permutation(np.arange(1, len(q) - 1)):
                for sign in (-1.0, 1.0):
                    if budget <= 0:
                        break
                    trial = cur_r.copy()
                    trial[i] += sign * step * r_star
                    budget -= 1
                    try:
                        trial = _project(q, trial, r_star)
                        val = rev.mechanism_ratio(spec, _curve(q, trial), n, qcfg)
                    except CurveError:
                        continue
                    if val < cur:
                        cur_r, cur, improved = trial, val, True
            if not improved:
                step *= 0.5
        if cur < best:
            best, best_curve = cur, _curve(q, cur_r)
    if check_concavity(best_curve, 1001):
        raise CurveError("search produced a non-concave curve")
    return best_curve, best


# -- mixture parameter optimisation ------------------------------------------------


@dataclass
class OptimizeResult:
    n: int
    epsilon: float
    delta: float
    worst_case_ratio: float
    worst_q_star: float
    grid: list  # rows of (epsilon, delta, worst ratio, argmin q*)

    def to_dict(self):
        return asdict(self)


def optimize_params(n: int, epsilon_grid, delta_grid, cfg: SearchConfig = SearchConfig(q_step=1e-2),
                    qcfg: QuadratureConfig = DEFAULT_CONFIG) -> OptimizeResult:
    """Maximise over the grids the triangle-family minimum of the mixed ratio.

    Ties keep the first pair in ``(delta, epsilon)`` grid order.
    """
    eps = [float(e) for e in epsilon_grid]
    deltas = [float(d) for d in delta_grid]
    if not eps or not deltas:
        raise ValueError("grids must be non-empty")
    qs = cfg.q_grid()
    curves = [TriangleCurve(q, cfg.r_star) for q in qs]
    opt = np.array([rev.optimal_revenue(c, n, qcfg) for c in curves])
    spa = np.array([rev.spa_revenue(c, n, qcfg) for c in curves]) / opt
    best = None
    table = []
    for d in deltas:
        inf = (np.array([rev.inflated_spa_revenue(c, n, d, qcfg) for c in curves]) / opt
               if any(e > 0 for e in eps) else np.zeros_like(spa))
        for e in eps:
            ratios = (1.0 - e) * spa + e * inf
            i = int(np.argmin(ratios))
            row = (e, d, float(ratios[i]), qs[i])
            table.append(row)
            if best is None or row[2] > best[2]:
                best = row
    return OptimizeResult(n, best[0], best[1], best[2], best[3], [list(r) for r in table])
