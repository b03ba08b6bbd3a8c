"""Fixed curve and (mechanism, curve) collections shared by verifiers and scripts."""

from __future__ import annotations

import numpy as np

from bidinflation.curves import (
    ExponentialCurve,
    PiecewiseLinearCurve,
    TriangleCurve,
    TruncatedEqualRevenueCurve,
    UniformCurve,
)
from bidinflation.mechanisms import (
    SPA,
    InflatedSPA,
    MixedInflatedSPA,
    PostTheSample,
    RandomizedPostTheSample,
    ReserveSPA,
)


def random_concave_curves(count=5, knots=7, seed=0):
    """Random concave piecewise-linear curves with peak 1.

    Slopes are sorted in decreasing order, then shifted so the curve returns
    to zero at ``q = 1``.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for _ in range(count):
        q = np.concatenate([[0.0], np.sort(rng.uniform(0.02, 0.98, knots - 2)), [1.0]])
        slopes = np.sort(rng.normal(0.0, 2.0, knots - 1))[::-1]
        slopes -= np.dot(slopes, np.diff(q))
        r = np.concatenate([[0.0], np.cumsum(slopes * np.diff(q))])
        r[-1] = 0.0
        r = np.maximum(r, 0.0)
        out.append(PiecewiseLinearCurve(list(zip(q.tolist(), (r / r.max()).tolist()))))
    return out


def triangle_grid(step=0.01):
    return [TriangleCurve(round(k * step, 12)) for k in range(1, int(round(1 / step)))]


def curve_matrix(triangle_step=0.05, random_count=5, seed=0):
    """Uniform, exponential, a truncated equal-revenue curve, triangles and random curves."""
    return ([UniformCurve(), ExponentialCurve(1.0), TruncatedEqualRevenueCurve(1.0, 4.0)]
            + triangle_grid(triangle_step) + random_concave_curves(random_count, seed=seed))


def oracle_matrix():
    """(mechanism, curve, n) cases for the Monte-Carlo cross-check."""
    pl = random_concave_curves(2, seed=11)
    ter = TruncatedEqualRevenueCurve(1.0, 4.0)
    return [
        (SPA(), UniformCurve(), 2),
        (SPA(), ExponentialCurve(1.0), 3),
        (SPA(), pl[0], 3),
        (ReserveSPA(0.5), UniformCurve(), 2),
        (ReserveSPA(4.0), ter, 2),
        (InflatedSPA(1.0), UniformCurve(), 2),
        (InflatedSPA(1.0), TriangleCurve(0.2), 2),
        (InflatedSPA(0.5), ExponentialCurve(1.0), 3),
        (MixedInflatedSPA(0.15, 1.0), TriangleCurve(0.1), 2),
        (MixedInflatedSPA(0.3, 2.0), ter, 4),
        (PostTheSample(1.0), UniformCurve(), 1),
        (PostTheSample(1.0), TriangleCurve(0.3), 1),
        (PostTheSample(2.0), ExponentialCurve(1.0), 1),
        (PostTheSample(0.99), TriangleCurve(0.02), 1),
        (RandomizedPostTheSample(0.5, 0.01, 0.5, 1.0), UniformCurve(), 1),
        (RandomizedPostTheSample(0.3, 0.2, 0.3, 1.0), pl[1], 1),
    ]
