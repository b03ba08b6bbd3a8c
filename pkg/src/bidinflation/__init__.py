"""Inflated second price auctions and randomized post-the-sample pricing.

Exact quantile-space revenue computation, Monte-Carlo oracles, and numerical
verification of the associated revenue guarantees.
"""

from bidinflation.curves import (
    CurveError,
    ExponentialCurve,
    PiecewiseLinearCurve,
    RevenueCurve,
    TriangleCurve,
    TruncatedEqualRevenueCurve,
    UniformCurve,
    check_concavity,
    curve_from_dict,
    parse_curve,
)

__all__ = [
    "CurveError",
    "ExponentialCurve",
    "PiecewiseLinearCurve",
    "RevenueCurve",
    "TriangleCurve",
    "TruncatedEqualRevenueCurve",
    "UniformCurve",
    "check_concavity",
    "curve_from_dict",
    "parse_curve",
]

__version__ = "0.1.0"
