"""Exact expected revenues in quantile space.

Every auction revenue is computed from the virtual-surplus identity
``n * integral R'(q) x(q) dq`` with ``x`` the interim allocation of a bidder
at quantile ``q``; SPA and the optimal auction additionally use the
integrated-by-parts form in ``R`` as a cross-check.  Post-the-sample
revenues integrate the posted-price revenue over the sample's quantile.

Curves with an unbounded value support are integrated on ``[eta, 1]``, with
``eta`` halved until a concavity bound on the dropped piece falls below
``abs_tol / 2``.
"""

from __future__ import annotations

import math

from bidinflation.curves import RevenueCurve
from bidinflation.mechanisms import (
    SPA,
    InflatedSPA,
    MechanismSpec,
    MixedInflatedSPA,
    PostTheSample,
    RandomizedPostTheSample,
    ReserveSPA,
)
from bidinflation.quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate


class IntegrationMismatch(ArithmeticError):
    """Two independent quadrature forms of the same revenue disagree."""


def _eta(curve: RevenueCurve, tail_bound, cfg: QuadratureConfig) -> float:
    if not curve.unbounded:
        return 0.0
    eta = 0.5 * curve.monopoly.quantile
    while tail_bound(eta) > 0.5 * cfg.abs_tol:
        eta *= 0.5
        if eta < 1e-300:
            raise ArithmeticError("cannot bound the integrand tail near q = 0")
    return eta


def _check(a: float, b: float, what: str, cfg: QuadratureConfig):
    if abs(a - b) > 10.0 * cfg.abs_tol:
        raise IntegrationMismatch(f"{what}: forms disagree ({a!r} vs {b!r})")


def _inside(points, lo=0.0, hi=1.0):
    return sorted({float(p) for p in points if lo < p < hi})


def interim_spa(q, n):
    return (1.0 - q) ** (n - 1)


def interim_inflated(curve: RevenueCurve, q, n, delta):
    """Win probability at quantile ``q``: every other value strictly below ``v(q)/(1+delta)``."""
    psi = curve.quantile_of(curve.value_at(q) / (1.0 + delta))
    return (1.0 - psi) ** (n - 1)


def spa_revenue(curve: RevenueCurve, n: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    if n < 2:
        raise ValueError("second price auction needs n >= 2")
    eta = _eta(curve, lambda e: n * (n - 1) * e * curve.revenue_at(e), cfg)
    by_parts = n * (n - 1) * integrate(
        lambda q: curve.revenue_at(q) * (1.0 - q) ** (n - 2), eta, 1.0, curve.kinks, cfg)
    eta = _eta(curve, lambda e: n * curve.revenue_at(e), cfg)
    direct = n * integrate(
        lambda q: curve.slope_at(q) * interim_spa(q, n), eta, 1.0, curve.kinks, cfg)
    _check(by_parts, direct, "spa_revenue", cfg)
    return by_parts


def optimal_revenue(curve: RevenueCurve, n: int, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Revenue of the second price auction with the monopoly reserve."""
    if n < 1:
        raise ValueError("n must be positive")
    qs, _, rs = curve.monopoly
    if n == 1:
        return rs
    splits = _inside(curve.kinks, 0.0, qs)
    eta = _eta(curve, lambda e: n * (n - 1) * e * curve.revenue_at(e), cfg)
    by_parts = n * (rs * (1.0 - qs) ** (n - 1) + (n - 1) * integrate(
        lambda q: curve.revenue_at(q) * (1.0 - q) ** (n - 2), eta, qs, splits, cfg))
    eta = _eta(curve, lambda e: n * curve.revenue_at(e), cfg)
    direct = n * integrate(
        lambda q: curve.slope_at(q) * interim_spa(q, n), eta, qs, splits, cfg)
    _check(by_parts, direct, "optimal_revenue", cfg)
    return by_parts


def reserve_spa_revenue(curve: RevenueCurve, n: int, reserve: float,
                        cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    if reserve > curve.top_value:
        return 0.0
    qr = curve.quantile_of(reserve)
    head = curve.posting_revenue(reserve) * (1.0 - qr) ** (n - 1)
    if n == 1 or qr == 0.0:
        return n * head
    eta = _eta(curve, lambda e: n * (n - 1) * e * curve.revenue_at(e), cfg)
    tail = integrate(lambda q: curve.revenue_at(q) * (1.0 - q) ** (n - 2),
                     eta, qr, _inside(curve.kinks, 0.0, qr), cfg)
    return n * (head + (n - 1) * tail)


def inflated_split_points(curve: RevenueCurve, delta: float):
    """Kinks of ``R'`` and the quantiles whose deflated value lands on a kink."""
    images = [curve.quantile_of((1.0 + delta) * curve.value_at(k)) for k in curve.kinks]
    return _inside(list(curve.kinks) + images)


def inflated_spa_revenue(curve: RevenueCurve, n: int, delta: float,
                         cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    if n < 2:
        raise ValueError("inflated second price auction needs n >= 2")
    if not delta >= 0:
        raise ValueError("delta must be non-negative")
    eta = _eta(curve, lambda e: n * curve.revenue_at(e), cfg)
    return n * integrate(
        lambda q: curve.slope_at(q) * interim_inflated(curve, q, n, delta),
        eta, 1.0, inflated_split_points(curve, delta), cfg)


def mixed_inflated_spa_revenue(curve: RevenueCurve, n: int, epsilon: float, delta: float,
                               cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must be a probability")
    spa = spa_revenue(curve, n, cfg) if epsilon < 1 else 0.0
    inflated = inflated_spa_revenue(curve, n, delta, cfg) if epsilon > 0 else 0.0
    return (1.0 - epsilon) * spa + epsilon * inflated


def posted_sample_revenue(curve: RevenueCurve, q, alpha):
    """Revenue from posting ``alpha * v(q)``; an indifferent buyer buys half the time."""
    p = alpha * curve.value_at(q)
    return p * 0.5 * (curve.quantile_of(p) + curve.quantile_above(p))


def pts_split_points(curve: RevenueCurve, alpha: float):
    images = [curve.quantile_of(curve.value_at(k) / alpha) for k in curve.kinks]
    return _inside(list(curve.kinks) + images)


def pts_revenue(curve: RevenueCurve, alpha: float,
                cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Single buyer, price ``alpha * s`` with ``s`` an independent draw from the curve."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    rs = curve.monopoly.revenue
    eta = _eta(curve, lambda e: e * rs, cfg)
    total = integrate(lambda q: posted_sample_revenue(curve, q, alpha),
                      eta, 1.0, pts_split_points(curve, alpha), cfg)
    if alpha == 1.0:
        area = integrate(curve.revenue_at, eta, 1.0, curve.kinks, cfg)
        _check(total, area, "pts_revenue area identity", cfg)
    return total


def randomized_pts_revenue(curve: RevenueCurve, zeta: float, rho: float, epsilon: float,
                           delta: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    spec = RandomizedPostTheSample(zeta, rho, epsilon, delta)
    return math.fsum(w * pts_revenue(curve, a, cfg) for w, a in spec.branches() if w > 0)


def expected_revenue(spec: MechanismSpec, curve: RevenueCurve, n: int,
                     cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Exact revenue of ``spec`` with ``n`` bidders (``n`` must be 1 for sample mechanisms)."""
    if spec.single_sample and n != 1:
        raise ValueError(f"{spec.kind} runs with exactly one bidder")
    if isinstance(spec, SPA):
        return spa_revenue(curve, n, cfg)
    if isinstance(spec, ReserveSPA):
        return reserve_spa_revenue(curve, n, spec.reserve, cfg)
    if isinstance(spec, InflatedSPA):
        return inflated_spa_revenue(curve, n, spec.delta, cfg)
    if isinstance(spec, MixedInflatedSPA):
        return mixed_inflated_spa_revenue(curve, n, spec.epsilon, spec.delta, cfg)
    if isinstance(spec, PostTheSample):
        return pts_revenue(curve, spec.alpha, cfg)
    if isinstance(spec, RandomizedPostTheSample):
        return randomized_pts_revenue(curve, spec.zeta, spec.rho, spec.epsilon, spec.delta, cfg)
    raise ValueError(f"unsupported mechanism {spec!r}")


def ratio(mech_revenue: float, opt_revenue: float) -> float:
    if not opt_revenue > 0:
        raise ValueError("optimal revenue must be positive")
    return mech_revenue / opt_revenue


def mechanism_ratio(spec: MechanismSpec, curve: RevenueCurve, n: int,
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    return ratio(expected_revenue(spec, curve, n, cfg), optimal_revenue(curve, n, cfg))
