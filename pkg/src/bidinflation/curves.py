"""Regular value distributions represented as concave revenue curves.

A distribution over a bidder's value is encoded by its revenue curve
``R(q) = q * v(q)`` on quantile space, where ``q`` is the probability that a
draw is at least ``v``.  Every curve admitted here is concave with
``R(0) = R(1) = 0``.

All evaluation methods accept scalars or numpy arrays and return the same
shape.  Curves are immutable.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

# relative tolerance used when deciding whether adjacent slopes differ
_SLOPE_TOL = 1e-12


class CurveError(ValueError):
    """Raised for curve parameters or knots that violate a curve invariant."""

    def __init__(self, message, index=None):
        if index is not None:
            message = f"knot {index}: {message}"
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class MonopolyPoint:
    quantile: float
    value: float
    revenue: float

    def __iter__(self):
        return iter((self.quantile, self.value, self.revenue))


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def _check_quantiles(q):
    if np.any(np.isnan(q)) or np.any(q < 0.0) or np.any(q > 1.0):
        raise ValueError("quantile outside [0, 1]")


class RevenueCurve(ABC):
    """Concave revenue curve with ``R(0) = R(1) = 0``.

    Subclasses implement the vectorised ``_revenue``, ``_value``, ``_quantile``
    and ``_slope`` hooks on already validated arrays, and set :attr:`kinks`,
    :attr:`top_value` and :attr:`atom_quantile`.

    ``top_value`` is the supremum of the value support (``inf`` when
    unbounded).  ``atom_quantile`` is the probability mass sitting exactly at
    ``top_value``; concavity with ``R(0) = 0`` only allows an atom at the top.
    """

    family: str = ""
    kinks: tuple = ()
    top_value: float = math.inf
    atom_quantile: float = 0.0

    @abstractmethod
    def _revenue(self, q): ...

    @abstractmethod
    def _value(self, q): ...

    @abstractmethod
    def _quantile(self, p): ...

    @abstractmethod
    def _slope(self, q, left): ...

    @abstractmethod
    def _monopoly(self) -> MonopolyPoint: ...

    @abstractmethod
    def scaled(self, c: float) -> "RevenueCurve":
        """Curve whose revenues (and values) are multiplied by ``c > 0``."""

    @abstractmethod
    def to_dict(self) -> dict: ...

    # -- queries -----------------------------------------------------------

    def revenue_at(self, q):
        q, scalar = _as_array(q)
        _check_quantiles(q)
        return _ret(self._revenue(q), scalar)

    def value_at(self, q):
        """``v(q) = R(q) / q``; at ``q = 0`` the right limit (``inf`` if unbounded)."""
        q, scalar = _as_array(q)
        _check_quantiles(q)
        return _ret(self._value(q), scalar)

    def quantile_of(self, p):
        """``Pr[V >= p]``, i.e. ``sup{q : v(q) >= p}``."""
        p, scalar = _as_array(p)
        if np.any(np.isnan(p)) or np.any(p < 0.0):
            raise ValueError("price must be non-negative")
        return _ret(self._quantile(p), scalar)

    def quantile_above(self, p):
        """``Pr[V > p]``; differs from :meth:`quantile_of` only at the top atom."""
        p, scalar = _as_array(p)
        if np.any(np.isnan(p)) or np.any(p < 0.0):
            raise ValueError("price must be non-negative")
        out = np.where(p >= self.top_value, 0.0, self._quantile(p))
        return _ret(out, scalar)

    def slope_at(self, q, side="right"):
        """One-sided derivative ``R'(q)`` (the virtual value)."""
        if side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        q, scalar = _as_array(q)
        _check_quantiles(q)
        if side == "left" and np.any(q == 0.0):
            raise ValueError("no left derivative at q = 0")
        if side == "right" and np.any(q == 1.0):
            raise ValueError("no right derivative at q = 1")
        return _ret(self._slope(q, side == "left"), scalar)

    @cached_property
    def monopoly(self) -> MonopolyPoint:
        return self._monopoly()

    def monopoly_point(self) -> MonopolyPoint:
        return self.monopoly

    def sample_value(self, u):
        """Inverse-quantile sampling: a uniform ``u`` maps to ``v(u)``."""
        return self.value_at(u)

    def posting_revenue(self, p):
        """Expected revenue of a take-it-or-leave-it price ``p`` to one buyer."""
        p, scalar = _as_array(p)
        return _ret(p * np.asarray(self.quantile_of(p)), scalar)

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.top_value)

    def __repr__(self):
        params = ", ".join(f"{k}={v!r}" for k, v in self.to_dict()["params"].items())
        return f"{type(self).__name__}({params})"


class TriangleCurve(RevenueCurve):
    """Piecewise-linear revenue curve with a single apex at ``(q*, R*)``.

    The left branch is an atom at ``v* = R*/q*`` of mass ``q*``; the right
    branch is the continuous part.  Triangles minimise the area under the
    curve for a given peak.
    """

    family = "triangle"

    def __init__(self, peak_quantile: float, peak_revenue: float = 1.0):
        if not 0.0 < peak_quantile < 1.0:
            raise CurveError("triangle peak_quantile must lie in (0, 1)")
        if not peak_revenue > 0.0:
            raise CurveError("triangle peak_revenue must be positive")
        self.peak_quantile = float(peak_quantile)
        self.peak_revenue = float(peak_revenue)
        self.kinks = (self.peak_quantile,)
        self.top_value = self.peak_revenue / self.peak_quantile
        self.atom_quantile = self.peak_quantile

    def _revenue(self, q):
        qs, rs = self.peak_quantile, self.peak_revenue
        return np.where(q <= qs, rs * q / qs, rs * (1.0 - q) / (1.0 - qs))

    def _value(self, q):
        qs, rs = self.peak_quantile, self.peak_revenue
        with np.errstate(divide="ignore", invalid="ignore"):
            right = rs * (1.0 - q) / ((1.0 - qs) * q)
        return np.where(q <= qs, rs / qs, right)

    def _quantile(self, p):
        qs, rs = self.peak_quantile, self.peak_revenue
        right = rs / (rs + p * (1.0 - qs))
        return np.where(p > self.top_value, 0.0, right)

    def _slope(self, q, left):
        qs, rs = self.peak_quantile, self.peak_revenue
        on_left = q <= qs if left else q < qs
        return np.where(on_left, rs / qs, -rs / (1.0 - qs))

    def _monopoly(self):
        return MonopolyPoint(self.peak_quantile, self.top_value, self.peak_revenue)

    def scaled(self, c):
        return TriangleCurve(self.peak_quantile, self.peak_revenue * c)

    def to_dict(self):
        return {"family": self.family,
                "params": {"peak_quantile": self.peak_quantile,
                           "peak_revenue": self.peak_revenue}}


class UniformCurve(RevenueCurve):
    """Uniform values on ``[low, high]``; ``low`` must be 0 so that ``R(1) = 0``."""

    family = "uniform"

    def __init__(self, low: float = 0.0, high: float = 1.0):
        if low != 0.0:
            raise CurveError("uniform low must be 0 (R(1) = low otherwise)")
        if not high > 0.0:
            raise CurveError("uniform high must be positive")
        self.low = 0.0
        self.high = float(high)
        self.top_value = self.high

    def _revenue(self, q):
        return self.high * q * (1.0 - q)

    def _value(self, q):
        return self.high * (1.0 - q)

    def _quantile(self, p):
        return np.clip(1.0 - p / self.high, 0.0, 1.0)

    def _slope(self, q, left):
        return self.high * (1.0 - 2.0 * q)

    def _monopoly(self):
        return MonopolyPoint(0.5, 0.5 * self.high, 0.25 * self.high)

    def scaled(self, c):
        return UniformCurve(0.0, self.high * c)

    def to_dict(self):
        return {"family": self.family, "params": {"low": self.low, "high": self.high}}


class ExponentialCurve(RevenueCurve):
    """Exponential values with the given rate: ``v(q) = -ln(q)/rate``."""

    family = "exponential"

    def __init__(self, rate: float = 1.0):
        if not rate > 0.0:
            raise CurveError("exponential rate must be positive")
        self.rate = float(rate)

    def _revenue(self, q):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = -q * np.log(q) / self.rate
        return np.where(q == 0.0, 0.0, r)

    def _value(self, q):
        with np.errstate(divide="ignore"):
            return -np.log(q) / self.rate

    def _quantile(self, p):
        return np.exp(-self.rate * p)

    def _slope(self, q, left):
        with np.errstate(divide="ignore"):
            return (-np.log(q) - 1.0) / self.rate

    def _monopoly(self):
        return MonopolyPoint(math.exp(-1.0), 1.0 / self.rate,
                             math.exp(-1.0) / self.rate)

    def scaled(self, c):
        return ExponentialCurve(self.rate / c)

    def to_dict(self):
        return {"family": self.family, "params": {"rate": self.rate}}


class TruncatedEqualRevenueCurve(RevenueCurve):
    """Equal-revenue plateau at height ``floor`` with values capped at ``cap``.

    ``R(q) = min(cap*q, floor, cap*(1 - q))``: an atom at ``cap`` of mass
    ``floor/cap``, the equal-revenue plateau, then a linear ramp down to
    ``R(1) = 0``.  Requires ``floor/cap <= 1/2``.
    """

    family = "truncated_equal_revenue"

    def __init__(self, floor: float = 1.0, cap: float = 4.0):
        if not floor > 0.0:
            raise CurveError("truncated_equal_revenue floor must be positive")
        if not cap >= 2.0 * floor:
            raise CurveError("truncated_equal_revenue needs cap >= 2*floor")
        self.floor = float(floor)
        self.cap = float(cap)
        q1 = self.floor / self.cap
        q2 = 1.0 - q1
        self._q1, self._q2 = q1, q2
        self.kinks = (q1,) if q1 == q2 else (q1, q2)
        self.top_value = self.cap
        self.atom_quantile = q1

    def _revenue(self, q):
        return np.minimum(np.minimum(self.cap * q, self.floor), self.cap * (1.0 - q))

    def _value(self, q):
        with np.errstate(divide="ignore", invalid="ignore"):
            mid = self.floor / q
            low = self.cap * (1.0 - q) / q
        return np.where(q <= self._q1, self.cap, np.where(q <= self._q2, mid, low))

    def _quantile(self, p):
        c, f = self.cap, self.floor
        with np.errstate(divide="ignore"):
            mid = f / p
        low = c / (c + p)
        out = np.where(p >= f / self._q2, mid, low)
        return np.where(p > c, 0.0, out)

    def _slope(self, q, left):
        if left:
            a, b = q <= self._q1, q <= self._q2
        else:
            a, b = q < self._q1, q < self._q2
        return np.where(a, self.cap, np.where(b, 0.0, -self.cap))

    def _monopoly(self):
        return MonopolyPoint(self._q1, self.cap, self.floor)

    def scaled(self, c):
        return TruncatedEqualRevenueCurve(self.floor * c, self.cap * c)

    def to_dict(self):
        return {"family": self.family, "params": {"floor": self.floor, "cap": self.cap}}


class PiecewiseLinearCurve(RevenueCurve):
    """Revenue curve interpolating ``knots = [(q, R), ...]`` linearly.

    The first knot must be ``(0, 0)`` and the last ``(1, 0)``.  With
    ``check=False`` concavity and non-negativity are not enforced, which is
    only useful for feeding :func:`check_concavity`.
    """

    family = "piecewise_linear"

    def __init__(self, knots, check: bool = True):
        pts = [tuple(map(float, k)) for k in knots]
        if len(pts) < 3:
            raise CurveError("need at least three knots")
        for i, k in enumerate(pts):
            if len(k) != 2 or not all(math.isfinite(x) for x in k):
                raise CurveError("knot must be a finite (q, R) pair", i)
        if pts[0] != (0.0, 0.0):
            raise CurveError("first knot must be (0, 0)", 0)
        if pts[-1] != (1.0, 0.0):
            raise CurveError("last knot must be (1, 0)", len(pts) - 1)
        for i in range(1, len(pts)):
            if not pts[i][0] > pts[i - 1][0]:
                raise CurveError("quantiles must be strictly increasing", i)
        if check:
            for i, (_, r) in enumerate(pts):
                if r < 0.0:
                    raise CurveError("revenue must be non-negative", i)
        self.knots = tuple(pts)
        q = np.array([k[0] for k in pts])
        r = np.array([k[1] for k in pts])
        if not np.max(r) > 0.0:
            raise CurveError("curve is identically zero")
        slopes = np.diff(r) / np.diff(q)
        scale = np.max(np.abs(slopes))
        if check:
            for i in range(1, len(slopes)):
                if slopes[i] > slopes[i - 1] + _SLOPE_TOL * scale:
                    raise CurveError("slope increases (curve not concave)", i)
        # drop interior knots that are not genuine kinks
        keep = [0]
        for i in range(1, len(pts) - 1):
            if abs(slopes[i] - slopes[i - 1]) > _SLOPE_TOL * scale:
                keep.append(i)
        keep.append(len(pts) - 1)
        self._q = q[keep]
        self._r = r[keep]
        self._m = np.diff(self._r) / np.diff(self._q)
        self._a = self._r[:-1] - self._m * self._q[:-1]
        self.kinks = tuple(float(x) for x in self._q[1:-1])
        self.top_value = float(self._m[0])
        self.atom_quantile = float(self._q[1])
        # values at breakpoints 1..K, non-increasing when concave
        self._v = self._r[1:] / self._q[1:]

    def _segment(self, q, left=False):
        side = "left" if left else "right"
        idx = np.searchsorted(self._q, q, side=side) - 1
        return np.clip(idx, 0, len(self._m) - 1)

    def _revenue(self, q):
        return np.interp(q, self._q, self._r)

    def _value(self, q):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = self._revenue(q) / q
        return np.where(q <= self.atom_quantile, self.top_value, v)

    def _quantile(self, p):
        # largest breakpoint j >= 1 with v_j >= p, then invert on segment j
        count = np.searchsorted(-self._v, -p, side="right")
        out = np.zeros_like(p, dtype=float)
        has = count > 0
        j = np.clip(count, 1, len(self._q) - 1)  # breakpoint index in self._q
        last = j == len(self._q) - 1
        seg = np.minimum(j, len(self._m) - 1)
        a, m = self._a[seg], self._m[seg]
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(a > 0.0, a / (p - m), self._q[j])
        inv = np.clip(inv, self._q[j], self._q[np.minimum(j + 1, len(self._q) - 1)])
        out = np.where(has, np.where(last, 1.0, inv), 0.0)
        return out

    def _slope(self, q, left):
        return self._m[self._segment(q, left)]

    def _monopoly(self):
        i = int(np.argmax(self._r))
        return MonopolyPoint(float(self._q[i]), float(self._r[i] / self._q[i]),
                             float(self._r[i]))

    def scaled(self, c):
        return PiecewiseLinearCurve([(q, r * c) for q, r in self.knots])

    def to_dict(self):
        return {"family": self.family, "params": {"knots": [list(k) for k in self.knots]}}


def check_concavity(curve: RevenueCurve, grid_size: int = 1001):
    """Midpoint-concavity violations of ``curve`` on a uniform grid.

    Returns a list of ``(q, deficit)`` pairs; empty means concave within a
    relative tolerance of 1e-12.
    """
    if grid_size < 3:
        raise ValueError("grid_size must be at least 3")
    q = np.linspace(0.0, 1.0, grid_size)
    if isinstance(curve, PiecewiseLinearCurve):
        # unchecked knots may be negative or non-concave; interpolate directly
        r = np.interp(q, [k[0] for k in curve.knots], [k[1] for k in curve.knots])
    else:
        r = curve.revenue_at(q)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(r))))
    deficit = 0.5 * (r[:-2] + r[2:]) - r[1:-1]
    bad = np.nonzero(deficit > tol)[0]
    return [(float(q[i + 1]), float(deficit[i])) for i in bad]


_FAMILIES = {
    "triangle": TriangleCurve,
    "uniform": UniformCurve,
    "exponential": ExponentialCurve,
    "truncated_equal_revenue": TruncatedEqualRevenueCurve,
    "piecewise_linear": PiecewiseLinearCurve,
}


def curve_from_dict(doc: dict) -> RevenueCurve:
    """Build a curve from ``{"family": ..., "params": {...}}``."""
    try:
        family = doc["family"]
    except (KeyError, TypeError):
        raise CurveError("curve document needs a 'family' field") from None
    if family not in _FAMILIES:
        raise CurveError(f"unknown curve family {family!r}")
    params = dict(doc.get("params", {}))
    try:
        return _FAMILIES[family](**params)
    except TypeError as exc:
        raise CurveError(f"bad parameters for {family}: {exc}") from None


def load_curve(path) -> RevenueCurve:
    return curve_from_dict(json.loads(Path(path).read_text()))


def parse_curve(text: str) -> RevenueCurve:
    """Parse a compact curve string or a JSON document / file path.

    Compact forms: ``uniform``, ``uniform:2``, ``exponential:1.5``,
    ``triangle:0.5`` or ``triangle:0.5,2``, ``truncated_equal_revenue:1,4``
    (alias ``ter``), ``piecewise_linear:0,0;0.5,1;1,0`` (alias ``pl``).
    """
    text = text.strip()
    if text.startswith("{"):
        return curve_from_dict(json.loads(text))
    if text.endswith(".json") or Path(text).is_file():
        return load_curve(text)
    name, _, rest = text.partition(":")
    name = {"ter": "truncated_equal_revenue", "pl": "piecewise_linear",
            "exp": "exponential"}.get(name, name)
    if name == "piecewise_linear":
        knots = [[float(x) for x in pair.split(",")] for pair in rest.split(";") if pair]
        return PiecewiseLinearCurve(knots)
    try:
        args = [float(x) for x in rest.split(",") if x.strip()]
    except ValueError:
        raise CurveError(f"cannot parse curve parameters in {text!r}") from None
    if name == "uniform":
        return UniformCurve(0.0, *args)
    if name in _FAMILIES:
        return _FAMILIES[name](*args)
    raise CurveError(f"unknown curve {text!r}")
