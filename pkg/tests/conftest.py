import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from bidinflation.curves import (
    ExponentialCurve,
    PiecewiseLinearCurve,
    TriangleCurve,
    TruncatedEqualRevenueCurve,
    UniformCurve,
)

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile("default")


@st.composite
def concave_knots(draw, max_knots=7):
    """Knots of a concave curve through (0, 0) and (1, 0), peak normalised to 1."""
    k = draw(st.integers(3, max_knots))
    inner = draw(st.lists(st.floats(0.02, 0.98), min_size=k - 2, max_size=k - 2,
                          unique=True))
    q = np.array([0.0] + sorted(inner) + [1.0])
    if np.min(np.diff(q)) < 1e-3:
        q = np.linspace(0.0, 1.0, k)
    slopes = np.sort(np.array(draw(st.lists(st.floats(-5, 5), min_size=k - 1,
                                            max_size=k - 1))))[::-1]
    slopes = slopes - np.dot(slopes, np.diff(q))
    r = np.concatenate([[0.0], np.cumsum(slopes * np.diff(q))])
    r[-1] = 0.0
    r = np.maximum(r, 0.0)
    if r.max() < 1e-6:
        r = np.interp(q, [0.0, 0.5, 1.0], [0.0, 1.0, 0.0])
    return list(zip(q.tolist(), (r / r.max()).tolist()))


@st.composite
def curves(draw, piecewise=True):
    kind = draw(st.sampled_from(["triangle", "uniform", "exponential", "ter", "pl"]
                                if piecewise else ["triangle", "uniform", "exponential", "ter"]))
    if kind == "triangle":
        return TriangleCurve(draw(st.floats(0.01, 0.99)), draw(st.floats(0.5, 3.0)))
    if kind == "uniform":
        return UniformCurve(0.0, draw(st.floats(0.5, 4.0)))
    if kind == "exponential":
        return ExponentialCurve(draw(st.floats(0.5, 3.0)))
    if kind == "ter":
        floor = draw(st.floats(0.5, 2.0))
        return TruncatedEqualRevenueCurve(floor, floor * draw(st.floats(2.0, 8.0)))
    return PiecewiseLinearCurve(draw(concave_knots()))


def atomless(curve):
    return curve.atom_quantile == 0.0


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
