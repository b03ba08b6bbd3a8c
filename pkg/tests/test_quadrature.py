import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from bidinflation.quadrature import (
    QuadratureConfig,
    QuadratureError,
    gauss_kronrod,
    integrate,
)


def test_gauss_kronrod_exact_on_polynomials():
    val, err = gauss_kronrod(lambda x: x ** 10, 0.0, 1.0)
    assert val == pytest.approx(1 / 11, abs=1e-15)
    assert err < 1e-14


@pytest.mark.parametrize("f, a, b, exact", [
    (np.exp, 0.0, 1.0, math.e - 1),
    (np.sqrt, 0.0, 1.0, 2 / 3),
    (lambda x: np.abs(x - 0.3), 0.0, 1.0, 0.5 * (0.09 + 0.49)),
    (lambda x: -x * np.log(x), 0.0, 1.0, 0.25),
])
def test_integrate_known_values(f, a, b, exact):
    assert integrate(f, a, b) == pytest.approx(exact, abs=1e-10)


def test_split_points_remove_kink_error():
    f = lambda x: np.minimum(x / 0.37, (1 - x) / 0.63)
    assert integrate(f, 0.0, 1.0, splits=[0.37]) == pytest.approx(0.5, abs=1e-14)


def test_empty_interval_and_reversed():
    assert integrate(np.exp, 0.5, 0.5) == 0.0
    with pytest.raises(ValueError):
        integrate(np.exp, 1.0, 0.0)


def test_non_finite_integrand_raises():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.where(x > 0.5, 1.0, np.inf), 0.0, 1.0)


def test_budget_exhaustion_raises():
    cfg = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-15, max_depth=3)
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.sin(1.0 / (x + 1e-3)), 0.0, 1.0, cfg=cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=-1.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_depth=0)


@given(st.floats(0.05, 0.95), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_piecewise_linear_against_scipy(k, left, right):
    f = lambda x: np.where(x <= k, left * x, left * k - right * (x - k))
    ours = integrate(f, 0.0, 1.0, splits=[k])
    ref, _ = sp_integrate.quad(lambda x: float(f(x)), 0.0, 1.0, points=[k], epsabs=1e-13)
    assert ours == pytest.approx(ref, abs=1e-10)


@given(st.floats(0.5, 5.0))
def test_deterministic(c):
    f = lambda x: np.exp(-c * x) * np.sin(3 * x)
    assert integrate(f, 0.0, 2.0) == integrate(f, 0.0, 2.0)
