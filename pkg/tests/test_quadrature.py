import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statgeo.errors import QuadratureError, UsageError
from statgeo.quadrature import QuadratureRule, integrate


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=12), st.floats(-2, 0), st.floats(0.1, 2))
def test_polynomials_are_exact(coeffs, a, width):
    b = a + width
    poly = np.polynomial.Polynomial(coeffs)
    exact = poly.integ()(b) - poly.integ()(a)
    assert float(integrate(poly, a, b)) == pytest.approx(exact, abs=1e-10)


def test_vector_valued_integrand():
    out = integrate(lambda x: np.stack([np.sin(x), np.exp(x)]), 0.0, math.pi)
    assert np.allclose(out, [2.0, math.exp(math.pi) - 1], atol=1e-9)


def test_peaked_integrand_is_refined():
    val = integrate(lambda x: np.exp(-((x - 0.3) ** 2) / 2e-6), -5.0, 5.0)
    assert float(val) == pytest.approx(math.sqrt(2 * math.pi * 1e-6), rel=1e-6)


def test_nonfinite_integrand_raises():
    with pytest.raises(QuadratureError):
        integrate(lambda x: 1 / x, -1.0, 1.0, QuadratureRule(initial_panels=2))


def test_unresolvable_integrand_raises():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.sign(np.sin(1 / (x + 1e-3))), 0.0, 1.0, QuadratureRule(max_depth=3, fail_tol=1e-12))


@pytest.mark.parametrize("a, b", [(1.0, 1.0), (2.0, 1.0), (0.0, math.inf)])
def test_bad_interval(a, b):
    with pytest.raises(UsageError):
        integrate(np.sin, a, b)


def test_bad_rule():
    with pytest.raises(UsageError):
        QuadratureRule(order=1)
