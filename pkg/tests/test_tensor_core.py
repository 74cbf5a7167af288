import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statgeo.errors import DomainError, EvalError, ShapeError, SingularMetricError, UsageError
from statgeo.tensor_core import (
    ChartDomain,
    FDScheme,
    fd_derivative,
    fd_gradient,
    fd_hessian,
    frame_components,
    lower_index,
    metric_inverse,
    orthonormal_frame,
    raise_index,
    validate_metric,
)

from conftest import random_spd

coef = st.floats(-5, 5, allow_nan=False)


def test_square_derivative():
    assert fd_derivative(lambda x: x**2, [3.0], 0) == pytest.approx(6.0, abs=1e-8)


def test_constant_field_has_zero_derivative():
    out = fd_derivative(lambda x: np.full((2, 2), 7.0), [0.3, -1.2], 1)
    assert np.array_equal(out, np.zeros((2, 2)))


def test_normal_metric_coefficient_derivative():
    d = fd_derivative(lambda t: 2 / t[1] ** 2, [0.0, 1.0], 1)
    assert d == pytest.approx(-4.0, abs=1e-6)


@given(coef, coef, coef, coef, st.floats(-3, 3))
def test_cubic_polynomials_are_differentiated_exactly(a, b, c, d, x):
    f = lambda p: a + b * p[0] + c * p[0] ** 2 + d * p[0] ** 3
    exact = b + 2 * c * x + 3 * d * x**2
    assert fd_derivative(f, [x], 0) == pytest.approx(exact, abs=1e-9 * max(1.0, abs(exact)) + 1e-9)


def test_second_order_scheme_without_extrapolation():
    s = FDScheme(step=1e-3, order=2, richardson=False)
    assert fd_derivative(lambda p: p[0] ** 2, [1.5], 0, s) == pytest.approx(3.0, abs=1e-9)
    assert s.reach == 1e-3
    assert FDScheme().reach == 2e-4


@pytest.mark.parametrize("kwargs", [{"step": 0}, {"step": -1e-3}, {"order": 3}])
def test_bad_schemes_rejected(kwargs):
    with pytest.raises(UsageError):
        FDScheme(**kwargs)


def test_gradient_stacks_partials_first():
    g = fd_gradient(lambda p: np.array([p[0] * p[1], p[1] ** 2]), [2.0, 3.0])
    assert np.allclose(g, [[3.0, 0.0], [2.0, 6.0]], atol=1e-9)


def test_stencil_leaving_domain_raises():
    half = ChartDomain(2, lambda p: p[1] > 0, "upper half plane")
    with pytest.raises(DomainError):
        fd_derivative(lambda p: 1 / p[1], [0.0, 1e-5], 1, domain=half)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_nonfinite_field_raises():
    with pytest.raises(EvalError):
        fd_derivative(lambda p: np.log(p[0] - 1.0), [1.0], 0)


def test_domain_check():
    dom = ChartDomain(2, lambda p: p[0] > 0)
    with pytest.raises(ShapeError):
        dom.check(np.zeros(3))
    with pytest.raises(DomainError):
        dom.check(np.array([-1.0, 0.0]))
    with pytest.raises(UsageError):
        ChartDomain(0)


def test_fd_hessian_quartic():
    H = fd_hessian(lambda p: p[0] ** 4 + p[0] * p[1] ** 2, [1.0, 2.0])
    assert np.allclose(H, [[12.0, 4.0], [4.0, 2.0]], atol=1e-5)


@pytest.mark.parametrize(
    "m, inv",
    [
        (np.eye(3), np.eye(3)),
        (2 * np.eye(2), 0.5 * np.eye(2)),
        (np.diag([1.0, 0.5]), np.diag([1.0, 2.0])),
    ],
)
def test_metric_inverse_values(m, inv):
    assert np.allclose(metric_inverse(m), inv, atol=1e-14)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_metric_inverse_is_an_involution(n, seed):
    m = random_spd(np.random.default_rng(seed), n)
    back = metric_inverse(metric_inverse(m))
    assert np.abs(back - m).max() <= 1e-9 * np.abs(m).max()


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_lower_raise_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    g = random_spd(rng, n)
    G = rng.normal(size=(n, n, n))
    assert np.abs(raise_index(lower_index(G, g), g) - G).max() < 1e-10
    L = rng.normal(size=(n, n, n))
    assert np.abs(lower_index(raise_index(L, g), g) - L).max() < 1e-10


def test_lower_index_trivial_cases(rng):
    G = rng.normal(size=(3, 3, 3))
    assert np.array_equal(lower_index(np.zeros((3, 3, 3)), random_spd(rng, 3)), np.zeros((3, 3, 3)))
    assert np.allclose(lower_index(G, np.eye(3)), G.transpose(1, 2, 0))


def test_lower_index_shape_mismatch():
    with pytest.raises(ShapeError):
        lower_index(np.zeros((2, 2, 2)), np.eye(3))


@pytest.mark.parametrize(
    "m, err",
    [
        (np.array([[1.0, 0.1], [0.0, 1.0]]), SingularMetricError),
        (np.diag([1.0, -1.0]), SingularMetricError),
        (np.diag([1.0, 1e-13]), SingularMetricError),
        (np.ones((2, 3)), ShapeError),
        (np.array([[np.nan, 0], [0, 1]]), EvalError),
    ],
)
def test_validate_metric_rejects(m, err):
    with pytest.raises(err):
        validate_metric(m)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_orthonormal_frame(n, seed):
    g = random_spd(np.random.default_rng(seed), n)
    E = orthonormal_frame(g)
    assert np.allclose(E.T @ g @ E, np.eye(n), atol=1e-10)


def test_frame_components_of_metric_is_identity(rng):
    g = random_spd(rng, 3)
    assert np.allclose(frame_components(g, orthonormal_frame(g), 0), np.eye(3), atol=1e-12)
    # a vector and its lowered covector have the same frame components
    v = rng.normal(size=3)
    E = orthonormal_frame(g)
    assert np.allclose(frame_components(v, E, 1), frame_components(g @ v, E, 0), atol=1e-12)
