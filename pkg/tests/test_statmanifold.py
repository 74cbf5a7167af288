import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statgeo.errors import FitError, NotConvexError, StructureError, UsageError
from statgeo.model_zoo import REGISTRY, build_model, sample_points
from statgeo.statmanifold import (
    ChristoffelField,
    Tolerances,
    alpha_connection,
    alpha_field,
    check_statistical,
    constant_curvature_fit,
    curvature,
    curvature_decomposition_residual,
    difference_tensor,
    dual_connection,
    dual_field,
    flat_alpha_values,
    hessian_curvature_residual,
    hessian_metric_from_potential,
    interpolate_alpha_curvature,
    levi_civita,
    levi_civita_field,
)
from statgeo.tensor_core import ChartDomain

ZOO = {
    "euclidean": {"dim": 3},
    "normal_family": {"alpha": 0.7},
    "inverse_gaussian_family": {"alpha": -0.4},
    "upper_half_space": {"dim": 3},
    "affine_r3": {"a": 2.0, "b": 1.5},
}


def zoo_model(name):
    return build_model(name, **ZOO[name])


def zoo_points(model, count=20, seed=7):
    return sample_points(model.sample_box, count, seed)


NORMAL_REF = (0.0, 1.0)


# ----------------------------------------------------------- connections


def test_levi_civita_euclidean_is_zero():
    m = build_model("euclidean", dim=3)
    assert np.array_equal(levi_civita(m, [0.1, 0.2, 0.3]), np.zeros((3, 3, 3)))


@pytest.mark.parametrize("name", ["normal_family", "upper_half_space"])
def test_hyperbolic_levi_civita_symbols(name):
    G = levi_civita(build_model(name), NORMAL_REF)
    expected = np.zeros((2, 2, 2))
    expected[0, 0, 1] = expected[0, 1, 0] = -1
    expected[1, 0, 0] = 1
    expected[1, 1, 1] = -1
    assert np.allclose(G, expected, atol=1e-12)


def test_levi_civita_from_fd_metric_matches_analytic():
    m = build_model("normal_family")
    fd = m.with_connection(m.connection)
    object.__setattr__(fd, "metric_derivative", None)
    p = (0.3, 1.7)
    assert np.allclose(levi_civita(fd, p), levi_civita(m, p), atol=1e-8)


def test_dual_of_trivial_structure_is_itself():
    m = build_model("upper_half_space")
    trivial = m.with_connection(levi_civita_field(m))
    p = (0.4, 1.3)
    assert np.allclose(dual_connection(trivial, p), levi_civita(m, p), atol=1e-12)


def test_normal_family_dual_is_minus_one_connection():
    m = build_model("normal_family", alpha=1.0)
    assert np.allclose(dual_connection(m, NORMAL_REF), alpha_connection(m, -1.0, NORMAL_REF), atol=1e-12)
    assert np.allclose(dual_connection(m, NORMAL_REF), build_model("normal_family", alpha=-1.0).connection(NORMAL_REF))


def test_upper_half_space_dual_sum_rule():
    m = build_model("upper_half_space")
    p = (0.0, 1.0)
    assert np.allclose(dual_connection(m, p), 2 * levi_civita(m, p) - m.connection(p), atol=1e-12)


def test_alpha_one_returns_model_connection():
    m = build_model("affine_r3", a=1.0, b=2.0)
    assert alpha_field(m, 1.0) is m.connection
    assert np.array_equal(alpha_connection(m, 1.0, (0, 0, 0)), m.connection((0, 0, 0)))


def test_normal_family_half_alpha_symbols():
    m = build_model("normal_family", alpha=1.0)
    G = alpha_connection(m, 0.5, NORMAL_REF)
    assert G[0, 0, 1] == pytest.approx(-1.5)
    assert G[1, 0, 0] == pytest.approx(0.5)
    assert G[1, 1, 1] == pytest.approx(-2.0)
    assert G[0, 0, 0] == G[1, 0, 1] == 0


def test_dual_of_non_codazzi_connection_raises():
    m = build_model("normal_family", as_printed=True, alpha=0.0)
    with pytest.raises(StructureError):
        dual_connection(m, NORMAL_REF)


def test_christoffel_field_rejects_unknown_provenance():
    with pytest.raises(UsageError):
        ChristoffelField(lambda p: p, "guessed")


@pytest.mark.parametrize("name", sorted(ZOO))
def test_duality_properties(name):
    m = zoo_model(name)
    dual_model = m.with_connection(dual_field(m))
    for p in zoo_points(m, 5):
        assert np.abs(dual_connection(dual_model, p) - m.connection(p)).max() < 1e-8
        assert np.abs(alpha_connection(m, 0.0, p) - levi_civita(m, p)).max() < 1e-8


@pytest.mark.parametrize("name", sorted(ZOO))
@given(alpha=st.floats(-3, 3, allow_nan=False))
def test_dual_of_alpha_member_is_minus_alpha(name, alpha):
    m = zoo_model(name)
    member = m.with_connection(alpha_field(m, alpha))
    p = m.reference_point
    assert np.abs(dual_connection(member, p) - alpha_connection(m, -alpha, p)).max() < 1e-8


# ----------------------------------------------------------- statistical check


def test_trivial_structure_passes_exactly():
    m = build_model("normal_family")
    trivial = m.with_connection(levi_civita_field(m))
    report = check_statistical(trivial, zoo_points(m, 5))
    assert report.passed and max(report.torsion, report.codazzi) < 1e-10


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_every_zoo_model_is_statistical(name):
    m = build_model(name)
    assert check_statistical(m, zoo_points(m, 50, seed=3)).passed


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0])
def test_printed_normal_symbols_fail(alpha):
    m = build_model("normal_family", as_printed=True, alpha=alpha)
    report = check_statistical(m, [NORMAL_REF])
    assert not report.passed
    assert report.codazzi > 0.1


def test_printed_affine_symbols_fail():
    m = build_model("affine_r3", as_printed=True, a=1.0, b=2.0)
    assert not check_statistical(m, [(0, 0, 0)]).passed


def test_check_statistical_needs_points():
    with pytest.raises(UsageError):
        check_statistical(build_model("euclidean"), [])


def test_nonsymmetric_cubic_is_flagged():
    m = build_model("euclidean")
    C = np.zeros((2, 2, 2))
    C[0, 0, 1] = 1.0
    bad = m.with_connection(m.connection, cubic=lambda p: C)
    assert check_statistical(bad, [(0.0, 0.0)]).cubic_asymmetry == pytest.approx(1.0)


# ----------------------------------------------------------- difference tensor


def test_difference_tensor_of_trivial_structure_vanishes():
    m = build_model("upper_half_space")
    trivial = m.with_connection(levi_civita_field(m))
    assert np.abs(difference_tensor(trivial, (0.2, 0.9))).max() < 1e-14


def test_upper_half_space_difference_tensor():
    K = difference_tensor(build_model("upper_half_space"), (0.0, 1.0))
    assert K[1, 1, 1] == pytest.approx(2.0)
    assert K[1, 0, 0] == pytest.approx(1.0)
    assert K[0, 0, 1] == pytest.approx(1.0) and K[0, 1, 0] == pytest.approx(1.0)
    assert K[0, 0, 0] == K[1, 0, 1] == 0


def test_normal_alpha_difference_is_linear_in_cubic():
    from statgeo.tensor_core import raise_index

    alpha = 1.3
    m = build_model("normal_family", alpha=alpha)
    C = m.cubic(NORMAL_REF) / alpha
    K = difference_tensor(m, NORMAL_REF)
    assert np.allclose(K, -0.5 * alpha * raise_index(C, m.g(NORMAL_REF)), atol=1e-12)


# ----------------------------------------------------------- curvature


def test_flat_connection_has_zero_curvature():
    m = build_model("euclidean")
    assert np.array_equal(curvature(m.connection, (0.5, 0.5)), np.zeros((2,) * 4))


def test_normal_levi_civita_curvature_component():
    m = build_model("normal_family", alpha=0.0)
    R = curvature(m.connection, NORMAL_REF, domain=m.domain)
    # R(∂1, ∂2)∂2 = −∂1
    assert R[0, 0, 1, 1] == pytest.approx(-1.0, abs=1e-8)
    assert R[1, 0, 1, 1] == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("dim", [2, 3])
def test_upper_half_space_connection_is_flat(dim):
    m = build_model("upper_half_space", dim=dim)
    for p in zoo_points(m, 5):
        assert np.abs(curvature(m.connection, p, domain=m.domain)).max() < 1e-6


@pytest.mark.parametrize("name", sorted(ZOO))
def test_curvature_is_antisymmetric(name):
    m = zoo_model(name)
    for p in zoo_points(m, 5):
        R = curvature(m.connection, p, domain=m.domain)
        assert np.abs(R + R.transpose(0, 2, 1, 3)).max() < 1e-8


@pytest.mark.parametrize(
    "name, params, alpha, k",
    [
        ("normal_family", {}, 0.0, -0.5),
        ("normal_family", {}, 1.0, 0.0),
        ("normal_family", {}, -2.0, 1.5),
        ("inverse_gaussian_family", {}, 0.5, -0.375),
        ("upper_half_space", {"dim": 3}, 0.0, -1.0),
        ("upper_half_space", {"dim": 2}, 2.0, 3.0),
        ("affine_r3", {"a": 1.0, "b": 2.0}, 1.0, 1.0),
        ("affine_r3", {"a": 0.5, "b": 1.0}, 1.0, 0.5),
        ("affine_r3", {"a": 1.0, "b": 2.0}, 0.0, 0.0),
    ],
)
def test_constant_curvature_fit_values(name, params, alpha, k):
    m = build_model(name, **params)
    report = constant_curvature_fit(m, alpha_field(m, alpha), zoo_points(m, 50), 1e-6)
    assert report.k_hat == pytest.approx(k, abs=1e-6)
    assert report.verdict == "constant"
    assert len(report.points) == 50


def test_non_constant_curvature_is_detected():
    # conformally flat metric e^{x²}δ has non-constant Gaussian curvature
    dom = ChartDomain(2)
    from statgeo.statmanifold import StatisticalManifoldModel

    base = StatisticalManifoldModel("bump", dom, lambda p: np.exp(p[0] ** 2) * np.eye(2), ChristoffelField(lambda p: np.zeros((2, 2, 2))))
    m = base.with_connection(levi_civita_field(base))
    report = constant_curvature_fit(m, None, sample_points(((-1, 1), (-1, 1)), 10, 0))
    assert report.verdict == "not_constant"


def test_fit_tie_is_constant():
    m = build_model("euclidean")
    assert constant_curvature_fit(m, None, [(0, 0), (1, 1)], tol=0.0).verdict == "constant"


def test_fit_preconditions():
    with pytest.raises(UsageError):
        constant_curvature_fit(build_model("euclidean"), None, [(0, 0)])
    with pytest.raises(UsageError):
        constant_curvature_fit(build_model("euclidean", dim=1), None, [(0,), (1,)])


@pytest.mark.parametrize("name", sorted(ZOO))
def test_dual_shares_constant_curvature(name):
    m = zoo_model(name)
    pts = zoo_points(m, 10)
    k = constant_curvature_fit(m, None, pts)
    k_dual = constant_curvature_fit(m, dual_field(m), pts)
    assert k.verdict == k_dual.verdict == "constant"
    assert k.k_hat == pytest.approx(k_dual.k_hat, abs=1e-6)


# ----------------------------------------------------------- α interpolation


@given(st.floats(-4, 4, allow_nan=False))
def test_interpolation_reproduces_the_curvature_law(alpha):
    assert interpolate_alpha_curvature(-0.5, 0.0, 0.0, 1.0, alpha) == pytest.approx((alpha**2 - 1) / 2, abs=1e-12)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_interpolation_endpoints_are_exact(k1, k2, a1, a2):
    if abs(abs(a1) - abs(a2)) < 1e-3:
        return
    assert interpolate_alpha_curvature(k1, k2, a1, a2, a1) == k1
    assert interpolate_alpha_curvature(k1, k2, a1, a2, a2) == k2


def test_interpolation_of_equal_curvatures_is_constant():
    for alpha in (-3.0, 0.2, 5.0):
        assert interpolate_alpha_curvature(0.7, 0.7, 0.0, 1.0, alpha) == pytest.approx(0.7)


def test_interpolation_rejects_mirrored_anchors():
    with pytest.raises(UsageError):
        interpolate_alpha_curvature(0.0, 1.0, 1.0, -1.0, 0.5)


@pytest.mark.parametrize(
    "args, expected",
    [
        ((-0.5, 0.0, 0.0, 1.0), {-1.0, 1.0}),
        ((0.0, 1.0, 0.0, 1.0), {0.0}),
        # k(α) = 1 − α² vanishes at ±1
        ((1.0, 0.0, 0.0, 1.0), {-1.0, 1.0}),
        # k(α) = 1 + α² never vanishes
        ((1.0, 2.0, 0.0, 1.0), set()),
    ],
)
def test_flat_alpha_values(args, expected):
    assert flat_alpha_values(*args) == expected


def test_flat_alpha_values_degenerate():
    with pytest.raises(UsageError):
        flat_alpha_values(0.5, 0.5, 0.0, 1.0)


# ----------------------------------------------------------- Hessian structures


@pytest.mark.parametrize("dim", [2, 3])
def test_upper_half_space_hessian_curvature(dim):
    m = build_model("upper_half_space", dim=dim)
    assert hessian_curvature_residual(m, zoo_points(m, 20), 4.0) < 1e-5


def test_euclidean_hessian_curvature_zero():
    m = build_model("euclidean")
    assert hessian_curvature_residual(m, zoo_points(m, 5), 0.0) == 0.0


def test_wrong_hessian_curvature_is_large():
    m = build_model("upper_half_space")
    assert hessian_curvature_residual(m, [(0.0, 1.0)], 0.0) > 0.1


def test_hessian_residual_needs_flat_connection():
    with pytest.raises(StructureError):
        hessian_curvature_residual(build_model("normal_family", alpha=0.0), [NORMAL_REF], 1.0)


def test_custom_tolerances():
    tol = Tolerances().replace(hessian=1e-3)
    assert tol.hessian == 1e-3 and tol.fd == 1e-5
    with pytest.raises(UsageError):
        Tolerances().replace(bogus=1.0)


@pytest.mark.parametrize("name", sorted(ZOO))
def test_curvature_decomposition(name):
    m = zoo_model(name)
    for p in zoo_points(m, 20):
        assert curvature_decomposition_residual(m, p) < 1e-5


def test_decomposition_of_trivial_structure():
    m = build_model("normal_family")
    trivial = m.with_connection(levi_civita_field(m))
    assert curvature_decomposition_residual(trivial, NORMAL_REF) < 1e-8


def test_upper_half_space_levi_civita_component():
    m = build_model("upper_half_space")
    R0 = curvature(levi_civita_field(m), (0.0, 1.0), domain=m.domain)
    # k = −1 and g = I at this point: R°(∂1, ∂2)∂2 = k g(∂2, ∂2) ∂1 = −∂1
    assert R0[0, 0, 1, 1] == pytest.approx(-1.0, abs=1e-8)
    assert curvature_decomposition_residual(m, (0.0, 1.0)) < 1e-6


def test_metric_from_quadratic_potential():
    g = hessian_metric_from_potential(lambda p: 0.5 * p @ p, ChartDomain(3))
    assert np.allclose(g([0.3, -1.0, 2.0]), np.eye(3), atol=1e-8)


def test_metric_from_log_potential():
    dom = ChartDomain(1, lambda p: p[0] > 0)
    g = hessian_metric_from_potential(lambda p: -np.log(p[0]), dom)
    assert g([2.0])[0, 0] == pytest.approx(0.25, rel=1e-6)


def test_metric_from_quartic_potential():
    g = hessian_metric_from_potential(lambda p: p[0] ** 4, ChartDomain(1))
    assert g([1.0])[0, 0] == pytest.approx(12.0, abs=1e-5)


def test_concave_potential_rejected():
    g = hessian_metric_from_potential(lambda p: -p @ p, ChartDomain(2))
    with pytest.raises(NotConvexError):
        g([0.0, 0.0])
