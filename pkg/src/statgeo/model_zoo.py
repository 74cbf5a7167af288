"""Built-in statistical manifolds and the Fisher-information oracle.

Every builder returns a :class:`StatisticalManifoldModel` whose connection is
given by closed-form Christoffel symbols. The density families feed an
independent route: g and the cubic tensor are integrated from the score, and
:func:`connection_from_cubic` turns them back into α-connections.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import QuadratureError, StructureError, UsageError
from .quadrature import QuadratureRule, integrate
from .statmanifold import (
    ChristoffelField,
    StatisticalManifoldModel,
    check_statistical,
    levi_civita,
)
from .tensor_core import DEFAULT_SCHEME, ChartDomain, FDScheme, as_point, fd_derivative, raise_index

__all__ = [
    "ModelSpec",
    "DensityFamily",
    "REGISTRY",
    "build_model",
    "sample_points",
    "parse_params",
    "normal_family_symbols",
    "inverse_gaussian_symbols",
    "density_family",
    "fisher_structure_from_density",
    "connection_from_cubic",
    "model_from_cubic",
]


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"model": self.name, "params": dict(self.params)}


def parse_params(text: str | None) -> dict:
    """``"a=1,b=2"`` -> ``{"a": 1.0, "b": 2.0}``; non-numeric values stay strings."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"malformed parameter {item!r}; expected key=value")
        value = value.strip()
        try:
            out[key.strip()] = float(value)
        except ValueError:
            out[key.strip()] = value
    return out


def sample_points(box, count: int, seed: int) -> list[np.ndarray]:
    """``count`` uniform points in an axis-aligned box from a Philox stream."""
    if count < 1:
        raise UsageError("sample count must be >= 1")
    rng = np.random.Generator(np.random.Philox(int(seed)))
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    return [lo + (hi - lo) * rng.random(len(box)) for _ in range(count)]


# ------------------------------------------------------------- closed forms


def _upper_half(dim):
    return ChartDomain(dim, lambda p: p[-1] > 0, f"{{x in R^{dim} : x^{dim} > 0}}")


def _positive_quadrant():
    return ChartDomain(2, lambda p: p[0] > 0 and p[1] > 0, "{θ¹ > 0, θ² > 0}")


def normal_family_symbols(alpha: float, p, as_printed: bool = False) -> np.ndarray:
    """α-connection of the normal family in coordinates with g = 2(θ²)⁻² δ.

    ``as_printed`` returns the symbols with vanishing cross terms, which do
    not form a statistical structure together with g.
    """
    t = as_point(p, 2)[1]
    G = np.zeros((2, 2, 2))
    if as_printed:
        G[1, 0, 0] = (-1 + 2 * alpha) / t
        G[1, 1, 1] = (1 + alpha) / t
        return G
    G[0, 0, 1] = G[0, 1, 0] = -(1 + alpha) / t
    G[1, 0, 0] = (1 - alpha) / t
    G[1, 1, 1] = -(1 + 2 * alpha) / t
    return G


def _normal_cubic(p):
    t = p[1]
    C = np.zeros((2, 2, 2))
    C[0, 0, 1] = C[0, 1, 0] = C[1, 0, 0] = 4 / t**3
    C[1, 1, 1] = 8 / t**3
    return C


def _normal_family(alpha=1.0, as_printed=False):
    alpha = float(alpha)
    metric = lambda p: 2 / p[1] ** 2 * np.eye(2)

    def dmetric(p):
        dg = np.zeros((2, 2, 2))
        dg[1] = -4 / p[1] ** 3 * np.eye(2)
        return dg

    tag = "as-printed" if as_printed else "corrected"
    return StatisticalManifoldModel(
        label=f"normal_family(alpha={alpha:g}, {tag})",
        domain=ChartDomain(2, lambda p: p[1] > 0, "{θ² > 0}"),
        metric=metric,
        connection=ChristoffelField(
            lambda p: normal_family_symbols(alpha, p, as_printed), "analytic", f"normal alpha={alpha:g}"
        ),
        cubic=None if as_printed else (lambda p: alpha * _normal_cubic(p)),
        metric_derivative=dmetric,
        reference_point=(0.0, 1.0),
        sample_box=((-2.0, 2.0), (0.5, 3.0)),
        known={"alpha": alpha, "curvature": (alpha**2 - 1) / 2, "lc_curvature": -0.5},
    )


def inverse_gaussian_symbols(alpha: float, p) -> np.ndarray:
    t1, t2 = as_point(p, 2)
    G = np.zeros((2, 2, 2))
    G[0, 0, 0] = -3 * (1 + alpha) / (2 * t1)
    G[1, 0, 0] = (alpha - 1) * t2**2 / t1**3
    G[0, 0, 1] = G[0, 1, 0] = (1 + alpha) / (2 * t2)
    G[1, 1, 1] = (alpha - 1) / t2
    return G


def _inverse_gaussian_cubic(p):
    t1, t2 = p
    C = np.zeros((2, 2, 2))
    C[0, 0, 0] = 3 * t2 / t1**4
    C[0, 0, 1] = C[0, 1, 0] = C[1, 0, 0] = -1 / t1**3
    C[1, 1, 1] = -1 / t2**3
    return C


def _inverse_gaussian_metric(p):
    t1, t2 = p
    return np.diag([t2 / t1**3, 1 / (2 * t2**2)])


def _inverse_gaussian_dmetric(p):
    t1, t2 = p
    dg = np.zeros((2, 2, 2))
    dg[0] = np.diag([-3 * t2 / t1**4, 0.0])
    dg[1] = np.diag([1 / t1**3, -1 / t2**3])
    return dg


def _inverse_gaussian_family(alpha=1.0, as_printed=False):
    # the closed-form symbols are used in both modes; they are validated below
    alpha = float(alpha)
    model = StatisticalManifoldModel(
        label=f"inverse_gaussian_family(alpha={alpha:g})",
        domain=_positive_quadrant(),
        metric=_inverse_gaussian_metric,
        connection=ChristoffelField(lambda p: inverse_gaussian_symbols(alpha, p), "analytic", f"IG alpha={alpha:g}"),
        cubic=lambda p: alpha * _inverse_gaussian_cubic(p),
        metric_derivative=_inverse_gaussian_dmetric,
        reference_point=(1.0, 1.0),
        sample_box=((0.5, 3.0), (0.5, 3.0)),
        known={"alpha": alpha, "curvature": (alpha**2 - 1) / 2, "lc_curvature": -0.5},
    )
    if as_printed:
        return model
    return _validated_or_fallback(model, lambda: _inverse_gaussian_from_density(alpha))


def _inverse_gaussian_from_density(alpha):
    family = density_family("inverse_gaussian_family")
    cubic = lambda p: alpha * fisher_structure_from_density(family, p)[1]
    return model_from_cubic(
        _inverse_gaussian_metric,
        cubic,
        _positive_quadrant(),
        label=f"inverse_gaussian_family(alpha={alpha:g}, from density)",
        metric_derivative=_inverse_gaussian_dmetric,
        reference_point=(1.0, 1.0),
        sample_box=((0.5, 3.0), (0.5, 3.0)),
        known={"alpha": alpha, "curvature": (alpha**2 - 1) / 2, "lc_curvature": -0.5},
    )


def _validated_or_fallback(model, fallback: Callable[[], StatisticalManifoldModel]):
    """Keep ``model`` if it is statistical on a fixed probe set, else rebuild it."""
    probes = sample_points(model.sample_box, 5, seed=0)
    if model.reference_point is not None:
        probes.insert(0, np.asarray(model.reference_point))
    report = check_statistical(model, probes)
    if report.passed:
        return model
    replacement = fallback()
    diff = max(float(np.abs(model.connection(p) - replacement.connection(p)).max()) for p in probes)
    warnings.warn(
        f"{model.label}: closed-form symbols fail the statistical check "
        f"(codazzi {report.codazzi:.3g}); using the density-derived connection "
        f"(max symbol difference {diff:.3g})",
        stacklevel=3,
    )
    replacement.known["fallback_symbol_diff"] = diff
    return replacement


def _upper_half_space(dim=2, as_printed=False):
    dim = int(dim)
    if dim < 2:
        raise UsageError("upper_half_space needs dim >= 2")
    last = dim - 1

    def conn(p):
        t = p[last]
        G = np.zeros((dim, dim, dim))
        G[last, last, last] = 1 / t
        for i in range(last):
            G[last, i, i] = 2 / t
        return G

    def cubic(p):
        t = p[last]
        C = np.zeros((dim, dim, dim))
        for i in range(last):
            C[i, i, last] = C[i, last, i] = C[last, i, i] = -2 / t**3
        C[last, last, last] = -4 / t**3
        return C

    def dmetric(p):
        dg = np.zeros((dim, dim, dim))
        dg[last] = -2 / p[last] ** 3 * np.eye(dim)
        return dg

    return StatisticalManifoldModel(
        label=f"upper_half_space(dim={dim})",
        domain=_upper_half(dim),
        metric=lambda p: np.eye(dim) / p[last] ** 2,
        connection=ChristoffelField(conn, "analytic", "upper half space"),
        cubic=cubic,
        metric_derivative=dmetric,
        reference_point=tuple([0.0] * last + [1.0]),
        sample_box=tuple([(-2.0, 2.0)] * last + [(0.5, 3.0)]),
        known={"curvature": 0.0, "hessian_curvature": 4.0, "lc_curvature": -1.0},
    )


def _affine_r3(a=1.0, b=1.0, as_printed=False):
    a, b = float(a), float(b)
    if not a > 0:
        raise UsageError(f"affine_r3 needs a > 0, got {a}")
    G = np.zeros((3, 3, 3))
    G[0, 0, 0] = b
    G[0, 1, 1] = G[0, 2, 2] = b / 2
    G[1, 0, 1] = G[1, 1, 0] = b / 2
    if as_printed:
        G[1, 0, 2] = G[1, 2, 0] = b / 2
    else:
        G[2, 0, 2] = G[2, 2, 0] = b / 2
    # flat Levi-Civita, so C_ijk = −2 Γ_ij,k = −2a Γ^k_ij
    C = -2 * a * G.transpose(1, 2, 0)
    tag = "as-printed" if as_printed else "corrected"
    return StatisticalManifoldModel(
        label=f"affine_r3(a={a:g}, b={b:g}, {tag})",
        domain=ChartDomain(3, description="R^3"),
        metric=lambda p: a * np.eye(3),
        connection=ChristoffelField(lambda p: G.copy(), "analytic", "affine R^3"),
        cubic=None if as_printed else (lambda p: C.copy()),
        metric_derivative=lambda p: np.zeros((3, 3, 3)),
        reference_point=(0.0, 0.0, 0.0),
        sample_box=((-2.0, 2.0),) * 3,
        known={
            "curvature": b**2 / (4 * a),
            "lc_curvature": 0.0,
        },
    )


def _euclidean(dim=2, as_printed=False):
    dim = int(dim)
    if dim < 1:
        raise UsageError("euclidean needs dim >= 1")
    return StatisticalManifoldModel(
        label=f"euclidean(dim={dim})",
        domain=ChartDomain(dim, description=f"R^{dim}"),
        metric=lambda p: np.eye(dim),
        connection=ChristoffelField(lambda p: np.zeros((dim, dim, dim)), "analytic", "flat"),
        cubic=lambda p: np.zeros((dim, dim, dim)),
        metric_derivative=lambda p: np.zeros((dim, dim, dim)),
        reference_point=tuple([0.0] * dim),
        sample_box=((-2.0, 2.0),) * dim,
        known={"curvature": 0.0, "hessian_curvature": 0.0, "lc_curvature": 0.0},
    )


@dataclass(frozen=True)
class _Entry:
    builder: Callable
    params: dict
    description: str


REGISTRY = {
    "euclidean": _Entry(_euclidean, {"dim": 2}, "flat R^n with the trivial structure"),
    "normal_family": _Entry(
        _normal_family,
        {"alpha": 1.0},
        "normal distributions, g = 2(θ²)⁻²δ; α-connections with constant curvature (α²−1)/2",
    ),
    "inverse_gaussian_family": _Entry(
        _inverse_gaussian_family,
        {"alpha": 1.0},
        "random-walk (inverse Gaussian) distributions; constant curvature (α²−1)/2",
    ),
    "upper_half_space": _Entry(
        _upper_half_space,
        {"dim": 2},
        "upper half space, Hessian structure of constant Hessian curvature 4",
    ),
    "affine_r3": _Entry(
        _affine_r3,
        {"a": 1.0, "b": 1.0},
        "R^3 with g = aδ and a constant-coefficient connection; flat Levi-Civita",
    ),
}


def build_model(spec: ModelSpec | str, as_printed: bool = False, **params) -> StatisticalManifoldModel:
    """Instantiate a registry model. Unknown names or parameters raise UsageError."""
    if isinstance(spec, str):
        spec = ModelSpec(spec, params)
    elif params:
        spec = ModelSpec(spec.name, {**spec.params, **params})
    entry = REGISTRY.get(spec.name)
    if entry is None:
        raise UsageError(f"unknown model {spec.name!r}; choose from {sorted(REGISTRY)}")
    unknown = set(spec.params) - set(entry.params)
    if unknown:
        raise UsageError(f"{spec.name} does not take parameters {sorted(unknown)}")
    kwargs = {**entry.params, **spec.params}
    for key, value in kwargs.items():
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise UsageError(f"{spec.name}: parameter {key} must be a finite number, got {value!r}")
    return entry.builder(as_printed=as_printed, **kwargs)


# ------------------------------------------------------ density-based oracle


@dataclass(frozen=True)
class DensityFamily:
    """Scalar-sample family with ``log_density(x, θ)`` vectorised over ``x``.

    ``support(θ)`` returns a finite interval holding all but a negligible
    part of the mass; with ``log_scale`` the integral runs over log x.
    """

    name: str
    log_density: Callable[[np.ndarray, np.ndarray], np.ndarray]
    support: Callable[[np.ndarray], tuple]
    theta_domain: ChartDomain
    log_scale: bool = False


_LOG_2PI = math.log(2 * math.pi)


def _normal_log_density(mean_scale):
    def log_density(x, theta):
        mu, sigma = mean_scale * theta[0], theta[1]
        return -0.5 * _LOG_2PI - np.log(sigma) - (x - mu) ** 2 / (2 * sigma**2)

    return log_density


def _ig_log_density(x, theta):
    t1, t2 = theta
    return 0.5 * np.log(t2 / (2 * math.pi * x)) - t2 * x / 2 + t2 / t1 - t2 / (2 * t1**2 * x)


def density_family(name: str) -> DensityFamily:
    """Density families for the oracle.

    ``normal_family`` uses mean √2·θ¹ and standard deviation θ², the
    parametrisation whose Fisher metric is 2(θ²)⁻²δ. ``normal_family_literal``
    uses mean θ¹ and has Fisher metric diag(1, 2)/(θ²)².
    """
    half_plane = ChartDomain(2, lambda p: p[1] > 0, "{θ² > 0}")
    if name in ("normal_family", "normal_family_literal"):
        scale = math.sqrt(2) if name == "normal_family" else 1.0
        return DensityFamily(
            name,
            _normal_log_density(scale),
            lambda th: (scale * th[0] - 12 * th[1], scale * th[0] + 12 * th[1]),
            half_plane,
        )
    if name == "inverse_gaussian_family":
        return DensityFamily(
            name,
            _ig_log_density,
            lambda th: (th[1] / (320 * th[0] ** 2), 200 / th[1]),
            _positive_quadrant(),
            log_scale=True,
        )
    raise UsageError(f"no density family named {name!r}")


def fisher_structure_from_density(
    family: DensityFamily,
    theta,
    quadrature: QuadratureRule | None = None,
    scheme: FDScheme = DEFAULT_SCHEME,
):
    """g_ij = E[∂_iℓ ∂_jℓ] and C_ijk = E[∂_iℓ ∂_jℓ ∂_kℓ] by quadrature.

    Scores are finite differences of the log density in θ.
    """
    quadrature = quadrature or QuadratureRule()
    theta = as_point(theta, family.theta_domain.dim)
    family.theta_domain.check(theta)
    n = theta.shape[0]

    def integrand(u):
        x = np.exp(u) if family.log_scale else u
        ell = family.log_density(x, theta)
        dens = np.exp(ell) * (x if family.log_scale else 1.0)
        s = np.stack(
            [fd_derivative(lambda th: family.log_density(x, th), theta, i, scheme, family.theta_domain) for i in range(n)]
        )
        g = np.einsum("im,jm->ijm", s, s)
        C = np.einsum("ijm,km->ijkm", g, s)
        return np.concatenate([dens[None], (g * dens).reshape(n * n, -1), (C * dens).reshape(n**3, -1)])

    lo, hi = family.support(theta)
    if family.log_scale:
        lo, hi = math.log(lo), math.log(hi)
    total = integrate(integrand, lo, hi, quadrature)
    mass = total[0]
    if abs(mass - 1) > 1e-6:
        raise QuadratureError(f"{family.name}: density mass {mass:.9f} at θ={theta.tolist()} (support too narrow?)")
    g = total[1 : 1 + n * n].reshape(n, n)
    C = total[1 + n * n :].reshape(n, n, n)
    return g, C


def _check_cubic(C, tol=1e-10):
    C = np.asarray(C, dtype=float)
    scale = max(1.0, float(np.abs(C).max()))
    for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
        if np.abs(C - C.transpose(perm)).max() > tol * scale:
            raise StructureError("cubic tensor is not totally symmetric")
    return C


def connection_from_cubic(
    metric: Callable,
    cubic: Callable,
    alpha: float,
    p,
    *,
    domain: ChartDomain | None = None,
    metric_derivative: Callable | None = None,
    scheme: FDScheme = DEFAULT_SCHEME,
) -> np.ndarray:
    """Γ^(α)_ij,k = Γ°_ij,k − (α/2) C_ijk, returned with the index raised."""
    p = as_point(p)
    C = _check_cubic(cubic(p))
    base = StatisticalManifoldModel(
        label="cubic",
        domain=domain or ChartDomain(p.shape[0]),
        metric=metric,
        connection=ChristoffelField(lambda q: np.zeros((p.shape[0],) * 3)),
        metric_derivative=metric_derivative,
        scheme=scheme,
    )
    return levi_civita(base, p) - 0.5 * alpha * raise_index(C, base.g(p))


def model_from_cubic(metric, cubic, domain, label="from cubic", metric_derivative=None, **extra):
    """Model whose connection is the α = 1 member generated by ``cubic``."""
    conn = ChristoffelField(
        lambda p: connection_from_cubic(metric, cubic, 1.0, p, domain=domain, metric_derivative=metric_derivative),
        "composed",
        label,
    )
    return StatisticalManifoldModel(
        label=label,
        domain=domain,
        metric=metric,
        connection=conn,
        cubic=cubic,
        metric_derivative=metric_derivative,
        **extra,
    )
