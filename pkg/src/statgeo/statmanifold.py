"""Connections, curvature and statistical-structure identities on a chart."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import FitError, NotConvexError, SingularMetricError, StructureError, UsageError
from .tensor_core import (
    DEFAULT_SCHEME,
    ChartDomain,
    FDScheme,
    as_point,
    fd_gradient,
    fd_hessian,
    frame_components,
    lower_index,
    metric_inverse,
    orthonormal_frame,
    raise_index,
    validate_metric,
)

__all__ = [
    "Tolerances",
    "ChristoffelField",
    "StatisticalManifoldModel",
    "StatisticalCheck",
    "CurvatureReport",
    "levi_civita",
    "levi_civita_field",
    "dual_connection",
    "dual_field",
    "alpha_connection",
    "alpha_field",
    "check_statistical",
    "difference_tensor",
    "covariant_derivative_difference",
    "curvature",
    "curvature_model_tensor",
    "constant_curvature_fit",
    "interpolate_alpha_curvature",
    "flat_alpha_values",
    "hessian_curvature_residual",
    "curvature_decomposition_residual",
    "hessian_metric_from_potential",
]


@dataclass(frozen=True)
class Tolerances:
    """Pass/fail thresholds. Residuals are measured in a g-orthonormal frame."""

    analytic: float = 1e-8
    fd: float = 1e-5
    statistical: float = 1e-6
    curvature: float = 1e-6
    hessian: float = 1e-5
    flatness: float = 1e-6

    def replace(self, **overrides) -> "Tolerances":
        unknown = set(overrides) - set(self.__dataclass_fields__)
        if unknown:
            raise UsageError(f"unknown tolerance keys {sorted(unknown)}")
        return Tolerances(**{**self.__dict__, **{k: float(v) for k, v in overrides.items()}})

    def as_dict(self) -> dict:
        return dict(self.__dict__)


DEFAULT_TOLERANCES = Tolerances()


class ChristoffelField:
    """Point -> Γ^k_ij, stored as ``G[k, i, j]``."""

    PROVENANCES = ("analytic", "finite-difference", "composed")

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], provenance: str = "analytic", label: str = ""):
        if provenance not in self.PROVENANCES:
            raise UsageError(f"unknown provenance {provenance!r}")
        self._fn = fn
        self.provenance = provenance
        self.label = label

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self._fn(as_point(p)), dtype=float)

    def torsion(self, p) -> float:
        G = self(p)
        return float(np.abs(G - G.transpose(0, 2, 1)).max())

    def __repr__(self):
        return f"ChristoffelField({self.label or '?'}, {self.provenance})"


@dataclass(frozen=True)
class StatisticalManifoldModel:
    """A chart with metric g and torsion-free connection ∇.

    ``metric_derivative`` (optional) returns ``dg[i, j, k] = ∂_i g_jk``; when
    absent it is computed by finite differences. ``cubic`` (optional) returns
    the totally symmetric ``C[i, j, k] = (∇_i g)_jk``.
    """

    label: str
    domain: ChartDomain
    metric: Callable[[np.ndarray], np.ndarray]
    connection: ChristoffelField
    cubic: Callable[[np.ndarray], np.ndarray] | None = None
    metric_derivative: Callable[[np.ndarray], np.ndarray] | None = None
    scheme: FDScheme = DEFAULT_SCHEME
    reference_point: tuple | None = None
    sample_box: tuple | None = None
    known: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.domain.dim

    def point(self, p) -> np.ndarray:
        p = as_point(p, self.dim)
        self.domain.check(p)
        return p

    def g(self, p) -> np.ndarray:
        return validate_metric(self.metric(self.point(p)))

    def dg(self, p) -> np.ndarray:
        p = self.point(p)
        if self.metric_derivative is not None:
            return np.asarray(self.metric_derivative(p), dtype=float)
        return fd_gradient(self.metric, p, self.scheme, self.domain)

    def with_connection(self, connection: ChristoffelField, label: str | None = None, cubic=None):
        return StatisticalManifoldModel(
            label=label or self.label,
            domain=self.domain,
            metric=self.metric,
            connection=connection,
            cubic=cubic,
            metric_derivative=self.metric_derivative,
            scheme=self.scheme,
            reference_point=self.reference_point,
            sample_box=self.sample_box,
            known=dict(self.known),
        )


# ---------------------------------------------------------------- connections


def levi_civita(model: StatisticalManifoldModel, p) -> np.ndarray:
    """Γ°^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij)."""
    p = model.point(p)
    ginv = metric_inverse(model.g(p))
    dg = model.dg(p)
    low = 0.5 * (dg.transpose(0, 1, 2) + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0))
    # low[i, j, l] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    return np.einsum("kl,ijl->kij", ginv, low)


def levi_civita_field(model: StatisticalManifoldModel) -> ChristoffelField:
    prov = "composed" if model.metric_derivative is not None else "finite-difference"
    return ChristoffelField(lambda p: levi_civita(model, p), prov, f"{model.label}:levi-civita")


def _frame_torsion(G, E) -> float:
    T = G - G.transpose(0, 2, 1)
    return float(np.abs(frame_components(T, E, 1)).max())


def dual_connection(model: StatisticalManifoldModel, p, tol: float | None = None) -> np.ndarray:
    """Γ* from ∂_i g_jk = Γ_ij,k + Γ*_ik,j.

    Raises StructureError when the resulting symbols carry torsion above
    ``tol``, which happens exactly when ∇g fails the Codazzi symmetry.
    """
    tol = DEFAULT_TOLERANCES.statistical if tol is None else tol
    p = model.point(p)
    g = model.g(p)
    dg = model.dg(p)
    low = lower_index(model.connection(p), g)
    dual_low = dg.transpose(0, 2, 1) - low.transpose(0, 2, 1)
    # dual_low[i, k, j] = ∂_i g_jk − Γ_ij,k
    dual = raise_index(dual_low, g)
    resid = _frame_torsion(dual, orthonormal_frame(g))
    if resid > tol:
        raise StructureError(
            f"{model.label}: dual connection has torsion {resid:.3g} at {p.tolist()}; "
            "(∇, g) is not a statistical structure"
        )
    return dual


def dual_field(model: StatisticalManifoldModel, tol: float | None = None) -> ChristoffelField:
    return ChristoffelField(lambda p: dual_connection(model, p, tol), "composed", f"{model.label}:dual")


def alpha_connection(model: StatisticalManifoldModel, alpha: float, p, tol: float | None = None) -> np.ndarray:
    """∇^(α) = (1+α)/2 ∇ + (1−α)/2 ∇*."""
    p = model.point(p)
    G = model.connection(p)
    if alpha == 1:
        return G
    dual = dual_connection(model, p, tol)
    return 0.5 * (1 + alpha) * G + 0.5 * (1 - alpha) * dual


def alpha_field(model: StatisticalManifoldModel, alpha: float, tol: float | None = None) -> ChristoffelField:
    if alpha == 1:
        return model.connection
    return ChristoffelField(
        lambda p: alpha_connection(model, alpha, p, tol), "composed", f"{model.label}:alpha={alpha:g}"
    )


@dataclass
class StatisticalCheck:
    torsion: float
    codazzi: float
    cubic_asymmetry: float
    per_point: list
    tolerance: float

    @property
    def passed(self) -> bool:
        return max(self.torsion, self.codazzi, self.cubic_asymmetry) < self.tolerance


def nabla_metric(model: StatisticalManifoldModel, p, connection: np.ndarray | None = None) -> np.ndarray:
    """``N[i, j, k] = (∇_i g)_jk``."""
    p = model.point(p)
    G = model.connection(p) if connection is None else connection
    low = lower_index(G, model.g(p))
    return model.dg(p) - low - low.transpose(0, 2, 1)


def check_statistical(model: StatisticalManifoldModel, samples: Sequence, tol: float | None = None) -> StatisticalCheck:
    """Torsion and Codazzi residuals of (∇, g), maximised over ``samples``."""
    tol = DEFAULT_TOLERANCES.statistical if tol is None else tol
    samples = list(samples)
    if not samples:
        raise UsageError("check_statistical needs at least one sample point")
    rows = []
    for q in samples:
        p = model.point(q)
        g = model.g(p)
        E = orthonormal_frame(g)
        G = model.connection(p)
        N = nabla_metric(model, p, G)
        codazzi = float(np.abs(frame_components(N - N.transpose(1, 0, 2), E, 0)).max())
        asym = 0.0
        if model.cubic is not None:
            C = np.asarray(model.cubic(p), dtype=float)
            asym = max(
                float(np.abs(frame_components(C - C.transpose(perm), E, 0)).max())
                for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0))
            )
        rows.append({"point": p.tolist(), "torsion": _frame_torsion(G, E), "codazzi": codazzi, "cubic_asymmetry": asym})
    return StatisticalCheck(
        torsion=max(r["torsion"] for r in rows),
        codazzi=max(r["codazzi"] for r in rows),
        cubic_asymmetry=max(r["cubic_asymmetry"] for r in rows),
        per_point=rows,
        tolerance=tol,
    )


def difference_tensor(model: StatisticalManifoldModel, p) -> np.ndarray:
    """K^k_ij = Γ^k_ij − Γ°^k_ij."""
    return model.connection(p) - levi_civita(model, p)


# ------------------------------------------------------------------ curvature


def curvature(
    connection: ChristoffelField,
    p,
    scheme: FDScheme = DEFAULT_SCHEME,
    domain: ChartDomain | None = None,
) -> np.ndarray:
    """R^l_ijk = ∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik."""
    p = as_point(p)
    if domain is not None:
        domain.check(p)
    G = connection(p)
    dG = fd_gradient(connection, p, scheme, domain).transpose(1, 0, 2, 3)
    quad = np.einsum("lim,mjk->lijk", G, G)
    return dG - dG.transpose(0, 2, 1, 3) + quad - quad.transpose(0, 2, 1, 3)


def curvature_model_tensor(g) -> np.ndarray:
    """T^l_ijk = g_jk δ^l_i − g_ik δ^l_j, so constant curvature k means R = k·T."""
    g = np.asarray(g, dtype=float)
    delta = np.eye(g.shape[0])
    return np.einsum("li,jk->lijk", delta, g) - np.einsum("lj,ik->lijk", delta, g)


@dataclass
class CurvatureReport:
    k_hat: float
    max_residual: float
    points: list
    tolerance: float
    max_norm: float = 0.0

    @property
    def verdict(self) -> str:
        return "constant" if self.max_residual <= self.tolerance else "not_constant"


def constant_curvature_fit(
    model: StatisticalManifoldModel,
    connection: ChristoffelField | None,
    samples: Sequence,
    tol: float | None = None,
) -> CurvatureReport:
    """Least-squares constant k with R ≈ k{g(Y,Z)X − g(X,Z)Y}.

    The fit runs over every component at every sample, in a g-orthonormal
    frame, so the model tensor is the same at all points.
    """
    tol = DEFAULT_TOLERANCES.curvature if tol is None else tol
    connection = model.connection if connection is None else connection
    samples = list(samples)
    if len(samples) < 2:
        raise UsageError("constant_curvature_fit needs at least 2 samples")
    if model.dim < 2:
        raise UsageError("constant curvature is only meaningful for dim >= 2")
    frames = []
    for q in samples:
        p = model.point(q)
        E = orthonormal_frame(model.g(p))
        R = curvature(connection, p, model.scheme, model.domain)
        frames.append((p, frame_components(R, E, 1)))
    T = curvature_model_tensor(np.eye(model.dim))
    denom = len(frames) * float(np.sum(T * T))
    Rs = [Rf for _, Rf in frames]
    if denom < 1e-300:
        if max(np.abs(Rf).max() for Rf in Rs) > tol:
            raise FitError("model tensor vanishes while curvature does not")
        return CurvatureReport(0.0, 0.0, [], tol)
    k_hat = float(sum(np.sum(Rf * T) for Rf in Rs) / denom)
    pts = [{"point": p.tolist(), "residual": float(np.abs(Rf - k_hat * T).max())} for p, Rf in frames]
    return CurvatureReport(
        k_hat=k_hat,
        max_residual=max(r["residual"] for r in pts),
        points=pts,
        tolerance=tol,
        max_norm=max(float(np.abs(Rf).max()) for Rf in Rs),
    )


def interpolate_alpha_curvature(k1: float, k2: float, alpha1: float, alpha2: float, alpha: float) -> float:
    """Curvature of ∇^(α) given constant curvatures k1, k2 at α1, α2 (|α1| ≠ |α2|)."""
    if abs(alpha1) == abs(alpha2):
        raise UsageError("interpolation needs |alpha1| != |alpha2|")
    if alpha == alpha1:
        return float(k1)
    if alpha == alpha2:
        return float(k2)
    return (k2 * alpha1**2 - k1 * alpha2**2 + (k1 - k2) * alpha**2) / (alpha1**2 - alpha2**2)


def flat_alpha_values(k1: float, k2: float, alpha1: float, alpha2: float) -> set:
    """The α with flat ∇^(α): α² = (k2 α1² − k1 α2²)/(k2 − k1)."""
    if k1 == k2:
        raise UsageError("flat_alpha_values needs k1 != k2")
    if abs(alpha1) == abs(alpha2):
        raise UsageError("flat_alpha_values needs |alpha1| != |alpha2|")
    v = (k2 * alpha1**2 - k1 * alpha2**2) / (k2 - k1)
    if v < 0:
        return set()
    r = math.sqrt(v)
    return {r, -r} if r else {0.0}


# ------------------------------------------------------- Hessian-type checks


def covariant_derivative_difference(
    connection: ChristoffelField,
    K_field: Callable[[np.ndarray], np.ndarray],
    p,
    scheme: FDScheme = DEFAULT_SCHEME,
    domain: ChartDomain | None = None,
) -> np.ndarray:
    """``DK[i, l, j, k]`` = components of (∇_{∂i} K)(∂j, ∂k) along ∂l.

    (∇_X K)(Y,Z) = ∂_X K(Y,Z) + Γ(X, K(Y,Z)) − K(Γ(X,Y), Z) − K(Y, Γ(X,Z)).
    """
    p = as_point(p)
    G = connection(p)
    K = np.asarray(K_field(p), dtype=float)
    dK = fd_gradient(K_field, p, scheme, domain)
    return (
        dK
        + np.einsum("lim,mjk->iljk", G, K)
        - np.einsum("lmk,mij->iljk", K, G)
        - np.einsum("ljm,mik->iljk", K, G)
    )


def _difference_field(model):
    return lambda p: difference_tensor(model, p)


def hessian_curvature_residual(
    model: StatisticalManifoldModel,
    samples: Sequence,
    c: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """max |(∇_X K)(Y,Z) + (c/2){g(X,Y)Z + g(X,Z)Y}| over samples, in frame.

    Raises StructureError if ∇ is not flat (the Hessian hypothesis).
    """
    samples = list(samples)
    if not samples:
        raise UsageError("hessian_curvature_residual needs samples")
    worst = 0.0
    for q in samples:
        p = model.point(q)
        E = orthonormal_frame(model.g(p))
        R = frame_components(curvature(model.connection, p, model.scheme, model.domain), E, 1)
        norm = float(np.abs(R).max())
        if norm > tol.flatness:
            raise StructureError(f"{model.label}: connection is not flat at {p.tolist()} (|R| = {norm:.3g})")
        DK = covariant_derivative_difference(model.connection, _difference_field(model), p, model.scheme, model.domain)
        g = model.g(p)
        delta = np.eye(model.dim)
        target = -0.5 * c * (np.einsum("ij,lk->iljk", g, delta) + np.einsum("ik,lj->iljk", g, delta))
        # DK is (1,3) with the contravariant index in axis 1
        diff = np.moveaxis(DK - target, 1, 0)
        worst = max(worst, float(np.abs(frame_components(diff, E, 1)).max()))
    return worst


def curvature_decomposition_residual(model: StatisticalManifoldModel, p) -> float:
    """Residual of R° = R − (∇K)(Y,Z;X) + (∇K)(Z,X;Y) + K(X,K(Y,Z)) − K(Y,K(Z,X))."""
    p = model.point(p)
    lc = levi_civita_field(model)
    R = curvature(model.connection, p, model.scheme, model.domain)
    R0 = curvature(lc, p, model.scheme, model.domain)
    DK = covariant_derivative_difference(model.connection, _difference_field(model), p, model.scheme, model.domain)
    K = difference_tensor(model, p)
    # nk[l, i, j, k] = (∇_i K)^l_jk
    nk = DK.transpose(1, 0, 2, 3)
    rhs = (
        R
        - nk
        + nk.transpose(0, 3, 1, 2)  # (∇_j K)^l_ki
        + np.einsum("lim,mjk->lijk", K, K)
        - np.einsum("ljm,mki->lijk", K, K)
    )
    E = orthonormal_frame(model.g(p))
    return float(np.abs(frame_components(R0 - rhs, E, 1)).max())


def hessian_metric_from_potential(
    phi: Callable[[np.ndarray], float],
    domain: ChartDomain,
    step: float = 1e-3,
) -> Callable[[np.ndarray], np.ndarray]:
    """Metric field g_ij = ∂²φ/∂x^i∂x^j evaluated by finite differences."""

    def metric(p):
        p = as_point(p, domain.dim)
        domain.check(p)
        H = fd_hessian(phi, p, step, domain)
        try:
            return validate_metric(H, sym_tol=1e-9)
        except SingularMetricError as exc:
            raise NotConvexError(f"Hessian of the potential is not positive definite at {p.tolist()}") from exc

    return metric
