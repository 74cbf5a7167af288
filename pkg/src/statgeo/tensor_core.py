"""Coordinate-level numerics on small dense arrays.

Index layout used throughout the package:

* Christoffel symbols ``G[k, i, j]`` = Γ^k_ij, i.e. ∇_{∂i}∂j = Σ_k G[k, i, j] ∂k.
* Lowered symbols ``L[i, j, k]`` = Γ_ij,k = Σ_l g_kl Γ^l_ij.
* Curvature ``R[l, i, j, k]`` = R^l_ijk with R(∂i, ∂j)∂k = Σ_l R^l_ijk ∂l.
* Linear operators ``A[k, i]``: column i holds the components of A∂i.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, EvalError, ShapeError, SingularMetricError, UsageError

__all__ = [
    "ChartDomain",
    "FDScheme",
    "DEFAULT_SCHEME",
    "as_point",
    "fd_derivative",
    "fd_gradient",
    "fd_hessian",
    "validate_metric",
    "metric_inverse",
    "lower_index",
    "raise_index",
    "orthonormal_frame",
    "frame_components",
]

Field = Callable[[np.ndarray], np.ndarray]

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class ChartDomain:
    """Open subset of R^dim described by a membership predicate."""

    dim: int
    contains: Callable[[np.ndarray], bool] = lambda p: True
    description: str = "R^n"

    def __post_init__(self):
        if self.dim < 1:
            raise UsageError(f"chart dimension must be positive, got {self.dim}")

    def check(self, p: np.ndarray) -> None:
        if p.shape != (self.dim,):
            raise ShapeError(f"point has shape {p.shape}, chart dimension is {self.dim}")
        if not self.contains(p):
            raise DomainError(f"point {p.tolist()} is outside {self.description}")


@dataclass(frozen=True)
class FDScheme:
    """Central finite-difference settings.

    ``order`` selects the 3-point (2) or 5-point (4) stencil; with
    ``richardson`` one step halving is extrapolated away.
    """

    step: float = 1e-4
    order: int = 4
    richardson: bool = True

    def __post_init__(self):
        if not self.step > 0:
            raise UsageError(f"FD step must be positive, got {self.step}")
        if self.order not in (2, 4):
            raise UsageError(f"FD order must be 2 or 4, got {self.order}")

    @property
    def reach(self) -> float:
        """Largest stencil offset from the evaluation point."""
        return self.step * (2 if self.order == 4 else 1)


DEFAULT_SCHEME = FDScheme()


def as_point(coords, dim: int | None = None) -> np.ndarray:
    p = np.atleast_1d(np.asarray(coords, dtype=float))
    if p.ndim != 1:
        raise ShapeError(f"a point is a flat coordinate vector, got shape {p.shape}")
    if dim is not None and p.shape[0] != dim:
        raise ShapeError(f"expected {dim} coordinates, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise UsageError(f"non-finite coordinates {p.tolist()}")
    return p


def _evaluate(field: Field, q: np.ndarray, domain: ChartDomain | None) -> np.ndarray:
    if domain is not None and not domain.contains(q):
        raise DomainError(f"stencil point {q.tolist()} is outside {domain.description}")
    value = np.asarray(field(q), dtype=float)
    if not np.all(np.isfinite(value)):
        raise EvalError(f"field is not finite at {q.tolist()}")
    return value


def _central(field, p, axis, h, order, domain):
    e = np.zeros_like(p)
    e[axis] = h
    if order == 2:
        return (_evaluate(field, p + e, domain) - _evaluate(field, p - e, domain)) / (2 * h)
    f1 = _evaluate(field, p + e, domain) - _evaluate(field, p - e, domain)
    f2 = _evaluate(field, p + 2 * e, domain) - _evaluate(field, p - 2 * e, domain)
    return (8 * f1 - f2) / (12 * h)


def fd_derivative(
    field: Field,
    p,
    axis: int,
    scheme: FDScheme = DEFAULT_SCHEME,
    domain: ChartDomain | None = None,
) -> np.ndarray:
    """Partial derivative of ``field`` along coordinate ``axis`` at ``p``.

    Works for fields returning arrays of any shape. Every stencil point is
    checked against ``domain`` (when given) before evaluation.
    """
    p = as_point(p)
    if not 0 <= axis < p.shape[0]:
        raise UsageError(f"axis {axis} out of range for a {p.shape[0]}-dimensional point")
    h = scheme.step
    coarse = _central(field, p, axis, h, scheme.order, domain)
    if not scheme.richardson:
        return coarse
    fine = _central(field, p, axis, h / 2, scheme.order, domain)
    factor = 2.0**scheme.order
    return (factor * fine - coarse) / (factor - 1)


def fd_gradient(
    field: Field,
    p,
    scheme: FDScheme = DEFAULT_SCHEME,
    domain: ChartDomain | None = None,
) -> np.ndarray:
    """All partials stacked on a new leading axis: ``out[i] = ∂_i field``."""
    p = as_point(p)
    return np.stack([fd_derivative(field, p, i, scheme, domain) for i in range(p.shape[0])])


def fd_hessian(
    phi: Callable[[np.ndarray], float],
    p,
    step: float = 1e-3,
    domain: ChartDomain | None = None,
) -> np.ndarray:
    """Second partials of a scalar function with 4th-order stencils."""
    p = as_point(p)
    n = p.shape[0]
    out = np.empty((n, n))
    f0 = float(_evaluate(phi, p, domain))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        fp1, fm1 = _evaluate(phi, p + ei, domain), _evaluate(phi, p - ei, domain)
        fp2, fm2 = _evaluate(phi, p + 2 * ei, domain), _evaluate(phi, p - 2 * ei, domain)
        out[i, i] = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * step**2)
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = step

            def d_j(q, ej=ej):
                a = _evaluate(phi, q + ej, domain) - _evaluate(phi, q - ej, domain)
                b = _evaluate(phi, q + 2 * ej, domain) - _evaluate(phi, q - 2 * ej, domain)
                return (8 * a - b) / (12 * step)

            out[i, j] = out[j, i] = _central(d_j, p, i, step, 4, domain)
    return out


def validate_metric(m, sym_tol: float = 1e-12) -> np.ndarray:
    """Return ``m`` as an array after checking symmetry and positive definiteness."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"metric must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise EvalError("metric has non-finite entries")
    scale = max(np.abs(m).max(), np.finfo(float).tiny)
    if np.abs(m - m.T).max() > sym_tol * scale:
        raise SingularMetricError("metric is not symmetric")
    eig = np.linalg.eigvalsh(m)
    if eig[0] <= 0:
        raise SingularMetricError(f"metric is not positive definite (eigenvalues {eig.tolist()})")
    if eig[-1] / eig[0] > MAX_CONDITION:
        raise SingularMetricError(f"metric condition number {eig[-1] / eig[0]:.3g} exceeds {MAX_CONDITION:g}")
    return m


def metric_inverse(m) -> np.ndarray:
    m = validate_metric(m)
    inv = np.linalg.solve(m, np.eye(m.shape[0]))
    return 0.5 * (inv + inv.T)


def _check_pair(T, g):
    T = np.asarray(T, dtype=float)
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if g.shape != (n, n) or T.shape != (n, n, n):
        raise ShapeError(f"tensor shape {T.shape} does not match metric shape {g.shape}")
    return T, g


def lower_index(gamma, g) -> np.ndarray:
    """Γ_ij,k = Σ_l g_kl Γ^l_ij; input ``gamma[l, i, j]``, output ``[i, j, k]``."""
    gamma, g = _check_pair(gamma, g)
    return np.einsum("kl,lij->ijk", g, gamma)


def raise_index(lowered, g) -> np.ndarray:
    """Inverse of :func:`lower_index`."""
    lowered, g = _check_pair(lowered, g)
    return np.einsum("lk,ijk->lij", metric_inverse(g), lowered)


def orthonormal_frame(g) -> np.ndarray:
    """Gram–Schmidt of the coordinate basis with respect to ``g``.

    Returns ``E`` whose columns are the frame vectors, so ``E.T @ g @ E = I``.
    """
    g = validate_metric(g)
    chol = np.linalg.cholesky(g)
    return np.linalg.inv(chol).T


def frame_components(T, E, n_upper: int) -> np.ndarray:
    """Components of a tensor in the frame ``E``.

    The first ``n_upper`` axes of ``T`` are contravariant, the rest covariant.
    """
    T = np.asarray(T, dtype=float)
    Einv = np.linalg.inv(E)
    out = T
    for axis in range(T.ndim):
        mat = Einv if axis < n_upper else E.T
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [axis])), 0, axis)
    return out
