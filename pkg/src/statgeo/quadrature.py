"""Adaptive composite Gauss–Legendre quadrature for vector-valued integrands."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import QuadratureError, UsageError


@lru_cache(maxsize=None)
def _rule(order: int):
    return np.polynomial.legendre.leggauss(order)


@dataclass(frozen=True)
class QuadratureRule:
    """Panel order, initial panel count and the two convergence thresholds.

    A panel is accepted once its estimate agrees with the sum over its two
    halves to ``tol`` (scaled by panel width). Panels that hit ``max_depth``
    still differing by more than ``fail_tol`` raise QuadratureError.
    """

    order: int = 20
    initial_panels: int = 16
    tol: float = 1e-7
    fail_tol: float = 1e-5
    max_depth: int = 30

    def __post_init__(self):
        if self.order < 2 or self.initial_panels < 1:
            raise UsageError("quadrature needs order >= 2 and at least one panel")


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rule: QuadratureRule = QuadratureRule(),
) -> np.ndarray:
    """∫_a^b f(x) dx where ``f`` maps nodes of shape (m,) to values (..., m)."""
    if not (np.isfinite(a) and np.isfinite(b) and b > a):
        raise UsageError(f"bad integration interval [{a}, {b}]")
    nodes, weights = _rule(rule.order)

    def panel(lo, hi):
        half = 0.5 * (hi - lo)
        x = 0.5 * (hi + lo) + half * nodes
        vals = np.asarray(f(x), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError(f"integrand not finite on [{lo:.6g}, {hi:.6g}]")
        return half * (vals @ weights)

    edges = np.linspace(a, b, rule.initial_panels + 1)
    stack = [(lo, hi, panel(lo, hi), 0) for lo, hi in zip(edges[:-1], edges[1:])]
    total = 0.0
    worst = 0.0
    width = b - a
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        err = float(np.max(np.abs(left + right - whole)))
        if err <= rule.tol * (hi - lo) / width:
            total = total + left + right
        elif depth >= rule.max_depth:
            worst = max(worst, err)
            total = total + left + right
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    if worst > rule.fail_tol:
        raise QuadratureError(f"quadrature did not converge (panel disagreement {worst:.3g})")
    return np.asarray(total)
