"""Small Gauss-Legendre helpers shared by the closed forms and the pricer."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["leggauss", "panel_nodes", "composite_gl", "adaptive_gl"]


@lru_cache(maxsize=32)
def leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def panel_nodes(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on each [edges[i], edges[i+1]] panel."""
    x, w = leggauss(n)
    a = edges[:-1, None]
    b = edges[1:, None]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = (mid + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def composite_gl(f, a: float, b: float, n_panels: int, n_nodes: int = 64) -> complex:
    """Integrate a vectorized complex-valued f over [a, b] with GL panels."""
    edges = np.linspace(a, b, n_panels + 1)
    nodes, weights = panel_nodes(edges, n_nodes)
    vals = f(nodes)
    return complex(np.sum(weights * vals))


def adaptive_gl(
    f,
    a: float,
    b: float,
    tol: float = 1e-10,
    n_nodes: int = 64,
    max_panels: int = 64,
) -> complex:
    """Panel-doubling composite GL until successive values differ by < tol."""
    if a == b:
        return 0j
    panels = 1
    prev = composite_gl(f, a, b, panels, n_nodes)
    while panels < max_panels:
        panels *= 2
        cur = composite_gl(f, a, b, panels, n_nodes)
        if abs(cur - prev) <= tol * (1.0 + abs(cur)):
            return cur
        prev = cur
    return prev
