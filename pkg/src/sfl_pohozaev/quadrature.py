"""Composite Gauss-Legendre and periodic trapezoidal rules."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_panels(lo: float, hi: float, panels: int, order: int = 8):
    """Composite Gauss-Legendre rule on ``[lo, hi]`` with equal panels.

    Exact for piecewise polynomials of degree ``2 * order - 1`` on each panel.
    """
    x, w = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def tensor_rule(rule_x, rule_y):
    """Tensor product of two 1-D rules; returns ``(points (n, 2), weights (n,))``."""
    (x, wx), (y, wy) = rule_x, rule_y
    X, Y = np.meshgrid(x, y, indexing="ij")
    W = np.outer(wx, wy)
    return np.column_stack([X.ravel(), Y.ravel()]), W.ravel()


def periodic_trapezoid(count: int, period: float = 2 * np.pi):
    """Equispaced rule on a circle; exact for trigonometric degree < ``count``."""
    t = np.arange(count) * (period / count)
    return t, np.full(count, period / count)

