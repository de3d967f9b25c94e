"""Quadrature and extrapolation helpers."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_nodes(a, b, panels, order):
    """Composite Gauss-Legendre nodes/weights on [a, b], vectorized over a and b.

    ``a`` and ``b`` may be arrays of any (common) shape S; the result has
    shape S + (panels * order,).
    """
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    x, w = gauss_legendre(order)
    edges = np.arange(panels) / panels
    h = (b - a) / panels
    left = a + (b - a) * edges
    nodes = (left[..., :, None] + 0.5 * h[..., None] * (x + 1.0)).reshape(a.shape[:-1] + (panels * order,))
    weights = np.broadcast_to(0.5 * h[..., None] * w, left.shape + (order,)).reshape(nodes.shape)
    return nodes, weights


def periodic_nodes(n, period=2 * np.pi):
    """Trapezoid rule on a full period (spectrally accurate for smooth periodic integrands)."""
    return np.arange(n) * (period / n), np.full(n, period / n)


def richardson(coarse, fine, ratio=2.0, order=1):
    """One Richardson step for an error ~ h^order, fine step = coarse step / ratio."""
    f = ratio**order
    return (f * fine - coarse) / (f - 1.0)


def richardson_table(values, ratio=2.0, orders=(1, 2, 3)):
    """Repeated Richardson on a sequence computed at steps h, h/ratio, h/ratio^2, ...

    Row ``j`` of the table eliminates the error terms ``h^orders[0..j-1]``.
    Returns the list of rows (each shorter by one).
    """
    rows = [np.asarray(values, dtype=float)]
    for order in orders:
        prev = rows[-1]
        if len(prev) < 2:
            break
        rows.append(richardson(prev[:-1], prev[1:], ratio, order))
    return rows


def central_difference(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)
