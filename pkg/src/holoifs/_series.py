"""Truncated power-series arithmetic on plain coefficient arrays.

A series is a complex array ``p`` with ``p[k]`` the coefficient of ``z**k``.
All germs handled by the package fix the origin, so ``p[0] == 0`` throughout;
keeping the constant slot makes convolution indexing direct.
"""

from __future__ import annotations

import numpy as np

from .errors import NonInvertible


def zero(order: int) -> np.ndarray:
    return np.zeros(order + 1, dtype=np.complex128)


def pad(p: np.ndarray, order: int) -> np.ndarray:
    out = zero(order)
    n = min(len(p), order + 1)
    out[:n] = p[:n]
    return out


def mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    return np.convolve(a, b)[: order + 1]


def compose(outer: np.ndarray, inner: np.ndarray, order: int) -> np.ndarray:
    """``outer(inner(z))`` truncated at ``order``; ``inner[0]`` must be 0."""
    if abs(inner[0]) != 0:
        raise ValueError("inner series must vanish at the origin")
    outer = pad(outer, order)
    result = zero(order)
    for k in range(order, 0, -1):
        result = mul(result, inner, order)
        result[0] += outer[k]
    result = mul(result, inner, order)
    result[0] += outer[0]
    return result


def reversion(f: np.ndarray, order: int) -> np.ndarray:
    """Compositional inverse ``g`` with ``f(g(z)) = z`` up to ``order``."""
    f = pad(f, order)
    if f[0] != 0:
        raise ValueError("can only revert a series fixing the origin")
    c1 = f[1]
    if c1 == 0:
        raise NonInvertible("series with zero linear coefficient has no inverse")
    g = zero(order)
    g[1] = 1.0 / c1
    for n in range(2, order + 1):
        err = compose(f, g, n)[n]
        g[n] = -err / c1
    return g


def evaluate(p: np.ndarray, z):
    """Horner evaluation; ``z`` may be a complex scalar or array."""
    if isinstance(z, np.ndarray):
        acc = np.zeros(z.shape, dtype=np.complex128)
    else:
        acc = 0.0 + 0.0j
    for c in p[::-1]:
        acc = acc * z + c
    return acc


def derive(p: np.ndarray) -> np.ndarray:
    """Coefficient array of the formal derivative."""
    if len(p) == 1:
        return np.zeros(1, dtype=np.complex128)
    return p[1:] * np.arange(1, len(p), dtype=np.float64)
