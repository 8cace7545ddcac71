"""Power-series germs, Koenigs linearization, and functional roots.

A germ here is a truncated power series with zero constant term — a
holomorphic map fixing the origin.  Taylor data for the map variants comes
from exact recurrences (affine, square-root branch) chained through series
composition and reversion, so germ extraction needs no numerical
differentiation.

The linearizer of a germ ``R`` with multiplier ``0 < |lambda| < 1`` is the
normalized parametrization ``psi`` with ``R(psi(w)) = psi(lambda * w)`` and
``psi'(0) = 1``.  Compositional l-th roots of ``R`` are conjugates of the
l-th roots of ``lambda``: ``g = psi ∘ (nu·) ∘ psi^{-1}``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _series
from .errors import InvalidMultiplier, NoConvergence, NonInvertible, NotAFixedPoint
from .maps import Affine, Composite, HoloMap, InverseOf, SqrtBranch

#: default truncation order (coefficients c_1 .. c_ORDER)
ORDER = 32

#: fixed-point residual accepted by series_of_map
FIXED_POINT_TOL = 1e-12

#: composition residual accepted by functional_roots
ROOT_RESIDUAL_TOL = 1e-8

#: geometric ratio used to pick a safe sampling radius
_SAMPLE_RATIO = 0.25


@dataclass(frozen=True, eq=False)
class PowerSeriesGerm:
    """Truncated series ``c_1 z + c_2 z^2 + ...`` of a map fixing 0."""

    coefficients: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coefficients, dtype=np.complex128).reshape(-1)
        if arr.size == 0:
            raise ValueError("a germ needs at least its linear coefficient")
        object.__setattr__(self, "coefficients", arr)

    @property
    def order(self) -> int:
        return len(self.coefficients)

    @property
    def multiplier(self) -> complex:
        return complex(self.coefficients[0])

    @property
    def sample_radius(self) -> float:
        """Radius where the truncation tail is provably negligible.

        With growth ``g = max_k |c_k|^{1/k}`` the terms at radius
        ``0.25 / g`` are dominated by ``0.25^k``, so the tail past the
        truncation order is below 1e-10.
        """
        mags = np.abs(self.coefficients)
        ks = np.arange(1, self.order + 1)
        growth = float(np.max(mags ** (1.0 / ks))) if np.any(mags > 0) else 0.0
        return _SAMPLE_RATIO / max(1.0, growth)

    def tail_bound(self, radius: float) -> float:
        """Crude geometric bound on the dropped tail at ``radius``."""
        mags = np.abs(self.coefficients)
        ks = np.arange(1, self.order + 1)
        growth = float(np.max(mags ** (1.0 / ks))) if np.any(mags > 0) else 0.0
        q = growth * radius
        if q >= 1.0:
            return math.inf
        return q ** (self.order + 1) / (1.0 - q)

    def __call__(self, z):
        coeffs = np.concatenate((self.coefficients[::-1], [0.0]))
        return np.polyval(coeffs, z)

    def derivative(self, z):
        ks = np.arange(1, self.order + 1)
        return np.polyval((self.coefficients * ks)[::-1], z)

    def _full(self) -> np.ndarray:
        return np.concatenate(([0.0], self.coefficients))

    def compose(self, inner: "PowerSeriesGerm") -> "PowerSeriesGerm":
        """Series of ``self ∘ inner`` truncated at the smaller order."""
        n = min(self.order, inner.order)
        out = _series.compose(self._full()[: n + 1], inner._full()[: n + 1], n)
        return PowerSeriesGerm(out[1:])

    def inverse(self) -> "PowerSeriesGerm":
        if self.coefficients[0] == 0:
            raise NonInvertible("zero linear coefficient")
        out = _series.reversion(self._full(), self.order)
        return PowerSeriesGerm(out[1:])

    def iterate(self, l: int) -> "PowerSeriesGerm":
        if l < 1:
            raise ValueError("iterate needs l >= 1")
        out = self
        for _ in range(l - 1):
            out = out.compose(self)
        return out

    def scaled(self, factor: complex) -> "PowerSeriesGerm":
        """Germ of ``z -> self(factor * z)``."""
        ks = np.arange(1, self.order + 1)
        return PowerSeriesGerm(self.coefficients * np.power(complex(factor), ks))


def _taylor_pair(m: HoloMap, point: complex, order: int) -> tuple[complex, np.ndarray]:
    """Image value and centered coefficients ``c_1..c_order`` of ``m`` at ``point``."""
    point = complex(point)
    if isinstance(m, Affine):
        coeffs = np.zeros(order, dtype=np.complex128)
        coeffs[0] = m.alpha
        return m.alpha * point + m.b, coeffs
    if isinstance(m, SqrtBranch):
        u0 = complex(m(point))
        if u0 == 0:
            raise NonInvertible("expansion at the branch point")
        coeffs = np.zeros(order, dtype=np.complex128)
        c = u0
        for k in range(1, order + 1):
            c = c * ((1.5 - k) / k) / (u0 * u0)
            coeffs[k - 1] = c
        return u0, coeffs
    if isinstance(m, Composite):
        value = point
        full = None
        for factor in reversed(m.factors):
            value, coeffs = _taylor_pair(factor, value, order)
            layer = np.concatenate(([0.0], coeffs))
            full = layer if full is None else _series.compose(layer, full, order)
        if full is None:
            coeffs = np.zeros(order, dtype=np.complex128)
            coeffs[0] = 1.0
            return point, coeffs
        return value, full[1:]
    if isinstance(m, InverseOf):
        value = complex(m(point))
        _, inner_coeffs = _taylor_pair(m.inner, value, order)
        if inner_coeffs[0] == 0:
            raise NonInvertible("inner derivative vanishes")
        rev = _series.reversion(np.concatenate(([0.0], inner_coeffs)), order)
        return value, rev[1:]
    raise TypeError(f"no Taylor rule for {type(m).__name__}")


def series_of_map(m: HoloMap, point: complex, order: int = ORDER) -> PowerSeriesGerm:
    """Centered Taylor germ of ``m`` at a fixed point.

    The germ represents ``z -> m(point + z) - point``; the point must be
    fixed within ``FIXED_POINT_TOL`` so the constant term genuinely vanishes.
    """
    value, coeffs = _taylor_pair(m, point, order)
    if abs(value - complex(point)) > FIXED_POINT_TOL:
        raise NotAFixedPoint(
            f"map moves {point} to {value}; germ extraction needs a fixed point"
        )
    return PowerSeriesGerm(coeffs)


def koenigs(germ: PowerSeriesGerm) -> PowerSeriesGerm:
    """Normalized linearizing parametrization of an attracting germ.

    Returns ``psi`` with ``germ(psi(w)) = psi(multiplier * w)`` and
    ``psi'(0) = 1``, solving coefficient by coefficient; the divisor
    ``lambda^n - lambda`` never vanishes for ``0 < |lambda| < 1``.
    """
    lam = germ.multiplier
    if not 0.0 < abs(lam) < 1.0:
        raise InvalidMultiplier(f"need 0 < |multiplier| < 1, got |{lam}| = {abs(lam)}")
    if abs(lam) > 0.9:
        warnings.warn(
            "multiplier close to 1; linearization coefficients may be ill-conditioned",
            stacklevel=2,
        )
    n = germ.order
    r = germ._full()
    psi = np.zeros(n + 1, dtype=np.complex128)
    psi[1] = 1.0
    for deg in range(2, n + 1):
        # psi[deg] is still zero here, so the composition collects exactly
        # the lower-order contributions C with lam*b + C = lam^deg * b
        c = _series.compose(r, psi, deg)[deg]
        psi[deg] = c / (lam**deg - lam)
    return PowerSeriesGerm(psi[1:])


def composition_residual(
    g: PowerSeriesGerm, l: int, target: PowerSeriesGerm, samples: int = 64
) -> float:
    """Max of ``|g^l - target|`` over a circle inside both sample radii."""
    radius = 0.5 * min(g.sample_radius, target.sample_radius)
    z = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    w = z.copy()
    for _ in range(l):
        w = g(w)
    return float(np.max(np.abs(w - target(z))))


def functional_roots(germ: PowerSeriesGerm, l: int) -> tuple[PowerSeriesGerm, ...]:
    """All ``l`` compositional roots ``g`` with ``g^l = germ`` and ``g(0) = 0``.

    The root multipliers are the l-th roots of the germ multiplier, listed
    principal first and then counterclockwise.  Each candidate is verified
    by composing it back; residuals above ``ROOT_RESIDUAL_TOL`` abort.
    """
    if l < 1:
        raise ValueError("root order must be at least 1")
    lam = germ.multiplier
    if not 0.0 < abs(lam) < 1.0:
        raise InvalidMultiplier(f"need 0 < |multiplier| < 1, got |{lam}| = {abs(lam)}")
    psi = koenigs(germ)
    psi_inv = psi.inverse()
    base_mod = abs(lam) ** (1.0 / l)
    base_arg = cmath.phase(lam)
    roots = []
    for r in range(l):
        nu = base_mod * cmath.exp(1j * (base_arg + 2.0 * math.pi * r) / l)
        g = psi.scaled(nu).compose(psi_inv)
        res = composition_residual(g, l, germ)
        if res > ROOT_RESIDUAL_TOL:
            raise NoConvergence(
                f"root candidate {r} fails verification (residual {res:.3e})"
            )
        roots.append(g)
    return tuple(roots)
