"""Attractor nets and separation certificates.

The net construction propagates certified disk enclosures of cylinder sets:
the image of a disk under each map variant is contained in a closed-form
disk, so after enough refinement every cylinder disk has radius below the
requested resolution and its center is a point of the net.  This yields a
Hausdorff-distance guarantee without evaluating the maps on the attractor
itself.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ._threads import thread_cap
from .errors import BudgetExceeded, DomainError, SeparationFailure
from .maps import (
    Affine,
    Composite,
    Disk,
    HoloMap,
    IfsSystem,
    InverseOf,
    SqrtBranch,
    _SqrtBranchInverse,
    inverse_map,
)

#: default cap on the number of cylinder disks per refinement level
POINT_CAP = 10**7


@dataclass(frozen=True)
class AttractorNet:
    """Finite point set within ``epsilon`` Hausdorff distance of an attractor."""

    points: np.ndarray
    epsilon: float
    depth: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128)
        object.__setattr__(self, "points", pts)
        if pts.size == 0:
            raise ValueError("a net must contain at least one point")
        if not np.all(np.isfinite(pts.real) & np.isfinite(pts.imag)):
            raise ValueError("net points must be finite")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if pts.size < 2:
            warnings.warn("net has fewer than 2 points; the attractor is degenerate")

    def __len__(self) -> int:
        return int(self.points.size)

    @property
    def is_degenerate(self) -> bool:
        return self.points.size < 2

    @property
    def xy(self) -> np.ndarray:
        """Points as an ``(n, 2)`` real array, for spatial indexing."""
        return np.column_stack((self.points.real, self.points.imag))

    def diameter(self, directions: int = 512) -> float:
        """Diameter of the point set.

        Exact over the points that are extreme in ``directions`` sampled
        directions; the relative error is below ``1 - cos(pi/directions)``.
        """
        angles = np.pi * np.arange(directions) / directions
        proj = np.real(self.points[:, None] * np.exp(-1j * angles)[None, :])
        idx = np.unique(np.concatenate((np.argmax(proj, axis=0), np.argmin(proj, axis=0))))
        cand = self.points[idx]
        return float(np.max(np.abs(cand[:, None] - cand[None, :])))


@dataclass(frozen=True)
class SeparationCertificate:
    """Numerical evidence for a separation condition.

    ``margin`` discounts the net resolution: a positive margin certifies the
    condition for the true attractor, a non-positive margin is inconclusive.
    """

    kind: str
    pairwise_distance: float
    margin: float
    osc_set: tuple[Disk, ...] | None = None
    checks: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.margin > 0.0


def _enclosure_arrays(m: HoloMap, centers: np.ndarray, radii: np.ndarray):
    """Vectorized form of ``HoloMap.image_enclosure`` over many disks."""
    if isinstance(m, Affine):
        return m.alpha * centers + m.b, abs(m.alpha) * radii
    if isinstance(m, SqrtBranch):
        v = centers - m.c
        cut_dist = np.abs(v - np.minimum(v.real, 0.0))
        if np.any(cut_dist <= radii):
            raise DomainError("cylinder disk meets a square-root branch cut")
        d = np.abs(v)
        bound = 0.5 / np.sqrt(d - radii)
        return m.sign * np.sqrt(v), bound * radii
    if isinstance(m, _SqrtBranchInverse):
        return centers * centers + m.branch.c, (2.0 * np.abs(centers) + radii) * radii
    if isinstance(m, Composite):
        for f in reversed(m.factors):
            centers, radii = _enclosure_arrays(f, centers, radii)
        return centers, radii
    if isinstance(m, InverseOf):
        return _enclosure_arrays(inverse_map(m.inner), centers, radii)
    raise TypeError(f"no enclosure rule for {type(m).__name__}")


def _refine_level(system: IfsSystem, centers: np.ndarray, radii: np.ndarray):
    """One Hutchinson refinement step, merged in map-index order."""
    workers = min(thread_cap(), len(system.maps))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda g: _enclosure_arrays(g, centers, radii), system.maps))
    else:
        parts = [_enclosure_arrays(g, centers, radii) for g in system.maps]
    return (
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
    )


def _grid_dedup(points: np.ndarray, cell: float) -> np.ndarray:
    """Keep the first point in each square grid cell, then sort."""
    keys = np.stack(
        (np.floor(points.real / cell).astype(np.int64),
         np.floor(points.imag / cell).astype(np.int64)),
        axis=1,
    )
    _, first = np.unique(keys, axis=0, return_index=True)
    kept = points[np.sort(first)]
    order = np.lexsort((kept.imag, kept.real))
    return kept[order]


def compute_net(system: IfsSystem, epsilon: float, point_cap: int = POINT_CAP) -> AttractorNet:
    """Uniform-depth epsilon-net of the attractor of ``system``.

    Refines cylinder enclosures until every cylinder disk has radius at most
    ``epsilon/4``, then removes duplicates on a grid of cell ``epsilon/4``.
    The combined covering error stays below ``epsilon``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    target = epsilon / 4.0
    centers = np.array([system.domain.center], dtype=np.complex128)
    radii = np.array([system.domain.radius], dtype=np.float64)
    depth = 0
    while float(np.max(radii)) > target:
        if len(centers) * len(system.maps) > point_cap:
            raise BudgetExceeded(
                f"net refinement needs more than {point_cap} cylinders at depth {depth + 1}"
            )
        centers, radii = _refine_level(system, centers, radii)
        depth += 1
    points = _grid_dedup(centers, target)
    return AttractorNet(points, epsilon, depth)


def _as_points(obj) -> np.ndarray:
    if isinstance(obj, AttractorNet):
        return obj.points
    return np.asarray(obj, dtype=np.complex128)


def _directed_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    tree = cKDTree(np.column_stack((b.real, b.imag)))
    d, _ = tree.query(np.column_stack((a.real, a.imag)), k=1, workers=thread_cap())
    return float(np.max(d))


def hausdorff(a, b) -> float:
    """Hausdorff distance between two finite point sets (or nets)."""
    pa, pb = _as_points(a), _as_points(b)
    return max(_directed_hausdorff(pa, pb), _directed_hausdorff(pb, pa))


def hutchinson_defect(system: IfsSystem, net: AttractorNet) -> float:
    """Hausdorff distance between the net and its own Hutchinson image."""
    images = np.concatenate([g(net.points) for g in system.maps])
    return hausdorff(net.points, images)


def _min_set_distance(a: np.ndarray, b: np.ndarray) -> float:
    tree = cKDTree(np.column_stack((b.real, b.imag)))
    d, _ = tree.query(np.column_stack((a.real, a.imag)), k=1, workers=thread_cap())
    return float(np.min(d))


def certify_ssc(system: IfsSystem, net: AttractorNet) -> SeparationCertificate:
    """Strong-separation certificate from pairwise image distances.

    The margin subtracts twice the worst first-level Lipschitz constant times
    the net resolution, which bounds how far the sampled images can sit from
    the true pieces of the attractor.
    """
    images = [g(net.points) for g in system.maps]
    pairwise = math.inf
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            pairwise = min(pairwise, _min_set_distance(images[i], images[j]))
    if not math.isfinite(pairwise):
        pairwise = 0.0  # single-map system: nothing to separate
    lip = max(float(np.max(np.abs(g.deriv(net.points)))) for g in system.maps)
    margin = pairwise - 2.0 * lip * net.epsilon
    return SeparationCertificate(
        kind="SSC",
        pairwise_distance=pairwise,
        margin=margin,
        checks={"lipschitz": lip, "epsilon": net.epsilon},
    )


def certify_strong_osc(
    system: IfsSystem, disks, net: AttractorNet, samples: int = 256
) -> SeparationCertificate:
    """Certificate for the strong open-set condition with a disk-union set.

    Three sampled checks: the net meets the union, each map sends every disk
    into the union (boundary samples with margin), and images of the union
    under distinct maps are disjoint (via certified disk enclosures).
    """
    disks = tuple(disks)
    if not disks:
        raise ValueError("need at least one candidate disk")

    def union_margin(pts: np.ndarray) -> float:
        best = np.full(pts.shape, -math.inf)
        for d in disks:
            best = np.maximum(best, d.radius - np.abs(pts - d.center))
        return float(np.min(best))

    inside = np.full(net.points.shape, -math.inf)
    for d in disks:
        inside = np.maximum(inside, d.radius - np.abs(net.points - d.center))
    meets_margin = float(np.max(inside))

    containment = math.inf
    for g in system.maps:
        for d in disks:
            containment = min(containment, union_margin(g(d.boundary(samples))))
            containment = min(containment, union_margin(np.array([g(d.center)])))

    enclosures = [[g.image_enclosure(d) for d in disks] for g in system.maps]
    gap = math.inf
    for i in range(len(system.maps)):
        for j in range(i + 1, len(system.maps)):
            for ei in enclosures[i]:
                for ej in enclosures[j]:
                    gap = min(gap, abs(ei.center - ej.center) - ei.radius - ej.radius)
    if not math.isfinite(gap):
        gap = 0.0

    margin = min(meets_margin, containment, gap)
    return SeparationCertificate(
        kind="StrongOSC",
        pairwise_distance=max(gap, 0.0),
        margin=margin,
        osc_set=disks,
        checks={
            "net_meets_set": meets_margin,
            "containment": containment,
            "image_disjointness": gap,
        },
    )


def _pseudo_hyperbolic_min(u: np.ndarray, v: np.ndarray, chunk: int = 512) -> float:
    """Min pseudo-hyperbolic unit-disk distance between two point sets."""
    best = math.inf
    for start in range(0, len(u), chunk):
        block = u[start : start + chunk][:, None]
        p = np.abs((block - v[None, :]) / (1.0 - np.conj(block) * v[None, :]))
        best = min(best, float(np.min(p)))
    return best


def rho_radius(system: IfsSystem, net: AttractorNet) -> tuple[float, float]:
    """Hyperbolic separation radius and its Euclidean inradius floor.

    Returns ``(rho_h, rho_g)`` where ``rho_h`` is the minimal hyperbolic
    distance (in the domain disk) between distinct first-level images of the
    net, and ``rho_g`` the smallest Euclidean radius such that the hyperbolic
    ``rho_h``-ball around any net point contains the round ball of that
    radius.  Requires a valid strong-separation certificate.
    """
    cert = certify_ssc(system, net)
    if not cert.valid:
        raise SeparationFailure(
            f"strong separation not certified (margin {cert.margin:.3e})"
        )
    c, radius = system.domain.center, system.domain.radius
    images = [(g(net.points) - c) / radius for g in system.maps]
    best = math.inf
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            best = min(best, _pseudo_hyperbolic_min(images[i], images[j]))
    rho_h = math.atanh(best)
    t = math.tanh(rho_h)
    w = np.abs(net.points - c) / radius
    inradius = t * (1.0 - w * w) / (1.0 + t * w)
    rho_g = radius * float(np.min(inradius))
    return rho_h, rho_g


def _bounding_disk(points: np.ndarray, pad: float) -> Disk:
    center = complex(
        0.5 * (points.real.min() + points.real.max()),
        0.5 * (points.imag.min() + points.imag.max()),
    )
    radius = float(np.max(np.abs(points - center))) + pad
    return Disk(center, radius)


def box_restriction(
    system: IfsSystem,
    net: AttractorNet,
    eps_target: float,
    point_cap: int = POINT_CAP,
) -> list[Disk]:
    """Disk cover of the net by cylinder enclosures of small diameter.

    The returned disks cover every net point, each has diameter below
    ``eps_target``, each image under a system map lands inside a single
    cover disk, and disks whose cylinder words start with different letters
    are pairwise disjoint.  This is the sampled stand-in for a box-like
    restriction neighborhood.
    """
    if eps_target <= 0:
        raise ValueError("eps_target must be positive")
    eps = net.epsilon
    base = _bounding_disk(net.points, eps)
    centers = np.array([base.center], dtype=np.complex128)
    radii = np.array([base.radius], dtype=np.float64)
    m = len(system.maps)
    depth = 0
    while True:
        padded = radii + eps
        if float(np.max(padded)) * 2.0 < eps_target and _box_checks_pass(
            system, net, centers, padded, depth, m
        ):
            return [Disk(c, r) for c, r in zip(centers, padded)]
        if len(centers) * m > point_cap:
            raise BudgetExceeded("box restriction exceeded the cylinder budget")
        centers, radii = _refine_level(system, centers, radii)
        depth += 1
        if depth > 64:
            raise BudgetExceeded("box restriction failed to stabilize at depth 64")


def _box_checks_pass(system, net, centers, radii, depth, m) -> bool:
    # cover check: every net point inside some disk
    dist = np.abs(net.points[:, None] - centers[None, :]) - radii[None, :]
    if np.any(np.min(dist, axis=1) >= 0):
        return False
    # images of every disk under every map fit inside a single cover disk
    for g in system.maps:
        ic, ir = _enclosure_arrays(g, centers, radii)
        fits = np.abs(ic[:, None] - centers[None, :]) + ir[:, None] <= radii[None, :]
        if not np.all(np.any(fits, axis=1)):
            return False
    # disks from different leading letters must not intersect
    if depth >= 1:
        block = len(centers) // m
        for i in range(m):
            ci = centers[i * block : (i + 1) * block]
            ri = radii[i * block : (i + 1) * block]
            for j in range(i + 1, m):
                cj = centers[j * block : (j + 1) * block]
                rj = radii[j * block : (j + 1) * block]
                gap = np.abs(ci[:, None] - cj[None, :]) - ri[:, None] - rj[None, :]
                if np.min(gap) <= 0:
                    return False
    return True


def cardinality_bound(r: float, diam: float) -> int:
    """Upper bound on the size of an ``r/2``-separated subset of the attractor.

    Packing count for disks of radius ``r/(2*diam)`` (after rescaling the
    attractor to unit diameter) inside the concentrically fattened unit disk.
    """
    if r <= 0 or diam <= 0:
        raise ValueError("radius and diameter must be positive")
    q = r / (2.0 * diam)
    return int(math.floor(((1.0 + q) / q) ** 2))
