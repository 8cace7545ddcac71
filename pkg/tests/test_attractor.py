"""Attractor nets, separation certificates, covering geometry."""

import math

import numpy as np
import pytest

from holoifs.attractor import (
    box_restriction,
    cardinality_bound,
    certify_ssc,
    certify_strong_osc,
    compute_net,
    hausdorff,
    hutchinson_defect,
    rho_radius,
    _refine_level,
)
from holoifs.errors import BudgetExceeded, SeparationFailure
from holoifs.maps import Affine, Disk, IfsSystem
from holoifs.systems import cantor_thirds, cantor_thirds_reflected, sqrt_julia

EPS = 1e-3


def cantor_distance(x: float) -> float:
    """Exact distance from a real number to the middle-thirds Cantor set."""
    if x < 0:
        return -x
    if x > 1:
        return x - 1
    scale = 1.0
    for _ in range(80):
        if x <= 1 / 3:
            x = 3 * x
        elif x >= 2 / 3:
            x = 3 * x - 2
        else:
            return scale * min(x - 1 / 3, 2 / 3 - x)
        scale /= 3
    return 0.0


def cantor_distance_complex(z: complex) -> float:
    return math.hypot(cantor_distance(z.real), z.imag)


@pytest.fixture(scope="module")
def thirds():
    return cantor_thirds()


@pytest.fixture(scope="module")
def thirds_net(thirds):
    return compute_net(thirds, EPS)


def test_net_points_lie_near_cantor_set(thirds_net):
    worst = max(cantor_distance_complex(complex(z)) for z in thirds_net.points)
    assert worst <= EPS


def test_net_covers_cantor_endpoints(thirds_net):
    # all dyadic cylinder endpoints of depth 5 belong to the attractor
    targets = []
    for k in range(2**5):
        digits = [(k >> i) & 1 for i in range(5)]
        targets.append(sum(2 * d / 3 ** (i + 1) for i, d in enumerate(digits)))
    pts = thirds_net.points
    for t in targets:
        assert np.min(np.abs(pts - t)) <= EPS


def test_hutchinson_self_consistency(thirds, thirds_net):
    assert hutchinson_defect(thirds, thirds_net) <= 2 * EPS


def test_monotone_refinement(thirds, thirds_net):
    finer = compute_net(thirds, EPS / 4)
    assert hausdorff(thirds_net, finer) <= EPS + EPS / 4


def test_cylinder_radius_decay(thirds):
    centers = np.array([thirds.domain.center])
    radii = np.array([thirds.domain.radius])
    prev = float(np.max(radii))
    for _ in range(6):
        centers, radii = _refine_level(thirds, centers, radii)
        cur = float(np.max(radii))
        assert cur <= prev * (1 / 3 + 1e-12)
        prev = cur


def test_hausdorff_against_bruteforce_oracle():
    rng = np.random.default_rng(7)
    a = rng.normal(size=40) + 1j * rng.normal(size=40)
    b = rng.normal(size=55) + 1j * rng.normal(size=55)
    brute = max(
        max(min(abs(x - y) for y in b) for x in a),
        max(min(abs(x - y) for y in a) for x in b),
    )
    assert hausdorff(a, b) == pytest.approx(brute, abs=1e-14)


def test_ssc_certificate_thirds(thirds, thirds_net):
    cert = certify_ssc(thirds, thirds_net)
    assert cert.valid
    assert cert.pairwise_distance == pytest.approx(1 / 3, abs=2 * EPS)


def test_ssc_certificate_fails_for_touching_pieces():
    halves = IfsSystem((Affine(0.5, 0.0), Affine(0.5, 0.5)), Disk(0.5, 2.0))
    net = compute_net(halves, EPS)
    cert = certify_ssc(halves, net)
    assert not cert.valid
    assert cert.pairwise_distance <= 2 * EPS


def test_strong_osc_two_disks(thirds, thirds_net):
    disks = (Disk(1 / 6, 1 / 6 + 0.01), Disk(5 / 6, 1 / 6 + 0.01))
    cert = certify_strong_osc(thirds, disks, thirds_net)
    assert cert.valid
    assert cert.kind == "StrongOSC"
    assert set(cert.checks) == {"net_meets_set", "containment", "image_disjointness"}


def test_strong_osc_single_disk(thirds, thirds_net):
    cert = certify_strong_osc(thirds, (Disk(0.5, 0.9),), thirds_net)
    assert cert.valid


def test_strong_osc_rejects_tangent_images(thirds, thirds_net):
    # images of B(1/2, 1) under the two maps touch at 1/2
    cert = certify_strong_osc(thirds, (Disk(0.5, 1.0),), thirds_net)
    assert not cert.valid
    assert cert.checks["image_disjointness"] <= 1e-12


def _hyp_dist_disk_oracle(domain, z1, z2):
    w1 = (z1 - domain.center) / domain.radius
    w2 = (z2 - domain.center) / domain.radius
    return math.atanh(abs((w1 - w2) / (1 - w1.conjugate() * w2)))


def test_rho_radius_against_direct_minimization(thirds):
    net = compute_net(thirds, 0.05)
    rho_h, rho_g = rho_radius(thirds, net)

    # oracle: plain double loop over image pairs
    img0 = [complex(z) for z in thirds.maps[0](net.points)]
    img1 = [complex(z) for z in thirds.maps[1](net.points)]
    oracle_h = min(
        _hyp_dist_disk_oracle(thirds.domain, a, b) for a in img0 for b in img1
    )
    assert rho_h == pytest.approx(oracle_h, rel=1e-12)

    # oracle: bisection on the largest round disk inside the hyperbolic ball
    def inradius_at(a):
        lo, hi = 0.0, thirds.domain.radius
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            circle = a + mid * np.exp(2j * np.pi * np.arange(64) / 64)
            worst = max(
                _hyp_dist_disk_oracle(thirds.domain, complex(a), complex(q))
                for q in circle
            )
            if worst <= rho_h:
                lo = mid
            else:
                hi = mid
        return lo

    def closed_form_inradius(a):
        t = math.tanh(rho_h)
        w = abs(a - thirds.domain.center) / thirds.domain.radius
        return thirds.domain.radius * t * (1 - w * w) / (1 + t * w)

    sample = [complex(z) for z in net.points[:: max(1, len(net) // 8)]]
    for a in sample:
        assert closed_form_inradius(a) == pytest.approx(inradius_at(a), abs=1e-6)
    # the reported value is the minimum over all net points
    assert rho_g <= min(inradius_at(a) for a in sample) + 1e-6
    assert 0.0 < rho_g < 1 / 3


def test_rho_radius_requires_separation():
    halves = IfsSystem((Affine(0.5, 0.0), Affine(0.5, 0.5)), Disk(0.5, 2.0))
    net = compute_net(halves, EPS)
    with pytest.raises(SeparationFailure):
        rho_radius(halves, net)


def test_box_restriction_component_counts(thirds, thirds_net):
    disks = box_restriction(thirds, thirds_net, 0.4)
    assert len(disks) == 2
    centers = sorted(d.center.real for d in disks)
    assert centers[0] == pytest.approx(1 / 6, abs=0.01)
    assert centers[1] == pytest.approx(5 / 6, abs=0.01)

    disks = box_restriction(thirds, thirds_net, 0.12)
    assert len(disks) == 4

    disks = box_restriction(thirds, thirds_net, 1.2)
    assert len(disks) == 1


def test_box_restriction_covers_net_and_respects_diameter(thirds, thirds_net):
    target = 0.12
    disks = box_restriction(thirds, thirds_net, target)
    assert all(d.diameter < target for d in disks)
    pts = thirds_net.points
    covered = np.zeros(len(pts), dtype=bool)
    for d in disks:
        covered |= np.abs(pts - d.center) < d.radius
    assert covered.all()


@pytest.mark.parametrize("r,diam,expected", [(1 / 3, 1.0, 49), (1.0, 1.0, 9), (2.0, 1.0, 4)])
def test_cardinality_bound_values(r, diam, expected):
    assert cardinality_bound(r, diam) == expected


def test_j6_net_contains_fixed_points():
    j6 = sqrt_julia(-6.0)
    net = compute_net(j6, EPS)
    assert np.min(np.abs(net.points - 3.0)) <= EPS
    assert np.min(np.abs(net.points - (-2.0))) <= EPS


def test_j6_forward_invariance():
    j6 = sqrt_julia(-6.0)
    net = compute_net(j6, EPS)
    stride = max(1, len(net) // 1000)
    sample = net.points[::stride][:1000]
    forward = sample * sample - 6.0
    assert hausdorff(forward, net.points) >= 0  # sanity: computable
    from scipy.spatial import cKDTree

    tree = cKDTree(np.column_stack((net.points.real, net.points.imag)))
    d, _ = tree.query(np.column_stack((forward.real, forward.imag)))
    assert float(np.max(d)) <= 3 * EPS


def test_degenerate_single_map_net():
    system = IfsSystem((Affine(0.5, 0.0),), Disk(0.0, 1.0))
    with pytest.warns(UserWarning):
        net = compute_net(system, 1e-2)
    assert net.is_degenerate
    assert np.min(np.abs(net.points)) <= 1e-2


def test_budget_exceeded():
    thirds = cantor_thirds()
    with pytest.raises(BudgetExceeded):
        compute_net(thirds, 1e-6, point_cap=100)


def test_reflected_net_matches_thirds(thirds_net):
    reflected = cantor_thirds_reflected()
    net2 = compute_net(reflected, EPS)
    assert hausdorff(thirds_net, net2) <= 2 * EPS


def test_shifted_system_net_is_scaled_cantor():
    shifted = IfsSystem((Affine(1 / 3, 0.0), Affine(1 / 3, 0.5)), Disk(0.5, 2.0))
    net = compute_net(shifted, EPS)
    # attractor is 0.75 * (middle-thirds Cantor set)
    worst = max(
        math.hypot(0.75 * cantor_distance(z.real / 0.75), z.imag)
        for z in map(complex, net.points)
    )
    assert worst <= EPS
