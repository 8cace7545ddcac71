"""Map algebra: evaluation, derivatives, inversion, word composition."""

import numpy as np
import pytest

from holoifs.errors import DomainError, NotInImage
from holoifs.maps import (
    Affine,
    Composite,
    Disk,
    IfsSystem,
    InverseOf,
    SqrtBranch,
    Word,
    compose_maps,
    compose_word,
    inverse_map,
)
from holoifs.systems import cantor_thirds, cantor_thirds_reflected, sqrt_julia

RNG = np.random.default_rng(20260826)


def _random_points(disk, n):
    r = disk.radius * np.sqrt(RNG.uniform(0, 1, n))
    t = RNG.uniform(0, 2 * np.pi, n)
    return disk.center + r * np.exp(1j * t)


def _naive_word_eval(system, indices, z):
    """Oracle: evaluate a word by folding the maps one at a time."""
    for i in reversed(indices):
        z = system.maps[i](z)
    return z


def test_affine_eval_deriv_invert():
    f = Affine(1 / 3, 2 / 3)
    assert f(0.0) == pytest.approx(2 / 3)
    assert f.deriv(1.0 + 1.0j) == pytest.approx(1 / 3)
    assert f.invert(f(0.25 + 0.5j)) == pytest.approx(0.25 + 0.5j, abs=1e-14)


def test_sqrt_branch_matches_quadratic_inverse():
    g = SqrtBranch(-6.0, +1)
    assert g(3.0) == pytest.approx(3.0)
    assert g.deriv(3.0) == pytest.approx(1 / 6)
    assert g.invert(3.0) == pytest.approx(3.0)
    minus = SqrtBranch(-6.0, -1)
    assert minus(-2.0 + 0j) == pytest.approx(-2.0)
    with pytest.raises(NotInImage):
        g.invert(-1.0 + 0.0j)


def test_composite_order_is_outermost_first():
    g1 = Affine(1 / 3, 0.0)
    g2 = Affine(1 / 3, 2 / 3)
    comp = Composite((g1, g2))
    assert comp(0.0) == pytest.approx(2 / 9)


def test_inverse_of_wrapper():
    f = Affine(1 / 3, 2 / 3)
    inv = InverseOf(f)
    z = 0.3 + 0.2j
    assert inv(f(z)) == pytest.approx(z, abs=1e-14)
    assert inv.deriv(f(z)) == pytest.approx(3.0)
    assert inv.invert(z) == pytest.approx(f(z))


@pytest.mark.parametrize(
    "m,disk",
    [
        (Affine(0.4 - 0.1j, 0.2j), Disk(0.5, 2.0)),
        (SqrtBranch(-6.0, +1), Disk(0.0, 4.0)),
        (SqrtBranch(-6.0, -1), Disk(1.0 + 0.5j, 3.0)),
        (Composite((Affine(0.5, 0.1), SqrtBranch(-6.0, +1))), Disk(0.0, 4.0)),
        (InverseOf(SqrtBranch(-6.0, +1)), Disk(2.5, 0.5)),
        (InverseOf(Affine(0.4, 0.3)), Disk(0.3, 0.05)),
    ],
)
def test_roundtrip_invert_after_eval(m, disk):
    pts = _random_points(disk, 100)
    for z in pts:
        y = m(z)
        assert abs(m.invert(y) - z) <= 1e-10 * max(1.0, abs(z))


@pytest.mark.parametrize(
    "m",
    [
        Affine(0.3 + 0.2j, -0.1),
        SqrtBranch(-6.0, +1),
        Composite((Affine(0.5, 0.0), SqrtBranch(-6.0, -1), Affine(0.25, 1.0))),
        InverseOf(SqrtBranch(-6.0, +1)),
    ],
)
def test_chain_rule_against_finite_differences(m):
    pts = _random_points(Disk(2.0 + 0.3j, 0.7), 50)
    h = 1e-6
    for z in pts:
        fd = (m(z + h) - m(z - h)) / (2 * h)
        assert abs(m.deriv(z) - fd) <= 1e-5 * max(1.0, abs(fd))


def test_compose_word_simplifies_affine_words():
    thirds = cantor_thirds()
    gw = compose_word(thirds, Word((0, 1), 2))
    assert isinstance(gw, Affine)
    assert gw.alpha == pytest.approx(1 / 9, abs=1e-14)
    assert gw.b == pytest.approx(2 / 9, abs=1e-14)

    reflected = cantor_thirds_reflected()
    gw = compose_word(reflected, Word((1, 1), 2))
    assert isinstance(gw, Affine)
    assert gw.alpha == pytest.approx(1 / 9, abs=1e-14)
    assert gw.b == pytest.approx(2 / 3, abs=1e-14)


def test_compose_word_against_naive_fold_oracle():
    systems = [cantor_thirds(), cantor_thirds_reflected(), sqrt_julia(-6.0)]
    for system in systems:
        m = len(system.maps)
        pts = _random_points(Disk(system.domain.center, system.domain.radius / 4), 20)
        for _ in range(30):
            k = int(RNG.integers(0, 7))
            indices = tuple(int(i) for i in RNG.integers(0, m, k))
            gw = compose_word(system, Word(indices, m))
            for z in pts:
                assert abs(gw(z) - _naive_word_eval(system, indices, z)) <= 1e-12


def test_empty_word_is_identity():
    thirds = cantor_thirds()
    ident = compose_word(thirds, Word((), 2))
    assert isinstance(ident, Affine)
    assert ident.alpha == 1 and ident.b == 0


def test_compose_word_rejects_alphabet_mismatch():
    thirds = cantor_thirds()
    with pytest.raises(IndexError):
        compose_word(thirds, Word((0, 1, 2), 3))


def test_word_validation_and_concat():
    with pytest.raises(IndexError):
        Word((0, 2), 2)
    w = Word((0, 1), 2)
    assert len(w + w) == 4
    assert (w * 3).indices == (0, 1) * 3
    assert (w * 3).starts_with(w)


def test_affine_simplification_exactness():
    # chain of 40 random affine maps vs naive fold at 1e-14
    maps = [Affine(0.8 * np.exp(1j * RNG.uniform(0, 2 * np.pi)), RNG.normal() * 0.1) for _ in range(40)]
    merged = compose_maps(maps)
    assert isinstance(merged, Affine)
    for z in _random_points(Disk(0.0, 1.0), 25):
        naive = z
        for f in reversed(maps):
            naive = f(naive)
        assert abs(merged(z) - naive) <= 1e-13 * max(1.0, abs(naive))


def test_inverse_map_closed_forms():
    f = Affine(1 / 3, 2 / 3)
    finv = inverse_map(f)
    assert isinstance(finv, Affine)
    assert finv(f(0.1 + 0.2j)) == pytest.approx(0.1 + 0.2j, abs=1e-15)

    comp = Composite((Affine(0.5, 0.1), SqrtBranch(-6.0, +1)))
    cinv = inverse_map(comp)
    z = 2.0 + 0.1j
    assert cinv(comp(z)) == pytest.approx(z, abs=1e-12)


def test_system_construction_rejects_non_contraction():
    with pytest.raises(DomainError):
        IfsSystem((Affine(1.0, 0.5),), Disk(0.0, 1.0))
    # branch cut through the domain disk is refused
    with pytest.raises(DomainError):
        IfsSystem((SqrtBranch(-6.0, +1), SqrtBranch(-6.0, -1)), Disk(0.0, 7.0))


def test_system_boundary_margin_positive():
    j6 = sqrt_julia(-6.0)
    boundary = j6.domain.boundary(256)
    for g in j6.maps:
        image = g(boundary)
        margin = j6.domain.radius - np.max(np.abs(image - j6.domain.center))
        assert margin > 1e-9


def test_image_enclosure_contains_sampled_images():
    cases = [
        (Affine(0.4 - 0.2j, 0.3), Disk(0.5, 2.0)),
        (SqrtBranch(-6.0, +1), Disk(0.0, 4.0)),
        (Composite((SqrtBranch(-6.0, -1), Affine(0.5, 1.0))), Disk(0.0, 4.0)),
        (InverseOf(SqrtBranch(-6.0, +1)), Disk(2.5, 0.7)),
    ]
    for m, disk in cases:
        enc = m.image_enclosure(disk)
        pts = np.concatenate([_random_points(disk, 300), disk.boundary(128)])
        images = np.array([m(z) for z in pts])
        assert np.max(np.abs(images - enc.center)) <= enc.radius + 1e-12


def test_enclosure_rejects_disk_touching_cut():
    g = SqrtBranch(-6.0, +1)
    with pytest.raises(DomainError):
        g.image_enclosure(Disk(-6.0 + 0.1j, 1.0))
