"""Ready-made contraction systems used in documentation and tests."""

from __future__ import annotations

from itertools import product

from .maps import Affine, Disk, IfsSystem, SqrtBranch, Word, compose_word


def cantor_thirds(domain: Disk | None = None) -> IfsSystem:
    """Middle-thirds Cantor system ``{z/3, z/3 + 2/3}``."""
    domain = domain or Disk(0.5, 2.0)
    return IfsSystem((Affine(1 / 3, 0.0), Affine(1 / 3, 2 / 3)), domain)


def cantor_thirds_reflected(domain: Disk | None = None) -> IfsSystem:
    """``{z/3, 1 - z/3}``: same attractor as :func:`cantor_thirds`."""
    domain = domain or Disk(0.5, 2.0)
    return IfsSystem((Affine(1 / 3, 0.0), Affine(-1 / 3, 1.0)), domain)


def iterate_system(system: IfsSystem, depth: int) -> IfsSystem:
    """System whose maps are all length-``depth`` words of ``system``."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    maps = tuple(
        compose_word(system, Word(w, len(system.maps)))
        for w in product(range(len(system.maps)), repeat=depth)
    )
    return IfsSystem(maps, system.domain)


def sqrt_julia(c: complex, domain: Disk | None = None) -> IfsSystem:
    """Both inverse branches of ``z -> z^2 + c`` as a contraction system.

    The default domain works for real ``c <= -2``, where the Julia set is a
    Cantor set on a real interval.
    """
    domain = domain or Disk(0.0, 5.0)
    return IfsSystem((SqrtBranch(c, +1), SqrtBranch(c, -1)), domain)
