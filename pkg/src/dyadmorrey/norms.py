"""Lebesgue and Morrey norms, cube averages and the powered maximal operator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, cube_sums, expand_blocks, subcell_triple_sums, triple_sums
from .lattice import DyadicCube

__all__ = [
    "MorreyExponents",
    "lq_norm",
    "morrey_norm",
    "morrey_levels",
    "average",
    "powered_average",
    "maximal",
]


@dataclass(frozen=True)
class MorreyExponents:
    p: float
    q: float

    def __post_init__(self):
        if not (0 < self.q <= self.p < np.inf):
            raise ValueError(f"need 0 < q <= p < inf, got p={self.p}, q={self.q}")


def _as_exponents(e) -> MorreyExponents:
    return e if isinstance(e, MorreyExponents) else MorreyExponents(*e)


def lq_norm(f: GridFunction, q: float, region=None) -> float:
    """``(int_R |f|^q)^(1/q)``; ``region`` is None (everything), a cube or a box."""
    if q <= 0:
        raise ValueError("q must be positive")
    return f.pointwise_power(q).integrate(region) ** (1.0 / q)


def morrey_levels(f: GridFunction) -> range:
    # Above j_max a cube sits inside one cell and its value c |Q|^(1/p) shrinks
    # with Q.  Below -J0 a cube meets the domain in the same set as its level -J0
    # descendant while |Q|^(1/p - 1/q) can only decrease.
    return range(-f.J0, f.j_max + 1)


def morrey_norm(f: GridFunction, e) -> float:
    """``sup_Q |Q|^(1/p - 1/q) ||f||_{L^q(Q)}`` over all dyadic cubes.

    The supremum is taken over generations ``-J0 .. j_max``; for step
    functions on the grid no other generation can exceed it.
    """
    e = _as_exponents(e)
    n = f.n
    v = f.values**e.q
    best = 0.0
    for j in morrey_levels(f):
        sums, _ = cube_sums(v, f.J0, f.j_max, j)
        top = sums.max() * f.cell_volume
        if top > 0:
            vol = 2.0 ** (-j * n)
            best = max(best, vol ** (1 / e.p - 1 / e.q) * top ** (1 / e.q))
    return float(best)


def average(f: GridFunction, Q: DyadicCube) -> float:
    return f.integrate(Q) / float(Q.volume)


def powered_average(f: GridFunction, Q: DyadicCube, u: float) -> float:
    if u <= 0:
        raise ValueError("u must be positive")
    return average(f.pointwise_power(u), Q) ** (1.0 / u)


def maximal(f: GridFunction, eta: float = 1.0, subcell: bool = True) -> GridFunction:
    """Powered dyadic maximal function ``M^(eta) f`` sampled at cell centres.

    At each centre ``x`` this is the supremum over dyadic ``Q`` containing
    ``x`` of the ``eta``-power mean of ``|f|`` on ``3Q``.  Generations
    ``-J0 .. j_max`` are scanned on the grid; with ``subcell`` the cubes
    finer than a cell are included too (their tripled cubes straddle at most
    the next cell, and from ``j_max + 2`` on they return ``|f(x)|``), which
    makes ``M f >= |f|`` at every centre.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    n, J0, j_max, N = f.n, f.J0, f.j_max, f.N
    v = f.values**eta
    best = np.zeros_like(v)
    for j in range(-J0, j_max + 1):
        t = triple_sums(v, J0, j_max, j) * f.cell_volume / (3.0**n * 2.0 ** (-j * n))
        best = np.maximum(best, expand_blocks(t, J0, j_max, j, N))
    if subcell:
        s = 2.0 ** (-n)  # j = j_max + 1: |3Q| = 3^n (h/2)^n in cell-volume units
        best = np.maximum(best, subcell_triple_sums(v, j_max, j_max + 1) / (3.0**n * s))
        best = np.maximum(best, v)
    return GridFunction(best ** (1.0 / eta), J0, j_max)
