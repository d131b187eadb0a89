"""Seeded test-function corpora: indicators, truncated power laws, random step functions.

Every item is generated from ``SeedSequence([seed, stream, index])`` so an
item can be rebuilt in isolation from the seed recorded in a report.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridFunction, indicator, power_law, zeros
from .lattice import DyadicCube, relation

__all__ = [
    "CorpusItem",
    "PairItem",
    "FamilyItem",
    "random_cube",
    "random_indicator",
    "random_power_law",
    "random_step",
    "make_corpus",
    "make_pairs",
    "random_family",
    "make_families",
    "DEFAULT_MIX",
]

DEFAULT_MIX = {"indicator": 0.4, "power_law": 0.3, "step": 0.3}
_STREAMS = {"items": 1, "pairs": 2, "families": 3}


@dataclass(frozen=True)
class CorpusItem:
    item_id: str
    f: GridFunction

    def refined(self, extra: int = 1) -> "CorpusItem":
        return CorpusItem(self.item_id, self.f.refine(extra))

    def dilated(self, m: int) -> "CorpusItem":
        return CorpusItem(self.item_id, self.f.dilate_dyadic(m))


@dataclass(frozen=True)
class PairItem:
    item_id: str
    f1: GridFunction
    f2: GridFunction

    def refined(self, extra: int = 1) -> "PairItem":
        return PairItem(self.item_id, self.f1.refine(extra), self.f2.refine(extra))

    def dilated(self, m: int) -> "PairItem":
        return PairItem(self.item_id, self.f1.dilate_dyadic(m), self.f2.dilate_dyadic(m))


@dataclass(frozen=True)
class FamilyItem:
    item_id: str
    members: tuple = field(default_factory=tuple)  # ((GridFunction, DyadicCube), ...)

    def refined(self, extra: int = 1) -> "FamilyItem":
        return FamilyItem(self.item_id, tuple((f.refine(extra), Q) for f, Q in self.members))


def _rng(seed: int, stream: str, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), _STREAMS[stream], int(index)]))


def random_cube(rng: np.random.Generator, n: int, J0: int, level: int) -> DyadicCube:
    """Uniformly chosen level-``level`` cube inside ``[-2^J0, 2^J0)^n`` (``level >= -J0``)."""
    half = 2 ** (J0 + level)
    return DyadicCube(level, tuple(int(k) for k in rng.integers(-half, half, size=n)))


def random_indicator(rng, n, J0, j_max, levels=None) -> GridFunction:
    lo, hi = levels if levels is not None else (max(-J0, 0), max(0, j_max - 2))
    return indicator(random_cube(rng, n, J0, int(rng.integers(lo, hi + 1))), n, J0, j_max)


def random_power_law(rng, n, J0, j_max, p_target: float = 2.0, spread: float = 0.1) -> GridFunction:
    """``|x - c|^(-n/p)`` cut to a dyadic cube around a dyadic vertex ``c``.

    ``p`` is drawn log-uniformly within ``spread`` of ``p_target`` (and kept
    above 1 so the singularity stays integrable).
    """
    p = float(np.exp(rng.uniform(np.log(p_target) - spread, np.log(p_target) + spread)))
    p = max(p, 1.05)
    sup_level = int(rng.integers(-J0, min(2, j_max - 2) + 1))
    Q = random_cube(rng, n, J0, sup_level)
    # centre: a vertex of the level-(sup_level + 2) sub-grid inside Q
    sub = 4
    corner = np.array([float(c) for c in Q.lower()])
    offs = rng.integers(1, sub, size=n)
    center = corner + offs * float(Q.side) / sub
    return power_law(p, n, J0, j_max, center=center, support=Q)


def random_step(rng, n, J0, j_max, max_cubes: int = 64) -> GridFunction:
    """Sum of ``1..max_cubes`` disjoint dyadic cubes with log-uniform heights in ``[2^-4, 2^4]``."""
    count = int(rng.integers(1, max_cubes + 1))
    lo, hi = max(0, -J0), max(0, j_max - 2)
    chosen: list[DyadicCube] = []
    attempts = 0
    while len(chosen) < count and attempts < 20 * count:
        attempts += 1
        Q = random_cube(rng, n, J0, int(rng.integers(lo, hi + 1)))
        if all(relation(Q, R) == "disjoint" for R in chosen):
            chosen.append(Q)
    g = zeros(n, J0, j_max)
    v = np.zeros_like(g.values)
    for Q in chosen:
        v[g.cube_slices(Q)] = 2.0 ** rng.uniform(-4, 4)
    return GridFunction(v, J0, j_max)


def _kinds(size: int, mix: dict) -> list[str]:
    names = list(mix)
    counts = [int(round(mix[k] * size)) for k in names]
    counts[-1] = size - sum(counts[:-1])
    out = []
    for k, c in zip(names, counts):
        out += [k] * max(c, 0)
    return out[:size]


def _make(kind, rng, n, J0, j_max, p_near):
    if kind == "indicator":
        return random_indicator(rng, n, J0, j_max)
    if kind == "power_law":
        return random_power_law(rng, n, J0, j_max, p_target=float(rng.choice(p_near)))
    if kind == "step":
        return random_step(rng, n, J0, j_max)
    raise ValueError(f"unknown corpus kind {kind!r}")


def make_corpus(size: int, seed: int, n: int = 1, J0: int = 1, j_max: int = 10,
                mix: dict | None = None, p_near=(2.0,)) -> list[CorpusItem]:
    mix = DEFAULT_MIX if mix is None else mix
    out = []
    for i, kind in enumerate(_kinds(size, mix)):
        rng = _rng(seed, "items", i)
        out.append(CorpusItem(f"{kind}-{i:04d}", _make(kind, rng, n, J0, j_max, p_near)))
    return out


def make_pairs(size: int, seed: int, n: int = 1, J0: int = 1, j_max: int = 10,
               mix: dict | None = None, p_near=(2.0,)) -> list[PairItem]:
    """Pairs ``(f1, f2)``; the kind of ``f1`` follows ``mix`` and ``f2`` is drawn from it."""
    mix = DEFAULT_MIX if mix is None else mix
    names = list(mix)
    probs = np.array([mix[k] for k in names], dtype=float)
    probs /= probs.sum()
    out = []
    for i, kind in enumerate(_kinds(size, mix)):
        rng = _rng(seed, "pairs", i)
        kind2 = names[int(rng.choice(len(names), p=probs))]
        f1 = _make(kind, rng, n, J0, j_max, p_near)
        f2 = _make(kind2, rng, n, J0, j_max, p_near)
        out.append(PairItem(f"pair-{kind}-{kind2}-{i:04d}", f1, f2))
    return out


def random_family(rng, n, J0, j_max, max_members: int = 12, nested: bool | None = None):
    """Members ``(f_j, Q_j)`` with each ``f_j >= 0`` a random step function inside ``Q_j``.

    Nested families take cubes along a chain of ancestors of a random point;
    the others take independent cubes (which may or may not nest).
    """
    if nested is None:
        nested = bool(rng.integers(0, 2))
    count = int(rng.integers(1, max_members + 1))
    lo, hi = max(-J0, 0), max(0, j_max - 3)
    if nested:
        leaf = random_cube(rng, n, J0, hi)
        levels = rng.integers(lo, hi + 1, size=count)
        cubes = [leaf.ancestor_at_level(int(j)) for j in levels]
    else:
        cubes = [random_cube(rng, n, J0, int(rng.integers(lo, hi + 1))) for _ in range(count)]
    g = zeros(n, J0, j_max)
    members = []
    for Q in cubes:
        depth = int(rng.integers(0, min(3, j_max - Q.level) + 1))
        sub = 2**depth
        block = 2.0 ** rng.uniform(-4, 4, size=(sub,) * n)
        block *= rng.random((sub,) * n) < 0.6
        if not block.any():
            block.flat[int(rng.integers(0, block.size))] = 1.0
        v = np.zeros_like(g.values)
        sl = g.cube_slices(Q)
        reps = (sl[0].stop - sl[0].start) // sub
        cell_block = block
        for ax in range(n):
            cell_block = np.repeat(cell_block, reps, axis=ax)
        v[sl] = cell_block
        members.append((GridFunction(v, J0, j_max), Q))
    return tuple(members)


def make_families(size: int, seed: int, n: int = 1, J0: int = 1, j_max: int = 8) -> list[FamilyItem]:
    out = []
    for i in range(size):
        rng = _rng(seed, "families", i)
        out.append(FamilyItem(f"family-{i:04d}", random_family(rng, n, J0, j_max)))
    return out
