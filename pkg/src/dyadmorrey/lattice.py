"""Dyadic cubes with exact integer geometry.

A cube is stored as ``(level, index)`` and denotes
``prod_i [k_i 2^-j, (k_i + 1) 2^-j)``.  Coordinates are produced on demand
as :class:`fractions.Fraction` so half-open membership never depends on
floating point rounding.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

__all__ = [
    "MAX_LEVEL",
    "MAX_INDEX",
    "LatticeError",
    "DyadicCube",
    "Box",
    "side_length",
    "relation",
    "dilate3",
    "cubes_at_level_intersecting",
]

MAX_LEVEL = 40
MAX_INDEX = 2**40

EQUAL = "equal"
Q_INSIDE_R = "Q_inside_R"
R_INSIDE_Q = "R_inside_Q"
DISJOINT = "disjoint"


class LatticeError(ValueError):
    """Raised for out-of-range levels/indices or dimension mismatches."""


def _check_level(j: int) -> None:
    if abs(j) > MAX_LEVEL:
        raise LatticeError(f"level {j} outside |j| <= {MAX_LEVEL}")


def _dyadic(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True, order=True)
class DyadicCube:
    level: int
    index: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(int(k) for k in self.index))
        if not self.index:
            raise LatticeError("a cube needs at least one coordinate")
        _check_level(self.level)
        for k in self.index:
            if abs(k) >= MAX_INDEX:
                raise LatticeError(f"index {k} outside |k| < 2^40")

    @property
    def dim(self) -> int:
        return len(self.index)

    @property
    def side(self) -> Fraction:
        return Fraction(2) ** (-self.level)

    @property
    def volume(self) -> Fraction:
        return self.side ** self.dim

    def lower(self) -> tuple[Fraction, ...]:
        s = self.side
        return tuple(k * s for k in self.index)

    def box(self) -> "Box":
        s = self.side
        return Box(tuple((k * s, (k + 1) * s) for k in self.index))

    def parent(self) -> "DyadicCube":
        return DyadicCube(self.level - 1, tuple(k >> 1 for k in self.index))

    def children(self) -> list["DyadicCube"]:
        base = [2 * k for k in self.index]
        return [
            DyadicCube(self.level + 1, tuple(b + e for b, e in zip(base, bits)))
            for bits in itertools.product((0, 1), repeat=self.dim)
        ]

    def ancestor_at_level(self, j: int) -> "DyadicCube":
        if j > self.level:
            raise LatticeError(f"ancestor level {j} is finer than {self.level}")
        shift = self.level - j
        return DyadicCube(j, tuple(k >> shift for k in self.index))

    def contains_point(self, x: Sequence) -> bool:
        if len(x) != self.dim:
            raise LatticeError("point dimension does not match cube")
        s = self.side
        return all(k * s <= _dyadic(xi) < (k + 1) * s for k, xi in zip(self.index, x))

    def serialize(self) -> str:
        return f"{self.level}:" + ",".join(str(k) for k in self.index)

    @classmethod
    def parse(cls, text: str) -> "DyadicCube":
        level, _, idx = text.partition(":")
        return cls(int(level), tuple(int(k) for k in idx.split(",")))

    def __str__(self):
        return self.serialize()


@dataclass(frozen=True)
class Box:
    """Product of half-open intervals with binary-rational endpoints."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        ivs = tuple((_dyadic(a), _dyadic(b)) for a, b in self.intervals)
        if not ivs:
            raise LatticeError("empty box")
        for a, b in ivs:
            if not a < b:
                raise LatticeError(f"degenerate interval [{a}, {b})")
            if (a.denominator & (a.denominator - 1)) or (b.denominator & (b.denominator - 1)):
                raise LatticeError("box endpoints must be binary rationals")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def cube(cls, lo, hi, dim: int) -> "Box":
        return cls(tuple((lo, hi) for _ in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def volume(self) -> Fraction:
        return math.prod((b - a for a, b in self.intervals), start=Fraction(1))

    def contains_point(self, x: Sequence) -> bool:
        return all(a <= _dyadic(xi) < b for (a, b), xi in zip(self.intervals, x))

    def intersect(self, other: "Box") -> "Box | None":
        out = []
        for (a, b), (c, d) in zip(self.intervals, other.intervals):
            lo, hi = max(a, c), min(b, d)
            if not lo < hi:
                return None
            out.append((lo, hi))
        return Box(tuple(out))


def side_length(Q: DyadicCube) -> Fraction:
    return Q.side


def relation(Q: DyadicCube, R: DyadicCube) -> str:
    """Classify two dyadic cubes as equal, nested or disjoint."""
    if Q.dim != R.dim:
        raise LatticeError(f"dimension mismatch: {Q.dim} vs {R.dim}")
    if Q.level == R.level:
        return EQUAL if Q.index == R.index else DISJOINT
    if Q.level > R.level:
        return Q_INSIDE_R if Q.ancestor_at_level(R.level) == R else DISJOINT
    return R_INSIDE_Q if R.ancestor_at_level(Q.level) == Q else DISJOINT


def dilate3(Q: DyadicCube) -> Box:
    """The concentric cube with three times the side length."""
    s = Q.side
    return Box(tuple(((k - 1) * s, (k + 2) * s) for k in Q.index))


def _index_range(a: Fraction, b: Fraction, j: int) -> range:
    scale = Fraction(2) ** j
    lo = math.floor(a * scale)
    hi = math.ceil(b * scale)  # exclusive: cube k meets [a, b) iff k*s < b and (k+1)*s > a
    return range(lo, hi)


def cubes_at_level_intersecting(j: int, B: Box) -> Iterator[DyadicCube]:
    """Yield every cube of generation ``j`` meeting ``B``, each exactly once."""
    _check_level(j)
    ranges = [_index_range(a, b, j) for a, b in B.intervals]
    for r in ranges:
        if r.start <= -MAX_INDEX or r.stop > MAX_INDEX:
            raise LatticeError(f"level {j} indices overflow the lattice caps")
    for idx in itertools.product(*ranges):
        yield DyadicCube(j, idx)
