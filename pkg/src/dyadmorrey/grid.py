"""Non-negative step functions on the dyadic cells of a centred box.

A :class:`GridFunction` lives on ``[-2^J0, 2^J0)^n`` and is constant on the
cells of generation ``j_max`` (side ``h = 2^-j_max``).  Cell ``i`` along an
axis covers ``[(i - N/2) h, (i - N/2 + 1) h)`` with ``N = 2^(J0 + j_max + 1)``.
Outside the box the function is zero.

The helpers :func:`cube_sums` and :func:`triple_sums` turn a cell array into
integrals over every dyadic cube (or its tripled cube) of a given level;
everything in :mod:`dyadmorrey.norms` and :mod:`dyadmorrey.operators` is
built on them.
"""
from __future__ import annotations

import io
import math
import struct
from fractions import Fraction
from pathlib import Path

import numpy as np

from .lattice import MAX_LEVEL, Box, DyadicCube, LatticeError

__all__ = [
    "GridFunction",
    "indicator",
    "power_law",
    "zeros",
    "cube_sums",
    "triple_sums",
    "expand_blocks",
    "subcell_triple_sums",
    "save_csv",
    "load_csv",
    "save_binary",
    "load_binary",
]

MAX_CELLS = 2**24


class GridFunction:
    """Immutable non-negative step function at dyadic resolution.

    Parameters
    ----------
    values : array_like
        Cell values, shape ``(N,) * n`` with ``N = 2**(J0 + j_max + 1)``.
        Signed input is rectified to ``|values|``.
    J0 : int
        The domain is ``[-2**J0, 2**J0)**n``.
    j_max : int
        Resolution level; cells have side ``2**-j_max``.
    """

    __slots__ = ("values", "J0", "j_max")

    def __init__(self, values, J0: int, j_max: int):
        J0, j_max = int(J0), int(j_max)
        if abs(J0) > MAX_LEVEL or abs(j_max) > MAX_LEVEL:
            raise LatticeError(f"J0={J0}, j_max={j_max} outside lattice caps")
        if J0 + j_max + 1 < 1:
            raise LatticeError("resolution must be finer than the domain half-width")
        arr = np.abs(np.asarray(values, dtype=float))
        if arr.ndim not in (1, 2):
            raise ValueError(f"only n = 1, 2 are supported, got n = {arr.ndim}")
        N = 2 ** (J0 + j_max + 1)
        if arr.shape != (N,) * arr.ndim:
            raise ValueError(f"values shape {arr.shape} does not match {(N,) * arr.ndim}")
        if arr.size > MAX_CELLS:
            raise ValueError(f"{arr.size} cells exceeds the {MAX_CELLS} cell limit")
        if not np.all(np.isfinite(arr)):
            raise ValueError("cell values must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "J0", J0)
        object.__setattr__(self, "j_max", j_max)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    def __repr__(self):
        return f"GridFunction(n={self.n}, J0={self.J0}, j_max={self.j_max})"

    # geometry -------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.values.ndim

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 2.0 ** (-self.j_max)

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @property
    def domain(self) -> Box:
        r = Fraction(2) ** self.J0
        return Box.cube(-r, r, self.n)

    def centers(self) -> np.ndarray:
        """Cell centres along one axis."""
        return (np.arange(self.N) - self.N // 2 + 0.5) * self.h

    def edges(self) -> np.ndarray:
        return (np.arange(self.N + 1) - self.N // 2) * self.h

    def same_grid(self, other: "GridFunction") -> bool:
        return (self.n, self.J0, self.j_max) == (other.n, other.J0, other.j_max)

    def _check_grid(self, other: "GridFunction") -> None:
        if not self.same_grid(other):
            raise ValueError(f"grid mismatch: {self!r} vs {other!r}")

    def cell_of(self, x) -> tuple[int, ...]:
        """Index of the cell containing the point ``x``, or ValueError."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.n,):
            raise ValueError("point dimension does not match grid")
        idx = np.floor(x / self.h).astype(np.int64) + self.N // 2
        if np.any(idx < 0) or np.any(idx >= self.N):
            raise ValueError(f"point {x} lies outside the domain")
        return tuple(int(i) for i in idx)

    def value_at(self, x) -> float:
        return float(self.values[self.cell_of(x)])

    def cube_slices(self, Q: DyadicCube) -> tuple[slice, ...]:
        """Cell slices covered by an aligned cube (level <= j_max) inside the domain."""
        if Q.dim != self.n:
            raise LatticeError("cube dimension does not match grid")
        if Q.level > self.j_max:
            raise LatticeError(f"cube level {Q.level} is finer than resolution {self.j_max}")
        b = 2 ** (self.j_max - Q.level)
        out = []
        for k in Q.index:
            lo = k * b + self.N // 2
            hi = lo + b
            if lo < 0 or hi > self.N:
                raise LatticeError(f"cube {Q} is not contained in the domain")
            out.append(slice(lo, hi))
        return tuple(out)

    def _axis_overlaps(self, box: Box) -> list[np.ndarray]:
        edges = self.edges()
        out = []
        for a, b in box.intervals:
            lo = np.maximum(edges[:-1], float(a))
            hi = np.minimum(edges[1:], float(b))
            out.append(np.clip(hi - lo, 0.0, None))
        return out

    # integration ------------------------------------------------------------
    def integrate(self, region=None) -> float:
        """Exact integral over the whole line/plane, a dyadic cube or a box."""
        if region is None:
            return float(self.values.sum()) * self.cell_volume
        if isinstance(region, DyadicCube):
            if region.level <= self.j_max:
                try:
                    return float(self.values[self.cube_slices(region)].sum()) * self.cell_volume
                except LatticeError:
                    pass
            region = region.box()
        if region.dim != self.n:
            raise LatticeError("region dimension does not match grid")
        w = self._axis_overlaps(region)
        if self.n == 1:
            return float(w[0] @ self.values)
        return float(w[0] @ self.values @ w[1])

    # algebra ---------------------------------------------------------------
    def _new(self, values, J0=None, j_max=None) -> "GridFunction":
        return GridFunction(values, self.J0 if J0 is None else J0, self.j_max if j_max is None else j_max)

    def scale(self, c: float) -> "GridFunction":
        if c < 0:
            raise ValueError("scale factor must be non-negative")
        return self._new(self.values * c)

    def add(self, other: "GridFunction") -> "GridFunction":
        self._check_grid(other)
        return self._new(self.values + other.values)

    def pointwise_product(self, other: "GridFunction") -> "GridFunction":
        self._check_grid(other)
        return self._new(self.values * other.values)

    def pointwise_power(self, u: float) -> "GridFunction":
        if u <= 0:
            raise ValueError("power must be positive")
        return self._new(self.values**u)

    __add__ = add
    __mul__ = pointwise_product

    def restrict(self, region) -> "GridFunction":
        """Multiply by the indicator of an aligned cube or box."""
        return self.pointwise_product(indicator(region, self.n, self.J0, self.j_max))

    def dilate_dyadic(self, m: int) -> "GridFunction":
        """``x -> f(2^m x)``.

        The step structure is carried over unchanged: the same cell array on a
        domain and resolution both rescaled by ``2^-m``.
        """
        return self._new(self.values, J0=self.J0 - m, j_max=self.j_max + m)

    def translate_dyadic(self, j: int, k) -> "GridFunction":
        """``x -> f(x - k 2^-j)``; mass shifted out of the domain is dropped."""
        if j > self.j_max:
            raise LatticeError("translation finer than the grid resolution")
        k = np.broadcast_to(np.asarray(k, dtype=np.int64), (self.n,))
        shift = [int(ki) * 2 ** (self.j_max - j) for ki in k]
        out = np.zeros_like(self.values)
        src, dst = [], []
        for s in shift:
            if abs(s) >= self.N:
                return self._new(out)
            src.append(slice(max(0, -s), self.N - max(0, s)))
            dst.append(slice(max(0, s), self.N - max(0, -s)))
        out[tuple(dst)] = self.values[tuple(src)]
        return self._new(out)

    def refine(self, extra: int = 1) -> "GridFunction":
        """The same function represented at resolution ``j_max + extra``."""
        if extra < 0:
            raise ValueError("refine only goes to finer grids")
        r = 2**extra
        v = self.values
        for ax in range(self.n):
            v = np.repeat(v, r, axis=ax)
        return self._new(v, j_max=self.j_max + extra)

    def coarsen(self, levels: int = 1) -> "GridFunction":
        """Cell averages at resolution ``j_max - levels``."""
        sums, _ = cube_sums(self.values, self.J0, self.j_max, self.j_max - levels)
        return self._new(sums / 2 ** (levels * self.n), j_max=self.j_max - levels)

    def pad(self, levels: int = 1) -> "GridFunction":
        """Embed into the domain ``[-2^(J0+levels), 2^(J0+levels))^n`` (zero fill)."""
        N2 = self.N * 2**levels
        lo = (N2 - self.N) // 2
        out = np.zeros((N2,) * self.n)
        out[(slice(lo, lo + self.N),) * self.n] = self.values
        return GridFunction(out, self.J0 + levels, self.j_max)

    def support_box(self) -> tuple[tuple[int, int], ...] | None:
        """Per-axis half-open cell index ranges bounding the support."""
        nz = np.nonzero(self.values)
        if len(nz[0]) == 0:
            return None
        return tuple((int(a.min()), int(a.max()) + 1) for a in nz)

    def is_zero(self) -> bool:
        return not np.any(self.values)


def zeros(n: int, J0: int, j_max: int) -> GridFunction:
    N = 2 ** (J0 + j_max + 1)
    return GridFunction(np.zeros((N,) * n), J0, j_max)


def indicator(region, n: int, J0: int, j_max: int) -> GridFunction:
    """Indicator of a dyadic cube or box aligned to the cells and inside the domain."""
    g = zeros(n, J0, j_max)
    if isinstance(region, DyadicCube):
        if region.dim != n:
            raise LatticeError("cube dimension does not match grid")
        v = np.zeros_like(g.values)
        v[g.cube_slices(region)] = 1.0
        return GridFunction(v, J0, j_max)
    if region.dim != n:
        raise LatticeError("box dimension does not match grid")
    r = Fraction(2) ** J0
    scale = Fraction(2) ** j_max
    sl = []
    for a, b in region.intervals:
        if a < -r or b > r:
            raise LatticeError(f"box {region} leaves the domain")
        if (a * scale).denominator != 1 or (b * scale).denominator != 1:
            raise LatticeError("box is finer than the grid resolution")
        sl.append(slice(int(a * scale) + g.N // 2, int(b * scale) + g.N // 2))
    v = np.zeros_like(g.values)
    v[tuple(sl)] = 1.0
    return GridFunction(v, J0, j_max)


def _power_cell_average_1d(lo: np.ndarray, hi: np.ndarray, beta: float) -> np.ndarray:
    """Average of |x|^-beta over [lo, hi) for cells not straddling 0 (beta < 1)."""
    a = np.minimum(np.abs(lo), np.abs(hi))
    b = np.maximum(np.abs(lo), np.abs(hi))
    e = 1.0 - beta
    return (b**e - a**e) / (e * (b - a))


def _corner_cell_average_2d(h: float, beta: float) -> float:
    """Average of |x|^-beta over [0, h)^2 (beta < 2), via polar coordinates."""
    from scipy.integrate import quad

    e = 2.0 - beta
    ang, _ = quad(lambda t: math.cos(t) ** (-e), 0.0, math.pi / 4, epsabs=0, epsrel=1e-13)
    return 2.0 * h**e / e * ang / h**2


def power_law(p: float, n: int, J0: int, j_max: int, center=None, support=None) -> GridFunction:
    """Cell averages of ``|x - center|^(-n/p)``, optionally restricted to ``support``.

    ``center`` must be a grid vertex.  Cell values are exact averages in one
    dimension; in two dimensions the cells touching the centre use a polar
    closed form and all others a 16 x 16 midpoint sub-sampling.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    if p <= 1:
        raise ValueError("|x|^(-n/p) is not locally integrable for p <= 1")
    g = zeros(n, J0, j_max)
    h = g.h
    beta = n / p
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float).reshape(n)
    if np.any(np.abs(c / h - np.round(c / h)) > 0):
        raise LatticeError("power-law centre must be a grid vertex")
    edges = g.edges()
    if n == 1:
        vals = _power_cell_average_1d(edges[:-1] - c[0], edges[1:] - c[0], beta)
    else:
        sub = 16
        t = (np.arange(sub) + 0.5) / sub
        ex = edges[:-1, None] + h * t[None, :] - c[0]
        ey = edges[:-1, None] + h * t[None, :] - c[1]
        vals = np.zeros((g.N, g.N))
        for a in range(sub):
            r2 = ex[:, a][:, None, None] ** 2 + ey[None, :, :] ** 2
            vals += np.sum(r2 ** (-beta / 2), axis=-1)
        vals /= sub * sub
        corner = _corner_cell_average_2d(h, beta)
        ci = [int(round(ci_ / h)) + g.N // 2 for ci_ in c]
        for dx in (-1, 0):
            for dy in (-1, 0):
                i, j = ci[0] + dx, ci[1] + dy
                if 0 <= i < g.N and 0 <= j < g.N:
                    vals[i, j] = corner
    f = GridFunction(vals, J0, j_max)
    if support is not None:
        f = f.restrict(support)
    return f


# -- dyadic block machinery ----------------------------------------------------

def _axis_block(j: int, J0: int, j_max: int, N: int) -> tuple[int, int]:
    """(cells per cube along an axis, index of the first cube) at level j <= j_max."""
    if j > j_max:
        raise LatticeError(f"level {j} is finer than resolution {j_max}")
    if j >= -J0:
        b = 2 ** (j_max - j)
        return b, -(N // 2) // b
    # cubes of generation j < -J0 meet the domain in its two halves
    return N // 2, -1


def cube_sums(values: np.ndarray, J0: int, j_max: int, j: int) -> tuple[np.ndarray, int]:
    """Sums of cell values over every level-``j`` cube meeting the domain.

    Returns the array of sums (one entry per cube, ``K`` per axis) and the
    dyadic index of the first cube along each axis.
    """
    N = values.shape[0]
    b, k0 = _axis_block(j, J0, j_max, N)
    out = values
    for ax in range(values.ndim):
        shape = out.shape[:ax] + (N // b, b) + out.shape[ax + 1:]
        out = out.reshape(shape).sum(axis=ax + 1)
    return out, k0


def expand_blocks(blocks: np.ndarray, J0: int, j_max: int, j: int, N: int) -> np.ndarray:
    """Broadcast per-cube values at level ``j`` back onto the cells."""
    b, _ = _axis_block(j, J0, j_max, N)
    out = blocks
    for ax in range(blocks.ndim):
        out = np.repeat(out, b, axis=ax)
    return out


def triple_sums(values: np.ndarray, J0: int, j_max: int, j: int) -> np.ndarray:
    """Per-cube sums over the tripled cubes ``3Q`` for every level-``j`` cube ``Q``."""
    sums, _ = cube_sums(values, J0, j_max, j)
    out = sums
    for ax in range(sums.ndim):
        pad = [(0, 0)] * out.ndim
        pad[ax] = (1, 1)
        p = np.pad(out, pad)
        K = out.shape[ax]
        out = (np.take(p, range(0, K), axis=ax) + np.take(p, range(1, K + 1), axis=ax)
               + np.take(p, range(2, K + 2), axis=ax))
    return out


def subcell_triple_sums(values: np.ndarray, j_max: int, j: int) -> np.ndarray:
    """Integral (in cell-volume units) over ``3Q`` for the level-``j`` cube ``Q``
    containing each cell centre, ``j > j_max``."""
    if j <= j_max:
        raise ValueError("sub-resolution levels only")
    s = 2.0 ** (j_max - j)
    # 3Q spans [c - s h, c + 2 s h): cell-local overlaps with this cell and the next
    w_self = min(1.0, 0.5 + 2 * s) - (0.5 - s)
    w_next = max(0.0, 2 * s - 0.5)
    out = values
    for ax in range(values.ndim):
        nxt = np.zeros_like(out)
        src = [slice(None)] * out.ndim
        dst = [slice(None)] * out.ndim
        src[ax] = slice(1, None)
        dst[ax] = slice(0, -1)
        nxt[tuple(dst)] = out[tuple(src)]
        out = w_self * out + w_next * nxt
    return out


# -- import / export ---------------------------------------------------------

def save_csv(f: GridFunction, path) -> None:
    buf = io.StringIO()
    buf.write(f"# n={f.n},J0={f.J0},j_max={f.j_max}\n")
    for v in f.values.ravel():
        buf.write(f"{v:.17g}\n")
    Path(path).write_text(buf.getvalue())


def load_csv(path) -> GridFunction:
    lines = Path(path).read_text().splitlines()
    head = lines[0].lstrip("#").strip()
    meta = dict(kv.split("=") for kv in head.split(","))
    n, J0, j_max = int(meta["n"]), int(meta["J0"]), int(meta["j_max"])
    vals = np.array([float(x) for x in lines[1:] if x.strip()])
    N = 2 ** (J0 + j_max + 1)
    return GridFunction(vals.reshape((N,) * n), J0, j_max)


_MAGIC = b"DYGF"


def save_binary(f: GridFunction, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<qqq", f.n, f.J0, f.j_max))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_binary(path) -> GridFunction:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError("not a grid-function file")
    n, J0, j_max = struct.unpack("<qqq", raw[4:28])
    N = 2 ** (J0 + j_max + 1)
    vals = np.frombuffer(raw[28:], dtype="<f8").reshape((N,) * n)
    return GridFunction(vals, J0, j_max)
