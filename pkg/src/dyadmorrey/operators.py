"""Bilinear fractional integrals, their dyadic majorants and the cube sums.

Conventions
-----------
All outputs are :class:`~dyadmorrey.grid.GridFunction` values sampled at cell
centres.  For step inputs on the grid the centre values of ``J_alpha`` and
``I_alpha`` are exact up to the accuracy of the cell kernel integrals: when
``x`` is a centre and ``y`` runs over the offset cell ``m h + [-h/2, h/2)^n``,
both ``x + y`` and ``x - y`` stay inside single cells.

Infinite sums over dyadic generations are evaluated as an explicit window
``[j_min, j_max_sum]`` plus closed-form geometric tails on either side
(:class:`MajorantTruncation`).  Outside a box-sized window every ball or
tripled cube sees the whole support, and below the resolution every tripled
cube sits inside the centre cell, so both tails are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .grid import GridFunction, cube_sums, expand_blocks, subcell_triple_sums, triple_sums
from .lattice import MAX_LEVEL, DyadicCube, LatticeError
from .norms import MorreyExponents, maximal, morrey_norm

__all__ = [
    "OperatorParams",
    "MajorantTruncation",
    "j_alpha",
    "i_alpha",
    "dyadic_majorant_J",
    "dyadic_majorant_I",
    "level_slice",
    "f_jq",
    "averaged_majorant",
    "powered_averaged_majorant",
    "u_powered_cube_sum",
    "CubeSumTable",
    "cube_sum_table",
    "hedberg_split",
    "hedberg_optimal_L",
    "j_kernel_weights",
    "i_kernel_weights",
]

I_ALPHA_MAX_CELLS = 2**10
BALL_VOLUME = {1: 2.0, 2: math.pi}


@dataclass(frozen=True)
class OperatorParams:
    alpha: float
    n: int = 1

    def check_j(self):
        if self.n not in (1, 2):
            raise ValueError("n must be 1 or 2")
        if not 0 < self.alpha < self.n:
            raise ValueError(f"J-type operators need 0 < alpha < n, got alpha={self.alpha}")

    def check_i(self):
        if self.n not in (1, 2):
            raise ValueError("n must be 1 or 2")
        if not 0 < self.alpha < 2 * self.n:
            raise ValueError(f"I-type operators need 0 < alpha < 2n, got alpha={self.alpha}")


def _params(P, f: GridFunction) -> OperatorParams:
    if not isinstance(P, OperatorParams):
        P = OperatorParams(float(P), f.n)
    if P.n != f.n:
        raise ValueError(f"operator dimension {P.n} does not match grid dimension {f.n}")
    return P


@dataclass(frozen=True)
class MajorantTruncation:
    """Window of explicitly enumerated generations.

    ``None`` picks the grid default (``-(J0 + 2)`` and ``j_max + 1``).  With
    ``tails=True`` the generations outside the window are added in closed
    form, so the window only decides which part is enumerated; with
    ``tails=False`` the sum is truncated to the window.
    """

    j_min: int | None = None
    j_max_sum: int | None = None
    tails: bool = True

    def resolve(self, f: GridFunction) -> tuple[int, int]:
        lo = -(f.J0 + 2) if self.j_min is None else int(self.j_min)
        hi = f.j_max + 1 if self.j_max_sum is None else int(self.j_max_sum)
        if lo > hi:
            raise ValueError(f"empty truncation window [{lo}, {hi}]")
        if abs(lo) > MAX_LEVEL or abs(hi) > MAX_LEVEL:
            raise LatticeError(f"truncation [{lo}, {hi}] outside lattice caps")
        return lo, hi

    def widened(self, f: GridFunction, by: int = 1) -> "MajorantTruncation":
        lo, hi = self.resolve(f)
        return MajorantTruncation(lo - by, hi + by, self.tails)

    def describe(self, f: GridFunction) -> str:
        lo, hi = self.resolve(f)
        return f"[{lo};{hi}]" + ("+tails" if self.tails else "")


DEFAULT_TRUNCATION = MajorantTruncation()


def _check_pair(f1: GridFunction, f2: GridFunction) -> None:
    if not f1.same_grid(f2):
        raise ValueError(f"grid mismatch: {f1!r} vs {f2!r}")


# -- kernel weights ------------------------------------------------------------

@lru_cache(maxsize=32)
def _unit_j_weights(alpha: float, n: int, N: int) -> np.ndarray:
    """``int_{cell m} |y|^(alpha - n) dy`` for unit cells, offsets ``|m_i| < N``."""
    m = np.arange(-(N - 1), N, dtype=float)
    if n == 1:
        a = np.abs(m)
        w = ((a + 0.5) ** alpha - np.maximum(a - 0.5, 0.0) ** alpha) / alpha
        w[N - 1] = 2.0 * 0.5**alpha / alpha
        w.setflags(write=False)
        return w
    return _unit_j_weights_2d(alpha, N)


def _gauss_cell_2d(alpha, cx, cy, width, order=8):
    x, wx = np.polynomial.legendre.leggauss(order)
    x = 0.5 * width * x
    wx = 0.5 * width * wx
    X = cx[..., None, None] + x[:, None]
    Y = cy[..., None, None] + x[None, :]
    return np.sum((X * X + Y * Y) ** ((alpha - 2) / 2) * wx[:, None] * wx[None, :], axis=(-2, -1))


def _unit_j_weights_2d(alpha: float, N: int) -> np.ndarray:
    from scipy.integrate import quad

    k = np.arange(N, dtype=float)
    KX, KY = np.meshgrid(k, k, indexing="ij")
    quadrant = _gauss_cell_2d(alpha, KX, KY, 1.0)
    # cells near the origin: 4 x 4 sub-cells per cell
    near = min(N, 4)
    sub = (np.arange(4) - 1.5) / 4
    for a in range(near):
        for b in range(near):
            cx = a + sub[:, None] + 0 * sub[None, :]
            cy = b + 0 * sub[:, None] + sub[None, :]
            quadrant[a, b] = _gauss_cell_2d(alpha, cx, cy, 0.25).sum()
    # origin cell in polar form: 8 int_0^{pi/4} int_0^{1/(2 cos t)} r^(alpha-1) dr dt
    ang, _ = quad(lambda t: (2 * math.cos(t)) ** (-alpha), 0, math.pi / 4, epsabs=0, epsrel=1e-13)
    quadrant[0, 0] = 8.0 * ang / alpha
    full = np.empty((2 * N - 1, 2 * N - 1))
    full[N - 1:, N - 1:] = quadrant
    full[:N, N - 1:] = quadrant[::-1, :]
    full[N - 1:, :N] = quadrant[:, ::-1]
    full[:N, :N] = quadrant[::-1, ::-1]
    full.setflags(write=False)
    return full


def j_kernel_weights(alpha: float, n: int, N: int, h: float) -> np.ndarray:
    """Cell integrals of ``|y|^(alpha - n)`` over the offset cells of side ``h``."""
    return _unit_j_weights(float(alpha), n, N) * h**alpha


def _offset_norms(n: int, N: int) -> np.ndarray:
    m = np.arange(-(N - 1), N, dtype=float)
    if n == 1:
        return np.abs(m)
    return np.sqrt(m[:, None] ** 2 + m[None, :] ** 2)


def _level_ball_weights(alpha, n, N, h, j, j_max):
    """Weights of the level-``j`` ball integral ``2^{j(n-alpha)} int_{B(2^-j)}``.

    A cell belongs to the ball when its centre does; below the resolution the
    ball lies inside the centre cell and contributes its own volume.
    """
    scale = 2.0 ** (j * (n - alpha))
    if j <= j_max:
        r = 2.0 ** (j_max - j)  # radius in cell units
        w = (_offset_norms(n, N) < r).astype(float) * h**n
    else:
        w = np.zeros((2 * N - 1,) * n)
        w[(N - 1,) * n] = min(h**n, BALL_VOLUME[n] * 2.0 ** (-j * n))
    return scale * w


def _j_fine_tail(alpha, n, first):
    """``sum_{j >= first} 2^{j(n-alpha)} |B(2^-j)|`` for balls inside the centre cell."""
    return BALL_VOLUME[n] * 2.0 ** (-first * alpha) / (1.0 - 2.0 ** (-alpha))


def _check_j_tails(f, lo, hi):
    reach = (f.N - 1) * f.h * math.sqrt(f.n)
    if 2.0 ** (-(lo - 1)) <= reach:
        raise ValueError(
            f"coarse tail needs j_min <= {-(f.J0 + 1)} so that every ball below it covers the box")
    if hi < f.j_max:
        raise ValueError(f"fine tail needs j_max_sum >= j_max = {f.j_max}")


def _majorant_j_weights(alpha, n, N, h, j_max, lo, hi, tails, J0):
    c = np.zeros((2 * N - 1,) * n)
    for j in range(lo, hi + 1):
        c += _level_ball_weights(alpha, n, N, h, j, j_max)
    if tails:
        c += h**n * 2.0 ** ((lo - 1) * (n - alpha)) / (1.0 - 2.0 ** (-(n - alpha)))
        c[(N - 1,) * n] += _j_fine_tail(alpha, n, hi + 1)
    return c


# -- the shifted-product kernel -----------------------------------------------

def _support(v: np.ndarray):
    nz = np.nonzero(v)
    if len(nz[0]) == 0:
        return None
    return [(int(a.min()), int(a.max()) + 1) for a in nz]


def _ranges(s1, s2):
    """Centre and offset index ranges where f1(i+m) f2(i-m) can be nonzero."""
    out = []
    for (a1, b1), (a2, b2) in zip(s1, s2):
        i_lo = -((-(a1 + a2)) // 2)
        i_hi = (b1 - 1 + b2 - 1) // 2 + 1
        m_lo = -((-(a1 - (b2 - 1))) // 2)
        m_hi = (b1 - 1 - a2) // 2 + 1
        out.append((i_lo, i_hi, m_lo, m_hi))
    return out


def _pair_sums(v1: np.ndarray, v2: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``out[r, i] = sum_m weights[r, m] v1[i + m] v2[i - m]``.

    ``weights`` has shape ``(R,) + (2N - 1,) * n`` indexed by ``m + N - 1``.
    Work is restricted to the centres and offsets allowed by the supports.
    """
    n = v1.ndim
    N = v1.shape[0]
    R = weights.shape[0]
    out = np.zeros((R,) + v1.shape)
    s1, s2 = _support(v1), _support(v2)
    if s1 is None or s2 is None:
        return out
    rng = _ranges(s1, s2)
    pad1 = np.pad(v1, N)
    pad2 = np.pad(v2, N)
    if n == 1:
        i_lo, i_hi, m_lo, m_hi = rng[0]
        L = i_hi - i_lo
        win1 = sliding_window_view(pad1, L)
        win2 = sliding_window_view(pad2, L)
        chunk = max(1, (1 << 21) // L)
        acc = np.zeros((R, L))
        for c0 in range(m_lo, m_hi, chunk):
            ms = np.arange(c0, min(m_hi, c0 + chunk))
            prod = win1[N + i_lo + ms] * win2[N + i_lo - ms]
            acc += weights[:, ms + N - 1] @ prod
        out[:, i_lo:i_hi] = acc
        return out
    (i1_lo, i1_hi, m1_lo, m1_hi), (i2_lo, i2_hi, m2_lo, m2_hi) = rng
    L1, L2 = i1_hi - i1_lo, i2_hi - i2_lo
    win1 = sliding_window_view(pad1, L2, axis=1)
    win2 = sliding_window_view(pad2, L2, axis=1)
    ms2 = np.arange(m2_lo, m2_hi)
    acc = np.zeros((R, L1, L2))
    for m1 in range(m1_lo, m1_hi):
        a = win1[N + i1_lo + m1:N + i1_hi + m1][:, N + i2_lo + ms2]
        b = win2[N + i1_lo - m1:N + i1_hi - m1][:, N + i2_lo - ms2]
        w = weights[:, m1 + N - 1, ms2 + N - 1]
        acc += np.einsum("rm,amb->rab", w, a * b, optimize=True)
    out[:, i1_lo:i1_hi, i2_lo:i2_hi] = acc
    return out


# -- J-type operators --------------------------------------------------------

def j_alpha(f1: GridFunction, f2: GridFunction, P) -> GridFunction:
    """``J_alpha[f1, f2](x) = int f1(x + y) f2(x - y) |y|^(alpha - n) dy`` at cell centres."""
    _check_pair(f1, f2)
    P = _params(P, f1)
    P.check_j()
    w = j_kernel_weights(P.alpha, f1.n, f1.N, f1.h)
    out = _pair_sums(f1.values, f2.values, w[None])[0]
    return GridFunction(out, f1.J0, f1.j_max)


def dyadic_majorant_J(f1: GridFunction, f2: GridFunction, P, T: MajorantTruncation = DEFAULT_TRUNCATION
                      ) -> GridFunction:
    """``sum_j sum_{Q in D_j} chi_Q(x) l(Q)^(alpha-n) int_{B(2^-j)} f1(x+y) f2(x-y) dy``."""
    _check_pair(f1, f2)
    P = _params(P, f1)
    P.check_j()
    lo, hi = T.resolve(f1)
    if T.tails:
        _check_j_tails(f1, lo, hi)
    c = _majorant_j_weights(P.alpha, f1.n, f1.N, f1.h, f1.j_max, lo, hi, T.tails, f1.J0)
    out = _pair_sums(f1.values, f2.values, c[None])[0]
    return GridFunction(out, f1.J0, f1.j_max)


def level_slice(f1: GridFunction, f2: GridFunction, P, j: int) -> GridFunction:
    """``2^{j(n-alpha)} int_{B(2^-j)} f1(x+y) f2(x-y) dy`` at every centre."""
    _check_pair(f1, f2)
    P = _params(P, f1)
    P.check_j()
    w = _level_ball_weights(P.alpha, f1.n, f1.N, f1.h, j, f1.j_max)
    return GridFunction(_pair_sums(f1.values, f2.values, w[None])[0], f1.J0, f1.j_max)


def f_jq(f1: GridFunction, f2: GridFunction, P, Q: DyadicCube) -> GridFunction:
    """The block ``chi_Q l(Q)^(alpha-n) int_{B(l(Q))} f1(.+y) f2(.-y) dy``."""
    if Q.level > f1.j_max:
        raise LatticeError("cube finer than the grid")
    s = level_slice(f1, f2, P, Q.level)
    v = np.zeros_like(s.values)
    sl = s.cube_slices(Q)
    v[sl] = s.values[sl]
    return GridFunction(v, f1.J0, f1.j_max)


def _averaged(f1, f2, P, T, u):
    _check_pair(f1, f2)
    P = _params(P, f1)
    P.check_j()
    n, N, h, J0, j_max = f1.n, f1.N, f1.h, f1.J0, f1.j_max
    a = P.alpha
    lo, hi = T.resolve(f1)
    if T.tails:
        _check_j_tails(f1, lo, hi)
    grid_levels = list(range(lo, min(hi, j_max) + 1))
    rows = [_level_ball_weights(a, n, N, h, j, j_max) for j in grid_levels]
    if T.tails:
        rows.append(np.full((2 * N - 1,) * n, h**n))
    center = np.zeros((2 * N - 1,) * n)
    center[(N - 1,) * n] = 1.0
    rows.append(center)
    slices = _pair_sums(f1.values, f2.values, np.stack(rows))
    p0 = slices[-1]
    total = np.zeros(f1.values.shape)
    for r, j in enumerate(grid_levels):
        s = slices[r]
        per_cube = 2.0 ** ((j_max - j) * n)  # |Q| / h^n, zero outside the box
        sums, _ = cube_sums(s**u, J0, j_max, j)
        avg = (sums / per_cube) ** (1.0 / u)
        total += expand_blocks(avg, J0, j_max, j, N)
    # sub-resolution generations: the cube lies in the centre cell
    for j in range(max(lo, j_max + 1), hi + 1):
        total += 2.0 ** (j * (n - a)) * min(h**n, BALL_VOLUME[n] * 2.0 ** (-j * n)) * p0
    if T.tails:
        full = slices[-2]  # sum_m h^n P_m : every ball below lo covers the box
        sums, _ = cube_sums(full**u, J0, j_max, lo - 1)
        gamma = n - a + n / u
        # m^(u)_Q(2^{j(n-a)} full) over an orthant-sized cube of generation j
        coef = (sums * h**n) ** (1.0 / u)
        coarse = coef * 2.0 ** ((lo - 1) * gamma) / (1.0 - 2.0 ** (-gamma))
        total += expand_blocks(coarse, J0, j_max, lo - 1, N)
        total += _j_fine_tail(a, n, max(hi, j_max) + 1) * p0
    return GridFunction(total, J0, j_max)


def averaged_majorant(f1: GridFunction, f2: GridFunction, P, T: MajorantTruncation = DEFAULT_TRUNCATION
                      ) -> GridFunction:
    """``sum_j sum_{Q in D_j} m_Q(F_{j,Q}) chi_Q``."""
    return _averaged(f1, f2, P, T, 1.0)


def powered_averaged_majorant(f1: GridFunction, f2: GridFunction, P, u: float,
                              T: MajorantTruncation = DEFAULT_TRUNCATION) -> GridFunction:
    """``sum_j sum_{Q in D_j} m^(u)_Q(F_{j,Q}) chi_Q`` for ``u > 1``."""
    if not u > 1:
        raise ValueError(
            "powered averaged majorant needs u > 1: bounding it by the cube sum moves the "
            "L^u mean inside the ball integral (Minkowski), which fails for u <= 1")
    return _averaged(f1, f2, P, T, float(u))


# -- I-type operators --------------------------------------------------------

def _G(s, alpha):
    # s^alpha / (alpha (alpha - 1)) minus a linear term (invisible to the double
    # differences), written with expm1 so it stays accurate as alpha -> 1
    s = np.asarray(s, dtype=float)
    pos = s > 0
    ls = np.log(np.where(pos, s, 1.0))
    if alpha == 1.0:
        return np.where(pos, s * ls, 0.0)
    return np.where(pos, s * np.expm1((alpha - 1.0) * ls) / (alpha * (alpha - 1.0)), 0.0)


@lru_cache(maxsize=8)
def _unit_i_weights(alpha: float, N: int) -> np.ndarray:
    d = np.abs(np.arange(-(N - 1), N, dtype=float))
    lo = np.maximum(d - 0.5, 0.0)
    hi = d + 0.5
    mult = np.where(d == 0, 2.0, 1.0)
    A0, B0 = lo[:, None], lo[None, :]
    A1, B1 = hi[:, None], hi[None, :]
    W = _G(A1 + B1, alpha) - _G(A0 + B1, alpha) - _G(A1 + B0, alpha) + _G(A0 + B0, alpha)
    W *= mult[:, None] * mult[None, :]
    W.setflags(write=False)
    return W


def i_kernel_weights(alpha: float, N: int, h: float) -> np.ndarray:
    """Cell-pair integrals of ``(|u| + |v|)^(alpha - 2)`` (n = 1), offsets ``|d| < N``."""
    return _unit_i_weights(float(alpha), N) * h**alpha


def i_alpha(f1: GridFunction, f2: GridFunction, P) -> GridFunction:
    """``I_alpha[f1, f2](x) = int int f1(y1) f2(y2) (|x-y1| + |x-y2|)^(alpha - 2n)`` (n = 1).

    Every cell pair is integrated in closed form against the kernel, so the
    centre values are exact for grid step functions.
    """
    _check_pair(f1, f2)
    P = _params(P, f1)
    P.check_i()
    if f1.n != 1:
        raise ValueError("i_alpha is implemented for n = 1 only (O(N^3) work)")
    N = f1.N
    if N > I_ALPHA_MAX_CELLS:
        raise ValueError(f"i_alpha is limited to {I_ALPHA_MAX_CELLS} cells, grid has {N}")
    out = np.zeros(N)
    s1, s2 = _support(f1.values), _support(f2.values)
    if s1 is None or s2 is None:
        return GridFunction(out, f1.J0, f1.j_max)
    W = i_kernel_weights(P.alpha, N, f1.h)
    (a1, b1), (a2, b2) = s1[0], s2[0]
    # rows d with f(i + d) possibly nonzero for some centre i
    da = np.arange(a1 - N + 1, b1)
    db = np.arange(a2 - N + 1, b2)
    p1 = np.pad(f1.values, N)
    p2 = np.pad(f2.values, N)
    A = sliding_window_view(p1, N)[N + da]
    B = sliding_window_view(p2, N)[N + db]
    inner = W[np.ix_(da + N - 1, db + N - 1)] @ B
    out = np.einsum("di,di->i", A, inner)
    return GridFunction(out, f1.J0, f1.j_max)


@dataclass
class CubeSumTable:
    """Per-generation terms of ``sum_Q chi_Q l(Q)^(alpha - 2n/u) (int_{(3Q)^2} (f1 f2)^u)^(1/u)``.

    ``terms[r]`` holds generation ``levels[r]`` at every cell centre.  Below
    the window the term is ``coarse * 2^(j gamma)`` (``gamma = 2n/u - alpha``),
    above it ``fine * 2^(-j alpha)``.
    """

    levels: np.ndarray
    terms: np.ndarray
    coarse: np.ndarray | float
    fine: np.ndarray
    alpha: float
    gamma: float
    tails: bool

    @property
    def lo(self) -> int:
        return int(self.levels[0])

    @property
    def hi(self) -> int:
        return int(self.levels[-1])

    def _coarse_sum(self, upto):
        """Sum of the coarse tail over generations ``j <= upto`` (``upto < lo``)."""
        g = self.gamma
        if g <= 0:
            return np.where(np.asarray(self.coarse) > 0, np.inf, 0.0)
        return self.coarse * 2.0 ** (upto * g) / (1.0 - 2.0 ** (-g))

    def _fine_sum(self, start):
        a = self.alpha
        return self.fine * 2.0 ** (-start * a) / (1.0 - 2.0 ** (-a))

    def total(self) -> np.ndarray:
        out = self.terms.sum(axis=0)
        if self.tails:
            out = out + self._coarse_sum(self.lo - 1) + self._fine_sum(self.hi + 1)
        return out

    def split(self, L):
        """``(S1, S2)``: terms with ``l(Q) <= L`` and with ``l(Q) > L``."""
        L = np.broadcast_to(np.asarray(L, dtype=float), self.terms.shape[1:])
        if np.any(~(L > 0)):
            raise ValueError("L must be positive")
        jc = np.ceil(-np.log2(L))  # l(Q) = 2^-j <= L  <=>  j >= jc
        lv = self.levels.reshape((-1,) + (1,) * (self.terms.ndim - 1))
        small = lv >= jc
        S1 = np.where(small, self.terms, 0.0).sum(axis=0)
        S2 = np.where(small, 0.0, self.terms).sum(axis=0)
        if self.tails:
            lo, hi = self.lo, self.hi
            fine_all = self._fine_sum(hi + 1)
            fine_from = self._fine_sum(np.maximum(jc, hi + 1))
            S1 = S1 + fine_from
            S2 = S2 + (fine_all - fine_from)
            coarse_all = self._coarse_sum(lo - 1)
            coarse_below = self._coarse_sum(np.minimum(jc - 1, lo - 1))
            S2 = S2 + coarse_below
            S1 = S1 + (coarse_all - coarse_below)
        return S1, S2


def cube_sum_table(f1: GridFunction, f2: GridFunction, P, u: float = 1.0,
                   T: MajorantTruncation = DEFAULT_TRUNCATION, levels=None) -> CubeSumTable:
    _check_pair(f1, f2)
    P = _params(P, f1)
    P.check_i()
    if not u > 0:
        raise ValueError("u must be positive")
    n, J0, j_max, N = f1.n, f1.J0, f1.j_max, f1.N
    a = P.alpha
    lo, hi = T.resolve(f1) if levels is None else levels
    if T.tails:
        if lo - 1 > -J0:
            raise ValueError(f"coarse tail needs j_min <= {-J0 + 1}")
        if hi + 1 < j_max + 2:
            raise ValueError(f"fine tail needs j_max_sum >= {j_max + 1}")
    gamma = 2 * n / u - a
    v1, v2 = f1.values**u, f2.values**u
    vol = f1.cell_volume
    lv = np.arange(lo, hi + 1)
    terms = np.empty((len(lv),) + f1.values.shape)
    for r, j in enumerate(lv):
        if j <= j_max:
            t1 = expand_blocks(triple_sums(v1, J0, j_max, j), J0, j_max, j, N)
            t2 = expand_blocks(triple_sums(v2, J0, j_max, j), J0, j_max, j, N)
        else:
            t1 = subcell_triple_sums(v1, j_max, j)
            t2 = subcell_triple_sums(v2, j_max, j)
        terms[r] = 2.0 ** (j * gamma) * (t1 * t2 * vol * vol) ** (1.0 / u)
    coarse = (v1.sum() * vol * v2.sum() * vol) ** (1.0 / u)
    fine = 3.0 ** (2 * n / u) * f1.values * f2.values
    return CubeSumTable(lv, terms, coarse, fine, a, gamma, T.tails)


def u_powered_cube_sum(f1: GridFunction, f2: GridFunction, P, u: float,
                       T: MajorantTruncation = DEFAULT_TRUNCATION) -> GridFunction:
    """``sum_Q chi_Q l(Q)^(alpha - 2n/u) (int_{(3Q)^2} (f1(y1) f2(y2))^u)^(1/u)``."""
    tab = cube_sum_table(f1, f2, P, u, T)
    return GridFunction(tab.total(), f1.J0, f1.j_max)


def dyadic_majorant_I(f1: GridFunction, f2: GridFunction, P, T: MajorantTruncation = DEFAULT_TRUNCATION
                      ) -> GridFunction:
    """``sum_Q chi_Q(x) l(Q)^(alpha - 2n) int_{3Q} f1 int_{3Q} f2``."""
    return u_powered_cube_sum(f1, f2, P, 1.0, T)


# -- the small/large cube split --------------------------------------------------

def hedberg_split(f1: GridFunction, f2: GridFunction, P, u: float, L: float, cell,
                  T: MajorantTruncation = DEFAULT_TRUNCATION) -> tuple[float, float]:
    """Split the u-powered cube sum at ``cell`` into cubes with ``l(Q) <= L`` and ``> L``."""
    if not L > 0:
        raise ValueError("L must be positive")
    P = _params(P, f1)
    lo, hi = T.resolve(f1)
    jc = int(math.ceil(-math.log2(L)))
    lo, hi = max(-MAX_LEVEL, min(lo, jc)), min(MAX_LEVEL, max(hi, jc))
    tab = cube_sum_table(f1, f2, P, u, T, levels=(lo, hi))
    S1, S2 = tab.split(L)
    cell = tuple(cell)
    return float(S1[cell]), float(S2[cell])


def hedberg_optimal_L(f1: GridFunction, f2: GridFunction, params, u: float, cell=None):
    """``(||f1|| ||f2|| / (M^(u) f1(x) M^(u) f2(x)))^(p/n)`` at ``cell`` (or every cell).

    ``params`` carries ``p1, q1, p2, q2, p`` (a :class:`~dyadmorrey.verifier.TheoremParams`).
    Cells where the maximal product vanishes get ``inf``.
    """
    norm = (morrey_norm(f1, MorreyExponents(params.p1, params.q1))
            * morrey_norm(f2, MorreyExponents(params.p2, params.q2)))
    mm = maximal(f1, u).values * maximal(f2, u).values
    with np.errstate(divide="ignore"):
        L = np.where(mm > 0, (norm / np.where(mm > 0, mm, 1.0)) ** (params.p / f1.n), np.inf)
    if cell is None:
        return L
    return float(L[tuple(cell)])
