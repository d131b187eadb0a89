"""Slow reference computations that share as little code as possible with the fast paths.

* exhaustive Morrey suprema: every cube of every generation is enumerated
  through the lattice and integrated one at a time, including generations
  past both ends of the grid;
* the maximal function at a single point, scanning all generations down to
  the lattice cap;
* ``J_alpha`` for one-dimensional step inputs at arbitrary points, by
  splitting ``y`` at every breakpoint and integrating ``|y|^(alpha-1)`` in
  closed form;
* ``I_alpha`` for one-dimensional step inputs at arbitrary points, with the
  same breakpoint splitting in the two integration variables;
* refined-grid evaluation sampled back at coarse cell centres.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .grid import GridFunction
from .lattice import MAX_LEVEL, DyadicCube, cubes_at_level_intersecting, dilate3
from .norms import MorreyExponents

__all__ = [
    "exhaustive_morrey_norm",
    "maximal_at_point",
    "j_alpha_step_1d",
    "j_alpha_indicator_1d",
    "i_alpha_step_1d",
    "refined_at_centers",
    "linf_relative_error",
]


def exhaustive_morrey_norm(f: GridFunction, e, extra_levels: int = 2) -> float:
    """Morrey norm by brute force over generations ``-J0-extra .. j_max+extra``.

    Only meant for small grids: the finest generation has ``2^(n(J0+j_max+extra+1))`` cubes.
    """
    e = e if isinstance(e, MorreyExponents) else MorreyExponents(*e)
    fq = f.pointwise_power(e.q)
    best = 0.0
    for j in range(-f.J0 - extra_levels, f.j_max + extra_levels + 1):
        vol = float(Fraction(2) ** (-j * f.n))
        for Q in cubes_at_level_intersecting(j, f.domain):
            s = fq.integrate(Q)
            if s > 0:
                best = max(best, vol ** (1 / e.p - 1 / e.q) * s ** (1 / e.q))
    return best


def maximal_at_point(f: GridFunction, x, eta: float = 1.0, finest: int | None = None) -> float:
    """``sup_{Q ∋ x} m^(eta)_{3Q} |f|`` over generations from the lattice cap to ``finest``."""
    x = tuple(Fraction(xi) for xi in np.atleast_1d(x))
    finest = f.j_max + 4 if finest is None else finest
    g = f.pointwise_power(eta)
    best = 0.0
    for j in range(-MAX_LEVEL, finest + 1):
        scale = Fraction(2) ** j
        Q = DyadicCube(j, tuple(int((xi * scale).__floor__()) for xi in x))
        box = dilate3(Q)
        best = max(best, g.integrate(box) / float(box.volume))
    return best ** (1.0 / eta)


def _pieces(f: GridFunction):
    """Breakpoints and values of a 1-d grid function."""
    if f.n != 1:
        raise ValueError("one-dimensional inputs only")
    return f.edges(), f.values


def _power_integral(lo: np.ndarray, hi: np.ndarray, alpha: float) -> np.ndarray:
    """``int_lo^hi |y|^(alpha-1) dy`` for ``lo <= hi``."""
    F = lambda y: np.sign(y) * np.abs(y) ** alpha / alpha
    return F(hi) - F(lo)


def j_alpha_step_1d(f1: GridFunction, f2: GridFunction, alpha: float, x: float) -> float:
    """``int f1(x+y) f2(x-y) |y|^(alpha-1) dy`` exactly (up to rounding) for step inputs."""
    e1, v1 = _pieces(f1)
    e2, v2 = _pieces(f2)
    # breakpoints in y: x + y on an edge of f1 or x - y on an edge of f2
    ys = np.unique(np.concatenate([e1 - x, x - e2, [0.0]]))
    lo, hi = ys[:-1], ys[1:]
    mid = 0.5 * (lo + hi)
    i1 = np.searchsorted(e1, x + mid, side="right") - 1
    i2 = np.searchsorted(e2, x - mid, side="right") - 1
    ok = (i1 >= 0) & (i1 < len(v1)) & (i2 >= 0) & (i2 < len(v2))
    val = np.zeros_like(mid)
    val[ok] = v1[i1[ok]] * v2[i2[ok]]
    keep = val != 0
    return float(np.sum(val[keep] * _power_integral(lo[keep], hi[keep], alpha)))


def j_alpha_indicator_1d(a: float, b: float, alpha: float, x: float) -> float:
    """``J_alpha[chi_[a,b), chi_[a,b)](x)``: the set of admissible ``y`` is one interval."""
    lo = max(a - x, x - b)
    hi = min(b - x, x - a)
    if hi <= lo:
        return 0.0
    return float(_power_integral(np.array(lo), np.array(hi), alpha))


def _G(s, alpha):
    # s^alpha / (alpha (alpha - 1)) minus a linear term (invisible to the double
    # differences), written with expm1 so it stays accurate as alpha -> 1
    s = np.asarray(s, dtype=float)
    pos = s > 0
    ls = np.log(np.where(pos, s, 1.0))
    if alpha == 1.0:
        return np.where(pos, s * ls, 0.0)
    return np.where(pos, s * np.expm1((alpha - 1.0) * ls) / (alpha * (alpha - 1.0)), 0.0)


def _distance_pieces(f: GridFunction, x: float):
    """Pieces of ``f`` in the variable ``d = |y - x|``: arrays (d_lo, d_hi, value)."""
    e, v = _pieces(f)
    cuts = np.unique(np.concatenate([e, [x]]))
    lo, hi = cuts[:-1], cuts[1:]
    idx = np.searchsorted(e, 0.5 * (lo + hi), side="right") - 1
    ok = (idx >= 0) & (idx < len(v))
    val = np.where(ok, v[np.clip(idx, 0, len(v) - 1)], 0.0)
    keep = val != 0
    lo, hi, val = lo[keep], hi[keep], val[keep]
    dlo = np.minimum(np.abs(lo - x), np.abs(hi - x))
    dhi = np.maximum(np.abs(lo - x), np.abs(hi - x))
    return dlo, dhi, val


def i_alpha_step_1d(f1: GridFunction, f2: GridFunction, alpha: float, x: float) -> float:
    """``int int f1(y1) f2(y2) (|x-y1| + |x-y2|)^(alpha-2)`` at an arbitrary point."""
    a0, a1, va = _distance_pieces(f1, x)
    b0, b1, vb = _distance_pieces(f2, x)
    A0, A1 = a0[:, None], a1[:, None]
    B0, B1 = b0[None, :], b1[None, :]
    W = _G(A1 + B1, alpha) - _G(A0 + B1, alpha) - _G(A1 + B0, alpha) + _G(A0 + B0, alpha)
    return float(va @ W @ vb)


def refined_at_centers(op, f1: GridFunction, f2: GridFunction, extra: int = 2, **kw) -> GridFunction:
    """Run ``op`` on the inputs refined by ``extra`` levels and read it back at coarse centres.

    A coarse centre sits on the shared face of the two middle refined cells
    along each axis, so the reading is the mean over those ``2^n`` cells.
    """
    if extra < 1:
        raise ValueError("extra must be at least 1")
    g = op(f1.refine(extra), f2.refine(extra), **kw)
    r = 2**extra
    v = g.values
    for ax in range(f1.n):
        shape = v.shape[:ax] + (f1.N, r) + v.shape[ax + 1:]
        v = v.reshape(shape)
        v = np.take(v, [r // 2 - 1, r // 2], axis=ax + 1).mean(axis=ax + 1)
    return GridFunction(v, f1.J0, f1.j_max)


def linf_relative_error(a: GridFunction, ref: GridFunction) -> float:
    """``max |a - ref| / max |ref|`` (0 when both vanish)."""
    top = float(np.max(np.abs(ref.values)))
    diff = float(np.max(np.abs(a.values - ref.values)))
    if top == 0:
        return 0.0 if diff == 0 else float("inf")
    return diff / top
