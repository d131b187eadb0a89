"""Inequalities as measured ratios: parameter bookkeeping, report rows and summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .grid import GridFunction
from .lattice import DyadicCube
from .norms import MorreyExponents, average, maximal, morrey_norm, powered_average
from .operators import (
    DEFAULT_TRUNCATION,
    MajorantTruncation,
    OperatorParams,
    cube_sum_table,
    dyadic_majorant_I,
    i_alpha,
    j_alpha,
    u_powered_cube_sum,
)

__all__ = [
    "RegimeError",
    "TheoremParams",
    "solve_params",
    "regime_flags",
    "hypothesis_failures",
    "InequalityReport",
    "make_report",
    "check_averaging",
    "check_u_powered_averaging",
    "check_boundedness",
    "check_pointwise",
    "ConstantSummary",
    "summarize",
    "estimate_constant",
    "hedberg_constants",
    "hedberg_bound_constants",
    "chiarenza_frasca_ratio",
    "relative_delta",
]

REL_TOL = 1e-9
THEOREMS = ("thm1.2", "thm1.3", "thm1.4")


class RegimeError(ValueError):
    """Parameters outside the hypotheses of the inequality being checked."""


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= REL_TOL * max(abs(a), abs(b))


@dataclass(frozen=True)
class TheoremParams:
    n: int
    alpha: float
    p1: float
    q1: float
    p2: float
    q2: float
    p: float
    q: float
    s: float
    t: float
    u: float | None = None

    def __post_init__(self):
        for name in ("alpha", "p1", "q1", "p2", "q2", "p", "q", "s", "t"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not (self.q1 <= self.p1 and self.q2 <= self.p2):
            raise ValueError("need q_j <= p_j")
        if not _close(1 / self.p, 1 / self.p1 + 1 / self.p2):
            raise ValueError("1/p != 1/p1 + 1/p2")
        if not _close(1 / self.q, 1 / self.q1 + 1 / self.q2):
            raise ValueError("1/q != 1/q1 + 1/q2")
        if not _close(1 / self.s, 1 / self.p - self.alpha / self.n):
            raise ValueError("1/s != 1/p - alpha/n")
        if not _close(self.q / self.p, self.t / self.s):
            raise ValueError("q/p != t/s")
        if self.u is not None and not self.u > 0:
            raise ValueError("u must be positive")

    @property
    def min_q(self) -> float:
        return min(self.q1, self.q2)

    @property
    def regimes(self) -> tuple[str, ...]:
        flags = regime_flags(self)
        return tuple(k for k in THEOREMS if flags[k])

    @property
    def regime(self) -> str:
        r = self.regimes
        return r[0] if r else "none"

    def with_u(self, u: float | None) -> "TheoremParams":
        return replace(self, u=u)

    def exponents(self) -> tuple[MorreyExponents, MorreyExponents, MorreyExponents]:
        return (MorreyExponents(self.p1, self.q1), MorreyExponents(self.p2, self.q2),
                MorreyExponents(self.s, self.t))


def hypothesis_failures(tp: TheoremParams, check: str) -> list[str]:
    """Hypotheses of ``check`` that ``tp`` violates (empty list when admissible)."""
    out = []
    n, a, s, t = tp.n, tp.alpha, tp.s, tp.t
    if check in THEOREMS:
        if not 0 < a < n:
            out.append("need 0 < alpha < n")
    elif check in ("lem2.5", "lem2.6"):
        if not 0 < a < 2 * n:
            out.append("need 0 < alpha < 2n")
    else:
        raise ValueError(f"no hypotheses recorded for {check!r}")
    for j, (pj, qj) in enumerate(((tp.p1, tp.q1), (tp.p2, tp.q2)), start=1):
        if not 1 < qj <= pj:
            out.append(f"need 1 < q{j} <= p{j}")
    if not 0 < t <= s:
        out.append("need 0 < t <= s")
    if check == "thm1.2":
        if not 1 <= t:
            out.append("need 1 <= t")
        if not s < tp.min_q:
            out.append("need s < min(q1, q2)")
    elif check == "thm1.3":
        if not s < 1:
            out.append("need s < 1")
    elif check == "thm1.4":
        if not t <= 1 <= s:
            out.append("need t <= 1 <= s")
        if not s < tp.min_q:
            out.append("need s < min(q1, q2)")
    elif check == "lem2.6":
        if tp.u is None:
            out.append("need u")
        elif not s < tp.u < tp.min_q:
            out.append("need s < u < min(q1, q2)")
    return out


def regime_flags(tp: TheoremParams) -> dict[str, bool]:
    return {k: not hypothesis_failures(tp, k) for k in THEOREMS + ("lem2.5", "lem2.6")}


def solve_params(n: int, alpha: float, p1: float, q1: float, p2: float, q2: float,
                 u: float | None = None) -> TheoremParams:
    """Fill in ``p, q, s, t`` from the index relations and propose ``u``.

    ``u`` defaults to ``sqrt(s * min(q1, q2))`` when ``s < min(q1, q2)``.
    Parameters matching no regime are returned with ``regime == "none"``.
    """
    for name, v in (("alpha", alpha), ("p1", p1), ("q1", q1), ("p2", p2), ("q2", q2)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
    if not (q1 <= p1 and q2 <= p2):
        raise ValueError("need q_j <= p_j")
    p = 1.0 / (1.0 / p1 + 1.0 / p2)
    q = 1.0 / (1.0 / q1 + 1.0 / q2)
    inv_s = 1.0 / p - alpha / n
    if not inv_s > 0:
        raise ValueError(f"alpha = {alpha} >= n/p = {n / p}: s is undefined")
    s = 1.0 / inv_s
    t = s * q / p
    if u is None and s < min(q1, q2):
        u = math.sqrt(s * min(q1, q2))
    return TheoremParams(n, float(alpha), float(p1), float(q1), float(p2), float(q2), p, q, s, t, u)


# -- reports ---------------------------------------------------------------------

@dataclass(frozen=True)
class InequalityReport:
    check_id: str
    corpus_item_id: str
    lhs: float
    rhs: float
    ratio: float
    resolution: int = 0
    truncation: str = "exact"
    seed: int = 0
    notes: str = ""
    degenerate: bool = False
    violations: int = 0


def make_report(check_id: str, lhs: float, rhs: float, **kw) -> InequalityReport:
    """Ratio bookkeeping: ``0/0`` is degenerate, ``x/0`` with ``x > 0`` is infinite."""
    lhs, rhs = float(lhs), float(rhs)
    if rhs > 0:
        ratio, degenerate = lhs / rhs, False
    elif lhs == 0:
        ratio, degenerate = float("nan"), True
    else:
        ratio, degenerate = float("inf"), False
    return InequalityReport(check_id, kw.pop("corpus_item_id", ""), lhs, rhs, ratio,
                            degenerate=degenerate, **kw)


def _sum_functions(fs: Sequence[GridFunction]) -> GridFunction:
    out = fs[0]
    for f in fs[1:]:
        out = out + f
    return out


def _check_family(family) -> None:
    if not family:
        raise ValueError("empty family")
    for i, (f, Q) in enumerate(family):
        total = f.integrate()
        inside = f.integrate(Q)
        if total - inside > 1e-12 * max(total, 1e-300):
            raise ValueError(f"family member {i} is not supported in its cube {Q}")


def _averaging(family, e: MorreyExponents, mean: Callable[[GridFunction, DyadicCube], float],
               check_id: str, **kw) -> InequalityReport:
    _check_family(family)
    fs = [f for f, _ in family]
    g0 = fs[0]
    lhs = morrey_norm(_sum_functions(fs), e)
    v = np.zeros_like(g0.values)
    for f, Q in family:
        v[g0.cube_slices(Q)] += mean(f, Q)
    rhs = morrey_norm(GridFunction(v, g0.J0, g0.j_max), e)
    kw.setdefault("resolution", g0.j_max)
    return make_report(check_id, lhs, rhs, **kw)


def check_averaging(family, e, check_id: str = "thm2.2", **kw) -> InequalityReport:
    """``||sum f_j|| / ||sum m_{Q_j}(f_j) chi_{Q_j}||`` in ``M^p_q``.

    ``check_id="prop2.1"`` requires ``p == q <= 1``; otherwise ``0 < q <= p < 1``.
    """
    e = e if isinstance(e, MorreyExponents) else MorreyExponents(*e)
    if check_id == "prop2.1":
        if not (e.p == e.q and e.p <= 1):
            raise RegimeError("need 0 < p = q <= 1")
    elif not e.p < 1:
        raise RegimeError("need 0 < q <= p < 1")
    return _averaging(family, e, average, check_id, **kw)


def check_u_powered_averaging(family, e, u: float, check_id: str = "thm2.3", **kw) -> InequalityReport:
    e = e if isinstance(e, MorreyExponents) else MorreyExponents(*e)
    if not (e.q <= 1 <= e.p < u):
        raise RegimeError("need 0 < q <= 1 <= p < u")
    return _averaging(family, e, lambda f, Q: powered_average(f, Q, u), check_id, **kw)


_OPERATOR_GATE = {"J": None, "I": "lem2.5", "majorant_I": "lem2.5", "u_powered_sum": "lem2.6"}


def check_boundedness(tp: TheoremParams, f1: GridFunction, f2: GridFunction, operator: str = "J",
                      theorem: str | None = None, T: MajorantTruncation = DEFAULT_TRUNCATION,
                      check_id: str | None = None, **kw) -> InequalityReport:
    """``||op(f1, f2)||_{M^s_t} / (||f1||_{M^p1_q1} ||f2||_{M^p2_q2})``."""
    if operator not in _OPERATOR_GATE:
        raise ValueError(f"unknown operator {operator!r}")
    gate = _OPERATOR_GATE[operator]
    if gate is None:
        gate = theorem if theorem is not None else tp.regime
        if gate == "none":
            raise RegimeError("parameters match none of the boundedness regimes")
    failures = hypothesis_failures(tp, gate)
    if failures:
        raise RegimeError(f"{gate}: " + "; ".join(failures))
    if f1.n != tp.n:
        raise ValueError("grid dimension does not match parameters")
    e1, e2, es = tp.exponents()
    rhs = morrey_norm(f1, e1) * morrey_norm(f2, e2)
    if rhs == 0:
        raise ValueError("boundedness check needs nonzero inputs")
    P = OperatorParams(tp.alpha, tp.n)
    if operator == "J":
        g = j_alpha(f1, f2, P)
    elif operator == "I":
        g = i_alpha(f1, f2, P)
    elif operator == "majorant_I":
        g = dyadic_majorant_I(f1, f2, P, T)
    else:
        g = u_powered_cube_sum(f1, f2, P, tp.u, T)
    lhs = morrey_norm(g, es)
    kw.setdefault("resolution", f1.j_max)
    if operator != "J" and operator != "I":
        kw.setdefault("truncation", T.describe(f1))
    return make_report(check_id or gate, lhs, rhs, **kw)


def check_pointwise(lhs_fn: GridFunction, rhs_fn: GridFunction, check_id: str = "pointwise",
                    **kw) -> InequalityReport:
    """Worst cell of ``lhs / rhs`` plus the number of cells with ``lhs > 0 = rhs``."""
    if not lhs_fn.same_grid(rhs_fn):
        raise ValueError("pointwise comparison needs a common grid")
    a, b = lhs_fn.values, rhs_fn.values
    violations = int(np.count_nonzero((a > 0) & (b == 0)))
    pos = b > 0
    kw.setdefault("resolution", lhs_fn.j_max)
    if not pos.any():
        return make_report(check_id, float(a.max()), 0.0, violations=violations, **kw)
    r = np.where(pos, a / np.where(pos, b, 1.0), -1.0)
    k = np.unravel_index(int(np.argmax(r)), r.shape)
    rep = make_report(check_id, float(a[k]), float(b[k]), violations=violations, **kw)
    if violations:
        rep = replace(rep, ratio=float("inf"))
    return rep


# -- summaries -------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantSummary:
    check_id: str
    max: float
    median: float
    argmax: str
    count: int
    degenerate: int
    violations: int
    stability_delta: float | None = None
    truncation_delta: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("check_id", "max", "median", "argmax", "count",
                                          "degenerate", "violations", "stability_delta",
                                          "truncation_delta")}
        d.update(self.extra)
        return d


def summarize(check_id: str, reports: Iterable[InequalityReport]) -> ConstantSummary:
    """Max/median over non-degenerate rows; ties in the max go to the smallest item id."""
    reports = sorted(reports, key=lambda r: r.corpus_item_id)
    live = [r for r in reports if not r.degenerate]
    viol = sum(r.violations for r in reports)
    if not live:
        return ConstantSummary(check_id, float("nan"), float("nan"), "", 0, len(reports), viol)
    ratios = np.array([r.ratio for r in live])
    k = int(np.argmax(ratios))
    return ConstantSummary(check_id, float(ratios[k]), float(np.median(ratios)),
                           live[k].corpus_item_id, len(live), len(reports) - len(live), viol)


def relative_delta(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


def estimate_constant(check_id: str, corpus: Sequence, evaluate: Callable, stability: bool = True,
                      widen: Callable | None = None) -> tuple[ConstantSummary, list[InequalityReport]]:
    """Run ``evaluate(item) -> report`` over ``corpus`` and summarise.

    ``stability`` reruns on every item refined once (``item.refined()``) and
    records the relative change of the max ratio; ``widen`` is an optional
    second evaluator (e.g. a wider truncation window) whose max is compared
    the same way.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    reports = [evaluate(item) for item in corpus]
    summ = summarize(check_id, reports)
    if stability:
        ref = summarize(check_id, [evaluate(item.refined()) for item in corpus])
        summ = replace(summ, stability_delta=relative_delta(summ.max, ref.max))
    if widen is not None:
        wid = summarize(check_id, [widen(item) for item in corpus])
        summ = replace(summ, truncation_delta=relative_delta(summ.max, wid.max))
    return summ, reports


# -- the small/large cube split ------------------------------------------------------

def hedberg_bound_constants(tp: TheoremParams, u: float) -> tuple[float, float]:
    """Constants with ``S1 <= C1 L^alpha M M`` and ``S2 <= C2 L^(-n/s) ||f1|| ||f2||``.

    ``C1`` sums the geometric series of small cubes after bounding each
    tripled-cube mean by the maximal function; ``C2`` uses Hölder on every
    tripled cube (``u <= min q``) and sums the large-cube series.
    """
    n, a, s = tp.n, tp.alpha, tp.s
    c1 = 3.0 ** (2 * n / u) / (1.0 - 2.0 ** (-a))
    c2 = 9.0 ** (n / u) / (1.0 - 2.0 ** (-n / s))
    return c1, c2


@dataclass(frozen=True)
class HedbergResult:
    partition_error: float
    c1: float
    c2: float
    balance: float
    optimal_ratio: float
    cells: int


def hedberg_constants(tp: TheoremParams, f1: GridFunction, f2: GridFunction, u: float,
                      Ls: Sequence[float], rng: np.random.Generator | None = None,
                      T: MajorantTruncation = DEFAULT_TRUNCATION, samples: int = 1) -> HedbergResult:
    """Empirical split constants for one pair.

    * ``partition_error``: worst ``|S1 + S2 - total| / total`` at ``samples``
      random (cell, L) draws;
    * ``c1``, ``c2``: worst ``S1 / (L^alpha M M)`` and ``S2 / (L^(-n/s) ||f1|| ||f2||)``
      over the given ``Ls`` and all cells;
    * ``balance``: worst ``max(B1/B2, B2/B1)`` of the two bound terms at the
      optimal ``L`` (cells with ``M M > 0``);
    * ``optimal_ratio``: worst ``max(S1, S2) / B`` at the optimal ``L``.
    """
    P = OperatorParams(tp.alpha, tp.n)
    n, a, s = tp.n, tp.alpha, tp.s
    tab = cube_sum_table(f1, f2, P, u, T)
    total = tab.total()
    e1, e2, _ = tp.exponents()
    norms = morrey_norm(f1, e1) * morrey_norm(f2, e2)
    mm = maximal(f1, u).values * maximal(f2, u).values
    rng = np.random.default_rng(0) if rng is None else rng
    err = 0.0
    for _ in range(samples):
        cell = tuple(int(c) for c in rng.integers(0, f1.N, size=n))
        L = float(2.0 ** rng.uniform(-(f1.j_max + 4), f1.J0 + 4))
        S1, S2 = tab.split(L)
        tot = total[cell]
        if tot > 0:
            err = max(err, abs(S1[cell] + S2[cell] - tot) / tot)
        elif S1[cell] + S2[cell] != 0:
            err = float("inf")
    c1 = c2 = 0.0
    live = mm > 0
    for L in Ls:
        S1, S2 = tab.split(L)
        if live.any():
            c1 = max(c1, float(np.max(S1[live] / (L**a * mm[live]))))
        elif S1.any():
            c1 = float("inf")
        if norms > 0:
            c2 = max(c2, float(np.max(S2) / (L ** (-n / s) * norms)))
    balance = 1.0
    opt = 0.0
    if live.any() and norms > 0:
        Lstar = (norms / mm[live]) ** (tp.p / n)
        full = np.ones(mm.shape)
        full[live] = Lstar
        S1, S2 = tab.split(full)
        B1 = Lstar**a * mm[live]
        B2 = Lstar ** (-n / s) * norms
        balance = float(np.max(np.maximum(B1 / B2, B2 / B1)))
        B = np.maximum(B1, B2)
        opt = float(np.max(np.maximum(S1[live], S2[live]) / B))
    return HedbergResult(err, c1, c2, balance, opt, int(live.sum()))


def chiarenza_frasca_ratio(f: GridFunction, e, eta: float) -> tuple[float, float]:
    """``(||M^(eta) f||, ||f||)`` in ``M^p_q``."""
    e = e if isinstance(e, MorreyExponents) else MorreyExponents(*e)
    if not 0 < eta < e.q:
        raise RegimeError("need 0 < eta < q")
    return morrey_norm(maximal(f, eta), e), morrey_norm(f, e)
