"""Check runners: build the corpus for a check, evaluate every item, summarise.

Each runner returns a :class:`CheckOutcome`.  ``failures`` lists broken hard
invariants (a domination with a zero majorant, a refused parameter tuple, a
violated provable bound, a scaling mismatch); constants are only reported.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from . import oracles
from .corpus import make_corpus, make_families, make_pairs
from .grid import indicator
from .lattice import DyadicCube
from .norms import maximal, morrey_norm
from .operators import (
    MajorantTruncation,
    dyadic_majorant_I,
    dyadic_majorant_J,
    i_alpha,
    j_alpha,
)
from .verifier import (
    RegimeError,
    TheoremParams,
    check_averaging,
    check_boundedness,
    check_pointwise,
    check_u_powered_averaging,
    chiarenza_frasca_ratio,
    hedberg_bound_constants,
    hedberg_constants,
    hypothesis_failures,
    make_report,
    relative_delta,
    solve_params,
    summarize,
)

CHECK_IDS = ("prop2.1", "thm2.2", "thm2.3", "lem2.4", "ialpha_majorant", "lem2.5", "lem2.6",
             "hedberg", "thm1.2", "thm1.3", "thm1.4", "scaling", "maximal")

DEFAULT_THEOREM_INPUTS = {
    "thm1.2": {"alpha": 1 / 12, "p1": 4.0, "q1": 3.0, "p2": 4.0, "q2": 3.0},
    "thm1.3": {"alpha": 1 / 6, "p1": 1.5, "q1": 1.2, "p2": 1.5, "q2": 1.2},
    "thm1.4": {"alpha": 3 / 35, "p1": 2.5, "q1": 1.5, "p2": 2.5, "q2": 1.5},
}
SCALING_TOL = 0.05
SCALAR_TOL = 1e-12
HEDBERG_PARTITION_TOL = 1e-12
BOUND_SLACK = 1e-9


@dataclass
class Settings:
    """Everything a runner needs (validated by the CLI)."""

    n: int = 1
    J0: int = 1
    j_max: int = 10
    seed: int = 0
    pairs: int = 200
    families: int = 100
    items: int = 100
    scaling_pairs: int = 20
    mix: dict | None = None
    alpha_j: float = 0.5
    alpha_i: float = 1.5
    i_alpha_j_max: int = 7
    theorems: dict = field(default_factory=lambda: dict(DEFAULT_THEOREM_INPUTS))
    u: float | None = None
    averaging: dict = field(default_factory=lambda: {
        "prop2.1": [[0.9, 0.9]],
        "thm2.2": [[0.9, 0.5], [0.7, 0.3]],
        "thm2.3": [[1.2, 0.8, 2.0], [1.5, 1.0, 3.0]],
    })
    maximal_exponents: list = field(default_factory=lambda: [[2.0, 1.5], [1.5, 1.2]])
    eta_fractions: list = field(default_factory=lambda: [0.5, 0.75])
    truncation: MajorantTruncation = field(default_factory=MajorantTruncation)
    stability: bool = True
    workers: int = 1

    def params(self) -> dict[str, TheoremParams]:
        out = {}
        for name, d in self.theorems.items():
            d = dict(d)
            out[name] = solve_params(self.n, d.pop("alpha"), d.pop("p1"), d.pop("q1"),
                                     d.pop("p2"), d.pop("q2"), d.pop("u", self.u))
        return out


@dataclass
class CheckOutcome:
    check_id: str
    reports: list = field(default_factory=list)
    summaries: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def _pmap(fn, items, workers: int):
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _common(s: Settings, resolution: int, truncation: str = "exact"):
    return {"seed": s.seed, "resolution": resolution, "truncation": truncation}


def _summary(check_id, reports, refined=None, widened=None, **extra) -> dict:
    summ = summarize(check_id, reports)
    if refined is not None:
        summ = replace(summ, stability_delta=relative_delta(summ.max, summarize(check_id, refined).max))
    if widened is not None:
        summ = replace(summ, truncation_delta=relative_delta(summ.max, summarize(check_id, widened).max))
    d = summ.as_dict()
    d.update(extra)
    return d


def _pairs(s: Settings, j_max=None):
    return make_pairs(s.pairs, s.seed, s.n, s.J0, s.j_max if j_max is None else j_max, s.mix)


# -- pointwise dominations -----------------------------------------------------

def _eval_lem24(item, alpha, T, seed):
    f1, f2 = item.f1, item.f2
    return check_pointwise(j_alpha(f1, f2, alpha), dyadic_majorant_J(f1, f2, alpha, T), "lem2.4",
                           corpus_item_id=item.item_id, seed=seed, resolution=f1.j_max,
                           truncation=T.describe(f1), notes=f"alpha={alpha!r}")


def _eval_ialpha(item, alpha, T, seed):
    f1, f2 = item.f1, item.f2
    return check_pointwise(i_alpha(f1, f2, alpha), dyadic_majorant_I(f1, f2, alpha, T),
                           "ialpha_majorant", corpus_item_id=item.item_id, seed=seed,
                           resolution=f1.j_max, truncation=T.describe(f1), notes=f"alpha={alpha!r}")


def _widened_eval(fn, item, alpha, T, seed):
    return fn(item, alpha, T.widened(item.f1), seed)


def _pointwise(check_id, fn, alpha, pairs, s: Settings) -> CheckOutcome:
    out = CheckOutcome(check_id)
    T = s.truncation
    reports = _pmap(partial(fn, alpha=alpha, T=T, seed=s.seed), pairs, s.workers)
    refined = widened = None
    if s.stability:
        refined = _pmap(partial(fn, alpha=alpha, T=T, seed=s.seed), [p.refined() for p in pairs], s.workers)
        widened = _pmap(partial(_widened_eval, fn, alpha=alpha, T=T, seed=s.seed), pairs, s.workers)
    out.reports = reports
    out.summaries.append(_summary(check_id, reports, refined, widened, alpha=alpha))
    bad = sum(r.violations for r in reports + (refined or []) + (widened or []))
    if bad:
        out.failures.append(f"{check_id}: {bad} cells with a positive operator and a zero majorant")
    return out


def run_lem24(s: Settings) -> CheckOutcome:
    return _pointwise("lem2.4", _eval_lem24, s.alpha_j, _pairs(s), s)


def run_ialpha_majorant(s: Settings) -> CheckOutcome:
    if s.n != 1:
        raise RegimeError("ialpha_majorant is available for n = 1 only")
    return _pointwise("ialpha_majorant", _eval_ialpha, s.alpha_i, _pairs(s, s.i_alpha_j_max), s)


# -- averaging ------------------------------------------------------------------

def _eval_avg(item, check_id, e, u, seed):
    if u is None:
        return check_averaging(item.members, e, check_id, corpus_item_id=item.item_id, seed=seed,
                               notes=f"p={e[0]!r};q={e[1]!r}")
    return check_u_powered_averaging(item.members, e, u, check_id, corpus_item_id=item.item_id,
                                     seed=seed, notes=f"p={e[0]!r};q={e[1]!r};u={u!r}")


def _run_averaging(check_id, s: Settings) -> CheckOutcome:
    out = CheckOutcome(check_id)
    fams = make_families(s.families, s.seed, s.n, s.J0, max(s.j_max - 2, 3))
    for regime in s.averaging.get(check_id, []):
        e = (float(regime[0]), float(regime[1]))
        u = float(regime[2]) if len(regime) > 2 else None
        try:
            fn = partial(_eval_avg, check_id=check_id, e=e, u=u, seed=s.seed)
            reports = _pmap(fn, fams, s.workers)
        except RegimeError as err:
            out.failures.append(f"{check_id} {regime}: {err}")
            continue
        refined = _pmap(fn, [f.refined() for f in fams], s.workers) if s.stability else None
        out.reports += reports
        extra = {"p": e[0], "q": e[1]} | ({"u": u} if u is not None else {})
        out.summaries.append(_summary(check_id, reports, refined, **extra))
    return out


# -- boundedness -----------------------------------------------------------------

_BOUNDEDNESS_OPERATOR = {"thm1.2": "J", "thm1.3": "J", "thm1.4": "J",
                         "lem2.5": "majorant_I", "lem2.6": "u_powered_sum"}


def _eval_bound(item, tp, operator, theorem, check_id, T, seed, label):
    return check_boundedness(tp, item.f1, item.f2, operator, theorem, T, check_id,
                             corpus_item_id=item.item_id, seed=seed, notes=label)


def _run_boundedness(check_id, s: Settings) -> CheckOutcome:
    out = CheckOutcome(check_id)
    params = s.params()
    if check_id in params:
        targets = {check_id: params[check_id]}
    elif check_id.startswith("lem"):
        targets = params
    else:
        out.failures.append(f"{check_id}: no parameters configured")
        return out
    op = _BOUNDEDNESS_OPERATOR[check_id]
    theorem = check_id if check_id.startswith("thm") else None
    pairs = _pairs(s)
    for name, tp in targets.items():
        gate = theorem or ("lem2.6" if op == "u_powered_sum" else "lem2.5")
        fails = hypothesis_failures(tp, gate)
        if fails:
            msg = f"{check_id} with {name} parameters refused: " + "; ".join(fails)
            if theorem:
                out.failures.append(msg)
            else:
                out.summaries.append({"check_id": check_id, "params": name, "skipped": msg})
            continue
        label = _param_label(name, tp)
        fn = partial(_eval_bound, tp=tp, operator=op, theorem=theorem, check_id=check_id,
                     T=s.truncation, seed=s.seed, label=label)
        reports = _pmap(fn, pairs, s.workers)
        refined = _pmap(fn, [p.refined() for p in pairs], s.workers) if s.stability else None
        out.reports += reports
        out.summaries.append(_summary(check_id, reports, refined, params=name, regime=tp.regime,
                                      s=tp.s, t=tp.t, u=tp.u))
        if any(not math.isfinite(r.ratio) for r in reports if not r.degenerate):
            out.failures.append(f"{check_id}: non-finite ratio with {name} parameters")
    return out


def _param_label(name, tp: TheoremParams) -> str:
    u = "" if tp.u is None else f";u={tp.u!r}"
    return f"{name};alpha={tp.alpha!r};p1={tp.p1!r};q1={tp.q1!r};p2={tp.p2!r};q2={tp.q2!r}{u}"


def _eval_scaling(item, tp, theorem, seed, label):
    rows = []
    base = check_boundedness(tp, item.f1, item.f2, "J", theorem)
    c = 3.75
    scaled = check_boundedness(tp, item.f1.scale(c), item.f2, "J", theorem)
    rows.append(make_report("scaling", scaled.ratio, base.ratio, corpus_item_id=item.item_id,
                            seed=seed, resolution=item.f1.j_max, truncation="exact",
                            notes=f"{label};scalar={c!r}"))
    for m in (-2, -1, 1, 2):
        d = item.dilated(m)
        r = check_boundedness(tp, d.f1, d.f2, "J", theorem)
        rows.append(make_report("scaling", r.ratio, base.ratio, corpus_item_id=item.item_id,
                                seed=seed, resolution=d.f1.j_max, truncation="exact",
                                notes=f"{label};dilation={m}"))
    return rows


def run_scaling(s: Settings) -> CheckOutcome:
    out = CheckOutcome("scaling")
    pairs = make_pairs(s.scaling_pairs, s.seed, s.n, s.J0, s.j_max, s.mix)
    for name, tp in s.params().items():
        theorem = name if name in ("thm1.2", "thm1.3", "thm1.4") else tp.regime
        if theorem == "none" or hypothesis_failures(tp, theorem):
            out.summaries.append({"check_id": "scaling", "params": name, "skipped": "regime refused"})
            continue
        fn = partial(_eval_scaling, tp=tp, theorem=theorem, seed=s.seed, label=name)
        rows = [r for group in _pmap(fn, pairs, s.workers) for r in group]
        out.reports += rows
        dil = [abs(r.ratio - 1) for r in rows if "dilation" in r.notes and not r.degenerate]
        sca = [abs(r.ratio - 1) for r in rows if "scalar" in r.notes and not r.degenerate]
        out.summaries.append({"check_id": "scaling", "params": name,
                              "max_dilation_delta": max(dil, default=0.0),
                              "max_scalar_delta": max(sca, default=0.0), "count": len(rows)})
        if max(dil, default=0.0) > SCALING_TOL:
            out.failures.append(f"scaling: dilation changes the {name} ratio by more than 5%")
        if max(sca, default=0.0) > SCALAR_TOL:
            out.failures.append(f"scaling: scalar multiple changes the {name} ratio")
    return out


# -- small/large cube split -------------------------------------------------------

def _eval_hedberg(item, tp, seed, label, Ls):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 17, int(item.item_id[-4:])]))
    h = hedberg_constants(tp, item.f1, item.f2, tp.u, Ls, rng=rng, samples=1)
    c1, c2 = hedberg_bound_constants(tp, tp.u)
    common = dict(corpus_item_id=item.item_id, seed=seed, resolution=item.f1.j_max, truncation="exact")
    notes = (f"{label};partition_error={h.partition_error!r};balance={h.balance!r};"
             f"optimal_ratio={h.optimal_ratio!r}")
    return [make_report("hedberg", h.c1, c1, notes="small_cubes;" + notes, **common),
            make_report("hedberg", h.c2, c2, notes="large_cubes;" + notes, **common)], h


def run_hedberg(s: Settings) -> CheckOutcome:
    out = CheckOutcome("hedberg")
    pairs = _pairs(s)
    Ls = [2.0**k for k in range(-(s.j_max + 3), s.J0 + 4)]
    for name, tp in s.params().items():
        if hypothesis_failures(tp, "lem2.6"):
            out.summaries.append({"check_id": "hedberg", "params": name, "skipped": "needs s < u < min q"})
            continue
        res = _pmap(partial(_eval_hedberg, tp=tp, seed=s.seed, label=name, Ls=Ls), pairs, s.workers)
        rows = [r for group, _ in res for r in group]
        hs = [h for _, h in res]
        out.reports += rows
        c1, c2 = hedberg_bound_constants(tp, tp.u)
        emp1 = max(h.c1 for h in hs)
        emp2 = max(h.c2 for h in hs)
        part = max(h.partition_error for h in hs)
        bal = max(h.balance for h in hs)
        out.summaries.append({"check_id": "hedberg", "params": name, "u": tp.u,
                              "small_cube_constant": emp1, "small_cube_bound": c1,
                              "large_cube_constant": emp2, "large_cube_bound": c2,
                              "partition_error": part, "optimal_balance": bal,
                              "optimal_ratio": max(h.optimal_ratio for h in hs), "count": len(hs)})
        if part > HEDBERG_PARTITION_TOL:
            out.failures.append(f"hedberg: S1 + S2 differs from the total by {part:.3g}")
        if emp1 > c1 * (1 + BOUND_SLACK) or emp2 > c2 * (1 + BOUND_SLACK):
            out.failures.append(f"hedberg: an empirical constant exceeds its provable bound ({name})")
        if bal > 4:
            out.failures.append(f"hedberg: bound terms at the optimal L differ by more than 4x ({name})")
    return out


# -- maximal operator on Morrey spaces ---------------------------------------------

def _eval_maximal(item, e, eta, seed):
    a, b = chiarenza_frasca_ratio(item.f, e, eta)
    return make_report("maximal", a, b, corpus_item_id=item.item_id, seed=seed,
                       resolution=item.f.j_max, truncation="exact",
                       notes=f"p={e[0]!r};q={e[1]!r};eta={eta!r}")


def run_maximal(s: Settings) -> CheckOutcome:
    out = CheckOutcome("maximal")
    for p, q in s.maximal_exponents:
        corpus = make_corpus(s.items, s.seed, s.n, s.J0, s.j_max, s.mix, p_near=(float(p),))
        for frac in s.eta_fractions:
            eta = float(q) * float(frac)
            fn = partial(_eval_maximal, e=(float(p), float(q)), eta=eta, seed=s.seed)
            reports = _pmap(fn, corpus, s.workers)
            refined = _pmap(fn, [c.refined() for c in corpus], s.workers) if s.stability else None
            out.reports += reports
            out.summaries.append(_summary("maximal", reports, refined, p=float(p), q=float(q), eta=eta))
    return out


RUNNERS = {
    "prop2.1": partial(_run_averaging, "prop2.1"),
    "thm2.2": partial(_run_averaging, "thm2.2"),
    "thm2.3": partial(_run_averaging, "thm2.3"),
    "lem2.4": run_lem24,
    "ialpha_majorant": run_ialpha_majorant,
    "lem2.5": partial(_run_boundedness, "lem2.5"),
    "lem2.6": partial(_run_boundedness, "lem2.6"),
    "hedberg": run_hedberg,
    "thm1.2": partial(_run_boundedness, "thm1.2"),
    "thm1.3": partial(_run_boundedness, "thm1.3"),
    "thm1.4": partial(_run_boundedness, "thm1.4"),
    "scaling": run_scaling,
    "maximal": run_maximal,
}


def run_check(check_id: str, s: Settings) -> CheckOutcome:
    if check_id not in RUNNERS:
        raise KeyError(f"unknown check {check_id!r}")
    try:
        return RUNNERS[check_id](s)
    except RegimeError as err:
        return CheckOutcome(check_id, failures=[f"{check_id}: {err}"])


# -- reference values ------------------------------------------------------------------

ORACLE_J_TOL = 0.02
ORACLE_I_TOL = 0.02
ORACLE_CLOSED_TOL = 0.01
ORACLE_EXACT_TOL = 1e-12


def run_oracles(s: Settings, oracle_items: int = 20) -> CheckOutcome:
    """Brute-force and refined-grid reference values compared with the fast paths."""
    out = CheckOutcome("oracle")
    n, J0 = s.n, s.J0
    common = {"seed": s.seed, "truncation": "exact"}

    def record(check_id, item_id, value, ref, tol, resolution, notes=""):
        err = relative_delta(value, ref)
        rep = make_report(check_id, value, ref, corpus_item_id=item_id, resolution=resolution,
                          notes=f"tol={tol!r};{notes}".rstrip(";"), **common)
        out.reports.append(rep)
        if not err <= tol:
            out.failures.append(f"{check_id} {item_id}: error {err:.3g} above {tol:g}")

    # closed form at the example point
    if n == 1:
        f = indicator(DyadicCube(0, (0,)), 1, J0, s.j_max)
        x = f.centers()
        i = int(np.argmin(np.abs(x - 0.5)))
        g = j_alpha(f, f, 0.5)
        record("oracle.j_alpha_closed_form", "indicator-unit", g.values[i], 2 * math.sqrt(2),
               ORACLE_CLOSED_TOL, s.j_max, notes=f"x={x[i]!r}")
        record("oracle.j_alpha_exact_point", "indicator-unit", g.values[i],
               oracles.j_alpha_indicator_1d(0.0, 1.0, 0.5, float(x[i])), ORACLE_EXACT_TOL, s.j_max)

    # refined grid, indicator corpus
    ind = make_corpus(oracle_items, s.seed, n, J0, s.j_max, {"indicator": 1.0})
    pairs = [(c.item_id, c.f, ind[(k + 1) % len(ind)].f) for k, c in enumerate(ind)]
    errs = []
    for item_id, f1, f2 in pairs:
        prod = j_alpha(f1, f2, s.alpha_j)
        ref = oracles.refined_at_centers(j_alpha, f1, f2, extra=2, P=s.alpha_j)
        e = oracles.linf_relative_error(prod, ref)
        errs.append(e)
        out.reports.append(make_report("oracle.j_alpha_refined", e, ORACLE_J_TOL, corpus_item_id=item_id,
                                       resolution=s.j_max, notes="linf_relative_error", **common))
    if errs and max(errs) > ORACLE_J_TOL:
        out.failures.append(f"oracle.j_alpha_refined: error {max(errs):.3g} above {ORACLE_J_TOL}")

    if n == 1:
        jm = min(s.i_alpha_j_max, 10 - J0 - 3)
        ind_i = make_corpus(oracle_items, s.seed, 1, J0, jm, {"indicator": 1.0})
        errs = []
        for k, c in enumerate(ind_i):
            f1, f2 = c.f, ind_i[(k + 1) % len(ind_i)].f
            prod = i_alpha(f1, f2, s.alpha_i)
            ref = oracles.refined_at_centers(i_alpha, f1, f2, extra=2, P=s.alpha_i)
            e = oracles.linf_relative_error(prod, ref)
            errs.append(e)
            out.reports.append(make_report("oracle.i_alpha_refined", e, ORACLE_I_TOL,
                                           corpus_item_id=c.item_id, resolution=jm,
                                           notes="linf_relative_error", **common))
            cells = range(0, f1.N, max(1, f1.N // 16))
            x = f1.centers()
            exact = max(relative_delta(prod.values[i], oracles.i_alpha_step_1d(f1, f2, s.alpha_i, x[i]))
                        for i in cells)
            out.reports.append(make_report("oracle.i_alpha_points", exact, ORACLE_EXACT_TOL,
                                           corpus_item_id=c.item_id, resolution=jm,
                                           notes="max_relative_error", **common))
            if exact > 1e-9:
                out.failures.append(f"oracle.i_alpha_points {c.item_id}: error {exact:.3g}")
        if errs and max(errs) > ORACLE_I_TOL:
            out.failures.append(f"oracle.i_alpha_refined: error {max(errs):.3g} above {ORACLE_I_TOL}")

    # Morrey suprema and maximal function by enumeration on a small grid
    jm = min(s.j_max, 5 if n == 1 else 2)
    small = make_corpus(oracle_items, s.seed, n, J0, jm, s.mix)
    for c in small:
        for e in ((2.0, 1.0), (1.5, 1.5), (3.0, 0.5)):
            record("oracle.morrey_exhaustive", c.item_id, morrey_norm(c.f, e),
                   oracles.exhaustive_morrey_norm(c.f, e), ORACLE_EXACT_TOL, jm,
                   notes=f"p={e[0]!r};q={e[1]!r}")
        M = maximal(c.f)
        idx = tuple([c.f.N // 3] * n)
        xs = [float(c.f.centers()[k]) for k in idx]
        record("oracle.maximal_point", c.item_id, M.values[idx], oracles.maximal_at_point(c.f, xs),
               1e-12, jm, notes="x=" + ",".join(repr(v) for v in xs))
    return out
