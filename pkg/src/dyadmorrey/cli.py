"""Command-line front end: ``verify``, ``sweep``, ``oracle`` and ``report``.

Settings come from a JSON config; command-line flags override it and
built-in defaults fill the rest.  Exit status is 0 on success, 1 when a hard
invariant fails and 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from pathlib import Path

from .operators import MajorantTruncation
from .suite import CHECK_IDS, CheckOutcome, Settings, run_check, run_oracles
from .verifier import solve_params

OUTPUT_ENV = "DYADMORREY_OUTPUT_DIR"
DEFAULT_OUTPUT = "dyadmorrey-out"
CSV_HEADER = ["check_id", "corpus_item_id", "lhs", "rhs", "ratio", "resolution", "truncation", "seed", "notes"]
EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2
LEVEL_CAP = {1: 14, 2: 10}

_SCALARS = {"n": int, "J0": int, "j_max": int, "seed": int, "alpha_j": float, "alpha_i": float,
            "i_alpha_j_max": int, "u": float, "stability": bool, "workers": int}
_TOP_KEYS = set(_SCALARS) | {"checks", "corpus", "theorems", "averaging", "maximal", "truncation",
                             "output_dir", "sweep"}
_CORPUS_KEYS = {"pairs", "families", "items", "scaling_pairs", "mix"}


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


# -- configuration ------------------------------------------------------------------

def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"{path}: cannot read config ({err.strerror})") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return cfg


def _typed(where: str, value, kind):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return kind(value)


def build_settings(cfg: dict, overrides: dict | None = None) -> tuple[Settings, list[str], Path]:
    """Validate ``cfg`` (with ``overrides`` from flags on top) into runner settings."""
    cfg = dict(cfg)
    for k, v in (overrides or {}).items():
        if v is not None:
            cfg[k] = v
    unknown = sorted(set(cfg) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
    s = Settings()
    for key, kind in _SCALARS.items():
        if key in cfg and cfg[key] is not None:
            setattr(s, key, _typed(key, cfg[key], kind))
    if s.n not in (1, 2):
        raise ConfigError(f"n: must be 1 or 2, got {s.n}")
    if s.j_max < 1:
        raise ConfigError("j_max: must be at least 1")
    if s.J0 + s.j_max > LEVEL_CAP[s.n]:
        raise ConfigError(f"j_max: J0 + j_max = {s.J0 + s.j_max} exceeds {LEVEL_CAP[s.n]} for n={s.n}")
    if cfg.get("i_alpha_j_max") is None:
        s.i_alpha_j_max = max(1, min(s.i_alpha_j_max, 8 - s.J0))
    if s.J0 + s.i_alpha_j_max + 2 > 10:
        raise ConfigError("i_alpha_j_max: J0 + i_alpha_j_max must be at most 8 (refined grid <= 2^10 cells)")
    if s.workers < 1:
        raise ConfigError("workers: must be positive")

    corpus = cfg.get("corpus", {})
    if not isinstance(corpus, dict):
        raise ConfigError("corpus: expected an object")
    for k in sorted(set(corpus) - _CORPUS_KEYS):
        raise ConfigError(f"corpus.{k}: unknown field")
    for k in ("pairs", "families", "items", "scaling_pairs"):
        if k in corpus:
            v = _typed(f"corpus.{k}", corpus[k], int)
            if v < 1:
                raise ConfigError(f"corpus.{k}: must be positive")
            setattr(s, k, v)
    if "mix" in corpus:
        mix = corpus["mix"]
        if not isinstance(mix, dict) or not mix or set(mix) - {"indicator", "power_law", "step"}:
            raise ConfigError("corpus.mix: expected weights for indicator/power_law/step")
        total = sum(_typed(f"corpus.mix.{k}", v, float) for k, v in mix.items())
        if not total > 0:
            raise ConfigError("corpus.mix: weights must sum to a positive number")
        s.mix = {k: float(v) / total for k, v in mix.items()}

    if "theorems" in cfg:
        th = cfg["theorems"]
        if not isinstance(th, dict):
            raise ConfigError("theorems: expected an object of parameter sets")
        merged = dict(s.theorems)
        for name, d in th.items():
            if not isinstance(d, dict):
                raise ConfigError(f"theorems.{name}: expected an object")
            need = {"alpha", "p1", "q1", "p2", "q2"}
            missing = need - set(d)
            extra = set(d) - need - {"u"}
            if missing:
                raise ConfigError(f"theorems.{name}: missing {', '.join(sorted(missing))}")
            if extra:
                raise ConfigError(f"theorems.{name}: unknown field(s) {', '.join(sorted(extra))}")
            merged[name] = {k: _typed(f"theorems.{name}.{k}", v, float) for k, v in d.items()}
        s.theorems = merged
    try:
        s.params()
    except ValueError as err:
        raise ConfigError(f"theorems: {err}") from None

    if "averaging" in cfg:
        av = cfg["averaging"]
        if not isinstance(av, dict) or set(av) - {"prop2.1", "thm2.2", "thm2.3"}:
            raise ConfigError("averaging: expected lists under prop2.1 / thm2.2 / thm2.3")
        for k, regimes in av.items():
            width = 3 if k == "thm2.3" else 2
            if not isinstance(regimes, list) or any(not isinstance(r, list) or len(r) != width for r in regimes):
                raise ConfigError(f"averaging.{k}: expected a list of [{'p, q, u' if width == 3 else 'p, q'}]")
            for i, r in enumerate(regimes):
                for j, v in enumerate(r):
                    _typed(f"averaging.{k}[{i}][{j}]", v, float)
        s.averaging = {**s.averaging, **av}

    if "maximal" in cfg:
        mx = cfg["maximal"]
        if not isinstance(mx, dict) or set(mx) - {"exponents", "eta_fractions"}:
            raise ConfigError("maximal: expected exponents / eta_fractions")
        if "exponents" in mx:
            s.maximal_exponents = mx["exponents"]
        if "eta_fractions" in mx:
            s.eta_fractions = mx["eta_fractions"]
        for i, (p, q) in enumerate(s.maximal_exponents):
            if not 0 < q <= p:
                raise ConfigError(f"maximal.exponents[{i}]: need 0 < q <= p")
        for i, fr in enumerate(s.eta_fractions):
            if not 0 < fr < 1:
                raise ConfigError(f"maximal.eta_fractions[{i}]: need 0 < fraction < 1")

    if "truncation" in cfg:
        tr = cfg["truncation"]
        if not isinstance(tr, dict) or set(tr) - {"j_min", "j_max_sum", "tails"}:
            raise ConfigError("truncation: expected j_min / j_max_sum / tails")
        j_min = tr.get("j_min")
        j_hi = tr.get("j_max_sum")
        s.truncation = MajorantTruncation(
            None if j_min is None else _typed("truncation.j_min", j_min, int),
            None if j_hi is None else _typed("truncation.j_max_sum", j_hi, int),
            _typed("truncation.tails", tr.get("tails", True), bool))

    checks = cfg.get("checks", [])
    if isinstance(checks, str):
        checks = [c for c in checks.split(",") if c]
    if not isinstance(checks, list):
        raise ConfigError("checks: expected a list of check ids")
    bad = [c for c in checks if c not in CHECK_IDS]
    if bad:
        raise ConfigError(f"checks: unknown check id(s) {', '.join(map(str, bad))}; known: {', '.join(CHECK_IDS)}")
    if s.n != 1 and "ialpha_majorant" in checks:
        raise ConfigError("checks: ialpha_majorant needs n = 1")
    out_dir = Path(cfg.get("output_dir") or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)
    return s, checks, out_dir


# -- output -----------------------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".partial")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def reports_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        notes = r.notes
        if r.degenerate:
            notes = (notes + ";" if notes else "") + "degenerate"
        if r.violations:
            notes = (notes + ";" if notes else "") + f"violations={r.violations}"
        w.writerow([r.check_id, r.corpus_item_id, _fmt(r.lhs), _fmt(r.rhs), _fmt(r.ratio),
                    r.resolution, r.truncation, r.seed, notes])
    return buf.getvalue()


def write_outputs(out_dir: Path, outcomes: list[CheckOutcome], stem: str = "report", meta=None) -> None:
    rows = [r for o in outcomes for r in o.reports]
    summary = {
        "meta": meta or {},
        "checks": {o.check_id: {"summaries": o.summaries, "failures": o.failures} for o in outcomes},
        "failures": [f for o in outcomes for f in o.failures],
    }
    _atomic_write(out_dir / f"{stem}.csv", reports_csv(rows))
    _atomic_write(out_dir / f"{stem}.json",
                  json.dumps(_json_safe(summary), indent=2, sort_keys=True) + "\n")


def _meta(s: Settings, checks) -> dict:
    return {"n": s.n, "J0": s.J0, "j_max": s.j_max, "seed": s.seed, "checks": list(checks),
            "pairs": s.pairs, "families": s.families, "items": s.items,
            "truncation": [s.truncation.j_min, s.truncation.j_max_sum, s.truncation.tails]}


def run_suite(s: Settings, checks, out_dir: Path, stem: str = "report") -> int:
    outcomes = [run_check(c, s) for c in checks]
    write_outputs(out_dir, outcomes, stem, _meta(s, checks))
    failures = [f for o in outcomes for f in o.failures]
    for f in failures:
        print(f"FAIL {f}", file=sys.stderr)
    for o in outcomes:
        print(f"{o.check_id}: {len(o.reports)} rows, {len(o.failures)} failures")
    return EXIT_VIOLATION if failures else EXIT_OK


# -- subcommands ----------------------------------------------------------------------

def _overrides(args) -> dict:
    o = {"seed": args.seed, "j_max": args.j_max, "J0": args.J0, "n": args.n, "workers": args.workers,
         "output_dir": args.output_dir}
    if getattr(args, "checks", None) is not None:
        o["checks"] = args.checks
    return o


def cmd_verify(args) -> int:
    s, checks, out = build_settings(load_config(args.config), _overrides(args))
    return run_suite(s, checks, out)


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    grid = cfg.pop("sweep", None)
    if not isinstance(grid, dict) or not grid:
        raise ConfigError("sweep: expected an object of parameter lists")
    keys = ("alpha", "p1", "q1", "p2", "q2")
    for k in grid:
        if k not in keys:
            raise ConfigError(f"sweep.{k}: unknown parameter (use {', '.join(keys)})")
        if not isinstance(grid[k], list) or not grid[k]:
            raise ConfigError(f"sweep.{k}: expected a non-empty list")
    s, checks, out = build_settings(cfg, _overrides(args))
    base = dict(s.theorems.get("thm1.3", next(iter(s.theorems.values()))))
    values = [grid.get(k, [base[k]]) for k in keys]
    outcomes = []
    for combo in itertools.product(*values):
        d = dict(zip(keys, (float(v) for v in combo)))
        try:
            tp = solve_params(s.n, **d)
        except ValueError as err:
            outcomes.append(CheckOutcome("sweep", summaries=[{"params": d, "skipped": str(err)}]))
            continue
        label = ",".join(f"{k}={d[k]!r}" for k in keys)
        if tp.regime == "none":
            outcomes.append(CheckOutcome(f"sweep[{label}]", summaries=[{"params": d, "regime": "none"}]))
            continue
        s.theorems = {tp.regime: d}
        for c in checks or [tp.regime]:
            o = run_check(c, s)
            o.check_id = f"{o.check_id}[{label}]"
            outcomes.append(o)
    write_outputs(out, outcomes, "sweep", _meta(s, checks))
    failures = [f for o in outcomes for f in o.failures]
    for f in failures:
        print(f"FAIL {f}", file=sys.stderr)
    print(f"sweep: {len(outcomes)} runs, {len(failures)} failures")
    return EXIT_VIOLATION if failures else EXIT_OK


def cmd_oracle(args) -> int:
    s, _, out = build_settings(load_config(args.config), _overrides(args))
    o = run_oracles(s, args.items)
    write_outputs(out, [o], "oracle", _meta(s, ["oracle"]))
    for f in o.failures:
        print(f"FAIL {f}", file=sys.stderr)
    print(f"oracle: {len(o.reports)} rows, {len(o.failures)} failures")
    return EXIT_VIOLATION if o.failures else EXIT_OK


def cmd_report(args) -> int:
    root = Path(args.dir)
    files = sorted(root.rglob("*.json"))
    if not files:
        print(f"no summaries under {root}", file=sys.stderr)
        return EXIT_CONFIG
    for path in files:
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            continue
        if "checks" not in data:
            continue
        print(f"== {path.relative_to(root)}")
        for cid, body in data["checks"].items():
            for sm in body.get("summaries", []):
                shown = {k: v for k, v in sm.items() if k != "check_id" and v is not None}
                print(f"  {cid}: " + ", ".join(f"{k}={_fmt(v)}" for k, v in shown.items()))
            for f in body.get("failures", []):
                print(f"  {cid}: FAIL {f}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dyadmorrey", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--J0", type=int)
        p.add_argument("--j-max", dest="j_max", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--output-dir", help=f"overrides the config and ${OUTPUT_ENV}")

    p = sub.add_parser("verify", help="run the configured checks")
    common(p)
    p.add_argument("--checks", help="comma-separated check ids")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("sweep", help="run checks over a Cartesian parameter grid")
    common(p)
    p.add_argument("--checks", help="comma-separated check ids")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("oracle", help="compare fast paths with reference computations")
    common(p)
    p.add_argument("--items", type=int, default=20, help="indicator corpus size")
    p.set_defaults(func=cmd_oracle)
    p = sub.add_parser("report", help="summarise the JSON summaries under a directory")
    p.add_argument("dir")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
