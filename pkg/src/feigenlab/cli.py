"""Command-line front end.

Exit codes: 0 ok, 2 configuration error, 3 evaluation fault, 4 no cascade
found, 5 refutation.  CSV output uses shortest round-trip floats and LF line
endings; JSON output is schema-versioned (see ``data/report.schema.json``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import numpy as np

from .catalog import catalog as named_family, feigenmap
from .bifurcation import (CascadeNotFound, InvalidBracket, LostOrbit, ParamPath,
                          alpha_rank, bifurcation_sequence, delta_report,
                          directional_bifurcations, feigenvalue_for_degree,
                          superstable_sequence, tine_widths)
from .dynamics import (Chaotic, DomainFault, Escaped, NoConvergence, Periodic, Unresolved,
                       bound, classify_attractor, principal_critical_point,
                       scan_local_attractors)
from .expr import ExprError, parse, symbols
from .family import FamilyError, parse_family, parse_interval, parse_map
from .harness import SCHEMA_VERSION, SuiteError, parse_suite, run_suite
from .schwarzian import SchwarzianPole, check_bifurcation_readiness, schwarzian_at, sign_profile

EXIT_OK, EXIT_CONFIG, EXIT_EVAL, EXIT_NO_CASCADE, EXIT_REFUTED = 0, 2, 3, 4, 5

DIAGRAM_TRANSIENT = 2000
DIAGRAM_SAMPLES = 200


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# formatting
# --------------------------------------------------------------------------

def fmt(v) -> str:
    """Shortest round-trip text for a number; empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else
                                                 ("inf" if v > 0 else "-inf"))
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float):
        return v if math.isfinite(v) else None
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def to_json(kind: str, body: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, **_jsonable(body)}
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def attractor_dict(att) -> dict:
    d = {"kind": att.kind}
    if isinstance(att, Periodic):
        d.update(period=att.period, multiplier=float(att.multiplier),
                 cycle=[float(x) for x in att.cycle])
    elif isinstance(att, Chaotic):
        d.update(lyapunov=float(att.lyapunov), extent=[float(x) for x in att.extent])
    elif isinstance(att, Escaped):
        d.update(step=att.step, last_x=float(att.last_x))
    elif isinstance(att, Unresolved):
        d.update(reason=att.reason)
    return d


_ATT_HEADER = ["kind", "period", "multiplier", "lyapunov", "extent_lo", "extent_hi",
               "step", "cycle"]


def attractor_row(att) -> list:
    d = attractor_dict(att)
    ext = d.get("extent", [None, None])
    cycle = ";".join(fmt(x) for x in d.get("cycle", []))
    return [d["kind"], d.get("period"), d.get("multiplier"), d.get("lyapunov"),
            ext[0], ext[1], d.get("step"), cycle]


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

def workers_from(args) -> int:
    env = os.environ.get("FEIGEN_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"FEIGEN_WORKERS must be an integer, got {env!r}") from None
    else:
        n = args.workers
    if n < 1:
        raise ConfigError("worker count must be >= 1")
    return n


def family_from(args):
    sources = [s for s in (args.catalog, args.expr, args.file) if s is not None]
    if len(sources) != 1:
        raise ConfigError("give exactly one of --catalog, --expr, --file")
    domain = parse_interval(args.domain) if args.domain else None
    if args.catalog is not None:
        if args.catalog == "feigenmap":
            fam = feigenmap(args.degree or 2, args.degree_right)
        else:
            try:
                fam = named_family(args.catalog)
            except KeyError as exc:
                raise ConfigError(str(exc.args[0])) from None
        if domain is not None:
            fam = fam.with_(domain=domain)
    else:
        if args.expr is not None:
            src = args.expr
        else:
            try:
                with open(args.file, encoding="utf-8") as fh:
                    lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
            except OSError as exc:
                raise ConfigError(f"cannot read {args.file}: {exc}") from None
            if not lines:
                raise ConfigError(f"{args.file}: no expression")
            src = lines[0]
        dom = domain if domain is not None else (0.0, 1.0)
        if symbols(parse(src)) & {"a", "b"}:
            fam = parse_family(src, dom, args.orientation or "increasing")
        else:
            fam = parse_map(src, dom)
    if args.orientation is not None and args.catalog is not None:
        fam = fam.with_(orientation=1 if args.orientation.startswith(("inc", "+")) else -1)
    if getattr(args, "cascade_range", None):
        fam = fam.with_(cascade=parse_interval(args.cascade_range))
    return fam


def params_from(text, fam):
    if text is None:
        raise ConfigError("--params is required")
    parts = [p for p in text.split(",") if p]
    if all("=" in p for p in parts):
        out = {}
        for p in parts:
            k, v = p.split("=", 1)
            out[k.strip()] = float(v)
        unknown = set(out) - set(fam.params)
        if unknown:
            raise ConfigError(f"unknown parameters {sorted(unknown)}; family has {fam.params}")
        return out
    vals = tuple(float(p) for p in parts)
    return vals[0] if len(vals) == 1 else vals


def _triple(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"expected lo:hi:step, got {text!r}")
    return tuple(float(p) for p in parts)


def emit(args, text: str):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_classify(args) -> int:
    fam = family_from(args)
    params = params_from(args.params, fam)
    if args.scan:
        lo, hi, cell = _triple(args.scan)
        rep = scan_local_attractors(fam, params, (lo, hi), cell, workers=workers_from(args),
                                    precision=args.precision if args.precision != "auto" else "double")
        if args.format == "json":
            emit(args, to_json("scan", {
                "family": fam.label, "range": [lo, hi],
                "cells": [{"lo": c.lo, "hi": c.hi, "attractor": attractor_dict(c.attractor)}
                          for c in rep.cells],
                "pattern": rep.pattern(), "located_pattern": rep.located_pattern(),
                "located": [{"extent": list(e), "attractor": attractor_dict(a)}
                            for e, a in rep.located()]}))
        else:
            rows = [[c.lo, c.hi, *attractor_row(c.attractor)] for c in rep.cells]
            emit(args, to_csv(["cell_lo", "cell_hi", *_ATT_HEADER], rows))
        return EXIT_OK
    kw = {"precision": "double" if args.precision == "auto" else args.precision}
    if args.transient is not None:
        kw["transient"] = args.transient
    att = classify_attractor(fam, params, seed=args.seed, **kw)
    if args.format == "json":
        emit(args, to_json("classify", {"family": fam.label, "attractor": attractor_dict(att)}))
    else:
        emit(args, to_csv(_ATT_HEADER, [attractor_row(att)]))
    return EXIT_OK


def _path(args, fam):
    if args.direction is not None:
        return ParamPath.along(fam, int(args.direction))
    return ParamPath.along(fam)


def _sequence_output(args, fam, seq, kind="cascade"):
    rep = delta_report(seq) if len(seq) >= 3 else None
    vals = seq.values
    n = len(vals)
    delta = [None] * n
    cs = [None] * n
    ds = [None] * n
    if rep is not None:
        for i, d in enumerate(rep.delta_seq):
            delta[i + 2] = d
        for i, c in enumerate(rep.c_seq):
            cs[i + 1] = c
        for i, d in enumerate(rep.d_seq):
            ds[i + 2] = d
    b_inf = rep.b_inf if rep is not None else None
    if args.format == "json":
        body = {"family": fam.label, "partial": seq.partial, "note": seq.note,
                "events": [{"rank": e.rank, "value": e.value, "t": float(e.t),
                            "params": [float(v) for v in e.params], "kind": e.kind,
                            "period_before": e.period_before, "residual": float(e.residual),
                            "bracket_width": float(e.bracket_width)} for e in seq.events],
                "side_events": [{"value": e.value, "kind": e.kind,
                                 "period_before": e.period_before} for e in seq.side_events]}
        if rep is not None:
            body.update(delta=list(rep.delta_seq), b_inf=rep.b_inf, c=list(rep.c_seq),
                        d=list(rep.d_seq), monotone=rep.monotone, spread=rep.spread)
        emit(args, to_json(kind, body))
    else:
        rows = [[e.rank, e.value, e.kind, e.period_before, float(e.residual),
                 float(e.bracket_width), delta[i], cs[i], ds[i], b_inf]
                for i, e in enumerate(seq.events)]
        emit(args, to_csv(["rank", "value", "kind", "period_before", "residual",
                           "bracket_width", "delta", "c", "d", "b_inf"], rows))
    return EXIT_OK


def cmd_cascade(args) -> int:
    fam = family_from(args)
    path = _path(args, fam)
    t_range = path.t_range(fam, parse_interval(args.range)) if args.range else None
    seq = bifurcation_sequence(fam, path, args.depth, t_range=t_range, precision=args.precision)
    return _sequence_output(args, fam, seq)


def _diagram_point(fam, t, seed, transient, samples):
    try:
        bm = bound(fam, t)
        # a critical seed can land exactly on a repelling point (0.5 -> 1 -> 0 at a = 4)
        x = seed if seed is not None else principal_critical_point(fam, t) + 1e-7 * bm.scale
        x = bm.iterate(bm.interior(x), transient)
        _, pts = bm.iterate(x, samples, store=True)
        return "ok", [float(p) for p in pts]
    except Exception as exc:  # per-point faults are flagged, not fatal
        return f"fault:{type(exc).__name__}", []


def cmd_diagram(args) -> int:
    fam = family_from(args)
    if len(fam.params) != 1:
        raise ConfigError("diagram sweeps one-parameter families")
    if args.range:
        lo, hi = parse_interval(args.range)
    elif fam.cascade is not None:
        lo, hi = sorted(fam.cascade)
    else:
        raise ConfigError("--range is required for families without a cascade range")
    G, S = args.grid, args.samples
    if G < 1 or S < 1:
        raise ConfigError("--grid and --samples must be >= 1")
    ts = [lo] if G == 1 else [lo + (hi - lo) * i / (G - 1) for i in range(G)]

    def job(t):
        return _diagram_point(fam, t, args.seed, args.transient, S)

    workers = workers_from(args)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(job, ts))
    else:
        results = [job(t) for t in ts]
    if args.format == "json":
        emit(args, to_json("diagram", {
            "family": fam.label, "transient": args.transient, "samples_per_point": S,
            "points": [{"param": t, "status": st, "samples": xs}
                       for t, (st, xs) in zip(ts, results)]}))
    else:
        header = ["param", "status", *[f"x{i}" for i in range(S)]]
        rows = [[t, st, *(xs if xs else [None] * S)] for t, (st, xs) in zip(ts, results)]
        emit(args, to_csv(header, rows))
    return EXIT_OK


def cmd_schwarzian(args) -> int:
    fam = family_from(args)
    params = params_from(args.params, fam) if fam.params else ()
    if args.at is not None:
        v = schwarzian_at(fam, params, args.at)
        if args.format == "json":
            emit(args, to_json("schwarzian", {"family": fam.label, "x": args.at, "value": v}))
        else:
            emit(args, to_csv(["x", "schwarzian"], [[args.at, v]]))
        return EXIT_OK
    interval = parse_interval(args.interval) if args.interval else None
    prof = sign_profile(fam, params, interval, args.grid)
    if args.format == "json":
        emit(args, to_json("sign_profile", {
            "family": fam.label, "interval": list(prof.interval), "changes": list(prof.changes),
            "signs": list(prof.signs), "poles": list(prof.poles), "notes": list(prof.notes)}))
    else:
        edges = [prof.interval[0], *prof.changes, prof.interval[1]]
        rows = [[edges[i], edges[i + 1], "+" if s > 0 else "-"] for i, s in enumerate(prof.signs)]
        emit(args, to_csv(["segment_lo", "segment_hi", "sign"], rows))
    return EXIT_OK


def cmd_readiness(args) -> int:
    fam = family_from(args)
    rep = check_bifurcation_readiness(fam, params_from(args.params, fam))
    if args.format == "json":
        emit(args, to_json("readiness", {
            "family": fam.label, "verdict": rep.verdict,
            "maxima": [{"x": x, "value": v, "degree": d} for x, v, d in rep.maxima],
            "checks": [{"name": c.name, "ok": c.ok, "constrained": c.constrained,
                        "detail": c.detail} for c in rep.checks],
            "notes": list(rep.notes)}))
    else:
        rows = [[c.name, c.ok, c.constrained, c.detail] for c in rep.checks]
        rows.append(["verdict", rep.verdict, None, "; ".join(rep.notes)])
        emit(args, to_csv(["check", "ok", "constrained", "detail"], rows))
    return EXIT_OK


def cmd_widths(args) -> int:
    fam = family_from(args)
    lo_level, hi_level = (int(v) for v in args.levels.split(":"))
    if lo_level < 2 or hi_level < lo_level:
        raise ConfigError("--levels needs 2 <= lo <= hi")
    path = _path(args, fam)
    t_range = path.t_range(fam, parse_interval(args.range)) if args.range else None
    ss = superstable_sequence(fam, path, hi_level - 1, t_range=t_range)
    levels = []
    prev = None
    for n in range(lo_level, hi_level + 1):
        p = ss[n - 1]
        tw = tine_widths(fam, p, n)
        ratio = prev / tw.central_width if prev else None
        levels.append({"level": n, "param": p, "widths": list(tw.widths),
                       "alpha_pair": list(tw.alpha_pair), "alpha_width": tw.alpha_width,
                       "central_width": tw.central_width, "central_ratio": ratio,
                       "alpha_rank": alpha_rank(n - 1)})
        prev = tw.central_width
    if args.format == "json":
        emit(args, to_json("widths", {"family": fam.label, "levels": levels}))
    else:
        rows = [[d["level"], d["param"], len(d["widths"]), d["central_width"],
                 d["central_ratio"], d["alpha_width"], d["alpha_rank"]] for d in levels]
        emit(args, to_csv(["level", "param", "n_widths", "central_width", "central_ratio",
                           "alpha_width", "alpha_rank"], rows))
    return EXIT_OK


def cmd_feigenvalue(args) -> int:
    n_left = args.degree or 2
    n_right = args.degree_right if args.degree_right is not None else n_left
    rep = feigenvalue_for_degree(n_left, n_right, args.depth, precision=args.precision)
    if args.format == "json":
        emit(args, to_json("feigenvalue", {
            "degree_left": n_left, "degree_right": n_right, "values": list(rep.values),
            "delta": list(rep.delta_seq), "b_inf": rep.b_inf}))
    else:
        rows = [[i + 1, v, rep.delta_seq[i - 2] if i >= 2 else None]
                for i, v in enumerate(rep.values)]
        emit(args, to_csv(["rank", "mu", "delta"], rows))
    return EXIT_OK


def cmd_directional(args) -> int:
    fam = family_from(args)
    base = tuple(float(v) for v in args.base.split(","))
    direction = tuple(float(v) for v in args.vector.split(","))
    t_range = parse_interval(args.range) if args.range else (0.0, 2.0)
    seq, _ = directional_bifurcations(fam, base, direction, args.depth, t_range=t_range,
                                      precision=args.precision)
    if not seq.events:
        raise CascadeNotFound("no event along the direction")
    return _sequence_output(args, fam, seq, "directional")


def cmd_suite(args) -> int:
    if args.bundled:
        text = resources.files("feigenlab").joinpath("data/paper.suite").read_text("utf-8")
    elif args.suite_file:
        try:
            with open(args.suite_file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read suite file: {exc}") from None
    else:
        raise ConfigError("give a suite file or --bundled")
    try:
        cases = parse_suite(text)
    except SuiteError as exc:
        raise ConfigError(str(exc)) from None
    rep = run_suite(cases, workers_from(args))
    if args.format == "json":
        emit(args, rep.to_json())
    else:
        rows = [[c.index, c.name, c.test, c.outcome, c.expect, c.met, c.rank, c.gap, c.delta,
                 "; ".join(c.notes)] for c in rep.cases]
        emit(args, to_csv(["index", "name", "test", "outcome", "expect", "met", "rank", "gap",
                           "delta", "notes"], rows))
    if rep.unexpected_refutations:
        names = ", ".join(c.name for c in rep.unexpected_refutations)
        print(f"refuted: {names}", file=sys.stderr)
        return EXIT_REFUTED
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _family_args(p):
    g = p.add_argument_group("family")
    g.add_argument("--catalog", help="catalog family name")
    g.add_argument("--expr", help="DSL expression in x and a (and b)")
    g.add_argument("--file", help="file whose first non-comment line is a DSL expression")
    g.add_argument("--domain", help="domain lo:hi (default 0:1 for expressions)")
    g.add_argument("--orientation", choices=["increasing", "decreasing"])
    g.add_argument("--degree", type=float, help="degree of 1 - a|x|^n (feigenmap)")
    g.add_argument("--degree-right", type=float, help="degree right of 0 (hybrid feigenmap)")


def _common(p):
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", "-o", help="write to a file instead of stdout")
    p.add_argument("--precision", choices=["double", "dd", "auto"], default="auto")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="feigenlab",
                                 description="Period-doubling cascades of one-dimensional maps.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="long-run attractor at one parameter value")
    _family_args(p)
    _common(p)
    p.add_argument("--params", required=True, help="a=3.2 or a=1,b=2")
    p.add_argument("--seed", type=float)
    p.add_argument("--transient", type=int)
    p.add_argument("--scan", help="lo:hi:cell, classify one seed per cell")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("cascade", help="flip events, ratios and accumulation point")
    _family_args(p)
    _common(p)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--direction", type=int, choices=[-1, 1])
    p.add_argument("--range", help="parameter range lo:hi (default: catalog cascade range)")
    p.set_defaults(func=cmd_cascade)

    p = sub.add_parser("diagram", help="attractor samples across a parameter sweep")
    _family_args(p)
    _common(p)
    p.add_argument("--range")
    p.add_argument("--grid", type=int, default=400)
    p.add_argument("--samples", type=int, default=DIAGRAM_SAMPLES)
    p.add_argument("--transient", type=int, default=DIAGRAM_TRANSIENT)
    p.add_argument("--seed", type=float)
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("schwarzian", help="Schwarzian value or sign profile")
    _family_args(p)
    _common(p)
    p.add_argument("--params", default=None)
    p.add_argument("--at", type=float)
    p.add_argument("--interval")
    p.add_argument("--grid", type=int, default=2000)
    p.set_defaults(func=cmd_schwarzian)

    p = sub.add_parser("readiness", help="relaxed single/several-maxima conditions")
    _family_args(p)
    _common(p)
    p.add_argument("--params", required=True)
    p.set_defaults(func=cmd_readiness)

    p = sub.add_parser("widths", help="orbit spacings at superstable parameters")
    _family_args(p)
    _common(p)
    p.add_argument("--levels", default="2:7", help="lo:hi cascade levels")
    p.add_argument("--direction", type=int, choices=[-1, 1])
    p.add_argument("--range")
    p.set_defaults(func=cmd_widths)

    p = sub.add_parser("feigenvalue", help="ratio limit for 1 - a|x|^n")
    _common(p)
    p.add_argument("--degree", type=float, default=2)
    p.add_argument("--degree-right", type=float)
    p.add_argument("--depth", type=int, default=7)
    p.set_defaults(func=cmd_feigenvalue)

    p = sub.add_parser("directional", help="cascade of a two-parameter family along a line")
    _family_args(p)
    _common(p)
    p.add_argument("--base", required=True, help="a0,b0")
    p.add_argument("--vector", required=True, help="da,db")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--range", help="path coordinate range lo:hi (default 0:2)")
    p.set_defaults(func=cmd_directional)

    p = sub.add_parser("suite", help="run a conjecture suite file")
    p.add_argument("suite_file", nargs="?")
    p.add_argument("--bundled", action="store_true", help="run the bundled paper.suite")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--output", "-o")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_suite)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "depth", 1) is not None and getattr(args, "depth", 1) < 1:
        print("error: depth must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except CascadeNotFound as exc:
        print(f"no cascade: {exc}", file=sys.stderr)
        return EXIT_NO_CASCADE
    except (DomainFault, NoConvergence, SchwarzianPole, LostOrbit, InvalidBracket,
            ArithmeticError) as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL
    except (ConfigError, FamilyError, ExprError, SuiteError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

if __name__ == "__main__":
    sys.exit(main())
