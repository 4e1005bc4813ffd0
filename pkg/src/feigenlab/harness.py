"""Conjecture suites: permeability, universality and several-maxima behaviour.

Every case produces one :class:`CaseResult`; failures of the numerics are
recorded as ``inconclusive`` instead of being raised.  Reports are ordered
by case index so that concurrent runs serialise identically.
"""
from __future__ import annotations

import json
import math
import shlex
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .catalog import catalog as named_family, feigenmap
from .bifurcation import (DELTA, DELTA_QUARTIC, BifurcationSequence, CascadeNotFound,
                          InvalidBracket, LostOrbit, ParamPath, bifurcation_sequence,
                          delta_report, feigenvalue_for_degree, find_bifurcation)
from .dynamics import (Chaotic, DomainFault, NoConvergence, Periodic, classify_attractor,
                       find_critical_points, same_attractor)
from .expr import ExprError, parse, symbols
from .family import MapFamily, TransformKind, parse_family, parse_map, transform

SCHEMA_VERSION = "1.0"
PAIR_TOL = 1e-8
UNIVERSALITY_TOL = 0.01
STABLE_SPREAD = 0.1      # relative change of the last two ratios accepted as "stabilised"

NUMERIC_ERRORS = (CascadeNotFound, InvalidBracket, LostOrbit, DomainFault, NoConvergence,
                  ArithmeticError, ValueError)

OUTCOMES = ("confirmed", "refuted", "inconclusive", "supports", "refutes", "no-chaos")
EXPECT = {"confirm": ("confirmed", "supports"), "refute": ("refuted", "refutes"),
          "nochaos": ("no-chaos",)}


class SuiteError(ValueError):
    """Malformed suite description."""


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------

@dataclass
class CaseResult:
    index: int
    name: str
    test: str                       # permeability | universality | multimax
    outcome: str
    expect: Optional[str] = None
    sequences: list = field(default_factory=list)
    rank: Optional[int] = None      # first divergent event (1-based)
    gap: Optional[float] = None
    delta: Optional[float] = None
    target: Optional[float] = None
    details: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    seed: Optional[int] = None
    seconds: float = 0.0

    @property
    def met(self) -> Optional[bool]:
        if self.expect is None:
            return None
        return self.outcome in EXPECT[self.expect]

    @property
    def refutation(self) -> bool:
        return self.outcome in ("refuted", "refutes")

    def to_dict(self, timings: bool = False) -> dict:
        d = {
            "index": self.index, "name": self.name, "test": self.test,
            "outcome": self.outcome, "expect": self.expect, "met": self.met,
            "sequences": [[_num(v) for v in s] for s in self.sequences],
            "rank": self.rank, "gap": _num(self.gap), "delta": _num(self.delta),
            "target": _num(self.target), "details": _clean(self.details),
            "notes": list(self.notes), "seed": self.seed,
        }
        if timings:
            d["seconds"] = self.seconds
        return d


@dataclass
class SuiteReport:
    cases: list = field(default_factory=list)

    def counts(self) -> dict:
        out = {k: 0 for k in OUTCOMES}
        for c in self.cases:
            out[c.outcome] += 1
        return out

    @property
    def unexpected_refutations(self) -> list:
        return [c for c in self.cases if c.refutation and c.expect != "refute"]

    @property
    def unmet(self) -> list:
        return [c for c in self.cases if c.met is False]

    def to_dict(self, timings: bool = False) -> dict:
        return {"schema_version": SCHEMA_VERSION, "kind": "suite",
                "counts": self.counts(),
                "cases": [c.to_dict(timings) for c in self.cases]}

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# --------------------------------------------------------------------------
# permeability
# --------------------------------------------------------------------------

@dataclass
class PermeabilityCase:
    """Two families expected to share their bifurcation points."""

    name: str
    families: tuple
    event: str = "flip"
    depth: int = 4
    tol: float = PAIR_TOL
    t_range: Optional[tuple] = None
    expect: Optional[str] = None

    def __post_init__(self):
        if len(self.families) != 2:
            raise SuiteError("a permeability case needs exactly two families")
        if self.event not in ("flip", "tangent"):
            raise SuiteError("event must be flip or tangent")
        if self.depth < 1:
            raise SuiteError("depth must be >= 1")
        for f in self.families:
            if len(f.params) != 1:
                raise SuiteError(f"{f.label}: permeability cases need one-parameter families")

    @classmethod
    def from_base(cls, name: str, base: MapFamily, kinds, *, c=None, **kw) -> "PermeabilityCase":
        fams = tuple(transform(base, k, c=c) for k in kinds)
        return cls(name, fams, **kw)

    def swapped(self) -> "PermeabilityCase":
        return PermeabilityCase(self.name, self.families[::-1], self.event, self.depth,
                                self.tol, self.t_range, self.expect)


def _range_for(fam: MapFamily, t_range):
    path = ParamPath.along(fam)
    if t_range is not None:
        return path, path.t_range(fam, t_range)
    return path, path.t_range(fam)


def _events(fam: MapFamily, event: str, depth: int, t_range):
    """Event values along the family's parameter; ``(values, complete, note)``."""
    path, (t0, t1) = _range_for(fam, t_range)
    if event == "tangent":
        try:
            ev = find_bifurcation(fam, path, 1, (t0, t1), kind="tangent")
        except InvalidBracket:
            return [], True, "no tangent event in range"
        return [ev.value], True, ""
    try:
        seq = bifurcation_sequence(fam, path, depth, t_range=(t0, t1))
    except CascadeNotFound as exc:
        return [], True, str(exc)
    return list(seq.values), not seq.partial or len(seq) >= depth, seq.note


def permeability_test(case: PermeabilityCase, index: int = 0) -> CaseResult:
    """Compare the event sequences of the two members, event by event."""
    start = time.perf_counter()
    res = CaseResult(index, case.name, "permeability", "inconclusive", case.expect)
    seqs, complete = [], True
    try:
        for fam in case.families:
            vals, ok, note = _events(fam, case.event, case.depth, case.t_range)
            seqs.append(vals)
            complete &= ok
            if note:
                res.notes.append(note if fam.label in note else f"{fam.label}: {note}")
    except NUMERIC_ERRORS as exc:
        res.notes.append(f"{type(exc).__name__}: {exc}")
        res.sequences = seqs
        res.seconds = time.perf_counter() - start
        return res
    res.sequences = seqs
    u, v = seqs
    n = min(len(u), len(v))
    for i in range(n):
        gap = abs(u[i] - v[i])
        if gap >= case.tol * max(1.0, abs(u[i]), abs(v[i])):
            res.outcome, res.rank, res.gap = "refuted", i + 1, gap
            break
    else:
        if len(u) == len(v):
            res.outcome = "confirmed"
            res.gap = max((abs(p - q) for p, q in zip(u, v)), default=0.0)
            if not u:
                res.notes.append("both sequences empty")
        elif complete:
            res.outcome, res.rank = "refuted", n + 1
            res.notes.append(f"event counts differ ({len(u)} vs {len(v)})")
        else:
            res.notes.append(f"event counts differ ({len(u)} vs {len(v)}) after a lost orbit")
    res.seconds = time.perf_counter() - start
    return res


# --------------------------------------------------------------------------
# universality
# --------------------------------------------------------------------------

_FEIGENVALUES = {2: DELTA, 4: DELTA_QUARTIC}


def target_delta(degree: int) -> float:
    if degree not in _FEIGENVALUES:
        _FEIGENVALUES[degree] = feigenvalue_for_degree(degree, degree).delta
    return _FEIGENVALUES[degree]


def universality_scan(family: MapFamily, path: Optional[ParamPath] = None, N: int = 6,
                      tol: float = UNIVERSALITY_TOL, *, t_range=None, name: str = "",
                      index: int = 0, expect: Optional[str] = None,
                      seed: Optional[int] = None) -> CaseResult:
    """Verdict on whether the cascade of ``family`` produces the Feigenbaum ratio."""
    start = time.perf_counter()
    res = CaseResult(index, name or family.label, "universality", "inconclusive", expect,
                     seed=seed)
    path = path or ParamPath.along(family)
    try:
        t0, t1 = t_range if t_range is not None else path.t_range(family)
        seq = bifurcation_sequence(family, path, N, t_range=(t0, t1))
    except CascadeNotFound as exc:
        res.outcome = "no-chaos"
        res.notes.append(str(exc))
        res.seconds = time.perf_counter() - start
        return res
    except NUMERIC_ERRORS as exc:
        res.notes.append(f"{type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - start
        return res
    res.sequences = [list(seq.values)]
    degree = _cascade_degree(family, seq)
    res.details["degree"] = degree
    if seq.partial:
        res.notes.append(f"partial sequence: {seq.note}")
    if len(seq) < 3:
        res.notes.append("fewer than three events")
        res.seconds = time.perf_counter() - start
        return res
    try:
        res.target = target_delta(degree) if degree != 2 else DELTA
    except NUMERIC_ERRORS as exc:
        res.notes.append(f"no reference ratio for degree {degree}: {exc}")
        res.seconds = time.perf_counter() - start
        return res
    if degree != 2:
        res.notes.append(f"maximum of degree {degree}; compared against its own ratio")
    rep = delta_report(seq)
    res.delta = rep.delta
    res.details["delta_seq"] = list(rep.delta_seq)
    rel = abs(rep.delta - res.target) / res.target
    res.details["relative_error"] = rel
    if rel < tol:
        res.outcome = "supports"
    elif len(rep.delta_seq) >= 2 and rep.spread < STABLE_SPREAD:
        res.outcome = "refutes"
    else:
        res.notes.append("ratio sequence has not stabilised")
    res.seconds = time.perf_counter() - start
    return res


def _cascade_degree(family: MapFamily, seq: BifurcationSequence) -> int:
    """Degree of the critical point carrying the cascade, at the last event."""
    ev = seq.events[-1] if seq.events else None
    if ev is None:
        return 2
    try:
        pts = find_critical_points(family, ev.params)
    except DomainFault:
        return 2
    if family.critical is not None:
        near = [p for p in pts if abs(p.x - family.critical) < 1e-6]
        if near:
            return near[0].degree
    maxima = [p for p in pts if p.kind == "maximum"]
    if maxima:
        return max(maxima, key=lambda p: p.value).degree
    return pts[0].degree if pts else 2


def random_unimodal_family(seed: int, max_degree: int = 6, tries: int = 1000) -> MapFamily:
    """``a * p(x)`` with ``p`` a random polynomial endomorphism of [0, 1] with one maximum.

    ``p(x) = x (1 - x) q(x)``, ``q`` positive of degree <= ``max_degree - 2``,
    normalised so that ``max p = 1``; draws are rejected until ``p`` has a
    single interior maximum.
    """
    rng = np.random.default_rng(seed)
    xs = np.linspace(0.0, 1.0, 2001)
    for _ in range(tries):
        k = int(rng.integers(0, max_degree - 1))
        coef = rng.uniform(-0.8, 0.8, size=k + 1)
        coef[0] = 1.0
        q = np.polynomial.Polynomial(coef)
        p = np.polynomial.Polynomial([0.0, 1.0, -1.0]) * q
        vals = p(xs)
        if np.any(vals[1:-1] <= 0):
            continue
        dp = p.deriv()(xs)
        if np.count_nonzero(np.diff(np.sign(dp)) != 0) != 1:
            continue
        p = p / vals.max()
        terms = [f"({float(c)!r})*x^{i}" for i, c in enumerate(p.coef) if c != 0]
        src = "a*(" + "+".join(terms) + ")"
        fam = parse_family(src, (0.0, 1.0), name=f"random({seed})")
        # start past the transcritical point a = 1 / p'(0), where the
        # interior fixed point leaves 0
        start = min(0.9, 1.3 / p.deriv()(0.0))
        return fam.with_(cascade=(start, 1.0), note=f"random polynomial, seed {seed}")
    raise SuiteError(f"no admissible polynomial after {tries} draws (seed {seed})")


# --------------------------------------------------------------------------
# several maxima
# --------------------------------------------------------------------------

def seeded_attractors(family: MapFamily, params, **classify_kw) -> list:
    """``(x_max, attractor)`` for the orbit seeded at each local maximum."""
    maxima = [p for p in find_critical_points(family, params) if p.kind == "maximum"]
    return [(m.x, classify_attractor(family, params, seed=m.x, **classify_kw)) for m in maxima]


def _level(att) -> float:
    if isinstance(att, Periodic):
        return math.log2(att.period)
    if isinstance(att, Chaotic):
        return math.inf
    return -1.0


def multimax_report(family: MapFamily, path: Optional[ParamPath] = None, N: int = 4, *,
                    t_range=None, steps: int = 120, name: str = "", index: int = 0,
                    expect: Optional[str] = None, tol: float = UNIVERSALITY_TOL) -> CaseResult:
    """Track the attractors seeded from each maximum along the parameter path.

    Orbits are *global* at a step when every seed reaches the same attractor
    and *local* otherwise.  For each maximum the first parameter at which its
    seeded orbit reaches period ``2^k`` is recorded, which shows which side
    bifurcates faster; chaotic extents give the local chaos sub-intervals.
    """
    start = time.perf_counter()
    res = CaseResult(index, name or family.label, "multimax", "inconclusive", expect)
    path = path or ParamPath.along(family)
    try:
        t0, t1 = t_range if t_range is not None else path.t_range(family)
        ts = np.linspace(t0, t1, steps + 1)
        first_level: dict = {}
        local_steps, chaos = [], []
        n_max = 0
        for t in ts:
            params = path.params(float(t))
            seeds = seeded_attractors(family, params, transient=20_000)
            n_max = max(n_max, len(seeds))
            atts = [a for _, a in seeds]
            if any(not same_attractor(atts[0], a) for a in atts[1:]):
                local_steps.append(path.value(float(t)))
            for i, (_, att) in enumerate(seeds):
                lev = _level(att)
                for k in range(1, N + 1):
                    if lev >= k and (i, k) not in first_level:
                        first_level[(i, k)] = path.value(float(t))
                if isinstance(att, Chaotic):
                    chaos.append((path.value(float(t)), i, att.extent))
    except NUMERIC_ERRORS as exc:
        res.notes.append(f"{type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - start
        return res
    if n_max < 2:
        res.notes.append("fewer than two maxima: trivially global")
    res.details["maxima"] = n_max
    res.details["global"] = not local_steps
    res.details["local_parameters"] = local_steps[:20]
    res.details["first_period_doubling"] = {
        f"max{i + 1}_level{k}": v for (i, k), v in sorted(first_level.items())}
    faster = _faster(first_level, n_max, N)
    if faster is not None:
        res.details["faster_maximum"] = faster
    if chaos:
        res.details["first_chaos"] = {"parameter": chaos[0][0], "maximum": chaos[0][1] + 1,
                                      "extent": list(chaos[0][2])}
    # the cascade itself, as in the single-maximum case
    uni = universality_scan(family, path, N, tol, t_range=t_range)
    res.sequences, res.delta, res.target = uni.sequences, uni.delta, uni.target
    res.notes.extend(uni.notes)
    res.outcome = {"supports": "confirmed", "refutes": "refuted"}.get(uni.outcome, "inconclusive")
    res.seconds = time.perf_counter() - start
    return res


def _faster(first_level: dict, n_max: int, N: int):
    """Index (1-based) of the maximum whose seeded cascade reaches the deepest level first."""
    for k in range(N, 0, -1):
        hits = [(first_level[(i, k)], i) for i in range(n_max) if (i, k) in first_level]
        if hits:
            hits.sort()
            if len(hits) == 1 or hits[0][0] != hits[1][0]:
                return hits[0][1] + 1
            return None
    return None


# --------------------------------------------------------------------------
# suites
# --------------------------------------------------------------------------

@dataclass
class SuiteCase:
    name: str
    test: str
    family: MapFamily
    pair: Optional[tuple] = None
    event: str = "flip"
    depth: int = 4
    tol: Optional[float] = None
    t_range: Optional[tuple] = None
    expect: Optional[str] = None
    seed: Optional[int] = None

    def run(self, index: int) -> CaseResult:
        if self.test == "permeability":
            case = PermeabilityCase(self.name, self.pair, self.event, self.depth,
                                    self.tol if self.tol is not None else PAIR_TOL,
                                    self.t_range, self.expect)
            return permeability_test(case, index)
        tol = self.tol if self.tol is not None else UNIVERSALITY_TOL
        if self.test == "universality":
            return universality_scan(self.family, None, self.depth, tol, t_range=self.t_range,
                                     name=self.name, index=index, expect=self.expect,
                                     seed=self.seed)
        return multimax_report(self.family, None, self.depth, t_range=self.t_range,
                               name=self.name, index=index, expect=self.expect, tol=tol)


def resolve_family(spec: str, domain=None, orientation=None) -> MapFamily:
    """``<catalog name>`` | ``expr:<source>`` | ``map:<source>`` | ``random:<seed>``."""
    if spec.startswith("random:"):
        return random_unimodal_family(int(spec.split(":", 1)[1]))
    if spec.startswith(("expr:", "map:")):
        src = spec.split(":", 1)[1]
        dom = domain if domain is not None else (0.0, 1.0)
        node = parse(src)
        if not symbols(node) & {"a", "b"}:
            return parse_map(src, dom)
        fam = parse_family(src, dom, orientation or "increasing")
        return fam
    fam = named_family(spec)
    if domain is not None:
        fam = fam.with_(domain=tuple(domain))
    if orientation is not None:
        fam = fam.with_(orientation=orientation)
    return fam


_KEYS = {"family", "pair", "test", "event", "depth", "tol", "expect", "range", "domain",
         "c", "theta", "orientation"}


def parse_suite(text: str) -> list[SuiteCase]:
    """Parse the line-oriented suite format.

    ``case <name> family=<catalog|expr:...> pair=<kind>,<kind> depth=<N> tol=<x>
    expect=<confirm|refute|nochaos>`` plus optional ``test=``, ``event=``,
    ``range=lo:hi``, ``domain=lo:hi``, ``c=``, ``theta=`` and ``orientation=``.
    Pair members are transform kinds, ``same`` (the family itself) or family
    specs prefixed with ``family:``.  ``#`` starts a comment.
    """
    cases, names = [], set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if not line:
            continue
        try:
            toks = shlex.split(line)
        except ValueError as exc:
            raise SuiteError(f"line {lineno}: {exc}") from None
        if toks[0] != "case" or len(toks) < 2:
            raise SuiteError(f"line {lineno}: expected 'case <name> key=value ...'")
        name = toks[1]
        if name in names:
            raise SuiteError(f"line {lineno}: duplicate case name {name!r}")
        names.add(name)
        kv = {}
        for tok in toks[2:]:
            if "=" not in tok:
                raise SuiteError(f"line {lineno}: bad token {tok!r}")
            k, v = tok.split("=", 1)
            if k not in _KEYS:
                raise SuiteError(f"line {lineno}: unknown key {k!r}")
            kv[k] = v
        try:
            cases.append(_build_case(name, kv))
        except (SuiteError, ExprError, KeyError, ValueError) as exc:
            raise SuiteError(f"line {lineno}: {exc}") from None
    return cases


def _interval(text: str) -> tuple:
    lo, hi = text.split(":")
    return float(lo), float(hi)


def _build_case(name: str, kv: dict) -> SuiteCase:
    if "family" not in kv:
        raise SuiteError("missing family=")
    domain = _interval(kv["domain"]) if "domain" in kv else None
    fam = resolve_family(kv["family"], domain, kv.get("orientation"))
    seed = int(kv["family"].split(":", 1)[1]) if kv["family"].startswith("random:") else None
    if "theta" in kv:
        fam = transform(fam, TransformKind.THETA_REPARAM, theta=kv["theta"],
                        name=f"{fam.label}@theta")
    t_range = _interval(kv["range"]) if "range" in kv else None
    test = kv.get("test", "permeability" if "pair" in kv else "universality")
    if test not in ("permeability", "universality", "multimax"):
        raise SuiteError(f"unknown test {test!r}")
    expect = kv.get("expect")
    if expect is not None and expect not in EXPECT:
        raise SuiteError(f"expect must be one of {sorted(EXPECT)}")
    depth = int(kv.get("depth", 4))
    if depth < 1:
        raise SuiteError("depth must be >= 1")
    tol = float(kv["tol"]) if "tol" in kv else None
    pair = None
    if test == "permeability":
        if "pair" not in kv:
            raise SuiteError("permeability cases need pair=")
        members = kv["pair"].split(",")
        if len(members) != 2:
            raise SuiteError("pair needs two members")
        c = kv.get("c")
        c = float(c) if c is not None and _is_number(c) else c
        pair = tuple(_member(fam, m, c, domain) for m in members)
        if t_range is None and fam.cascade is not None:
            t_range = fam.cascade
    elif t_range is None and fam.cascade is None:
        raise SuiteError("family has no cascade range; give range=lo:hi")
    event = kv.get("event", "flip")
    if event not in ("flip", "tangent"):
        raise SuiteError("event must be flip or tangent")
    return SuiteCase(name, test, fam, pair, event, depth, tol, t_range, expect, seed)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _member(fam: MapFamily, spec: str, c, domain) -> MapFamily:
    if spec == "same":
        return fam
    if spec.startswith("family:"):
        return resolve_family(spec.split(":", 1)[1], domain)
    return transform(fam, TransformKind(spec), c=c)


def run_suite(cases, workers: int = 1) -> SuiteReport:
    """Run every case; the report is ordered by case index."""
    cases = list(cases)
    if workers > 1 and len(cases) > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(lambda ic: ic[1].run(ic[0]), enumerate(cases)))
    else:
        results = [c.run(i) for i, c in enumerate(cases)]
    return SuiteReport(sorted(results, key=lambda r: r.index))
