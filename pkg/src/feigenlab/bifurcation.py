"""Flip and tangent events along parameter paths, δ ratios, superstable
parameters, tine widths, and degree-dependent Feigenvalues."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import (BoundMap, Escape, NoConvergence, Periodic, bound,
                       classify_attractor, principal_critical_point)
from .family import MapFamily
from .jets import DD, DomainFault

DELTA = 4.669201609102990
DELTA_QUARTIC = 7.284686217
DELTA_PRIOR = 4.5
DD_RANK = 9            # ranks beyond this switch to double-double in "auto" mode


class CascadeNotFound(RuntimeError):
    pass


class InvalidBracket(ValueError):
    pass


class LostOrbit(RuntimeError):
    def __init__(self, message: str, t=None):
        super().__init__(message)
        self.t = t


# --------------------------------------------------------------------------
# paths and results
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamPath:
    """``params(t) = base + t * direction``."""

    base: tuple
    direction: tuple

    def __post_init__(self):
        base = tuple(float(v) for v in np.atleast_1d(self.base))
        direction = tuple(float(v) for v in np.atleast_1d(self.direction))
        if len(base) != len(direction):
            raise ValueError("base and direction differ in length")
        if not any(direction):
            raise ValueError("direction must be nonzero")
        if len(direction) == 1 and abs(direction[0]) != 1:
            raise ValueError("one-parameter paths use direction +1 or -1")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "direction", direction)

    @classmethod
    def along(cls, family: MapFamily, direction: Optional[int] = None) -> "ParamPath":
        """The one-parameter path of ``family``, by default in its cascade orientation."""
        if len(family.params) != 1:
            raise ValueError("two-parameter families need an explicit base and direction")
        d = family.orientation if direction is None else (1 if direction > 0 else -1)
        return cls((0.0,), (float(d),))

    @property
    def dim(self) -> int:
        return len(self.base)

    def params(self, t):
        return tuple(b + t * d for b, d in zip(self.base, self.direction))

    def value(self, t) -> float:
        """The parameter value itself on one-parameter paths, else ``t``."""
        return float(self.base[0] + t * self.direction[0]) if self.dim == 1 else float(t)

    def t_of(self, value: float) -> float:
        if self.dim != 1:
            return float(value)
        return (value - self.base[0]) / self.direction[0]

    def t_range(self, family: MapFamily, values=None) -> tuple[float, float]:
        values = values if values is not None else family.cascade
        if values is None:
            raise ValueError(f"{family.label}: no cascade range; pass t_range")
        t0, t1 = sorted(self.t_of(v) for v in values)
        return t0, t1


@dataclass(frozen=True)
class BifurcationEvent:
    t: float
    kind: str                 # 'flip' | 'tangent'
    period_before: int
    residual: float
    bracket_width: float
    params: tuple = ()
    value: float = 0.0        # parameter value (1D) or path coordinate

    @property
    def rank(self) -> int:
        return int(round(math.log2(self.period_before))) + 1


@dataclass(frozen=True)
class BifurcationSequence:
    events: tuple
    family: MapFamily = field(repr=False, compare=False, default=None)
    path: ParamPath = None
    partial: bool = False
    side_events: tuple = ()
    note: str = ""

    @property
    def values(self) -> list[float]:
        return [e.value for e in self.events]

    @property
    def ts(self) -> list[float]:
        return [e.t for e in self.events]

    def __len__(self):
        return len(self.events)


@dataclass(frozen=True)
class DeltaReport:
    values: tuple
    delta_seq: tuple
    b_inf: float
    c_seq: tuple
    d_seq: tuple
    monotone: bool
    spread: float

    @property
    def delta(self) -> float:
        return self.delta_seq[-1] if self.delta_seq else math.nan


# --------------------------------------------------------------------------
# root finding shared by all refinements (works for floats and mpf)
# --------------------------------------------------------------------------

def _illinois(g: Callable, t0, g0, t1, g1, xtol, maxiter: int = 200):
    """Bracketed secant with the Illinois modification; returns (root, width, g(root))."""
    if g0 == 0:
        return t0, 0.0, g0
    if g1 == 0:
        return t1, 0.0, g1
    if (g0 > 0) == (g1 > 0):
        raise InvalidBracket("root not bracketed")
    side = 0
    best = (t0, g0) if abs(g0) < abs(g1) else (t1, g1)
    for _ in range(maxiter):
        if abs(t1 - t0) <= xtol:
            break
        t = t1 - g1 * (t1 - t0) / (g1 - g0)
        lo, hi = (t0, t1) if t0 < t1 else (t1, t0)
        if not lo < t < hi:
            t = (t0 + t1) / 2
        gt = g(t)
        if abs(gt) < abs(best[1]):
            best = (t, gt)
        if gt == 0:
            return t, 0.0, gt
        if (gt > 0) == (g1 > 0):
            t1, g1 = t, gt
            if side == -1:
                g0 /= 2
            side = -1
        else:
            t0, g0 = t1, g1
            t1, g1 = t, gt
            if side == 1:
                g0 /= 2
            side = 1
    return best[0], abs(t1 - t0), best[1]


def _scan_sign_change(g: Callable, t0, t1, h, g0=None):
    """Step from ``t0`` toward ``t1`` until ``g`` changes sign; returns the bracket."""
    t, gt = t0, (g(t0) if g0 is None else g0)
    if gt == 0:
        return (t, gt), (t, gt)
    while (t < t1) if h > 0 else (t > t1):
        tn = min(t + h, t1) if h > 0 else max(t + h, t1)
        try:
            gn = g(tn)
        except (DomainFault, NoConvergence, Escape, ValueError, ZeroDivisionError, OverflowError):
            t = tn
            continue
        if gn == 0 or (gn > 0) != (gt > 0):
            return (t, gt), (tn, gn)
        t, gt = tn, gn
    return None


# --------------------------------------------------------------------------
# cascade tracker
# --------------------------------------------------------------------------

class _Tracker:
    """Follows the stable cycle of a family along a path by continuation."""

    def __init__(self, family: MapFamily, path: ParamPath, t_stop: float,
                 precision: str = "double"):
        self.family = family
        self.path = path
        self.t_stop = t_stop
        self.mode = precision
        self.precision = "dd" if precision == "dd" else "double"
        self.side_events: list[BifurcationEvent] = []

    # -- primitives --------------------------------------------------------
    def bm(self, t) -> BoundMap:
        return BoundMap(self.family, self.path.params(t), self.precision)

    def polish(self, t, x, P: int):
        bm = self.bm(t)
        x, m = bm.cycle_newton(x, P)
        if P > 1:
            half = bm.map_power(x, P // 2)[0]
            if abs(half - x) <= 1e-9 * max(1.0, abs(x)):
                raise LostOrbit("cycle collapsed onto its half period")
        return x, m

    @property
    def xtol_rel(self) -> float:
        return 2.0 ** -100 if self.precision == "dd" else 2.0 ** -50

    def to_dd(self, *vals):
        return tuple(DD.mpf(v) for v in vals)

    def event(self, t, kind, P, residual, width) -> BifurcationEvent:
        tf = float(t)
        return BifurcationEvent(tf, kind, P, float(residual), float(width),
                                tuple(float(v) for v in self.path.params(tf)),
                                self.path.value(tf))

    # -- seeding -------------------------------------------------------------
    def seed(self, t0: float):
        """First stable cycle at or after ``t0``: ``(t, x, P, m)``."""
        span = self.t_stop - t0
        for k in range(101):
            t = t0 + span * k / 100
            att = classify_attractor(self.family, self.path.params(t))
            if isinstance(att, Periodic) and (att.period & (att.period - 1)) == 0:
                x = att.cycle[0]
                return t, x, att.period, att.multiplier
        raise CascadeNotFound(f"{self.family.label}: no stable cycle on the path")

    # -- refinement ------------------------------------------------------------
    def refine(self, target: float, a, b, P: int):
        """Solve ``m(t) = target`` between two continued states ``(t, x, m)``."""
        ta, xa, ma = a
        tb, xb, mb = b
        ends = {"a": (ta, xa), "b": (tb, xb)}

        def g(t):
            near = ends["a"] if abs(t - ends["a"][0]) <= abs(t - ends["b"][0]) else ends["b"]
            x, m = self.polish(t, near[1], P)
            val = m - target
            if (val > 0) == (ga0 > 0):
                ends["a"] = (t, x)
            else:
                ends["b"] = (t, x)
            return val

        ga0 = ma - target
        xtol = self.xtol_rel * max(1.0, abs(ta))
        t, width, res = _illinois(g, ta, ga0, tb, mb - target, xtol)
        x = ends["a"][1]
        return t, x, abs(res), width

    # -- branch switching -------------------------------------------------------
    def switch(self, t_event, x_event, P: int, gap_guess: float, kind: str):
        """Move past an event onto the new stable cycle; returns ``(t, x, P', m)``."""
        eps = 0.02 * gap_guess
        for _ in range(12):
            t = t_event + eps
            try:
                xs, _ = self.polish(t, x_event, P)
                bm = self.bm(t)
                if kind == "flip":
                    x2 = _nearby_root(bm, xs, 2 * P)
                    Q = 2 * P
                else:
                    x2 = _nearby_root(bm, xs, P)
                    Q = P
                if x2 is not None:
                    x2, m2 = self.polish(t, x2, Q)
                    if abs(m2) < 1:
                        return t, x2, Q, m2
            except (NoConvergence, LostOrbit, DomainFault):
                pass
            eps /= 3
        raise LostOrbit(f"could not switch branch after the {kind} at t={float(t_event)!r}")

    # -- marching ----------------------------------------------------------------
    def advance(self, state, h0: float, hist=()):
        """March until the cycle's multiplier leaves [-1, 1].

        Returns ``(kind, t, x, residual, width)`` or ``None`` at the end of the path.
        """
        t, x, P, m = state
        pts = list(hist) + [(t, m)]
        prev_x = None            # (t, x) one step back, for the secant predictor
        h = h0
        hmin = 1e-6 * h0
        predict = True
        while t < self.t_stop:
            if predict and len(pts) >= 2:
                (t0, m0), (t1, m1) = pts[-2], pts[-1]
                slope = (m1 - m0) / (t1 - t0) if t1 != t0 else 0
                if slope < 0:
                    h_lin = 1.2 * (-1 - m1) / slope
                    h = min(max(h_lin, h / 4, hmin), 4 * h)
            predict = True
            tn = min(t + h, self.t_stop)
            guess = x
            if prev_x is not None:
                tp, xp = prev_x
                guess = x + (x - xp) * (tn - t) / (t - tp)
            try:
                xn, mn = self.polish(tn, guess, P)
                # an event only counts when reached in a small step; a big
                # jump in the multiplier usually means a switch to another root
                if abs(mn - m) > 0.5 and h > hmin:
                    raise LostOrbit("multiplier jumped")
            except (NoConvergence, LostOrbit, DomainFault):
                h /= 4
                predict = False
                if h < hmin:
                    raise LostOrbit(f"cycle of period {P} lost near t={float(t)!r}", t)
                continue
            if mn < -1 or mn > 1:
                target = -1.0 if mn < -1 else 1.0
                kind = "flip" if target < 0 else "tangent"
                te, xe, res, width = self.refine(target, (t, x, m), (tn, xn, mn), P)
                return kind, te, xe, res, width
            prev_x = (t, x)
            t, x, m = tn, xn, mn
            pts.append((t, m))
        return None

    def reseed(self, exc: LostOrbit, P: int, started: bool):
        """After losing the cycle, look for the attractor a little further on."""
        if exc.t is None or float(exc.t) >= self.t_stop:
            return None
        t0 = float(exc.t) + 1e-6 * max(1.0, abs(float(exc.t)))
        try:
            t, x, Q, m = self.seed(t0)
        except CascadeNotFound:
            if not started:
                raise
            return None
        if started and Q != P:
            return None
        if self.precision == "dd":
            t, x = self.to_dd(t, x)
        return t, x, Q, m

    # -- full cascade --------------------------------------------------------------
    def run(self, t_start: float, N: int, max_side: int = 8):
        t, x, P, m = self.seed(t_start)
        events: list[BifurcationEvent] = []
        gaps: list[float] = []
        h = (self.t_stop - t) / 64
        hist = ()
        partial = False
        note = ""
        reseeds = 0
        while len(events) < N:
            if reseeds > 3:
                partial, note = True, "cycle lost repeatedly"
                break
            if self.mode == "auto" and len(events) >= DD_RANK and self.precision == "double":
                self.precision = "dd"
                t, x = self.to_dd(t, x)
            try:
                out = self.advance((t, x, P, m), h, hist)
            except LostOrbit as exc:
                state = self.reseed(exc, P, bool(events))
                if state is None:
                    partial, note = True, str(exc)
                    break
                reseeds += 1
                t, x, P, m = state
                hist = ()
                continue
            if out is None:
                if not events:
                    raise CascadeNotFound(f"{self.family.label}: cascade not found "
                                          f"before t={self.t_stop!r}")
                partial, note = True, "path ended before all events were found"
                break
            kind, te, xe, res, width = out
            ev = self.event(te, kind, P, res, width)
            if kind == "flip":
                if events:
                    gaps.append(float(te) - events[-1].t)
                events.append(ev)
            else:
                self.side_events.append(ev)
                if len(self.side_events) > max_side:
                    partial, note = True, "too many tangent events"
                    break
            if len(gaps) >= 2:
                ratio = gaps[-2] / gaps[-1]
                guess = gaps[-1] / (ratio if ratio > 1 else DELTA_PRIOR)
            elif gaps:
                guess = gaps[-1] / DELTA_PRIOR
            else:
                guess = (float(te) - float(t_start)) / DELTA_PRIOR
            if len(events) >= N:
                break
            try:
                t, x, P, m = self.switch(te, xe, P, guess, kind)
            except LostOrbit as exc:
                partial, note = True, str(exc)
                break
            h = guess / 8
            hist = ((te, 1.0),) if kind == "flip" else ()
        return events, partial, note


def _nearby_root(bm: BoundMap, xs, q: int):
    """Nearest root of ``f^q(x) - x`` other than ``xs`` (scan outward from it)."""
    span = (bm.hi - bm.lo) if math.isfinite(bm.hi) else max(1.0, abs(xs))
    g = lambda z: bm.map_power(z, q)[0] - z  # noqa: E731
    w = max(1e-10 * span, 1e3 * bm.eps * max(1.0, abs(xs)))
    while w <= 0.5 * span:
        for sgn in (1, -1):
            z = xs + sgn * w
            if not bm.inside(z):
                continue
            zin = xs + sgn * w / 2
            try:
                gz, gin = g(z), g(zin)
            except DomainFault:
                continue
            if gz == 0:
                return z
            if (gz > 0) != (gin > 0):
                try:
                    r, _, _ = _illinois(g, zin, gin, z, gz, 4 * bm.eps * max(1.0, abs(z)))
                except (InvalidBracket, DomainFault):
                    continue
                return r
        w *= 2
    return None


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------

def bifurcation_sequence(family: MapFamily, path: Optional[ParamPath] = None, N: int = 2, *,
                         t_range=None, precision: str = "auto") -> BifurcationSequence:
    """The first ``N`` flip events of the cascade along ``path``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    path = path or ParamPath.along(family)
    t0, t1 = t_range if t_range is not None else path.t_range(family)
    tr = _Tracker(family, path, t1, precision)
    events, partial, note = tr.run(t0, N)
    return BifurcationSequence(tuple(events), family, path, partial,
                               tuple(tr.side_events), note)


def find_bifurcation(family: MapFamily, path: Optional[ParamPath], n: int, bracket,
                     kind: str = "flip", precision: str = "double") -> BifurcationEvent:
    """Locate one event inside ``bracket`` (path coordinates)."""
    path = path or ParamPath.along(family)
    t_lo, t_hi = bracket
    if kind == "tangent":
        return _find_tangent(family, path, (t_lo, t_hi), 2 ** (n - 1), precision)
    if kind != "flip":
        raise ValueError("kind must be 'flip' or 'tangent'")
    P = 2 ** (n - 1)
    lo = classify_attractor(family, path.params(t_lo))
    hi = classify_attractor(family, path.params(t_hi))
    if not isinstance(lo, Periodic) or lo.period != P:
        raise InvalidBracket(f"expected period {P} at t={t_lo!r}, found {_describe(lo)}")
    if isinstance(hi, Periodic) and hi.period == P:
        raise InvalidBracket("same classification at both ends of the bracket")
    tr = _Tracker(family, path, t_hi, precision)
    out = tr.advance((t_lo, lo.cycle[0], P, lo.multiplier), (t_hi - t_lo) / 16)
    if out is None or out[0] != "flip":
        raise InvalidBracket("no flip of the tracked cycle inside the bracket")
    _, te, _, res, width = out
    return tr.event(te, "flip", P, res, width)


def _describe(att) -> str:
    return f"period {att.period}" if isinstance(att, Periodic) else att.kind


# -- tangent events ------------------------------------------------------------

def fixed_points(bm: BoundMap, P: int = 1, grid: int = 4096) -> list[tuple[float, float]]:
    """Roots of ``f^P(x) - x`` on the domain with their multipliers."""
    lo = bm.lo
    hi = bm.hi if math.isfinite(bm.hi) else max(1.0, lo) * 1e6
    xs = np.linspace(lo, hi, grid + 1)
    g = []
    for x in xs:
        try:
            y, _ = bm.map_power(float(x), P)
            g.append(y - x)
        except DomainFault:
            g.append(math.nan)
    out = []
    gfun = lambda z: bm.map_power(z, P)[0] - z  # noqa: E731
    for i in range(grid):
        g0, g1 = g[i], g[i + 1]
        if not (math.isfinite(g0) and math.isfinite(g1)):
            continue
        if g0 == 0:
            r = float(xs[i])
        elif (g0 > 0) != (g1 > 0) and g1 != 0:
            r, _, _ = _illinois(gfun, float(xs[i]), g0, float(xs[i + 1]), g1, 1e-15 * max(1, abs(xs[i])))
        else:
            continue
        out.append((r, bm.map_power(r, P)[1]))
    if g[-1] == 0:
        out.append((float(xs[-1]), bm.map_power(float(xs[-1]), P)[1]))
    return out


def _find_tangent(family, path, bracket, P, precision):
    t_lo, t_hi = bracket
    tr = _Tracker(family, path, t_hi, precision)
    start = fixed_points(tr.bm(t_lo), P)
    end = fixed_points(tr.bm(t_hi), P)
    for pts, t_from, t_to in ((start, t_lo, t_hi), (end, t_hi, t_lo)):
        best = None
        for x0, m0 in pts:
            ev = _follow_fixed_point(tr, x0, m0, t_from, t_to, P)
            if ev is not None and (best is None or abs(ev.t - t_from) < abs(best.t - t_from)):
                best = ev
        if best is not None:
            return best
    if len(start) == len(end) and all(abs(m) < 1 for _, m in start) == all(abs(m) < 1 for _, m in end):
        raise InvalidBracket("fixed-point structure is the same at both ends")
    raise LostOrbit("tangent event could not be located")


def _follow_fixed_point(tr: _Tracker, x, m, t_from, t_to, P, steps: int = 256):
    """Continue one root of ``f^P - x``; report where its multiplier meets +1."""
    h = (t_to - t_from) / steps
    t = t_from
    while (t - t_to) * (1 if h > 0 else -1) < 0:
        tn = t + h
        if (tn - t_to) * (1 if h > 0 else -1) > 0:
            tn = t_to
        try:
            bm = tr.bm(tn)
            xn, mn = bm.cycle_newton(x, P)
            if abs(xn - x) > 0.1 * max(1.0, abs(x)):
                raise NoConvergence("jumped to another root")
        except (NoConvergence, DomainFault):
            if abs(h) > abs(t_to - t_from) * 1e-6:
                h /= 4
                continue
            return _refine_fold(tr, x, t, t_to, P, abs(h))
        if (m - 1) * (mn - 1) < 0 or mn == 1:
            a, b = (t, x, m), (tn, xn, mn)
            if t > tn:
                a, b = b, a
            te, _, res, width = tr.refine(1.0, a, b, P)
            return tr.event(te, "tangent", P, res, width)
        t, x, m = tn, xn, mn
    return None


def _refine_fold(tr: _Tracker, x, t_exist, t_to, P, h):
    """Fold: the extremum of ``g = f^P - x`` touches zero.

    ``x_e(t)`` solves ``(f^P)'(x) = 1`` by Newton (second derivative from the
    order-3 jet chain); the event is the root of ``g(x_e(t), t)``.
    """
    state = {"x": x}

    def extremum(t):
        bm = tr.bm(t)
        z = state["x"]
        for _ in range(60):
            d1, d2 = _power_d12(bm, z, P)
            if d2 == 0:
                break
            step = (d1 - 1) / d2
            z -= step
            if abs(step) < 1e-15 * max(1.0, abs(z)):
                break
        state["x"] = z
        return bm.map_power(z, P)[0] - z

    step = h if t_to > t_exist else -h
    found = _scan_sign_change(extremum, t_exist, t_to, step)
    if found is None:
        return None
    (ta, ga), (tb, gb) = found
    xtol = tr.xtol_rel * max(1.0, abs(ta))
    te, width, _ = _illinois(extremum, ta, ga, tb, gb, xtol)
    bm = tr.bm(te)
    m = bm.map_power(state["x"], P)[1]
    return tr.event(te, "tangent", P, abs(m - 1), width)


def _power_d12(bm: BoundMap, x, P):
    """First and second derivative of ``f^P`` at ``x``."""
    d1, d2 = 1.0, 0.0
    for _ in range(P):
        f, f1, f2, _ = bm.jet3(x)
        d1, d2 = f1 * d1, f2 * d1 * d1 + f1 * d2
        x = f
    return d1, d2


# -- δ and accumulation ------------------------------------------------------------

def delta_report(seq) -> DeltaReport:
    """Ratios of consecutive gaps, geometric extrapolation and higher ratios."""
    vals = [float(v) for v in (seq.values if isinstance(seq, BifurcationSequence) else seq)]
    if len(vals) < 3:
        raise ValueError("need at least three events for a ratio")
    gaps = [b - a for a, b in zip(vals, vals[1:])]
    if any(g == 0 for g in gaps):
        raise ZeroDivisionError("duplicate events give a zero gap")
    deltas = [g0 / g1 for g0, g1 in zip(gaps, gaps[1:])]
    last = deltas[-1]
    b_inf = vals[-1] + (vals[-1] - vals[-2]) / (last - 1) if last > 1 else math.nan
    c_seq: list[float] = []
    if math.isfinite(b_inf):
        c_seq = [(b_inf - vals[n - 1]) / (b_inf - vals[n]) for n in range(1, len(vals))
                 if b_inf != vals[n]]
    d_seq = []
    for n in range(1, len(c_seq) - 1):
        den = c_seq[n + 1] - c_seq[n]
        d_seq.append((c_seq[n] - c_seq[n - 1]) / den if den != 0 else math.nan)
    diffs = np.diff(deltas)
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    spread = abs(deltas[-1] - deltas[-2]) / abs(deltas[-1]) if len(deltas) >= 2 else math.nan
    return DeltaReport(tuple(vals), tuple(deltas), b_inf, tuple(c_seq), tuple(d_seq),
                       monotone, spread)


def accumulation_ratio(family: MapFamily, path: Optional[ParamPath] = None, N: int = 7,
                       **kw) -> float:
    """Extrapolated accumulation point divided by the first flip."""
    seq = bifurcation_sequence(family, path, N, **kw)
    if len(seq) < 3:
        raise CascadeNotFound("too few events to extrapolate")
    rep = delta_report(seq)
    return rep.b_inf / seq.values[0]


# -- superstable parameters ------------------------------------------------------------

def superstable_sequence(family: MapFamily, path: Optional[ParamPath] = None, N: int = 4, *,
                         t_range=None, precision: str = "double") -> list[float]:
    """Parameters ``s_0..s_N`` where the critical point lies on a ``2^n``-cycle.

    Independent of the flip tracker: each ``s_n`` is the first sign change of
    ``G_n(t) = f_t^{2^n}(x_c) - x_c`` after ``s_{n-1}``, stepping by a
    fraction of the gap predicted from the previous ratio, then refined by
    the bracketed secant.
    """
    path = path or ParamPath.along(family)
    t0, t1 = t_range if t_range is not None else path.t_range(family)
    prec = "dd" if precision == "dd" else "double"
    xc_state = {"x": None}

    def G(n):
        def g(t):
            params = path.params(t)
            xc = principal_critical_point(family, params, near=xc_state["x"])
            xc_state["x"] = xc
            bm = BoundMap(family, params, prec)
            xc = bm.num(xc)
            return bm.iterate(xc, 2 ** n) - xc
        return g

    ss: list = []
    for n in range(N + 1):
        g = G(n)
        if n == 0:
            start, h = t0, (t1 - t0) / 200
        else:
            gap = (ss[-1] - ss[-2]) / DELTA_PRIOR if n >= 2 else (ss[-1] - t0) / 2
            if n >= 3:
                ratio = (ss[-2] - ss[-3]) / (ss[-1] - ss[-2])
                gap = (ss[-1] - ss[-2]) / (ratio if ratio > 1 else DELTA_PRIOR)
            h = gap / 16
            start = ss[-1] + h / 4
        found = _scan_sign_change(g, start, t1, h)
        if found is None:
            raise CascadeNotFound(f"no superstable parameter of rank {n} before t={t1!r}")
        (ta, ga), (tb, gb) = found
        xtol = (2.0 ** -100 if prec == "dd" else 2.0 ** -50) * max(1.0, abs(ta))
        s, _, _ = _illinois(g, ta, ga, tb, gb, xtol)
        ss.append(s)
    return [path.value(s) for s in ss]


# -- tine widths ---------------------------------------------------------------------

def alpha_rank(n: int) -> int:
    """``A(1) = 1``, ``A(n+1) = 2 A(n) + (-1)^(n+1)``."""
    if n < 1:
        raise ValueError("n >= 1")
    A = 1
    for k in range(1, n):
        A = 2 * A + (-1) ** (k + 1)
    return A


@dataclass(frozen=True)
class TineWidths:
    level: int
    orbit: tuple           # ordered as used for the ranks
    widths: tuple          # consecutive gaps, 2^(n-1) - 1 of them
    alpha_pair: tuple      # 1-based ranks (2^(n-2), 2^(n-1))
    alpha_width: float
    central_width: float   # |x0 - f^(P/2)(x0)| for the cycle point x0 nearest the critical point


def tine_widths(family: MapFamily, param, n: int, order: Optional[str] = None,
                attractor=None) -> TineWidths:
    """Gaps between consecutive points of the stable ``2^(n-1)``-cycle at ``param``."""
    if n < 2:
        raise ValueError("n >= 2 (a fixed point has no widths)")
    att = attractor or classify_attractor(family, param)
    P = 2 ** (n - 1)
    if not isinstance(att, Periodic) or att.period != P:
        raise ValueError(f"expected a stable cycle of period {P}, found {_describe(att)}")
    if order is None:
        order = "ascending" if not math.isfinite(family.domain_at(param)[1]) else "descending"
    pts = sorted(att.cycle, reverse=(order == "descending"))
    widths = tuple(abs(b - a) for a, b in zip(pts, pts[1:]))
    r1, r2 = 2 ** (n - 2), 2 ** (n - 1)
    xc = principal_critical_point(family, param)
    cyc = att.cycle
    i0 = min(range(P), key=lambda i: abs(cyc[i] - xc))
    central = abs(cyc[i0] - cyc[(i0 + P // 2) % P])
    return TineWidths(n, tuple(pts), widths, (r1, r2), abs(pts[r2 - 1] - pts[r1 - 1]), central)


def width_ratio_table(lower: TineWidths, upper: TineWidths) -> np.ndarray:
    """Every level-n width divided by every level-(n+1) width."""
    return np.divide.outer(np.asarray(lower.widths), np.asarray(upper.widths))


# -- two-parameter directions and degree families ----------------------------------------

def directional_bifurcations(family2p: MapFamily, base, direction, N: int = 3, *,
                             t_range=(0.0, 2.0), precision: str = "auto"):
    """Cascade along ``base + t * direction``; returns (sequence, report or None)."""
    if len(family2p.params) != 2:
        raise ValueError("directional cascades need a two-parameter family")
    path = ParamPath(tuple(base), tuple(direction))
    seq = bifurcation_sequence(family2p, path, N, t_range=t_range, precision=precision)
    rep = delta_report(seq) if len(seq) >= 3 else None
    return seq, rep


def feigenvalue_for_degree(n_left: float, n_right: float, N: int = 7, *,
                           precision: str = "auto"):
    """Cascade of ``1 - mu |x|^n`` (degrees may differ on each side of 0)."""
    from .catalog import feigenmap
    fam = feigenmap(n_left, n_right)
    seq = bifurcation_sequence(fam, ParamPath.along(fam), N, t_range=(0.1, 2.0),
                               precision=precision)
    if len(seq) < 3:
        raise CascadeNotFound("cascade not found within mu in (0, 2]")
    return delta_report(seq)
