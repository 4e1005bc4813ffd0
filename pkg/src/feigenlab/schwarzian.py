"""Schwarzian derivative, its sign structure, and cascade-readiness checks.

``S f = f'''/f' - 1.5 (f''/f')**2`` is evaluated from the order-3 jet, so no
finite differencing is involved.  Near a critical point the Schwarzian has a
pole; the profile excludes a small ball around each one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import EVAL_ERRORS, DomainFault, bound, find_critical_points
from .family import MapFamily, ParamValues

POLE_RADIUS = 1e-6
REFINE_TOL = 1e-9
POLE_TOL = 1e-13


class SchwarzianPole(ArithmeticError):
    """Raised when ``f'`` vanishes (to rounding) at the evaluation point."""


def _schwarzian(jet) -> float:
    _, f1, f2, f3 = (float(v) for v in jet)
    if f1 == 0 or abs(f1) <= POLE_TOL * max(1.0, abs(f2), abs(f3)):
        raise SchwarzianPole(f"f' = {f1!r} at a critical point")
    r = f2 / f1
    return f3 / f1 - 1.5 * r * r


def schwarzian_at(family: MapFamily, params: ParamValues, x: float) -> float:
    """Schwarzian of the map at ``x``; raises :class:`SchwarzianPole` where ``f' = 0``."""
    bm = bound(family, params)
    return _schwarzian(bm.jet3(float(x)))


@dataclass(frozen=True)
class SignProfile:
    interval: tuple
    changes: tuple        # abscissas where S changes sign, increasing
    signs: tuple          # +1 / -1 per segment, len(changes) + 1
    poles: tuple = ()     # excluded critical points
    notes: tuple = ()

    def sign_at(self, x: float) -> int:
        k = int(np.searchsorted(self.changes, x))
        return self.signs[k]

    def positive_segments(self) -> list[tuple[float, float]]:
        edges = [self.interval[0], *self.changes, self.interval[1]]
        return [(edges[i], edges[i + 1]) for i, s in enumerate(self.signs) if s > 0]

    def count_in(self, lo: float, hi: float) -> int:
        return sum(1 for c in self.changes if lo < c < hi)


def _refine_change(S, x0: float, x1: float, s0: float) -> float:
    while x1 - x0 > REFINE_TOL * max(1.0, abs(x0)):
        xm = 0.5 * (x0 + x1)
        if xm in (x0, x1):
            break
        sm = S(xm)
        if sm == 0:
            return xm
        if math.copysign(1.0, sm) == s0:
            x0 = xm
        else:
            x1 = xm
    return 0.5 * (x0 + x1)


def _endpoint_note(S, x: float, inward: float, side: str, lo: float, hi: float):
    """Note divergence of S as the interval end is approached."""
    probes = []
    for d in (1e-2, 1e-4, 1e-6):
        xi = x + inward * d * max(1.0, abs(x))
        if not lo < xi < hi:
            continue
        try:
            probes.append(S(xi))
        except (SchwarzianPole, DomainFault):
            return None
    if len(probes) < 3 or not all(math.isfinite(p) for p in probes):
        return None
    growing = abs(probes[2]) > 10 * abs(probes[1]) and abs(probes[1]) > abs(probes[0])
    if growing and abs(probes[2]) > 1e3 and probes[1] * probes[2] > 0:
        sign = "+inf" if probes[2] > 0 else "-inf"
        return f"S tends to {sign} towards the {side} end ({x:.6g})"
    return None


def sign_profile(family: MapFamily, params: ParamValues, interval=None,
                 grid: int = 2000) -> SignProfile:
    """Sign changes of the Schwarzian on ``interval``, refined to 1e-9.

    Balls of radius 1e-6 around critical points are excluded; a sign flip
    across such a pole is counted as a change and noted.
    """
    bm = bound(family, params)
    lo, hi = (bm.lo, bm.hi) if interval is None else (float(interval[0]), float(interval[1]))
    if not math.isfinite(hi):
        raise ValueError("sign_profile needs a finite interval")
    if lo < bm.lo or hi > bm.hi or lo >= hi:
        raise ValueError(f"interval [{lo}, {hi}] not inside the domain [{bm.lo}, {bm.hi}]")

    def S(x):
        return _schwarzian(bm.jet3(x))

    poles = tuple(c.x for c in find_critical_points(family, params, (lo, hi)))
    xs = np.geomspace(lo, hi, grid + 1) if lo > 0 and hi / lo > 1e3 else np.linspace(lo, hi, grid + 1)
    pts, vals = [], []
    for x in xs:
        x = float(x)
        if any(abs(x - p) < POLE_RADIUS for p in poles):
            continue
        try:
            v = S(x)
        except SchwarzianPole:
            continue
        except EVAL_ERRORS as exc:
            raise DomainFault(f"jet fault at x={x!r}: {exc}") from None
        if v != 0 and math.isfinite(v):
            pts.append(x)
            vals.append(v)
    if not pts:
        raise DomainFault("Schwarzian undefined on the whole interval")

    changes, notes = [], []
    signs = [int(math.copysign(1, vals[0]))]
    for i in range(len(pts) - 1):
        s0, s1 = math.copysign(1, vals[i]), math.copysign(1, vals[i + 1])
        if s0 == s1:
            continue
        pole = next((p for p in poles if pts[i] < p < pts[i + 1]), None)
        if pole is not None:
            changes.append(pole)
            notes.append(f"sign flips across the pole at {pole:.9g}")
        else:
            changes.append(_refine_change(S, pts[i], pts[i + 1], s0))
        signs.append(int(s1))
    for x, inward, side in ((lo, 1.0, "left"), (hi, -1.0, "right")):
        note = _endpoint_note(S, x, inward, side, bm.lo, bm.hi)
        if note:
            notes.append(note)
    for p in poles:
        notes.append(f"pole at critical point {p:.9g} excluded")
    return SignProfile((lo, hi), tuple(changes), tuple(signs), poles, tuple(notes))


# --------------------------------------------------------------------------
# readiness
# --------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    ok: bool
    constrained: bool
    detail: str = ""


@dataclass
class ReadinessReport:
    maxima: list                      # (x, f(x), degree label) ascending in x
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    profile: SignProfile | None = None

    @property
    def verdict(self) -> str:
        if not all(c.ok for c in self.checks if c.constrained):
            return "fail"
        if self.notes or not all(c.ok for c in self.checks):
            return "pass-with-notes"
        return "pass"

    def check(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


def _degree_label(cp) -> str:
    if cp.degree >= 8:
        return ">=8"
    if not cp.integer_degree:
        return f"~{cp.degree_estimate:.2f}"
    return str(cp.degree)


def check_bifurcation_readiness(family: MapFamily, params: ParamValues,
                                grid: int = 2000) -> ReadinessReport:
    """Evaluate the relaxed single- and several-maxima conditions.

    Conditions are sufficient, never necessary: a failing verdict does not
    claim the family cannot cascade.
    """
    bm = bound(family, params)
    lo, hi = bm.lo, bm.hi
    if not math.isfinite(hi):
        raise ValueError("readiness needs a finite domain")
    cps = find_critical_points(family, params)
    maxima = [c for c in cps if c.kind == "maximum"]
    if not maxima:
        raise DomainFault(f"{family.label}: no maximum found")
    pad = 1e-9 * bm.scale
    prof = sign_profile(family, params, (lo + pad, hi - pad), grid)
    rep = ReadinessReport([(c.x, c.value, _degree_label(c)) for c in maxima], profile=prof)

    f0, f1 = _end_value(bm, lo, 1.0), _end_value(bm, hi, -1.0)
    zero_ends = abs(f0) < 1e-9 and abs(f1) < 1e-9
    rep.checks.append(Check("endpoints", zero_ends or f0 > f1, True,
                            f"f(lo)={f0:.6g}, f(hi)={f1:.6g}"))

    top = maxima[-1]
    worst = max(c.value for c in maxima)
    rep.checks.append(Check("dominance", all(c.value <= top.value + 1e-12 for c in maxima[:-1]),
                            True, f"f(x_n)={top.value:.6g}, max={worst:.6g}"))

    x1, xn = maxima[0].x, top.x
    inner = prof.count_in(x1, xn)
    inner_pos = any(a < xn and b > x1 for a, b in prof.positive_segments())
    rep.checks.append(Check("negative on [x1, xn]", inner == 0 and not inner_pos, True,
                            f"{inner} sign changes"))
    right = prof.count_in(xn, hi)
    rep.checks.append(Check("at most one change in ]xn, hi]", right <= 1, True,
                            f"{right} sign changes"))
    left = prof.count_in(lo, x1)
    if len(maxima) == 1:
        # one maximum: at most one change on each side
        rep.checks.append(Check("at most one change in [lo, x1[", left <= 1, True,
                                f"{left} sign changes"))
    else:
        rep.checks.append(Check("changes in ]lo, x1[", True, False, f"{left} sign changes"))
        left_pos = [s for s in prof.positive_segments() if s[0] < x1]
        if left_pos:
            a, b = left_pos[0]
            rep.notes.append(f"Schwarzian positive on ]{a:.6g}, {b:.6g}[ inside ]lo, x1[ "
                             "(allowed with several maxima)")
    for c in maxima:
        if _degree_label(c) != "2":
            rep.notes.append(f"maximum at {c.x:.6g} has degree {_degree_label(c)}, not quadratic")
    for n in prof.notes:
        if n.startswith("S tends"):
            rep.notes.append(n)
    if prof.positive_segments() and len(maxima) == 1 and all(c.ok for c in rep.checks):
        rep.notes.append("Schwarzian positive near the interval ends")
    return rep


def _end_value(bm, x: float, inward: float) -> float:
    try:
        return float(bm._f(x, bm.a, bm.b))
    except EVAL_ERRORS:
        return float(bm._f(x + inward * 1e-12 * bm.scale, bm.a, bm.b))
