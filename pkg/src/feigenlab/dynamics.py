"""Orbits and long-run behaviour at fixed parameter values."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .family import MapFamily, ParamValues
from .jets import DD, EVAL_ERRORS, OVERFLOW_GUARD, DomainFault

# classification budget defaults
TRANSIENT = 100_000
MAX_POW2 = 12                 # periods 1, 2, 4, ..., 2**12 are tried first
LYAP_STEPS = 100_000
LYAP_EPS = 1e-3
LYAP_FLOOR = -745.0           # ln of the smallest subnormal double
INTERIOR = 1e-12
STABLE_SLACK = 1e-9
CANDIDATE_TOL = 1e-7          # loose periodicity test before Newton confirmation
SEMI_LINE_SEARCH = 1e6
MAX_KINK_CELLS = 3            # grid faults bridged when looking for an extremum


class Escape(Exception):
    def __init__(self, step: int, last_x: float, reason: str = "left domain"):
        self.step = step
        self.last_x = last_x
        self.reason = reason
        super().__init__(f"{reason} at step {step} (x={last_x!r})")


class NoConvergence(ArithmeticError):
    pass


# --------------------------------------------------------------------------
# attractor types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Periodic:
    period: int
    cycle: tuple[float, ...]      # dynamical order, cycle[i+1] = f(cycle[i])
    multiplier: float
    kind: str = field(default="periodic", init=False)

    @property
    def orbit(self) -> list[float]:
        return sorted(self.cycle)


@dataclass(frozen=True)
class Chaotic:
    lyapunov: float
    extent: tuple[float, float]   # range of the sampled attractor
    kind: str = field(default="chaotic", init=False)


@dataclass(frozen=True)
class Escaped:
    step: int
    last_x: float
    kind: str = field(default="escaped", init=False)


@dataclass(frozen=True)
class Unresolved:
    reason: str
    kind: str = field(default="unresolved", init=False)


Attractor = Union[Periodic, Chaotic, Escaped, Unresolved]


@dataclass(frozen=True)
class CriticalPoint:
    x: float
    kind: str            # 'maximum' | 'minimum'
    degree: int
    value: float
    degree_estimate: float = 0.0

    @property
    def integer_degree(self) -> bool:
        return abs(self.degree_estimate - round(self.degree_estimate)) < 0.05


# --------------------------------------------------------------------------
# bound map: one family at one parameter value
# --------------------------------------------------------------------------

class BoundMap:
    """A family with parameters fixed, exposing fast scalar primitives."""

    def __init__(self, family: MapFamily, params: ParamValues, precision: str = "double"):
        self.family = family
        self.params = params
        self.precision = precision
        c = family.backend(precision)
        self._f, self._jet1, self._jet3 = c.f, c.jet1, c.jet3
        a, b = family.bind(params)
        self.lo, self.hi = family.domain_at(params)
        if precision == "dd":
            a, b = DD.mpf(a), DD.mpf(b)
            self.eps = 2.0 ** -104
        else:
            self.eps = 2.0 ** -52
        self.a, self.b = a, b
        finite = [abs(v) for v in (self.lo, self.hi) if math.isfinite(v)]
        self.scale = max([1.0] + finite)
        self.slack = 1e-12 * self.scale

    def num(self, x):
        return DD.mpf(x) if self.precision == "dd" else float(x)

    def inside(self, x) -> bool:
        return self.lo - self.slack <= x <= self.hi + self.slack and abs(x) <= OVERFLOW_GUARD

    def interior(self, x):
        """Clamp into the open domain."""
        pad = INTERIOR * self.scale
        if x <= self.lo + pad:
            return self.lo + pad
        if math.isfinite(self.hi) and x >= self.hi - pad:
            return self.hi - pad
        return x

    def f(self, x):
        try:
            y = self._f(x, self.a, self.b)
        except EVAL_ERRORS as exc:
            raise DomainFault(str(exc)) from None
        if not self.inside(y):
            raise DomainFault(f"image {y!r} outside domain")
        return y

    def jet1(self, x):
        try:
            return self._jet1(x, self.a, self.b)
        except EVAL_ERRORS as exc:
            raise DomainFault(str(exc)) from None

    def jet3(self, x):
        try:
            return self._jet3(x, self.a, self.b)
        except EVAL_ERRORS as exc:
            raise DomainFault(str(exc)) from None

    def iterate(self, x, n: int, store: bool = False):
        """Apply the map ``n`` times; raise :class:`Escape` on leaving the domain."""
        f, a, b = self._f, self.a, self.b
        lo, hi = self.lo - self.slack, self.hi + self.slack
        out = [] if store else None
        i = 0
        try:
            for i in range(n):
                x = f(x, a, b)
                if not (lo <= x <= hi) or x > OVERFLOW_GUARD or x < -OVERFLOW_GUARD:
                    raise Escape(i + 1, float(x))
                if store:
                    out.append(x)
        except EVAL_ERRORS:
            raise Escape(i + 1, float(x), "evaluation fault") from None
        return (x, out) if store else x

    def cycle(self, x, p: int) -> list:
        pts = [x]
        for _ in range(p - 1):
            x = self.f(x)
            pts.append(x)
        return pts

    def map_power(self, x, p: int):
        """``(f^p(x), (f^p)'(x))`` by the chain rule along the orbit."""
        jet1 = self._jet1
        a, b = self.a, self.b
        m = 1.0
        y = x
        try:
            for _ in range(p):
                y, d = jet1(y, a, b)
                m *= d
        except EVAL_ERRORS as exc:
            raise DomainFault(str(exc)) from None
        if not (math.isfinite(y) and math.isfinite(m)):
            raise DomainFault("non-finite iterate")
        return y, m

    def multiplier(self, cycle: Sequence) -> float:
        m = 1.0
        for x in cycle:
            m *= self.jet1(x)[1]
        return m

    def cycle_newton(self, x, p: int, maxiter: int = 60, tol=None):
        """Polish ``x`` onto a root of ``f^p(x) - x``; returns ``(x, multiplier)``."""
        tol = tol if tol is not None else 8 * self.eps
        x = self.num(x)
        prev = math.inf
        for _ in range(maxiter):
            try:
                y, m = self.map_power(x, p)
            except DomainFault:
                raise NoConvergence("orbit left the domain") from None
            g = y - x
            dg = m - 1
            if g == 0:
                return x, m
            if dg == 0:
                raise NoConvergence("singular Newton step")
            step = g / dg
            xn = x - step
            damp = 0
            while not self.inside(xn) and damp < 30:
                step /= 2
                xn = x - step
                damp += 1
            if damp == 30:
                raise NoConvergence("Newton step leaves domain")
            x = xn
            size = abs(step)
            scale = max(1.0, abs(x))
            # stop at tolerance, or once rounding noise stalls the iteration
            # rounding in g is amplified by 1/|m - 1| near a tangency
            floor = max(1e-9 * scale, 64 * self.eps * scale / abs(dg))
            stalled = size <= floor and size >= 0.5 * prev and abs(g) <= 1e-10 * scale
            if size <= tol * scale or stalled:
                y, m = self.map_power(x, p)
                return x, m
            prev = size
        raise NoConvergence(f"no convergence after {maxiter} Newton steps")

    def periodic(self, x, p: int) -> Periodic:
        pts = self.cycle(x, p)
        return Periodic(p, tuple(pts), self.multiplier(pts))

    def closure(self, cycle: Sequence) -> float:
        p = len(cycle)
        return max(abs(self.f(cycle[i]) - cycle[(i + 1) % p]) for i in range(p))


def bound(family: MapFamily, params: ParamValues, precision: str = "double") -> BoundMap:
    return BoundMap(family, params, precision)


# --------------------------------------------------------------------------
# critical points
# --------------------------------------------------------------------------

def _search_interval(bm: BoundMap, interval):
    if interval is not None:
        lo, hi = interval
    else:
        lo, hi = bm.lo, bm.hi
    if not math.isfinite(hi):
        hi = max(lo, 1.0) * SEMI_LINE_SEARCH
    return float(lo), float(hi)


def _grid(lo: float, hi: float, cells: int) -> np.ndarray:
    if lo > 0 and hi / lo > 1e3:
        return np.geomspace(lo, hi, cells + 1)
    return np.linspace(lo, hi, cells + 1)


def _estimate_degree(bm: BoundMap, x: float, f2: float, f3: float) -> tuple[int, float]:
    span = bm.scale if math.isfinite(bm.hi) else max(1.0, abs(x))
    fscale = abs(float(bm._f(x, bm.a, bm.b))) + 1.0
    if abs(f2) * span ** 2 > 1e-6 * fscale:
        return 2, 2.0
    if abs(f3) * span ** 3 > 1e-6 * fscale:
        return 3, 3.0
    # finite-difference probe: |f(x+h)-f(x)| ~ h^d
    f0 = bm._f(x, bm.a, bm.b)
    h = 1e-2 * span
    ests = []
    for sgn in (1, -1):
        try:
            d1 = abs(bm._f(x + sgn * h, bm.a, bm.b) - f0)
            d2 = abs(bm._f(x + sgn * h / 2, bm.a, bm.b) - f0)
        except EVAL_ERRORS:
            continue
        if d1 > 0 and d2 > 0:
            ests.append(math.log(d1 / d2, 2))
    if not ests:
        return 8, 8.0
    est = min(ests)
    return min(8, max(2, int(round(est)))), est


def find_critical_points(family: MapFamily, params: ParamValues, interval=None,
                         grid: int = 4096) -> list[CriticalPoint]:
    """Interior extrema of ``f``: sign changes of ``f'`` refined by bisection."""
    bm = bound(family, params)
    lo, hi = _search_interval(bm, interval)
    xs = _grid(lo, hi, grid)
    pad = INTERIOR * bm.scale
    xs[0] = max(xs[0], bm.lo + pad)
    if math.isfinite(bm.hi):
        xs[-1] = min(xs[-1], bm.hi - pad)
    d = np.empty_like(xs)
    for i, x in enumerate(xs):
        try:
            d[i] = bm.jet1(float(x))[1]
        except DomainFault:
            d[i] = np.nan
    sign = np.sign(d)
    out: list[CriticalPoint] = []
    i = 0
    n = len(xs)
    while i < n - 1:
        s0 = sign[i]
        if not np.isfinite(d[i]) or s0 == 0:
            i += 1
            continue
        # skip zeros and isolated faults (a kink such as |x|^2.5 at 0)
        j = i + 1
        while j < n and (sign[j] == 0 or (not np.isfinite(d[j]) and j - i <= MAX_KINK_CELLS)):
            j += 1
        if j >= n or not np.isfinite(d[j]):
            i = j
            continue
        if sign[j] != s0:
            holes = [k for k in range(i + 1, j) if not np.isfinite(d[k])]
            if holes:
                xc = float(xs[holes[len(holes) // 2]])
            elif j > i + 1:
                xc = float(xs[(i + j) // 2]) if (j - i) % 2 == 0 else float(xs[i + 1])
            else:
                xc = _bisect_derivative(bm, float(xs[i]), float(xs[j]), s0)
            out.append(_critical_point(bm, xc, "maximum" if s0 > 0 else "minimum"))
        i = j
    return out


def _critical_point(bm: BoundMap, xc: float, kind: str) -> CriticalPoint:
    try:
        jet = bm.jet3(xc)
        value, f2, f3 = float(jet[0]), jet[2], jet[3]
    except DomainFault:
        # no finite jet at the extremum: degree from the value probe alone
        value, f2, f3 = float(bm._f(xc, bm.a, bm.b)), 0.0, 0.0
    deg, est = _estimate_degree(bm, xc, f2, f3)
    return CriticalPoint(xc, kind, deg, value, est)


def _bisect_derivative(bm: BoundMap, x0: float, x1: float, s0: float) -> float:
    for _ in range(200):
        xm = 0.5 * (x0 + x1)
        if x1 - x0 <= 1e-12 * max(1.0, abs(xm)) or xm in (x0, x1):
            break
        dm = bm.jet1(xm)[1]
        if dm == 0:
            return xm
        if np.sign(dm) == s0:
            x0 = xm
        else:
            x1 = xm
    return 0.5 * (x0 + x1)


def principal_critical_point(family: MapFamily, params: ParamValues, near=None) -> float:
    """The critical point whose orbit carries the cascade.

    A pinned ``family.critical`` wins; otherwise the highest maximum, or the
    lowest minimum when the map has no maximum.
    """
    if family.critical is not None:
        return family.critical
    if near is not None:
        x = _polish_critical(family, params, near)
        if x is not None:
            return x
    pts = find_critical_points(family, params)
    if not pts:
        raise DomainFault(f"{family.label}: no critical point found")
    maxima = [p for p in pts if p.kind == "maximum"]
    if maxima:
        return max(maxima, key=lambda p: p.value).x
    return min(pts, key=lambda p: p.value).x


def _polish_critical(family, params, x0):
    bm = bound(family, params)
    x = x0
    try:
        for _ in range(40):
            _, f1, f2, _ = bm.jet3(x)
            if f2 == 0:
                return None
            step = f1 / f2
            x = x - step
            if not bm.inside(x):
                return None
            if abs(step) < 1e-14 * max(1.0, abs(x)):
                return x
    except DomainFault:
        return None
    return None


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

def _candidate_periods(block: np.ndarray, tol: float, max_period: int) -> list[int]:
    """Periods p (ascending) with |x_{i+p} - x_i| < tol over the block tail."""
    n = len(block)
    found = []
    powers = [1 << k for k in range(MAX_POW2 + 1) if (1 << k) <= min(max_period, n // 2)]
    for p in powers:
        w = block[-2 * p:]
        if np.max(np.abs(w[p:] - w[:-p])) < tol:
            found.append(p)
            break
    # general periods (odd windows)
    last = block[-1]
    limit = min(max_period, n // 2)
    diffs = np.abs(last - block[-1 - np.arange(1, limit + 1)])
    for p in np.nonzero(diffs < tol)[0] + 1:
        p = int(p)
        if found and p >= found[0]:
            break
        w = block[-2 * p:]
        if np.max(np.abs(w[p:] - w[:-p])) < tol:
            found.append(p)
            break
    return sorted(found)


def _minimal_period(bm: BoundMap, x, p: int, tol: float) -> int:
    for q in sorted({q for q in range(1, p) if p % q == 0}):
        try:
            y = bm.iterate(x, q)
        except Escape:
            continue
        if abs(y - x) <= tol:
            return q
    return p


def _confirm_cycle(bm: BoundMap, x, p: int):
    """Newton-polish a candidate period; returns a Periodic or None."""
    try:
        xs, m = bm.cycle_newton(x, p)
    except NoConvergence:
        return None
    tol = 1e-9 * max(1.0, abs(xs))
    q = _minimal_period(bm, xs, p, tol)
    if q != p:
        p = q
        try:
            xs, m = bm.cycle_newton(xs, p)
        except NoConvergence:
            return None
    try:
        orb = bm.periodic(xs, p)
    except DomainFault:
        return None
    if abs(orb.multiplier) <= 1 + STABLE_SLACK:
        return orb
    if orb.multiplier < -1:
        return _descend_flip(bm, xs, p)
    return None


def _descend_flip(bm: BoundMap, xs, p: int, depth: int = 4):
    """From a flip-unstable p-cycle point, look for the nearby 2p-cycle."""
    for _ in range(depth):
        x2 = flip_partner(bm, xs, p)
        if x2 is None:
            return None
        try:
            orb = bm.periodic(x2, 2 * p)
        except DomainFault:
            return None
        if abs(orb.multiplier) <= 1 + STABLE_SLACK:
            return orb
        if orb.multiplier > -1:
            return None
        xs, p = x2, 2 * p
    return None


def flip_partner(bm: BoundMap, xs, p: int, max_width=None):
    """A point of the 2p-cycle born from the p-cycle through ``xs``.

    ``g(x) = f^{2p}(x) - x`` vanishes at ``xs`` with slope ``m^2 - 1 > 0``; the
    doubled cycle is the next sign change of ``g`` on either side.
    """
    span = (bm.hi - bm.lo) if math.isfinite(bm.hi) else max(1.0, abs(xs))
    max_width = max_width or 0.5 * span
    w = max(1e-9 * span, 64 * bm.eps * max(1.0, abs(xs)))
    while w <= max_width:
        for sgn in (1, -1):
            x = xs + sgn * w
            if not bm.inside(x):
                continue
            try:
                y, _ = bm.map_power(x, 2 * p)
            except DomainFault:
                continue
            if sgn * (y - x) < 0:
                root = _bisect_root(lambda z: bm.map_power(z, 2 * p)[0] - z,
                                    xs + sgn * w / 4, x)
                if root is None:
                    continue
                try:
                    r, _ = bm.cycle_newton(root, 2 * p)
                except NoConvergence:
                    r = root
                if abs(r - xs) > 4 * bm.eps * max(1.0, abs(xs)) * 1e3:
                    return r
        w *= 2
    return None


def _bisect_root(g, x0, x1, iters: int = 200):
    try:
        g0, g1 = g(x0), g(x1)
    except DomainFault:
        return None
    if g0 == 0:
        return x0
    if (g0 > 0) == (g1 > 0):
        return None
    for _ in range(iters):
        xm = (x0 + x1) / 2
        if xm in (x0, x1):
            break
        gm = g(xm)
        if gm == 0:
            return xm
        if (gm > 0) == (g0 > 0):
            x0, g0 = xm, gm
        else:
            x1 = xm
    return (x0 + x1) / 2


def classify_attractor(family: MapFamily, params: ParamValues, seed=None, *,
                       transient: int = TRANSIENT, max_pow2: int = MAX_POW2,
                       lyap_steps: int = LYAP_STEPS, precision: str = "double") -> Attractor:
    """Long-run behaviour of the orbit of ``seed`` (default: principal critical point)."""
    bm = bound(family, params, precision)
    if seed is None:
        try:
            seed = principal_critical_point(family, params)
        except DomainFault as exc:
            return Unresolved(f"no seed: {exc}")
    x = bm.interior(bm.num(seed))
    block = 1 << max_pow2
    done = 0
    chunk = 256
    tol = CANDIDATE_TOL * bm.scale
    try:
        while done < transient:
            n = min(chunk, transient - done)
            x, pts = bm.iterate(x, n, store=True)
            done += n
            arr = np.asarray(pts, dtype=float)
            for p in _candidate_periods(arr, tol, block):
                orb = _confirm_cycle(bm, x, p)
                if orb is not None:
                    return orb
            chunk = min(block * 2, chunk * 2)
        lam, _, extent = _lyapunov(bm, x, lyap_steps)
    except Escape as esc:
        return Escaped(done + esc.step, esc.last_x)
    except DomainFault as exc:
        return Unresolved(f"derivative fault: {exc}")
    if lam > LYAP_EPS:
        return Chaotic(lam, extent)
    return Unresolved(f"no cycle up to period {block} and Lyapunov estimate {lam:.3g}")


# --------------------------------------------------------------------------
# Lyapunov exponent, geometric mean
# --------------------------------------------------------------------------

def _lyapunov(bm: BoundMap, x, n: int):
    jet1 = bm._jet1
    a, b = bm.a, bm.b
    lo, hi = bm.lo - bm.slack, bm.hi + bm.slack
    total = 0.0
    skips = 0
    xmin = xmax = float(x)
    log = math.log
    i = 0
    try:
        for i in range(n):
            y, d = jet1(x, a, b)
            if d == 0:
                skips += 1
            else:
                total += log(abs(d))
            x = y
            if not lo <= x <= hi:
                raise Escape(i + 1, float(x))
            if x < xmin:
                xmin = float(x)
            elif x > xmax:
                xmax = float(x)
    except EVAL_ERRORS:
        raise Escape(i + 1, float(x), "evaluation fault") from None
    used = n - skips
    if used < n / 2:
        return LYAP_FLOOR, skips, (xmin, xmax)
    return max(total / used, LYAP_FLOOR), skips, (xmin, xmax)


def lyapunov_estimate(family: MapFamily, params: ParamValues, seed: float,
                      n: int = LYAP_STEPS, *, transient: int = 1000,
                      with_skips: bool = False):
    """Mean of ``ln|f'|`` along the orbit of ``seed`` after ``transient`` steps.

    Exact zeros of ``f'`` are skipped and counted; an orbit sitting on a
    critical point (superstable) reports the clamp value ``LYAP_FLOOR``.
    """
    if n < 10_000:
        raise ValueError("n must be at least 1e4")
    bm = bound(family, params)
    x = bm.iterate(bm.interior(float(seed)), transient)
    lam, skips, _ = _lyapunov(bm, x, n)
    return (lam, skips) if with_skips else lam


def geometric_mean(orbit: Sequence[float]) -> float:
    """``exp(mean(ln x_i))`` for positive points."""
    if len(orbit) == 0:
        raise ValueError("empty orbit")
    if any(x <= 0 for x in orbit):
        raise ValueError("geometric mean needs positive points")
    return math.exp(math.fsum(math.log(x) for x in orbit) / len(orbit))


# --------------------------------------------------------------------------
# local attractor scan
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanCell:
    lo: float
    hi: float
    attractor: Attractor

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _label(a: Attractor):
    return a.period if isinstance(a, Periodic) else a.kind


def attractor_extent(a: Attractor):
    if isinstance(a, Periodic):
        return min(a.cycle), max(a.cycle)
    if isinstance(a, Chaotic):
        return a.extent
    return None


@dataclass(frozen=True)
class LocalScanReport:
    cells: tuple[ScanCell, ...]
    range_: tuple = (-math.inf, math.inf)

    def pattern(self) -> list:
        """Attractor labels of the merged seed cells, left to right."""
        return [_label(c.attractor) for c in self.cells]

    def located(self) -> list[tuple[tuple[float, float], Attractor]]:
        """Distinct attractors lying inside the scanned range, ordered by position."""
        lo, hi = self.range_
        found: list[Attractor] = []
        for c in self.cells:
            ext = attractor_extent(c.attractor)
            if ext is None or ext[0] < lo or ext[1] > hi:
                continue
            if not any(same_attractor(c.attractor, f) for f in found):
                found.append(c.attractor)
        out = [(attractor_extent(a), a) for a in found]
        out.sort(key=lambda e: (e[0][0], e[0][1]))
        return out

    def located_pattern(self) -> list:
        return [_label(a) for _, a in self.located()]


def same_attractor(u: Attractor, v: Attractor, tol: float = 1e-6) -> bool:
    if isinstance(u, Periodic) and isinstance(v, Periodic):
        if u.period != v.period:
            return False
        ou, ov = u.orbit, v.orbit
        return max(abs(p - q) for p, q in zip(ou, ov)) <= tol * max(1.0, max(map(abs, ou)))
    if isinstance(u, Chaotic) and isinstance(v, Chaotic):
        # same chaotic band when the sampled extents overlap substantially
        lo = max(u.extent[0], v.extent[0])
        hi = min(u.extent[1], v.extent[1])
        wu = u.extent[1] - u.extent[0]
        wv = v.extent[1] - v.extent[0]
        return hi - lo >= 0.5 * min(wu, wv)
    if isinstance(u, Escaped) and isinstance(v, Escaped):
        return True
    return False


def scan_local_attractors(family: MapFamily, params: ParamValues, range_: tuple[float, float],
                          cell: float, *, workers: int = 1, **classify_kw) -> LocalScanReport:
    """Classify one seed per cell midpoint and merge neighbours with equal attractors."""
    lo, hi = range_
    n = max(1, int(round((hi - lo) / cell)))
    edges = [lo + (hi - lo) * i / n for i in range(n + 1)]
    mids = [(edges[i] + edges[i + 1]) / 2 for i in range(n)]
    kw = dict(transient=20_000, **classify_kw)

    def job(x):
        return classify_attractor(family, params, seed=x, **kw)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(job, mids))
    else:
        results = [job(x) for x in mids]
    cells: list[ScanCell] = []
    for i, att in enumerate(results):
        if cells and same_attractor(cells[-1].attractor, att):
            prev = cells[-1]
            cells[-1] = ScanCell(prev.lo, edges[i + 1], prev.attractor)
        else:
            cells.append(ScanCell(edges[i], edges[i + 1], att))
    return LocalScanReport(tuple(cells), (lo, hi))
