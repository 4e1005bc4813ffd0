"""Parameterised map families and the transforms between them."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Sequence, Union

from . import expr as E
from .expr import Expression, ExprError, parse, symbols, to_source
from .jets import EVAL_ERRORS, OVERFLOW_GUARD, Compiled, DomainFault, Jet3

INCREASING = 1
DECREASING = -1

Bound = Union[float, Expression]
ParamValues = Union[float, Sequence[float], Mapping[str, float]]


class FamilyError(ExprError):
    """Ill-formed family (no parameters, bad domain, incompatible transform)."""


def _orientation(value) -> int:
    if value in (INCREASING, "increasing", "inc", "+", "+1"):
        return INCREASING
    if value in (DECREASING, "decreasing", "dec", "-", "-1"):
        return DECREASING
    raise FamilyError(f"unknown orientation {value!r}")


def parse_interval(text: str) -> tuple[float, float]:
    """``"0:1"`` or ``"1:inf"`` -> (lo, hi)."""
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise FamilyError(f"bad interval {text!r}, expected lo:hi") from None
    return lo, hi


@dataclass(frozen=True, eq=False)
class MapFamily:
    """An expression in ``x`` and parameters, on a domain, with a cascade direction.

    Domain bounds are floats or parameter-only expressions (an interval that
    moves with the parameter, as for ``F(a x)``).  ``cascade`` optionally
    records a parameter range ``(start, stop)`` along which a period-doubling
    cascade is searched; ``critical`` optionally pins the principal critical
    point used to seed orbits.
    """

    expression: Expression
    params: tuple[str, ...]
    domain: tuple[Bound, Bound]
    orientation: int = INCREASING
    name: str = ""
    cascade: tuple[float, float] | None = None
    critical: float | None = None
    note: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "orientation", _orientation(self.orientation))
        extra = symbols(self.expression) - {"x"} - set(self.params)
        if extra:
            raise FamilyError(f"expression references undeclared names {sorted(extra)}")
        for p in self.params:
            if p not in E.PARAMETERS:
                raise FamilyError(f"unknown parameter {p!r}")
        lo, hi = self.domain
        if not isinstance(lo, (int, float)) or not isinstance(hi, (int, float)):
            return
        if math.isnan(lo) or math.isnan(hi) or not lo < hi:
            raise FamilyError(f"empty domain [{lo}, {hi}]")
        if math.isinf(lo):
            raise FamilyError("domain must have a finite lower bound")
        if math.isinf(hi) and lo < 0:
            raise FamilyError("semi-line domains need lo >= 0")

    # -- evaluation ------------------------------------------------------
    @cached_property
    def compiled(self) -> Compiled:
        return Compiled(self.expression, "double")

    @cached_property
    def compiled_dd(self) -> Compiled:
        return Compiled(self.expression, "dd")

    def backend(self, precision: str = "double") -> Compiled:
        return self.compiled if precision == "double" else self.compiled_dd

    @property
    def source(self) -> str:
        return to_source(self.expression)

    def bind(self, params: ParamValues) -> tuple[float, float]:
        """Normalise parameter values to the ``(a, b)`` pair compiled code expects."""
        if isinstance(params, Mapping):
            missing = [p for p in self.params if p not in params]
            if missing:
                raise FamilyError(f"unbound parameters {missing}")
            return (params.get("a", 0.0), params.get("b", 0.0))
        if isinstance(params, (int, float)) or hasattr(params, "_mpf_"):
            if len(self.params) != 1:
                raise FamilyError(f"family needs {len(self.params)} parameter values")
            return (params, 0.0) if self.params[0] == "a" else (0.0, params)
        vals = tuple(params)
        if len(vals) != len(self.params):
            raise FamilyError(f"family needs {len(self.params)} parameter values")
        d = dict(zip(self.params, vals))
        return (d.get("a", 0.0), d.get("b", 0.0))

    @cached_property
    def _bounds(self):
        return tuple(float(b) if isinstance(b, (int, float)) else Compiled(b).f
                     for b in self.domain)

    @property
    def moving_domain(self) -> bool:
        return any(callable(b) for b in self._bounds)

    def domain_at(self, params: ParamValues) -> tuple[float, float]:
        lo, hi = self._bounds
        if self.moving_domain:
            a, b = self.bind(params)
            lo = float(lo(0.0, a, b)) if callable(lo) else lo
            hi = float(hi(0.0, a, b)) if callable(hi) else hi
        if lo > hi:
            lo, hi = hi, lo
        return lo, hi

    def __call__(self, params: ParamValues, x: float) -> float:
        a, b = self.bind(params)
        try:
            y = self.compiled.f(x, a, b)
        except EVAL_ERRORS as exc:
            raise DomainFault(f"{self.label}: cannot evaluate at x={x!r}: {exc}") from None
        if not math.isfinite(y) or abs(y) > OVERFLOW_GUARD:
            raise DomainFault(f"{self.label}: non-finite value at x={x!r}")
        return y

    @property
    def label(self) -> str:
        return self.name or self.source

    def with_(self, **changes) -> "MapFamily":
        return replace(self, **changes)

    def __repr__(self):
        lo, hi = self.domain
        return (f"MapFamily({self.label!r}, params={self.params}, "
                f"domain=[{_fmt_bound(lo)}, {_fmt_bound(hi)}], "
                f"orientation={'increasing' if self.orientation > 0 else 'decreasing'})")


def _fmt_bound(b: Bound) -> str:
    return repr(b) if isinstance(b, (int, float)) else to_source(b)


def eval_jet(family: MapFamily, params: ParamValues, x: float, order: int = 3) -> Jet3:
    """Value and exact x-derivatives up to ``order`` (higher entries are zero)."""
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be 0..3")
    lo, hi = family.domain_at(params)
    if not lo <= x <= hi:
        raise DomainFault(f"x={x!r} outside domain [{lo}, {hi}]")
    a, b = family.bind(params)
    c = family.compiled
    try:
        if order == 0:
            vals = (c.f(x, a, b),)
        elif order == 1:
            vals = c.jet1(x, a, b)
        else:
            vals = c.jet3(x, a, b)
    except EVAL_ERRORS as exc:
        raise DomainFault(f"{family.label}: cannot differentiate at x={x!r}: {exc}") from None
    if order == 2:
        vals = vals[:3]
    for v in vals:
        if not math.isfinite(v) or abs(v) > OVERFLOW_GUARD:
            raise DomainFault(f"{family.label}: non-finite jet at x={x!r}")
    return Jet3(*vals)


def _detect_params(node: Expression) -> tuple[str, ...]:
    return tuple(p for p in E.PARAMETERS if p in symbols(node))


def parse_family(text: str, domain=(0.0, 1.0), orientation="increasing",
                 name: str = "") -> MapFamily:
    """Parse DSL source into a family; parameters are detected from ``a``/``b``."""
    node = parse(text)
    params = _detect_params(node)
    if not params:
        raise FamilyError("expression has no parameter (use a and/or b)")
    if isinstance(domain, str):
        domain = parse_interval(domain)
    return MapFamily(node, params, tuple(domain), orientation, name=name)


def parse_map(text: str, domain=(0.0, 1.0)) -> MapFamily:
    """A parameter-free base map ``F(x)``, the input of most transforms."""
    node = parse(text)
    if isinstance(domain, str):
        domain = parse_interval(domain)
    return MapFamily(node, _detect_params(node), tuple(domain))


# --------------------------------------------------------------------------
# transforms
# --------------------------------------------------------------------------

class TransformKind(str, enum.Enum):
    OUTER_SCALE = "outer_scale"          # a*F(x)
    INNER_SCALE = "inner_scale"          # F(a*x)
    OUTER_SHIFT = "outer_shift"          # F(x)+a
    INNER_SHIFT = "inner_shift"          # F(x+a)
    OUTER_POW = "outer_pow"              # F(x)^a
    INNER_POW = "inner_pow"              # F(x^a)
    EXP_OUTER = "exp_outer"              # c^(-a*F(x))
    EXP_INNER = "exp_inner"              # c^(-F(x^a))
    ONE_MINUS_OUTER = "one_minus_outer"  # (1-F(x))^a
    ONE_MINUS_INNER = "one_minus_inner"  # 1-F(x^a)
    RECIPROCAL_CONJUGATE = "reciprocal_conjugate"  # 1/F(1/x)
    LOG_RATIO_1 = "log_ratio_1"          # -ln(a f)/ln(g)^2
    LOG_RATIO_2 = "log_ratio_2"          # -ln(f)/ln(a g)^2
    LOG_RATIO_3 = "log_ratio_3"          # as 1, f has a minimum with f(0)=f(1)=1
    LOG_RATIO_4 = "log_ratio_4"          # as 2, f has a minimum with f(0)=f(1)=1
    THETA_REPARAM = "theta_reparam"      # a <- theta(a)


# conjugating substitutions x -> phi(x) that move the parameter inside
_PERMEABLE_TWIN = {
    TransformKind.OUTER_SCALE: TransformKind.INNER_SCALE,
    TransformKind.OUTER_SHIFT: TransformKind.INNER_SHIFT,
    TransformKind.OUTER_POW: TransformKind.INNER_POW,
    TransformKind.EXP_OUTER: TransformKind.EXP_INNER,
    TransformKind.ONE_MINUS_OUTER: TransformKind.ONE_MINUS_INNER,
}
PERMEABLE_TWIN = {**_PERMEABLE_TWIN, **{v: k for k, v in _PERMEABLE_TWIN.items()}}


def _as_expr(v) -> Expression:
    if isinstance(v, str):
        return parse(v)
    if isinstance(v, (int, float)):
        return E.const(v)
    return v


def _is_unit_interval(lo, hi) -> bool:
    return lo == 0.0 and hi == 1.0


def transform(family: MapFamily, kind, *, c=None, g=None, theta=None,
              name: str = "") -> MapFamily:
    """Rewrite ``family`` (``F``) according to ``kind``.

    ``c`` is the base of the exponential pair (``c > 1``), ``g`` the second
    map of the log-ratio forms, ``theta`` an expression in ``a`` for
    re-parameterisation.
    """
    kind = TransformKind(kind)
    F = family.expression
    lo, hi = family.domain
    x, a = E.X, E.A
    at = lambda arg: E.substitute(F, {"x": arg})  # noqa: E731
    domain = (lo, hi)
    orientation = family.orientation

    if kind is TransformKind.OUTER_SCALE:
        node = E.mul(a, F)
    elif kind is TransformKind.INNER_SCALE:
        node = at(E.mul(a, x))
        domain = (_scale_bound(lo), _scale_bound(hi))
    elif kind is TransformKind.OUTER_SHIFT:
        node = E.add(F, a)
    elif kind is TransformKind.INNER_SHIFT:
        node = at(E.add(x, a))
        domain = (_shift_bound(lo), _shift_bound(hi))
    elif kind is TransformKind.OUTER_POW:
        node = E.pow_(F, a)
    elif kind is TransformKind.INNER_POW:
        _require(lo >= 0, kind, "domain must be non-negative")
        node = at(E.pow_(x, a))
    elif kind in (TransformKind.EXP_OUTER, TransformKind.EXP_INNER):
        if c is None:
            raise FamilyError(f"{kind.value} needs the base c")
        cexp = _as_expr(c)
        _require(not isinstance(c, (int, float)) or c > 1, kind, "needs c > 1")
        if kind is TransformKind.EXP_OUTER:
            node = E.pow_(cexp, E.neg(E.mul(a, F)))
        else:
            _require(lo >= 0, kind, "domain must be non-negative")
            node = E.pow_(cexp, E.neg(at(E.pow_(x, a))))
    elif kind is TransformKind.ONE_MINUS_OUTER:
        node = E.pow_(E.sub(1, F), a)
    elif kind is TransformKind.ONE_MINUS_INNER:
        _require(lo >= 0, kind, "domain must be non-negative")
        node = E.sub(1, at(E.pow_(x, a)))
    elif kind is TransformKind.RECIPROCAL_CONJUGATE:
        if (lo, hi) == (1.0, math.inf):
            domain = (0.0, 1.0)
        elif _is_unit_interval(lo, hi):
            domain = (1.0, math.inf)
        else:
            raise FamilyError("reciprocal_conjugate needs domain [1, inf) or [0, 1]")
        node = E.div(1, at(E.div(1, x)))
    elif kind in (TransformKind.LOG_RATIO_1, TransformKind.LOG_RATIO_2,
                  TransformKind.LOG_RATIO_3, TransformKind.LOG_RATIO_4):
        if g is None:
            raise FamilyError(f"{kind.value} needs the second map g")
        gexp = g.expression if isinstance(g, MapFamily) else _as_expr(g)
        ln = lambda v: E.call("ln", v)  # noqa: E731
        if kind in (TransformKind.LOG_RATIO_1, TransformKind.LOG_RATIO_3):
            node = E.div(E.neg(ln(E.mul(a, F))), E.pow_(ln(gexp), 2))
            orientation = DECREASING
        else:
            node = E.div(E.neg(ln(F)), E.pow_(ln(E.mul(a, gexp)), 2))
            orientation = INCREASING
    elif kind is TransformKind.THETA_REPARAM:
        if theta is None:
            raise FamilyError("theta_reparam needs theta")
        th = _as_expr(theta)
        if not symbols(th) <= {"a"}:
            raise FamilyError("theta must be an expression in a only")
        node = E.substitute(F, {"a": th})
    else:  # pragma: no cover
        raise FamilyError(f"unsupported transform {kind}")

    params = _detect_params(node)
    if not params:
        raise FamilyError(f"{kind.value} produced a family without parameters")
    return MapFamily(node, params, domain, orientation,
                     name=name or f"{kind.value}({family.label})",
                     cascade=family.cascade if kind is not TransformKind.THETA_REPARAM else None)


def _scale_bound(bound: Bound) -> Bound:
    if isinstance(bound, (int, float)) and (bound == 0 or math.isinf(bound)):
        return bound
    return E.div(_as_expr(bound), E.A)


def _shift_bound(bound: Bound) -> Bound:
    if isinstance(bound, (int, float)) and math.isinf(bound):
        return bound
    return E.sub(_as_expr(bound), E.A)


def _require(ok: bool, kind: TransformKind, msg: str):
    if not ok:
        raise FamilyError(f"{kind.value}: {msg}")
