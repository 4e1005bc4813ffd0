"""Code generation for expression trees.

Every expression is compiled once into plain Python functions:

* ``f(x, a, b)`` -- value,
* ``jet1(x, a, b)`` -- ``(f, f')``,
* ``jet3(x, a, b)`` -- ``(f, f', f'', f''')``,
* ``vec(xs, a, b)`` -- numpy-vectorised value (non-finite entries mark faults).

Derivatives are propagated in Taylor mode (exact chain/Leibniz rules, no
finite differences).  Subtrees that do not depend on ``x`` carry only a value.

The scalar functions raise ``ValueError``/``ZeroDivisionError``/``OverflowError``
on domain faults; callers translate these into :class:`DomainFault`.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import mpmath
import numpy as np

from .expr import Binary, Expression, Num, Sym, Unary, depends_on_x

OVERFLOW_GUARD = 1e300
EVAL_ERRORS = (ValueError, ZeroDivisionError, OverflowError, TypeError)


class DomainFault(ArithmeticError):
    """Expression cannot be evaluated (log of non-positive, 0 division, ...)."""


class Jet3(NamedTuple):
    f: float
    f1: float = 0.0
    f2: float = 0.0
    f3: float = 0.0


# --------------------------------------------------------------------------
# runtime helpers
# --------------------------------------------------------------------------

def _sign(u):
    return 1.0 if u > 0 else (-1.0 if u < 0 else 0.0)


def _make_dpow(pow_fn):
    def dpow(u, c, k):
        # k-th derivative of u**c with respect to u
        coef = 1.0
        for j in range(k):
            coef = coef * (c - j)
        if coef == 0:
            return 0.0 * c
        return coef * pow_fn(u, c - k)
    return dpow


def _double_namespace():
    return {
        "_sin": math.sin, "_cos": math.cos, "_exp": math.exp, "_ln": math.log,
        "_sqrt": math.sqrt, "_abs": abs, "_pow": math.pow, "_sign": _sign,
        "_dpow": _make_dpow(math.pow), "_pi": math.pi, "_e": math.e,
    }


# extended precision: 106-bit mantissa, the width of a double-double
DD = mpmath.MPContext()
DD.prec = 106


def _dd_real(fn):
    def wrapped(*args):
        out = fn(*args)
        if isinstance(out, DD.mpc) or not DD.isfinite(out):
            raise ValueError("math domain error")
        return out
    return wrapped


def _dd_pow(u, v):
    if u < 0 and v != DD.floor(v):
        raise ValueError("negative base with non-integer exponent")
    if u == 0 and v < 0:
        raise ZeroDivisionError("0 to a negative power")
    if u == 0 and v == 0:
        return DD.mpf(1)
    return _dd_real(DD.power)(u, v)


def _dd_namespace():
    ln = _dd_real(DD.log)

    def _ln(u):
        if u <= 0:
            raise ValueError("math domain error")
        return ln(u)

    def _sqrt(u):
        if u < 0:
            raise ValueError("math domain error")
        return DD.sqrt(u)

    return {
        "_sin": DD.sin, "_cos": DD.cos, "_exp": _dd_real(DD.exp), "_ln": _ln,
        "_sqrt": _sqrt, "_abs": abs, "_pow": _dd_pow, "_sign": _sign,
        "_dpow": _make_dpow(_dd_pow), "_pi": DD.pi, "_e": DD.e,
    }


def _numpy_namespace():
    return {
        "_sin": np.sin, "_cos": np.cos, "_exp": np.exp, "_ln": np.log,
        "_sqrt": np.sqrt, "_abs": np.abs, "_pow": np.power,
        "_pi": math.pi, "_e": math.e,
    }


# --------------------------------------------------------------------------
# code generation
# --------------------------------------------------------------------------

class _Gen:
    """Emit straight-line code; each node yields a list of term expressions.

    ``terms[k]`` is the source of the k-th derivative or ``None`` when it is
    identically zero.
    """

    def __init__(self, order: int, const_mode: str):
        self.order = order
        self.const_mode = const_mode  # 'inline' or 'named'
        self.lines: list[str] = []
        self.consts: dict[str, str] = {}
        self.n = 0
        self.cache: dict[Expression, list] = {}

    def tmp(self, src: str) -> str:
        name = f"t{self.n}"
        self.n += 1
        self.lines.append(f"{name} = {src}")
        return name

    def num(self, node: Num) -> str:
        if self.const_mode == "inline":
            return repr(float(node.value))
        key = node.text
        if key not in self.consts:
            self.consts[key] = f"k{len(self.consts)}"
        return self.consts[key]

    def emit(self, node: Expression) -> list:
        if node in self.cache:
            return self.cache[node]
        out = self._emit(node)
        self.cache[node] = out
        return out

    def zeros(self, v: str) -> list:
        return [v] + [None] * self.order

    def _emit(self, node: Expression) -> list:
        K = self.order
        if isinstance(node, Num):
            return self.zeros(self.num(node))
        if isinstance(node, Sym):
            if node.name == "x":
                return ["x", "1.0"] + [None] * (K - 1) if K else ["x"]
            if node.name in ("pi", "e"):
                return self.zeros("_" + node.name)
            return self.zeros(node.name)
        if not depends_on_x(node) and K:
            # constant with respect to x: value only
            return self.zeros(Gen0(self).value(node))
        if isinstance(node, Unary):
            return self.unary(node)
        return self.binary(node)

    # -- unary -------------------------------------------------------------
    def unary(self, node: Unary) -> list:
        u = self.emit(node.arg)
        K = self.order
        if node.op == "neg":
            return [self.tmp(f"-{t}") if t is not None else None for t in u]
        u0 = u[0]
        op = node.op
        if op == "exp":
            e0 = self.tmp(f"_exp({u0})")
            return self.chain(u, e0, [e0, e0, e0])
        if op == "ln":
            v0 = self.tmp(f"_ln({u0})")
            if not K:
                return [v0]
            r = self.tmp(f"1.0/{u0}")
            return self.chain(u, v0, [r, f"(-{r}*{r})", f"(2.0*{r}*{r}*{r})"])
        if op in ("sin", "cos"):
            s = self.tmp(f"_sin({u0})")
            if not K:
                return [s] if op == "sin" else [self.tmp(f"_cos({u0})")]
            c = self.tmp(f"_cos({u0})")
            if op == "sin":
                return self.chain(u, s, [c, f"(-{s})", f"(-{c})"])
            return self.chain(u, c, [f"(-{s})", f"(-{c})", s])
        if op == "sqrt":
            s = self.tmp(f"_sqrt({u0})")
            if not K:
                return [s]
            r = self.tmp(f"1.0/{s}")
            return self.chain(u, s, [f"(0.5*{r})", f"(-0.25*{r}*{r}*{r})",
                                     f"(0.375*{r}*{r}*{r}*{r}*{r})"])
        if op == "abs":
            v0 = self.tmp(f"_abs({u0})")
            if not K:
                return [v0]
            sg = self.tmp(f"_sign({u0})")
            return self.chain(u, v0, [sg, None, None])
        raise ValueError(f"unknown function {op}")

    def chain(self, u: list, v0: str, p: list) -> list:
        """Faa di Bruno up to third order for phi(u) with phi^(k)(u0) = p[k-1]."""
        K = self.order
        out = [v0]
        u1 = u[1] if K >= 1 else None
        u2 = u[2] if K >= 2 else None
        u3 = u[3] if K >= 3 else None
        if K >= 1:
            out.append(self.sum_([self.prod(p[0], u1)]))
        if K >= 2:
            out.append(self.sum_([self.prod(p[1], u1, u1), self.prod(p[0], u2)]))
        if K >= 3:
            out.append(self.sum_([self.prod(p[2], u1, u1, u1),
                                  self.prod("3.0", p[1], u1, u2),
                                  self.prod(p[0], u3)]))
        return out

    @staticmethod
    def prod(*factors):
        if any(f is None for f in factors):
            return None
        return "*".join(factors)

    def sum_(self, terms, signs=None):
        parts = []
        for i, t in enumerate(terms):
            if t is None:
                continue
            sgn = "+" if signs is None else signs[i]
            parts.append((sgn, t))
        if not parts:
            return None
        src = ""
        for k, (sgn, t) in enumerate(parts):
            if k == 0:
                src = t if sgn == "+" else f"-({t})"
            else:
                src += f" {sgn} ({t})"
        return self.tmp(src)

    # -- binary ------------------------------------------------------------
    def binary(self, node: Binary) -> list:
        op = node.op
        if op == "^":
            return self.power(node)
        u = self.emit(node.left)
        v = self.emit(node.right)
        K = self.order
        if op in "+-":
            out = [self.tmp(f"{u[0]} {op} {v[0]}")]
            for k in range(1, K + 1):
                out.append(self.sum_([u[k], v[k]], ["+", op]))
            return out
        if op == "*":
            return self.leibniz(u, v)
        # division: w = u/v  with  w*v = u
        w0 = self.tmp(f"{u[0]}/{v[0]}")
        if not K:
            return [w0]
        if all(t is None for t in v[1:]):
            return [w0] + [self.tmp(f"{t}/{v[0]}") if t is not None else None
                           for t in u[1:]]
        w = [w0]
        r = self.tmp(f"1.0/{v[0]}")
        for k in range(1, K + 1):
            # w_k = (u_k - sum_{j=0}^{k-1} C(k,j) w_j v_{k-j}) / v0
            terms = [u[k]]
            signs = ["+"]
            for j in range(k):
                c = math.comb(k, j)
                t = self.prod(*([f"{c}.0"] if c != 1 else []), w[j], v[k - j])
                terms.append(t)
                signs.append("-")
            s = self.sum_(terms, signs)
            w.append(self.tmp(f"({s})*{r}") if s is not None else None)
        return w

    def leibniz(self, u: list, v: list) -> list:
        K = self.order
        out = [self.tmp(f"{u[0]}*{v[0]}")]
        for k in range(1, K + 1):
            terms = []
            for j in range(k + 1):
                c = math.comb(k, j)
                terms.append(self.prod(*([f"{c}.0"] if c != 1 else []), u[j], v[k - j]))
            out.append(self.sum_(terms))
        return out

    def power(self, node: Binary) -> list:
        u = self.emit(node.left)
        K = self.order
        if not depends_on_x(node.right):
            c = Gen0(self).value(node.right)
            v0 = self.tmp(f"_pow({u[0]}, {c})")
            if not K:
                return [v0]
            p = [self.tmp(f"_dpow({u[0]}, {c}, {k})") for k in range(1, K + 1)]
            p += [None] * (3 - K)
            return self.chain(u, v0, p)
        v = self.emit(node.right)
        w0 = self.tmp(f"_pow({u[0]}, {v[0]})")
        if not K:
            return [w0]
        # u^v = exp(v ln u)
        if all(t is None for t in u[1:]):
            lnu = [self.tmp(f"_ln({u[0]})")] + [None] * K
        else:
            lnu = self.emit(Unary("ln", node.left))
        P = self.leibniz(v, lnu)
        return self.chain(P, w0, [w0, w0, w0])


class Gen0:
    """Value-only emission sharing the parent's temporaries and constants."""

    def __init__(self, parent: _Gen):
        self.parent = parent

    def value(self, node: Expression) -> str:
        g = _Gen(0, self.parent.const_mode)
        g.consts = self.parent.consts
        g.n = self.parent.n
        g.lines = self.parent.lines
        out = g.emit(node)[0]
        self.parent.n = g.n
        return out


def _value_source(node: Expression, const_mode: str, consts: dict) -> str:
    """A single nested expression (used for the numpy backend)."""
    def rec(n):
        if isinstance(n, Num):
            if const_mode == "inline":
                return repr(float(n.value))
            if n.text not in consts:
                consts[n.text] = f"k{len(consts)}"
            return consts[n.text]
        if isinstance(n, Sym):
            return "_" + n.name if n.name in ("pi", "e") else n.name
        if isinstance(n, Unary):
            if n.op == "neg":
                return f"(-{rec(n.arg)})"
            return f"_{n.op}({rec(n.arg)})"
        if n.op == "^":
            return f"_pow({rec(n.left)}, {rec(n.right)})"
        return f"({rec(n.left)} {n.op} {rec(n.right)})"
    return rec(node)


# --------------------------------------------------------------------------
# public compile entry point
# --------------------------------------------------------------------------

class Compiled:
    """Compiled evaluators for one expression on one arithmetic backend."""

    def __init__(self, node: Expression, backend: str = "double"):
        if backend not in ("double", "dd"):
            raise ValueError(f"unknown backend {backend!r}")
        self.node = node
        self.backend = backend
        if backend == "double":
            ns = _double_namespace()
            mode = "inline"
        else:
            ns = _dd_namespace()
            mode = "named"
        self.f = self._build(0, ns, mode, "f")
        self.jet1 = self._build(1, ns, mode, "jet1")
        self.jet3 = self._build(3, ns, mode, "jet3")
        self.source_numpy = None
        if backend == "double":
            consts: dict = {}
            src = _value_source(node, "inline", consts)
            code = f"def vec(x, a, b):\n    return {src} + 0.0 * x\n"
            nsv = _numpy_namespace()
            exec(compile(code, "<feigenlab:vec>", "exec"), nsv)
            self.vec = nsv["vec"]
        else:
            self.vec = None

    def _build(self, order: int, ns: dict, mode: str, name: str):
        g = _Gen(order, mode)
        out = g.emit(self.node)
        rets = [t if t is not None else "0.0" for t in out]
        body = g.lines + [f"return {rets[0]}" if order == 0 else
                          f"return ({', '.join(rets)})"]
        src = f"def {name}(x, a, b):\n" + "\n".join("    " + l for l in body) + "\n"
        ns = dict(ns)
        if mode == "named":
            for text, cname in g.consts.items():
                ns[cname] = DD.mpf(text)
        exec(compile(src, f"<feigenlab:{name}>", "exec"), ns)
        fn = ns[name]
        fn.source = src
        return fn
