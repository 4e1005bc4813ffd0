"""Expression trees for map families and a small recursive-descent parser.

Grammar (whitespace is insignificant, there is no implicit multiplication)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | 'x' | 'a' | 'b' | 'pi' | 'e'
            | func '(' expr ')' | '(' expr ')'
    func   := sin | cos | exp | ln | sqrt | abs

``^`` is right-associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)`` and ``2^-x`` is ``2^(-x)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "abs")
VARIABLE = "x"
PARAMETERS = ("a", "b")
CONSTANTS = {"pi": math.pi, "e": math.e}


class ExprError(ValueError):
    """Base class for parse-time errors."""


class ParseError(ExprError):
    """Malformed expression source.

    ``offset`` is the 1-based character position at which parsing failed;
    an unexpected end of input reports ``len(text) + 1``.
    """

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifier(ExprError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


# --------------------------------------------------------------------------
# nodes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    text: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.text:
            object.__setattr__(self, "text", repr(float(self.value)))


@dataclass(frozen=True)
class Sym:
    """Variable ``x``, a parameter, or a named constant."""
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' or a function name
    arg: "Expression"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


Expression = Union[Num, Sym, Unary, Binary]


def symbols(node: Expression) -> set[str]:
    """Names of variables/parameters referenced by ``node`` (constants excluded)."""
    out: set[str] = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Sym):
            if n.name not in CONSTANTS:
                out.add(n.name)
        elif isinstance(n, Unary):
            stack.append(n.arg)
        elif isinstance(n, Binary):
            stack.extend((n.left, n.right))
    return out


def depends_on_x(node: Expression) -> bool:
    return VARIABLE in symbols(node)


def substitute(node: Expression, mapping: dict[str, Expression]) -> Expression:
    """Replace symbols by subtrees (simultaneously)."""
    if isinstance(node, Sym):
        return mapping.get(node.name, node)
    if isinstance(node, Unary):
        return Unary(node.op, substitute(node.arg, mapping))
    if isinstance(node, Binary):
        return Binary(node.op, substitute(node.left, mapping),
                      substitute(node.right, mapping))
    return node


def walk(node: Expression):
    yield node
    if isinstance(node, Unary):
        yield from walk(node.arg)
    elif isinstance(node, Binary):
        yield from walk(node.left)
        yield from walk(node.right)


# --------------------------------------------------------------------------
# tokenizer
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int  # 0-based


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", i + 1, text)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), i))
        i = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, what: str):
        t = self.tok
        msg = "unexpected end of input" if t.kind == "end" else f"{what}, got {t.text!r}"
        raise ParseError(msg, t.pos + 1, self.text)

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.fail(f"expected {text!r}")

    def parse(self) -> Expression:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail("expected operator or end of input")
        return node

    def expr(self) -> Expression:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        if self.accept("-"):
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.accept("^"):
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(float(t.text), t.text)
        if t.kind == "ident":
            self.i += 1
            name = t.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(name, arg)
            if name == VARIABLE or name in PARAMETERS or name in CONSTANTS:
                return Sym(name)
            raise UnknownIdentifier(name, t.pos + 1)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.fail("expected number, name or '('")


def parse(text: str) -> Expression:
    """Parse DSL source into an expression tree."""
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(node: Expression) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary) and node.op == "neg":
        return _PREC["neg"]
    return 5


def _num_text(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def to_source(node: Expression) -> str:
    """Serialize to DSL text; ``parse(to_source(t)) == t`` for every tree."""
    if isinstance(node, Num):
        if node.value < 0 or math.isinf(node.value) or math.isnan(node.value):
            raise ExprError(f"constant {node.value!r} has no DSL literal")
        return _num_text(node.value)
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = to_source(node.arg)
            # neg's operand is a unary: anything looser than that needs parens
            if _prec(node.arg) < _PREC["neg"]:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{node.op}({to_source(node.arg)})"
    p = _PREC[node.op]
    left, right = to_source(node.left), to_source(node.right)
    if node.op == "^":
        # base must be an atom; exponent may be a unary or another power
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < _PREC["neg"]:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    # left-associative: equal precedence on the right needs parens
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left}{node.op}{right}"


# --------------------------------------------------------------------------
# builders used by the catalog and transforms
# --------------------------------------------------------------------------

def const(v: float) -> Expression:
    return Num(float(v)) if v >= 0 else Unary("neg", Num(float(-v)))


X = Sym("x")
A = Sym("a")
B = Sym("b")


def _wrap(v) -> Expression:
    if isinstance(v, (int, float)):
        return const(v)
    return v


def add(l, r): return Binary("+", _wrap(l), _wrap(r))
def sub(l, r): return Binary("-", _wrap(l), _wrap(r))
def mul(l, r): return Binary("*", _wrap(l), _wrap(r))
def div(l, r): return Binary("/", _wrap(l), _wrap(r))
def pow_(l, r): return Binary("^", _wrap(l), _wrap(r))
def neg(v): return Unary("neg", _wrap(v))
def call(fn: str, v) -> Expression: return Unary(fn, _wrap(v))


__all__ = [
    "Expression", "Num", "Sym", "Unary", "Binary", "ParseError", "ExprError",
    "UnknownIdentifier", "parse", "to_source", "symbols", "depends_on_x",
    "substitute", "walk", "FUNCTIONS", "CONSTANTS", "PARAMETERS",
]
