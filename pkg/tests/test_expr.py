import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feigenlab import (ParseError, UnknownIdentifier, catalog, parse, parse_family, parse_map,
                       to_source)
from feigenlab.catalog import names
from feigenlab.expr import FUNCTIONS, Binary, Num, Sym, Unary, symbols


def value(text, x=0.3, a=1.7, b=0.4):
    return parse_map(text, (-10.0, 10.0)).compiled.f(x, a, b)


class TestParse:
    def test_logistic_detects_parameter(self):
        fam = parse_family("a*x*(1-x)", (0.0, 1.0))
        assert fam.params == ("a",)
        assert fam(3.0, 0.5) == 0.75

    def test_semi_line_family(self):
        fam = parse_family("x^(a/x)", (1.0, math.inf))
        assert fam.params == ("a",)
        assert fam.domain == (1.0, math.inf)

    def test_truncated_input_offset(self):
        with pytest.raises(ParseError) as exc:
            parse("x^(a/")
        assert exc.value.offset == 6

    @pytest.mark.parametrize("text", ["", "2*", "(x", "x)", "x 2", "1..2", "sin x", "x^^2"])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            parse(text)

    @pytest.mark.parametrize("text", ["y+1", "foo(x)", "tan(x)", "X"])
    def test_unknown_identifier(self, text):
        with pytest.raises(UnknownIdentifier):
            parse(text)

    def test_no_parameter_is_an_error(self):
        with pytest.raises(ValueError):
            parse_family("x*(1-x)")

    def test_whitespace_insignificant(self):
        assert parse(" a * x*( 1 - x ) ") == parse("a*x*(1-x)")


class TestPrecedence:
    def test_power_right_associative(self):
        assert value("2^3^2") == 2.0 ** 9

    def test_unary_minus_weaker_than_power(self):
        assert value("-x^2") == -(0.3 ** 2)

    def test_negative_exponent(self):
        assert value("2^-x") == 2.0 ** -0.3

    def test_left_associative_division(self):
        assert value("8/4/2") == 1.0

    def test_constants(self):
        assert value("pi+e") == math.pi + math.e

    @pytest.mark.parametrize("fn", FUNCTIONS)
    def test_functions(self, fn):
        ref = {"ln": math.log, "abs": abs}.get(fn) or getattr(math, fn)
        assert value(f"{fn}(x)") == pytest.approx(ref(0.3), rel=1e-15)


# random expression trees for the round-trip property
_leaf = st.one_of(
    st.sampled_from([Sym("x"), Sym("a"), Sym("b"), Sym("pi"), Sym("e")]),
    st.floats(0, 1e6, allow_nan=False).map(lambda v: Num(v)),
)


def _extend(children):
    return st.one_of(
        st.builds(Binary, st.sampled_from("+-*/^"), children, children),
        st.builds(Unary, st.sampled_from(("neg",) + FUNCTIONS), children),
    )


trees = st.recursive(_leaf, _extend, max_leaves=12)


class TestRoundTrip:
    @given(trees)
    @settings(max_examples=300, deadline=None)
    def test_serialise_then_parse(self, tree):
        assert parse(to_source(tree)) == tree

    @pytest.mark.parametrize("name", names())
    def test_catalog_entries(self, name):
        fam = catalog(name)
        again = parse(to_source(fam.expression))
        assert again == fam.expression
        assert to_source(again) == to_source(fam.expression)

    def test_symbols_skip_named_constants(self):
        assert symbols(parse("a*x+b*pi")) == {"a", "b", "x"}
