import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feigenlab import (DomainFault, FamilyError, MapFamily, TransformKind, catalog, eval_jet,
                       feigenmap, parse_family, parse_map, transform)
from feigenlab.catalog import names
from feigenlab.family import PERMEABLE_TWIN
from feigenlab.jets import DD


def central_differences(fam, params, x, h=1e-5):
    """Central differences with step ``h``, evaluated in 106-bit arithmetic."""
    c = fam.compiled_dd
    a, b = (DD.mpf(v) for v in fam.bind(params))
    x, h = DD.mpf(x), DD.mpf(h)
    f = lambda t: c.f(t, a, b)  # noqa: E731
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h) - 2 * f(x) + f(x - h)) / h ** 2
    d3 = (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h ** 3)
    return float(d1), float(d2), float(d3)


class TestJets:
    def test_logistic_critical_point(self):
        j = eval_jet(catalog("logistic"), 4.0, 0.5)
        assert (j.f, j.f1) == (1.0, 0.0)
        assert (j.f2, j.f3) == (-8.0, 0.0)

    def test_self_power_at_one(self):
        j = eval_jet(parse_map("x^x", (0.0, 2.0)), (), 1.0)
        assert (j.f, j.f1) == (1.0, 1.0)

    def test_exponent_family_against_differences(self):
        fam = catalog("xpow_a_over_x")
        j = eval_jet(fam, 7.389056, 2.0)
        for got, want in zip(j[1:], central_differences(fam, 7.389056, 2.0)):
            assert abs(got - want) / abs(want) < 1e-6

    def test_lower_orders_zero_filled(self):
        j = eval_jet(catalog("logistic"), 3.0, 0.2, order=1)
        assert j.f2 == 0.0 and j.f3 == 0.0
        assert j.f1 == pytest.approx(3.0 * 0.6)

    @pytest.mark.parametrize("src,x", [("ln(x)", 0.0), ("1/x", 0.0), ("sqrt(x)", 0.0),
                                       ("x^0.5", -0.5), ("exp(x)", 800.0)])
    def test_domain_faults(self, src, x):
        with pytest.raises(DomainFault):
            eval_jet(parse_map(src, (-1.0, 1000.0)), (), x)

    def test_zero_power_zero_is_one(self):
        assert eval_jet(parse_map("x^0", (0.0, 1.0)), (), 0.0).f == 1.0

    def test_outside_domain(self):
        with pytest.raises(DomainFault):
            eval_jet(catalog("logistic"), 3.0, 1.5)

    def test_double_double_backend_agrees(self):
        fam = catalog("xpow_a_over_x")
        c = fam.compiled_dd
        got = c.jet3(2.0, 7.389056, 0.0)
        want = eval_jet(fam, 7.389056, 2.0)
        for g, w in zip(got, want):
            assert float(g) == pytest.approx(w, rel=1e-14)


class TestFamily:
    def test_undeclared_name(self):
        with pytest.raises(FamilyError):
            MapFamily(parse_family("a*b*x").expression, ("a",), (0.0, 1.0))

    @pytest.mark.parametrize("domain", [(1.0, 0.0), (0.0, 0.0), (-1.0, math.inf)])
    def test_bad_domains(self, domain):
        with pytest.raises(FamilyError):
            parse_family("a*x", domain)

    def test_parameter_count_checked(self):
        with pytest.raises(FamilyError):
            catalog("pic12_h")(1.0, 0.5)

    def test_two_parameter_binding(self):
        h = catalog("pic12_h")
        assert h((1.0, 0.0), 0.3) == pytest.approx(catalog("pic12_f")(1.0, 0.3))
        assert h({"a": 0.0, "b": 1.0}, 0.3) == pytest.approx(catalog("pic12_g")(1.0, 0.3))


class TestCatalog:
    def test_logistic(self):
        fam = catalog("logistic")
        assert fam.source == "a*x*(1-x)" and fam.domain == (0.0, 1.0)
        assert fam.orientation == 1

    def test_semi_line_entry(self):
        fam = catalog("xpow_a_over_x")
        assert fam.domain == (1.0, math.inf) and fam.orientation == 1

    def test_decreasing_entry(self):
        fam = catalog("dec_selfexp")
        assert fam.orientation == -1
        assert fam(0.5, 0.5) == pytest.approx(0.25 ** 0.25)

    def test_unknown(self):
        with pytest.raises(KeyError):
            catalog("no_such_family")

    @pytest.mark.parametrize("name", names())
    def test_every_entry_evaluates(self, name):
        fam = catalog(name)
        lo, hi = fam.domain_at((1.0,) * len(fam.params))
        x = lo + 0.37 * ((hi if math.isfinite(hi) else lo + 10) - lo)
        assert math.isfinite(fam((1.0,) * len(fam.params), x))

    def test_feigenmap_hybrid_sides(self):
        fam = feigenmap(3, 8)
        assert fam(1.0, -0.5) == pytest.approx(1 - 0.5 ** 3)
        assert fam(1.0, 0.5) == pytest.approx(1 - 0.5 ** 8)

    def test_feigenmap_degree_guard(self):
        with pytest.raises(FamilyError):
            feigenmap(0.5)


class TestTransforms:
    def test_reciprocal_conjugate_of_exponent_family(self):
        conj = transform(catalog("xpow_a_over_x"), "reciprocal_conjugate")
        assert conj.domain == (0.0, 1.0)
        for x in (0.1, 0.3, 0.7):
            assert conj(3.0, x) == pytest.approx(x ** (3.0 * x), rel=1e-14)

    def test_psi_xi_pair(self):
        base = parse_map("exp(-sin(pi*x))")
        psi, xi = transform(base, "outer_pow"), transform(base, "inner_pow")
        for x in (0.2, 0.5, 0.9):
            assert psi(2.0, x) == pytest.approx(catalog("Psi")(2.0, x), rel=1e-14)
            assert xi(2.0, x) == pytest.approx(catalog("Xi")(2.0, x), rel=1e-14)

    def test_inner_scale_domain_moves(self):
        fam = transform(parse_map("x^3-x", (-1.0, 1.0)), "inner_scale")
        assert fam.domain_at(2.0) == (-0.5, 0.5)

    def test_exp_pair_needs_base(self):
        with pytest.raises(FamilyError):
            transform(parse_map("sin(pi*x)"), "exp_outer")
        with pytest.raises(FamilyError):
            transform(parse_map("sin(pi*x)"), "exp_outer", c=0.5)

    def test_reciprocal_needs_known_domain(self):
        with pytest.raises(FamilyError):
            transform(parse_map("x", (0.0, 2.0)), "reciprocal_conjugate")

    def test_theta_only_in_a(self):
        with pytest.raises(FamilyError):
            transform(catalog("logistic"), "theta_reparam", theta="a+x")

    def test_log_ratio_needs_second_map(self):
        with pytest.raises(FamilyError):
            transform(parse_map("x*(1-x)"), "log_ratio_1")

    def test_log_ratio_forms(self):
        f, g = parse_map("x*(1-x)+0.1"), parse_map("0.5+x*(1-x)")
        one = transform(f, "log_ratio_1", g=g)
        two = transform(f, "log_ratio_2", g=g)
        x = 0.3
        fx, gx = 0.3 * 0.7 + 0.1, 0.5 + 0.3 * 0.7
        assert one(2.0, x) == pytest.approx(-math.log(2 * fx) / math.log(gx) ** 2)
        assert two(2.0, x) == pytest.approx(-math.log(fx) / math.log(2 * gx) ** 2)

    def test_twins_are_symmetric(self):
        for k, v in PERMEABLE_TWIN.items():
            assert PERMEABLE_TWIN[v] is k

    @pytest.mark.parametrize("kind", [k for k in TransformKind
                                      if not k.value.startswith("log_ratio")
                                      and k not in (TransformKind.THETA_REPARAM,
                                                    TransformKind.RECIPROCAL_CONJUGATE,
                                                    TransformKind.EXP_OUTER,
                                                    TransformKind.EXP_INNER)])
    def test_each_kind_well_formed(self, kind):
        fam = transform(parse_map("sin(pi*x)"), kind)
        assert fam.params == ("a",)


@given(st.floats(0.001, 0.999), st.sampled_from(["4*x*(1-x)", "sin(pi*x)", "x^x",
                                                 "exp(-sin(pi*x))", "1-(2*x-1)^4"]))
@settings(max_examples=200, deadline=None)
def test_identity_transforms_exact(x, src):
    base = parse_map(src)
    assert transform(base, "outer_scale")(1.0, x) == base((), x)
    assert transform(base, "outer_shift")(0.0, x) == base((), x)
    assert transform(base, "inner_scale")(1.0, x) == base((), x)


def test_reciprocal_conjugate_involution():
    fam = catalog("xpow_a_over_x")
    twice = transform(transform(fam, "reciprocal_conjugate"), "reciprocal_conjugate")
    assert twice.domain == fam.domain
    rng = np.random.default_rng(3)
    for a, x in zip(rng.uniform(2, 20, 100), rng.uniform(1, 40, 100)):
        u, v = fam(float(a), float(x)), twice(float(a), float(x))
        assert abs(u - v) <= 1e-12 * abs(u)


def test_concurrent_evaluation_is_pure():
    from concurrent.futures import ThreadPoolExecutor
    fam = catalog("xpow_a_over_x")
    xs = np.linspace(1, 30, 400)
    serial = [fam(9.0, float(x)) for x in xs]
    with ThreadPoolExecutor(8) as ex:
        threaded = list(ex.map(lambda x: fam(9.0, float(x)), xs))
    assert serial == threaded
