import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feigenlab import (DomainFault, SchwarzianPole, catalog, check_bifurcation_readiness,
                       eval_jet, parse_family, parse_map, picture10, schwarzian_at,
                       sign_profile, transform)
from feigenlab.catalog import names
from feigenlab.expr import const, substitute
from feigenlab.jets import DD


def stencil_schwarzian(fam, params, x, h=1e-6):
    """Schwarzian from 5-point stencils in 106-bit arithmetic.

    The extra precision lets the step be small enough that truncation, not
    rounding, is negligible even for steep members of the catalog.
    """
    c = fam.compiled_dd
    a, b = (DD.mpf(v) for v in fam.bind(params))
    x, h = DD.mpf(x), DD.mpf(h)
    f = [c.f(x + k * h, a, b) for k in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    d3 = (-f[0] + 2 * f[1] - 2 * f[3] + f[4]) / (2 * h ** 3)
    return float(d3 / d1 - 1.5 * (d2 / d1) ** 2)


class TestSchwarzianAt:
    def test_logistic_at_zero(self):
        assert schwarzian_at(catalog("logistic"), 3.0, 0.0) == pytest.approx(-6.0, abs=1e-12)

    @pytest.mark.parametrize("x", [0.1, 0.3, 0.8])
    def test_logistic_closed_form(self, x):
        assert schwarzian_at(catalog("logistic"), 3.7, x) == pytest.approx(-6 / (1 - 2 * x) ** 2)

    def test_moebius(self):
        fam = parse_map("(2*x+1)/(x+3)", (0.0, 10.0))
        for x in np.linspace(0, 10, 51):
            assert abs(schwarzian_at(fam, (), float(x))) < 1e-10

    def test_self_power_positive_near_zero(self):
        assert schwarzian_at(parse_map("x^x"), (), 0.05) > 0

    def test_pole_at_critical_point(self):
        with pytest.raises(SchwarzianPole):
            schwarzian_at(catalog("logistic"), 3.0, 0.5)


class TestSignProfile:
    def test_self_power(self):
        prof = sign_profile(parse_map("x^x"), (), (0.001, 0.999))
        assert len(prof.changes) == 1
        assert prof.changes[0] == pytest.approx(0.0806, abs=5e-4)
        assert prof.signs == (1, -1)

    def test_self_root(self):
        prof = sign_profile(parse_map("x^(1/x)", (1.0, math.inf)), (), (1.01, 100.0))
        assert len(prof.changes) == 1
        assert prof.changes[0] == pytest.approx(12.3944, abs=5e-3)
        assert prof.signs == (-1, 1)

    def test_self_root_matches_reciprocal(self):
        # x^(1/x) is the reciprocal conjugate of x^x, so the change sits at 1/0.0806...
        a = sign_profile(parse_map("x^x"), (), (0.001, 0.999)).changes[0]
        b = sign_profile(parse_map("x^(1/x)", (1.0, math.inf)), (), (1.01, 100.0)).changes[0]
        assert a * b == pytest.approx(1.0, abs=1e-7)

    def test_quartic_example(self):
        fam = parse_map("-1.55*x^4+4.34*x^3-4.56*x^2+1.77*x")
        prof = sign_profile(fam, (), (0.01, 0.99))
        assert len(prof.changes) == 1 and prof.changes[0] == pytest.approx(0.7, abs=0.05)
        assert prof.sign_at(0.9) == 1

    def test_pole_excluded_and_noted(self):
        prof = sign_profile(catalog("logistic"), 3.0, (0.01, 0.99))
        assert prof.poles == pytest.approx((0.5,))
        assert prof.changes == () and prof.signs == (-1,)
        assert any("pole" in n for n in prof.notes)

    def test_endpoint_divergence_is_a_note(self):
        prof = sign_profile(catalog("example_I"), 1.0, (1e-9, 1 - 1e-9))
        assert any("+inf" in n for n in prof.notes)

    def test_interval_outside_domain(self):
        with pytest.raises(ValueError):
            sign_profile(catalog("logistic"), 3.0, (-0.5, 0.5))

    def test_fault_inside_interval(self):
        with pytest.raises(DomainFault):
            sign_profile(parse_map("ln(x-0.5)^2"), (), (0.1, 0.9))

    @given(st.sampled_from(["singer", "example_II", "two_max_octic", "triple_max_1",
                            "picture10", "two_max_power"]), st.floats(0, 1))
    @settings(max_examples=30, deadline=None)
    def test_changes_increase_and_signs_alternate(self, name, u):
        fam = catalog(name)
        lo, hi = sorted(fam.cascade)
        prof = sign_profile(fam, lo + u * (hi - lo), (0.001, 0.999), grid=500)
        assert all(p < q for p, q in zip(prof.changes, prof.changes[1:]))
        assert len(prof.signs) == len(prof.changes) + 1
        assert all(s != t for s, t in zip(prof.signs, prof.signs[1:]))


class TestReadiness:
    def test_logistic_passes(self):
        rep = check_bifurcation_readiness(catalog("logistic"), 3.5)
        assert rep.verdict == "pass"
        assert len(rep.maxima) == 1 and rep.maxima[0][2] == "2"

    def test_two_unequal_maxima_pass(self):
        rep = check_bifurcation_readiness(catalog("two_max_octic"), 3.0)
        assert rep.verdict == "pass"
        assert len(rep.maxima) == 2

    def test_picture10_allowed_positive_stretch(self):
        rep = check_bifurcation_readiness(picture10(), 1.0)
        assert rep.verdict == "pass-with-notes"
        x1 = rep.maxima[0][0]
        pos = rep.profile.positive_segments()
        assert pos and all(0 < lo and hi < x1 for lo, hi in pos)
        assert not rep.check("changes in ]lo, x1[").constrained

    def test_singer_quartic_not_passed(self):
        rep = check_bifurcation_readiness(catalog("singer"), 1.0)
        assert rep.verdict != "pass"

    def test_verdict_pass_only_if_constrained_hold(self):
        for name, a in (("logistic", 3.5), ("two_max_octic", 3.0), ("singer", 1.0),
                        ("example_II", 1.0), ("triple_max_2", 1.0)):
            rep = check_bifurcation_readiness(catalog(name), a)
            if rep.verdict == "pass":
                assert all(c.ok for c in rep.checks if c.constrained)
            if not all(c.ok for c in rep.checks if c.constrained):
                assert rep.verdict == "fail"

    def test_endpoint_condition(self):
        rep = check_bifurcation_readiness(catalog("logistic"), 3.5)
        assert rep.check("endpoints").ok
        fam = parse_family("a*x*(1-x)+0.1*x", (0.0, 1.0))
        assert not check_bifurcation_readiness(fam, 3.0).check("endpoints").ok

    def test_non_integer_degree_noted(self):
        # no finite jet at the maximum; the degree comes from the value probe
        rep = check_bifurcation_readiness(parse_family("a*(1-abs(2*x-1)^2.5)"), 1.0)
        assert rep.maxima[0][2] == "~2.50"
        assert any("not quadratic" in n for n in rep.notes)

    def test_semi_line_rejected(self):
        with pytest.raises(ValueError):
            check_bifurcation_readiness(catalog("xpow_a_over_x"), 9.0)


def _params(fam, rng):
    if fam.label == "gamma_sine":
        return (float(rng.uniform(0.5, 1.1)),)
    if fam.label == "pic12_h":
        return tuple(float(v) for v in rng.uniform(1.0, 2.0, 2))
    lo, hi = sorted(fam.cascade)
    return (float(rng.uniform(lo, hi)),)


@pytest.mark.parametrize("name", names())
def test_schwarzian_against_stencils(name):
    fam = catalog(name)
    rng = np.random.default_rng(sum(map(ord, name)))
    done = tries = 0
    while done < 100 and tries < 2000:
        tries += 1
        params = _params(fam, rng)
        lo, hi = fam.domain_at(params)
        hi = hi if math.isfinite(hi) else lo + 30.0
        x = float(rng.uniform(lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo)))
        try:
            j = eval_jet(fam, params, x)
            if abs(j.f1) < 1e-3 * max(1.0, abs(j.f2)):
                continue        # too close to a pole for a stencil
            got = schwarzian_at(fam, params, x)
            want = stencil_schwarzian(fam, params, x)
        except (ArithmeticError, ValueError):
            continue
        assert abs(got - want) <= 1e-4 * max(abs(want), 1.0), (params, x, got, want)
        done += 1
    assert done == 100


def _fixed(name, a):
    fam = catalog(name)
    return substitute(fam.expression, {"a": const(a)})


@pytest.mark.parametrize("outer,inner", [(("logistic", 3.7), ("sin_exp", 0.8)),
                                         (("Psi", 1.5), ("logistic", 3.2)),
                                         (("example_II", 1.2), ("Xi", 2.0))])
def test_composition_cocycle(outer, inner):
    f_node, g_node = _fixed(*outer), _fixed(*inner)
    from feigenlab.family import MapFamily
    f = MapFamily(f_node, (), (-10.0, 10.0))
    g = MapFamily(g_node, (), (0.0, 1.0))
    fg = MapFamily(substitute(f_node, {"x": g_node}), (), (0.0, 1.0))
    rng = np.random.default_rng(5)
    checked = 0
    for x in rng.uniform(0.02, 0.98, 200):
        x = float(x)
        try:
            gx = eval_jet(g, (), x)
            lhs = schwarzian_at(fg, (), x)
            rhs = schwarzian_at(f, (), gx.f) * gx.f1 ** 2 + schwarzian_at(g, (), x)
        except SchwarzianPole:
            continue
        if abs(gx.f1) < 1e-3:
            continue
        assert abs(lhs - rhs) <= 1e-6 * max(abs(lhs), 1.0)
        checked += 1
        if checked == 50:
            break
    assert checked == 50


@pytest.mark.parametrize("name", ["logistic", "singer", "example_II", "two_max_octic"])
def test_factor_parameter_invariance(name):
    fam = catalog(name)
    for x in (0.05, 0.23, 0.61, 0.87):
        vals = [schwarzian_at(fam, a, x) for a in (0.5, 1.0, 2.0, 4.0)]
        assert max(vals) - min(vals) <= 1e-12 * max(map(abs, vals))


def test_exponent_parameter_moves_changes():
    fam = transform(parse_map("x^x"), "outer_pow")
    locs = [sign_profile(fam, a, (0.01, 0.99)).changes for a in (1.0, 2.0, 4.0)]
    assert all(len(c) == 1 for c in locs)
    firsts = [c[0] for c in locs]
    assert len(set(round(v, 6) for v in firsts)) == 3
