import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feigenlab import (CascadeNotFound, InvalidBracket, ParamPath, Periodic, alpha_rank,
                       bifurcation_sequence, catalog, classify_attractor, delta_report,
                       feigenvalue_for_degree, find_bifurcation, superstable_sequence,
                       tine_widths, width_ratio_table)
from feigenlab.bifurcation import accumulation_ratio
from feigenlab.dynamics import bound

LOGISTIC = catalog("logistic")


class TestFindBifurcation:
    def test_logistic_first_flip_exact(self):
        ev = find_bifurcation(LOGISTIC, None, 1, (2.5, 3.5))
        assert abs(ev.value - 3.0) < 1e-10
        assert ev.kind == "flip" and ev.period_before == 1 and ev.rank == 1

    def test_exponent_family_first_flip(self):
        ev = find_bifurcation(catalog("xpow_a_over_x"), None, 1, (5.0, 9.0))
        assert abs(ev.value - 7.3890560989) < 1e-6

    def test_psi_first_flip(self):
        ev = find_bifurcation(catalog("Psi"), None, 1, (1.0, 2.5))
        assert ev.value == pytest.approx(1.8, abs=0.05)

    def test_same_classification_rejected(self):
        with pytest.raises(InvalidBracket):
            find_bifurcation(LOGISTIC, None, 1, (2.5, 2.9))

    def test_wrong_period_rejected(self):
        with pytest.raises(InvalidBracket):
            find_bifurcation(LOGISTIC, None, 2, (2.5, 3.5))

    def test_fold_born_at_quarter(self):
        ev = find_bifurcation(catalog("fold_outer"), None, 1, (-1.0, 0.5), kind="tangent")
        assert ev.value == pytest.approx(-0.25, abs=1e-10)


class TestSequence:
    def test_exponent_family(self):
        seq = bifurcation_sequence(catalog("xpow_a_over_x"), N=2)
        assert seq.values[0] == pytest.approx(math.exp(2), abs=1e-9)
        assert seq.values[1] == pytest.approx(12.509, abs=0.01)

    def test_decreasing_family(self):
        fam = catalog("dec_selfexp")
        seq = bifurcation_sequence(fam, ParamPath.along(fam, -1), N=2)
        assert seq.values == pytest.approx([0.35, 0.265], abs=0.01)

    def test_orientation_symmetry(self):
        # the default path of a decreasing family already runs downwards
        fam = catalog("dec_selfexp")
        u = bifurcation_sequence(fam, N=3).values
        v = bifurcation_sequence(fam, ParamPath.along(fam, -1), N=3).values
        assert u == v

    def test_no_cascade(self):
        with pytest.raises(CascadeNotFound):
            bifurcation_sequence(catalog("pow_no_bifurcation"), N=2)

    def test_monotone_and_doubling(self):
        seq = bifurcation_sequence(LOGISTIC, N=6)
        assert all(p < q for p, q in zip(seq.values, seq.values[1:]))
        assert [e.period_before for e in seq.events] == [1, 2, 4, 8, 16, 32]
        assert all(e.residual < 1e-10 for e in seq.events)

    def test_flip_event_correctness(self):
        seq = bifurcation_sequence(LOGISTIC, N=5)
        vals = seq.values
        for i, ev in enumerate(seq.events[:-1]):
            gap = vals[i + 1] - vals[i]
            below = classify_attractor(LOGISTIC, ev.value - 1e-4 * gap, transient=400_000)
            above = classify_attractor(LOGISTIC, ev.value + 1e-4 * gap, transient=400_000)
            assert isinstance(below, Periodic) and below.period == ev.period_before
            assert isinstance(above, Periodic) and above.period == 2 * ev.period_before

    def test_flip_multiplier_at_event(self):
        # continue the period-p cycle to the event and check multiplier = -1
        seq = bifurcation_sequence(LOGISTIC, N=4)
        for ev in seq.events:
            p = ev.period_before
            att = classify_attractor(LOGISTIC, ev.value - 1e-9)
            bm = bound(LOGISTIC, ev.value)
            x, _ = bm.cycle_newton(att.cycle[0], p)
            assert abs(bm.multiplier(bm.cycle(x, p)) + 1) < 1e-6

    def test_conjugacy_invariance(self):
        from feigenlab import transform
        fam = catalog("xpow_a_over_x")
        conj = transform(fam, "reciprocal_conjugate")
        u = bifurcation_sequence(fam, N=5).values
        v = bifurcation_sequence(conj, N=5).values
        assert max(abs(p - q) for p, q in zip(u, v)) < 1e-8


class TestDelta:
    def test_logistic_depth_seven(self):
        rep = delta_report(bifurcation_sequence(LOGISTIC, N=7))
        assert abs(rep.delta - 4.669201) / 4.669201 < 0.005
        assert len(rep.delta_seq) == 5

    def test_arithmetic_progression(self):
        rep = delta_report([1.0, 2.0, 3.0, 4.0])
        assert rep.delta_seq == (1.0, 1.0)
        assert math.isnan(rep.b_inf)

    def test_printed_values(self):
        # direct arithmetic: 0.17364 / 0.0301 and 0.0301 / 0.00444
        rep = delta_report([1.18336, 1.357, 1.3871, 1.39154])
        assert rep.delta_seq[0] == pytest.approx(0.17364 / 0.0301, rel=1e-12)
        assert rep.delta_seq[1] == pytest.approx(0.0301 / 0.00444, rel=1e-12)
        assert rep.delta_seq == pytest.approx((5.76877, 6.77928), abs=1e-5)

    def test_duplicate_events(self):
        with pytest.raises(ZeroDivisionError):
            delta_report([1.0, 2.0, 2.0, 3.0])

    def test_too_short(self):
        with pytest.raises(ValueError):
            delta_report([1.0, 2.0])

    @given(st.floats(1.5, 20.0), st.integers(4, 9))
    @settings(max_examples=100)
    def test_geometric_closed_form(self, d, n):
        # b_k = sum_{j<k} d^-j: every ratio is d and the limit is d / (d - 1);
        # each b_k carries rounding of order eps * b_k, so a ratio of gaps down
        # to d^-(n-2) is good to about 32 eps d^(n-2)
        vals = [sum(d ** -j for j in range(k)) for k in range(1, n + 1)]
        rep = delta_report(vals)
        tol = max(1e-12, 32 * 2.0 ** -52 * d ** (n - 2))
        assert all(r == pytest.approx(d, rel=tol) for r in rep.delta_seq)
        assert rep.b_inf == pytest.approx(d / (d - 1), rel=1e-9)
        assert all(c == pytest.approx(d, rel=max(1e-6, d * d * tol)) for c in rep.c_seq)
        assert len(rep.delta_seq) == n - 2

    def test_c_and_d_sequences(self):
        rep = delta_report(bifurcation_sequence(LOGISTIC, N=7))
        assert len(rep.c_seq) == 6 and len(rep.d_seq) == 4
        assert rep.c_seq[-1] == pytest.approx(4.669, rel=0.01)


class TestAccumulation:
    def test_exponent_family(self):
        r = accumulation_ratio(catalog("xpow_a_over_x"), N=7)
        assert r == pytest.approx(1.9989, abs=0.002)
        assert r < 2.0

    def test_logistic_cross_checked(self):
        r = accumulation_ratio(LOGISTIC, N=8)
        assert r == pytest.approx(3.569946 / 3, abs=1e-5)
        # below the extrapolated point the attractor is a 2^k cycle; above it
        # no 2^k cycle survives (chaos or a window with another period)
        below = classify_attractor(LOGISTIC, 3 * r - 1e-4)
        assert isinstance(below, Periodic) and below.period & (below.period - 1) == 0
        for da in (1e-3, 2e-3, 5e-3):
            above = classify_attractor(LOGISTIC, 3 * r + da)
            if isinstance(above, Periodic):
                assert above.period & (above.period - 1) != 0


class TestSuperstable:
    def test_logistic_first_two(self):
        ss = superstable_sequence(LOGISTIC, N=1)
        assert ss[0] == pytest.approx(2.0, abs=1e-12)
        assert ss[1] == pytest.approx(1 + math.sqrt(5), abs=1e-10)

    def test_interleaving_increasing(self):
        ss = superstable_sequence(LOGISTIC, N=6)
        bs = bifurcation_sequence(LOGISTIC, N=6).values
        assert all(ss[n - 1] < bs[n - 1] < ss[n] for n in range(1, 7))

    def test_interleaving_decreasing(self):
        fam = catalog("dec_selfexp")
        ss = superstable_sequence(fam, N=3)
        bs = bifurcation_sequence(fam, N=3).values
        assert all(ss[n - 1] > bs[n - 1] > ss[n] for n in range(1, 4))

    def test_delta_agreement(self):
        ss = superstable_sequence(LOGISTIC, N=7)
        bs = bifurcation_sequence(LOGISTIC, N=7).values
        d_s, d_b = delta_report(ss).delta, delta_report(bs).delta
        assert abs(d_s - d_b) / d_b < 0.02

    def test_reciprocal_family_orbits_contain_inverse_e(self):
        fam = catalog("xpow_ax")
        for s in superstable_sequence(fam, N=4):
            att = classify_attractor(fam, s)
            assert min(abs(x - 1 / math.e) for x in att.cycle) < 1e-9


class TestWidths:
    def test_alpha_rank_recurrence(self):
        assert [alpha_rank(n) for n in range(1, 8)] == [1, 3, 5, 11, 21, 43, 85]
        for n in range(1, 15):
            assert alpha_rank(n + 1) == 2 * alpha_rank(n) + (-1) ** (n + 1)

    def test_period_two_single_width(self):
        tw = tine_widths(LOGISTIC, 3.2, 2)
        att = classify_attractor(LOGISTIC, 3.2)
        assert tw.widths == pytest.approx((abs(att.cycle[0] - att.cycle[1]),))

    def test_wrong_level(self):
        with pytest.raises(ValueError):
            tine_widths(LOGISTIC, 3.2, 3)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_width_count(self, n):
        s = superstable_sequence(LOGISTIC, N=n - 1)[-1]
        tw = tine_widths(LOGISTIC, s, n)
        assert len(tw.widths) == 2 ** (n - 1) - 1
        assert tw.alpha_pair == (2 ** (n - 2), 2 ** (n - 1))

    def test_central_ratio_near_alpha(self):
        ss = superstable_sequence(LOGISTIC, N=6)
        w5 = tine_widths(LOGISTIC, ss[5], 6).central_width
        w4 = tine_widths(LOGISTIC, ss[4], 5).central_width
        assert w4 / w5 == pytest.approx(2.50, abs=0.01)

    def test_reciprocal_family_ratio_table(self):
        fam = catalog("xpow_ax")
        ss = superstable_sequence(fam, N=5)
        t5, t6 = tine_widths(fam, ss[4], 5), tine_widths(fam, ss[5], 6)
        table = width_ratio_table(t5, t6)
        assert table.shape == (15, 31)
        flat = table.ravel()
        for lo, hi in ((2.32, 2.56), (5.4, 6.4)):
            assert np.any((flat > lo) & (flat < hi))


class TestFeigenvalue:
    def test_quadratic(self):
        assert feigenvalue_for_degree(2, 2).delta == pytest.approx(4.669201609, rel=0.01)

    def test_quartic(self):
        assert feigenvalue_for_degree(4, 4).delta == pytest.approx(7.2846862171, rel=0.01)

    def test_hybrid_is_recorded(self):
        # an open question in the source material: record, do not assert a value
        rep = feigenvalue_for_degree(3, 8, N=7)
        assert len(rep.delta_seq) == 5
        assert all(math.isfinite(d) for d in rep.delta_seq)
        assert isinstance(rep.monotone, bool) and math.isfinite(rep.spread)
