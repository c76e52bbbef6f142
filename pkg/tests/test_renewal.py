from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from cantorlab import measures as M
from cantorlab.entropy import shift_invariance_check
from cantorlab.errors import MalformedSpec
from cantorlab.interval import IntervalValue
from cantorlab.renewal import RenewalConstants, companion_total, renewal_expectation_terms

RHO = M.Renewal(4)
CONSTS = RenewalConstants(4)


class TestConstants:
    def test_enclosures_are_tight(self):
        for v in (CONSTS.c, CONSTS.b, CONSTS.B):
            assert v.width < Fraction(1, 2**600)

    def test_first_terms(self):
        assert CONSTS.c.contains(Fraction(1, 2) + Fraction(1, 2**16) + Fraction(1, 2**81) + Fraction(1, 2**256))
        assert abs(float(CONSTS.b) - (1 + 2**-15)) < 1e-9
        assert CONSTS.B.overlaps(1 + CONSTS.b)

    def test_truncation_must_be_at_least_two(self):
        with pytest.raises(MalformedSpec):
            RenewalConstants(1)


class TestRenewalMeasure:
    @settings(max_examples=60, deadline=None)
    @given(st.text(alphabet="01", max_size=9))
    def test_contains_the_forward_recurrence_oracle(self, x):
        # gaps beyond max(5, |x| + 1) move the oracle by less than the enclosure width
        got = RHO.mass(x)
        want = O.renewal_mass(x, max_gap=max(5, len(x) + 1))
        assert got.contains(want) if isinstance(got, IntervalValue) else got == want

    def test_stationary_one_density(self):
        one = RHO.mass("1")
        assert one.overlaps(1 / CONSTS.B)

    def test_adjacent_ones_are_null(self):
        assert RHO.mass("0110") == 0

    def test_v1_mass(self):
        # ρ[1 0 1] = p_1 / B
        assert RHO.mass("101").overlaps(CONSTS.p(1) / CONSTS.B)

    def test_shift_invariance_at_depth_8(self):
        rep = shift_invariance_check(RHO, 8)
        assert rep.ok
        assert rep.checked == 2**8 - 1


class TestCompanion:
    def test_vk_masses(self):
        mu = M.RenewalCompanion(4)
        for k in range(1, 5):
            assert mu.mass("1" + "0" * k + "1").overlaps(Fraction(1, k * k) / CONSTS.B)

    def test_unnormalized_total(self):
        mu = M.RenewalCompanion(4)
        total = mu.mass("")
        assert total.overlaps(companion_total(CONSTS))
        assert abs(float(total) - 1.6449340668482264 / float(CONSTS.B)) < 1e-12

    def test_normalized_total_is_one(self):
        assert M.RenewalCompanion(4, True).mass("").contains(1)

    @settings(max_examples=60, deadline=None)
    @given(st.text(alphabet="01", max_size=8))
    def test_additive(self, x):
        mu = M.RenewalCompanion(4)
        whole = IntervalValue.point(0) + mu.mass(x)
        assert whole.overlaps(mu.mass(x + "0") + mu.mass(x + "1"))

    def test_supported_inside_renewal(self):
        mu = M.RenewalCompanion(4)
        for x in O.words(7):
            if RHO.mass(x) == 0:
                assert mu.mass(x) == 0

    def test_expectation_terms_at_n4(self):
        terms = renewal_expectation_terms(4, 4)
        names = [x for x, _, _ in terms]
        assert "1001" in names
        mu_v2 = dict((x, m) for x, m, _ in terms)["1001"]
        assert mu_v2.overlaps(Fraction(1, 4) / CONSTS.B)

    def test_widths_stay_certified_at_minimum_truncation(self):
        for _, mu, rho in renewal_expectation_terms(2, 7):
            for v in (mu, rho):
                assert not isinstance(v, IntervalValue) or v.width <= Fraction(1, 2**64)
