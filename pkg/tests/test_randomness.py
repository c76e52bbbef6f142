import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
import suite
from cantorlab import measures as M
from cantorlab.errors import MalformedSpec, MassBoundViolated
from cantorlab.machine import load_golden
from cantorlab.randomness import (
    CountLevel,
    StrongSolovayTest,
    check_mass_bounds,
    clopen_mass,
    dip_fixture,
    dip_report,
    dump_levels,
    dyadic_exponent,
    family_from_strings,
    levin_schnorr_family,
    lln_length,
    lln_test,
    pass_diagnostic,
    truncated_mass,
    zeros_test,
)

LLN_LENGTHS = [2, 16, 32, 48, 69, 88, 104, 128, 144, 168]


class TestMasses:
    def test_cover_removes_nested_cylinders(self):
        assert clopen_mass(M.Uniform(), ["0", "00", "01", "1"]) == 1
        assert clopen_mass(M.Uniform(), ["00", "010"]) == Fraction(3, 8)

    def test_cutoff_hides_long_strings(self):
        assert clopen_mass(M.Uniform(), ["0", "11111"], 3) == Fraction(1, 2)

    def test_count_level_matches_enumeration(self):
        lvl = CountLevel(10, frozenset({0, 1, 9, 10}))
        expected = sum((suite.MARKOV.mass(x) for x in O.words(10) if x.count("0") in lvl.zero_counts), Fraction(0))
        assert clopen_mass(suite.MARKOV, [lvl]) == expected
        assert clopen_mass(suite.B13, [lvl]) == O.binomial_tail(10, Fraction(1, 3), lvl.zero_counts)

    def test_mixed_levels_are_rejected(self):
        with pytest.raises(MalformedSpec):
            clopen_mass(M.Uniform(), ["0", CountLevel(2, frozenset({0}))])


class TestLawOfLargeNumbers:
    def test_level_lengths(self):
        assert [lln_length(m) for m in range(1, 11)] == LLN_LENGTHS

    def test_level_masses_respect_the_bound(self):
        check_mass_bounds(lln_test(), 10, 200)
        for m in range(1, 11):
            assert truncated_mass(M.Uniform(), lln_test(), m, 200) <= Fraction(1, 2**m)

    def test_biased_coin_fails(self):
        v = pass_diagnostic(suite.B13, lln_test(), 6, 200, Fraction(1, 4))
        assert v.verdict == "fails-at-level-δ"
        assert all(Fraction(1, 2) < x < Fraction(9, 10) for x in v.masses)

    def test_fair_coin_mass_decays(self):
        v = pass_diagnostic(M.Uniform(), lln_test(), 8, 200)
        assert v.verdict == "mass-decayed-below"
        assert v.epsilon == Fraction(1, 256)

    def test_wider_band_is_inconclusive_for_the_biased_coin(self):
        v = pass_diagnostic(suite.B13, lln_test(4), 6, 400, Fraction(1, 4))
        assert v.verdict == "inconclusive"

    def test_levels_past_the_cutoff_are_empty(self):
        assert truncated_mass(suite.B13, lln_test(), 3, 31) == 0

    def test_verdict_json_is_serialisable(self):
        v = pass_diagnostic(M.Uniform(), zeros_test(), 4, 4)
        doc = json.loads(json.dumps(v.to_json()))
        assert doc["masses"] == ["1/2", "1/4", "1/8", "1/16"]


class TestFamilies:
    def test_enumeration_is_monotone_in_the_cutoff(self):
        fam = levin_schnorr_family(load_golden("prefix"))
        for b in (1, 2):
            prev = []
            for t in range(4, 10):
                cur = fam.level(b, t)
                assert cur[: len(prev)] == prev
                prev = cur

    def test_levin_schnorr_mass_bound(self, lab):
        fam = levin_schnorr_family(lab, check_levels=4)
        assert fam.kind == "ML"

    def test_mass_bound_violation_is_raised(self):
        bad = family_from_strings("bad", lambda m: ["0", "1"])
        with pytest.raises(MassBoundViolated):
            check_mass_bounds(bad, 2, 4)

    def test_solovay_total_bound(self):
        fam = family_from_strings("sol", lambda m: ["1" * (m + 1)], kind="Solovay", bound=lambda m: Fraction(1))
        check_mass_bounds(fam, 8, 10)

    def test_dump_format(self):
        text = dump_levels(lln_test(), 2, 20)
        assert text.splitlines()[0].startswith("1\tcount:2:")
        assert dump_levels(zeros_test(), 2, 4) == "1\t0\n2\t00\n"


class TestStrongSolovay:
    def test_construction_checks(self):
        with pytest.raises(MalformedSpec):
            StrongSolovayTest(((4, frozenset({"0000"})), (4, frozenset({"1111"}))))
        with pytest.raises(MalformedSpec):
            StrongSolovayTest(((1, frozenset({"0", "1"})),))

    @given(st.fractions(min_value=Fraction(1, 2**40), max_value=1))
    def test_dyadic_exponent_brackets(self, q):
        f = dyadic_exponent(q)
        assert Fraction(1, 2 ** (f + 1)) < q <= Fraction(1, 2**f)

    def test_dip_report_on_the_fixture(self, lab):
        mu, sst = dip_fixture()
        rep = dip_report(mu, sst, lab)
        assert rep.fails_at_delta
        assert rep.constant == Fraction(7, 2)
        assert rep.f_series_sum == Fraction(309, 128)
        assert [(r.n, r.c_cond.hi, r.bound) for r in rep.rows] == [
            (4, 7, Fraction(7, 2)), (6, 9, Fraction(11, 2)), (8, Fraction(21, 2), Fraction(15, 2))]


class TestDocumentedExamples:
    def test_zeros_test_masses(self):
        fam = zeros_test()
        for m in range(1, 7):
            assert truncated_mass(M.Uniform(), fam, m, m) == Fraction(1, 2**m)
            assert truncated_mass(M.Uniform(), fam, m, m - 1) == 0
            assert truncated_mass(suite.DIRAC0, fam, m, m) == 1

    def test_zeros_verdicts(self):
        assert pass_diagnostic(suite.DIRAC0, zeros_test(), 10, 10).verdict == "fails-at-level-δ"
        v = pass_diagnostic(M.Uniform(), zeros_test(), 20, 20)
        assert v.verdict == "mass-decayed-below" and v.epsilon == Fraction(1, 2**20)

    def test_truncated_mass_is_convex(self):
        a = Fraction(2, 7)
        mix = M.Convex(((a, suite.B13), (1 - a, suite.MARKOV)))
        for fam, cut in ((zeros_test(), 5), (lln_test(), 40)):
            for m in (1, 2, 3):
                assert truncated_mass(mix, fam, m, cut) == (a * truncated_mass(suite.B13, fam, m, cut)
                                                            + (1 - a) * truncated_mass(suite.MARKOV, fam, m, cut))

    def test_truncation_is_monotone_in_the_cutoff(self, lab):
        fam = levin_schnorr_family(lab)
        for b in range(1, 5):
            masses = [truncated_mass(M.Uniform(), fam, b, t) for t in range(0, 13)]
            assert masses == sorted(masses)
            assert masses[-1] <= Fraction(1, 2**b)

    def test_levin_schnorr_levels_are_antichains(self, lab):
        fam = levin_schnorr_family(lab, check_levels=6)
        for b in range(1, 7):
            lvl = fam.level(b, 24)
            assert all(not (x != y and y.startswith(x)) for x in lvl for y in lvl)

    def test_dirac_zero_is_caught_by_levin_schnorr(self, lab):
        fam = levin_schnorr_family(lab)
        for b in (1, 2):
            assert truncated_mass(suite.DIRAC0, fam, b, 24) == 1

    def test_half_mass_gives_f_one(self):
        assert dyadic_exponent(Fraction(1, 2)) == 1

    def test_uniform_shows_no_dip(self, lab):
        _, sst = dip_fixture()
        rep = dip_report(M.Uniform(), sst, lab)
        assert not rep.fails_at_delta
        assert [r.f for r in rep.rows] == [3, 5, 7]
