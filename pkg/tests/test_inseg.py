from fractions import Fraction

import pytest

import oracles as O
import suite
from cantorlab import measures as M
from cantorlab.errors import TailUncertifiable
from cantorlab.inseg import (
    avg_complexity,
    dimension_profile,
    first_envelope_checkpoint,
    growth_and_triviality_profile,
    inequality_suite,
    length_complexity,
    slow_growth_envelope,
)
from cantorlab.interval import IntervalValue

AVG_K_UNIFORM = ["4", "7", "8", "11", "12", "415/32", "447/32", "2167/128", "1149/64"]
AVG_C_UNIFORM = ["3", "4", "5", "6", "7", "8", "9", "1279/128", "1407/128"]


def brute_average(lab_value, mass, n):
    return sum((lab_value(x) * mass(x) for x in O.words(n)), Fraction(0))


class TestAverages:
    def test_uniform_values_are_frozen(self, lab):
        for n in range(9):
            assert avg_complexity(M.Uniform(), n, lab, "K") == IntervalValue.point(Fraction(AVG_K_UNIFORM[n]))
            assert avg_complexity(M.Uniform(), n, lab, "C") == IntervalValue.point(Fraction(AVG_C_UNIFORM[n]))

    @pytest.mark.parametrize("spec", [suite.B13, suite.MARKOV, suite.MIX, M.SigmaMixture(), M.TrivialMixture()],
                             ids=lambda s: type(s).__name__)
    def test_matches_full_summation(self, lab, spec):
        for n in range(9):
            assert avg_complexity(spec, n, lab, "K").lo == brute_average(lab.K, spec.mass, n)
            assert avg_complexity(spec, n, lab, "C|n").lo == brute_average(lambda x: lab.plain.cond_value(x, "n"), spec.mass, n)

    def test_dirac_average_is_a_single_value(self, lab):
        assert avg_complexity(suite.DIRAC0, 6, lab) == IntervalValue.point(lab.K("0" * 6))

    def test_renewal_average_is_an_enclosure(self, lab):
        v = avg_complexity(M.Renewal(4), 6, lab, "K")
        assert 0 < v.width < Fraction(1, 2**64)

    def test_depth_ceiling(self, lab):
        with pytest.raises(TailUncertifiable):
            avg_complexity(M.Uniform(), 25, lab)

    def test_length_complexity(self, lab):
        assert length_complexity(lab, "K", 3) == 11
        assert length_complexity(lab, "C", 3) == 6
        assert length_complexity(lab, "C|n", 3) <= 6


class TestProfiles:
    def test_uniform_has_bounded_growth_deficit(self, lab):
        prof = growth_and_triviality_profile(M.Uniform(), 8, lab)
        assert prof.max_k_growth() == Fraction(129, 32)
        assert prof.maximal_growth_trend and not prof.triviality_trend

    def test_trivial_mixture_is_flagged_trivial(self, lab):
        prof = growth_and_triviality_profile(M.TrivialMixture(), 8, lab)
        assert prof.max_k_triviality() == Fraction(765, 256)
        assert prof.triviality_trend and not prof.maximal_growth_trend

    def test_sigma_mixture_is_flagged_as_growing(self, lab):
        prof = growth_and_triviality_profile(M.SigmaMixture(), 8, lab)
        assert prof.maximal_growth_trend and not prof.triviality_trend

    def test_dirac_zero_is_trivial(self, lab):
        prof = growth_and_triviality_profile(suite.DIRAC0, 8, lab)
        assert prof.max_k_triviality() == 0 and prof.triviality_trend

    def test_profile_has_one_row_per_n(self, lab):
        prof = growth_and_triviality_profile(suite.B13, 6, lab)
        assert [r.n for r in prof.rows] == list(range(7))
        for r in prof.rows:
            assert r.k_growth.lo <= r.n + r.k_n

    def test_dimension_rates(self, lab):
        rows = dimension_profile(M.Uniform(), 8, lab)
        assert rows[-1].k_rate == IntervalValue.point(Fraction(1149, 64 * 8))
        assert all(r.c_rate.lo > 0 for r in rows)


class TestInequalities:
    def test_compare_constant_on_small_suite(self, lab):
        rep = inequality_suite([("U", M.Uniform()), ("B", suite.B13), ("D", suite.DIRAC0)], 8, lab)
        assert rep.compare_constant == -3
        assert rep.upgrade_constant == 11
        for _, _, lhs, rhs in rep.compare_rows:
            assert lhs.hi <= rhs.lo + rep.compare_constant

    def test_upgrade_rows_respect_their_constant(self, lab):
        rep = inequality_suite([M.Uniform()], 4, lab)
        assert all(lhs <= rhs + rep.upgrade_constant for _, lhs, rhs in rep.upgrade_rows)


class TestEnvelope:
    def test_rows_are_exact_checkpoints(self):
        rows = slow_growth_envelope(8)
        assert [r.n for r in rows] == [2 ** (k + 4) for k in range(9)]
        assert rows[0].weight == Fraction(1, 6)

    def test_envelope_first_holds_late(self):
        rows = slow_growth_envelope(20)
        assert not any(r.holds for r in rows[:9])
        assert first_envelope_checkpoint() == 12
        # float cross-check of the exact comparison
        for r in rows:
            assert r.holds == (r.bound <= r.target)
