import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mutrate.bounds import (
    Budgets,
    ReadBoundParams,
    equal_budgets,
    hoeffding_tail,
    mcdiarmid_tail,
    min_deviation_sequence,
    required_deviation_reads,
    success_probability,
)


class TestTails:
    def test_hand_value(self):
        # n=100 unit widths, t=10: 2 exp(-2 * 100 / 100)
        assert hoeffding_tail(10, 1, 100) == pytest.approx(2 * math.exp(-2))

    def test_capped_at_one(self):
        assert hoeffding_tail(0.001, 1, 100) == 1.0

    def test_zero_deviation(self):
        assert hoeffding_tail(0.0, 1, 100) == 1.0

    def test_zero_widths(self):
        # a constant sum never deviates
        assert hoeffding_tail(0.5, 0, 100) == 0.0

    def test_per_term_widths(self):
        assert hoeffding_tail(3, [1.0, 2.0, 2.0]) == pytest.approx(
            min(1.0, 2 * math.exp(-2 * 9 / 9))
        )

    def test_mcdiarmid_same_form(self):
        assert mcdiarmid_tail(4, 0.5, 64) == hoeffding_tail(4, 0.5, 64)

    def test_negative_deviation_rejected(self):
        with pytest.raises(ValueError):
            hoeffding_tail(-1, 1, 10)

    @given(
        st.floats(0.001, 100),
        st.floats(0.01, 10),
        st.integers(1, 10_000),
    )
    @settings(max_examples=80)
    def test_valid_probability_and_monotone(self, t, w, n):
        v = hoeffding_tail(t, w, n)
        assert 0.0 <= v <= 1.0
        assert hoeffding_tail(2 * t, w, n) <= v  # bigger deviation, smaller tail


class TestMinDeviation:
    def test_hand_value(self):
        # sqrt(1.5 / (p^2 eps^2 G)) at p=0.01, eps=0.1, G=1e4
        got = min_deviation_sequence(0.01, 0.1, 1e4)
        assert got == pytest.approx(math.sqrt(1.5) / (0.01 * 0.1 * 100))

    def test_scales_inverse_sqrt_length(self):
        a = min_deviation_sequence(0.1, 0.1, 1e4)
        b = min_deviation_sequence(0.1, 0.1, 4e4)
        assert a / b == pytest.approx(2.0)

    def test_scales_inverse_rate(self):
        a = min_deviation_sequence(0.05, 0.1, 1e6)
        b = min_deviation_sequence(0.10, 0.1, 1e6)
        assert a / b == pytest.approx(2.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            min_deviation_sequence(0.0, 0.1, 1e4)
        with pytest.raises(ValueError):
            min_deviation_sequence(0.1, 0.0, 1e4)
        with pytest.raises(ValueError):
            min_deviation_sequence(0.1, 0.1, 0)


class TestBudgets:
    def test_equal_split(self):
        b = equal_budgets(1e-3)
        assert b.c1 == b.c2 == b.c3 == pytest.approx(math.log(6000))

    def test_success_probability(self):
        assert success_probability(equal_budgets(1e-3)) == pytest.approx(0.999)

    def test_success_floors_at_zero(self):
        assert success_probability(Budgets(0.01, 0.01, 0.01)) == 0.0

    def test_domain(self):
        with pytest.raises(ValueError):
            equal_budgets(0.0)
        with pytest.raises(ValueError):
            equal_budgets(1.5)


def std_params(**overrides):
    base = dict(seq_len=1e7, num_reads=1e6, rate=0.2, error_rate=0.03, rel_tol=0.1)
    base.update(overrides)
    return ReadBoundParams(**base)


class TestRequiredDeviation:
    def test_reference_point(self):
        d = required_deviation_reads(std_params(), equal_budgets(1e-3))
        assert d == pytest.approx(0.112, abs=0.01)

    def test_zero_noise_closed_form(self):
        # with s = 0 the fixed point loses its self-referential term
        p = std_params(error_rate=0.0)
        b = equal_budgets(1e-3)
        d = required_deviation_reads(p, b)
        direct = (3 / (4 * p.rate * p.rel_tol)) * (
            math.sqrt(b.c2 / (2 * p.num_reads)) + math.sqrt(b.c1 / (2 * p.seq_len))
        ) + math.sqrt(b.c3 / (2 * p.num_reads))
        assert d == pytest.approx(direct, abs=1e-12)

    def test_monotone_in_data_volume(self):
        b = equal_budgets(1e-3)
        d_small = required_deviation_reads(std_params(num_reads=1e5), b)
        d_large = required_deviation_reads(std_params(num_reads=1e7), b)
        assert d_large < d_small

    def test_monotone_in_confidence(self):
        d_loose = required_deviation_reads(std_params(), equal_budgets(1e-2))
        d_tight = required_deviation_reads(std_params(), equal_budgets(1e-6))
        assert d_loose < d_tight

    def test_monotone_in_noise(self):
        b = equal_budgets(1e-3)
        d_clean = required_deviation_reads(std_params(error_rate=0.0), b)
        d_noisy = required_deviation_reads(std_params(error_rate=0.1), b)
        assert d_clean < d_noisy

    def test_domain(self):
        with pytest.raises(ValueError):
            std_params(rate=0.8)
        with pytest.raises(ValueError):
            std_params(error_rate=0.75)
        with pytest.raises(ValueError):
            std_params(rel_tol=0.0)
        with pytest.raises(ValueError):
            std_params(num_reads=0)
