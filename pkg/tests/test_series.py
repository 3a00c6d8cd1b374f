import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from welfare_resilience.exceptions import (
    DegenerateInput,
    EmptyInput,
    InvalidInput,
    LagTooLarge,
    LengthMismatch,
    SeriesTooShort,
)
from welfare_resilience.series import (
    IncrementSeries,
    LevelSeries,
    acf,
    describe,
    difference,
    spearman,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def brute_ranks(x):
    """Average ranks by counting, independent of any sorting routine."""
    return [sum(1 for b in x if b < a) + (sum(1 for b in x if b == a) + 1) / 2 for a in x]


def brute_pearson(a, b):
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    num = sum((u - ma) * (v - mb) for u, v in zip(a, b))
    den = math.sqrt(sum((u - ma) ** 2 for u in a) * sum((v - mb) ** 2 for v in b))
    return num / den


class TestLevelSeries:
    def test_from_values(self):
        s = LevelSeries.from_values([1.0, 2.0, 4.0], unit_id="A", start=1990)
        assert s.times.tolist() == [1990, 1991, 1992]
        assert len(s) == 3

    def test_arrays_are_read_only(self):
        s = LevelSeries.from_values([1.0, 2.0, 4.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0

    def test_input_is_copied(self):
        v = np.array([1.0, 2.0, 3.0])
        s = LevelSeries.from_values(v)
        v[0] = 99.0
        assert s.values[0] == 1.0

    @pytest.mark.parametrize("values", [[], [1.0]])
    def test_too_short(self, values):
        with pytest.raises(SeriesTooShort):
            LevelSeries.from_values(values)

    def test_gap_rejected(self):
        with pytest.raises(InvalidInput):
            LevelSeries("A", [1, 2, 4], [1.0, 2.0, 3.0])

    def test_unsorted_rejected(self):
        with pytest.raises(InvalidInput):
            LevelSeries("A", [2, 1, 3], [1.0, 2.0, 3.0])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            LevelSeries("A", [1, 2], [1.0, 2.0, 3.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            LevelSeries.from_values([1.0, np.nan, 3.0])

    def test_window(self):
        s = LevelSeries.from_values(np.arange(10.0), start=2000)
        w = s.window(2003, 2005)
        assert w.times.tolist() == [2003, 2004, 2005]
        assert w.values.tolist() == [3.0, 4.0, 5.0]
        assert s.window(None, 2001).times.tolist() == [2000, 2001]


def test_difference():
    s = LevelSeries.from_values([1.0, 4.0, 9.0, 16.0], start=5)
    d = difference(s)
    assert isinstance(d, IncrementSeries)
    assert d.values.tolist() == [3.0, 5.0, 7.0]
    assert d.times.tolist() == [6, 7, 8]


@given(st.lists(finite, min_size=2, max_size=60))
def test_difference_cumsum_round_trip(values):
    s = LevelSeries.from_values(values)
    d = difference(s)
    rebuilt = np.r_[s.values[0], s.values[0] + np.cumsum(d.values)]
    scale = max(1.0, float(np.max(np.abs(s.values))))
    assert np.max(np.abs(rebuilt - s.values)) <= 1e-9 * scale * len(values)


class TestDescribe:
    def test_against_brute_force_moments(self):
        x = [2.0, -1.0, 3.5, 0.25, 7.0, 4.0, -2.5]
        n = len(x)
        m = sum(x) / n
        m2 = sum((v - m) ** 2 for v in x) / n
        m3 = sum((v - m) ** 3 for v in x) / n
        m4 = sum((v - m) ** 4 for v in x) / n
        d = describe(x)
        assert d.n == n
        assert d.mean == pytest.approx(m, rel=1e-12)
        assert d.sd == pytest.approx(math.sqrt(m2 * n / (n - 1)), rel=1e-12)
        assert d.skewness == pytest.approx(m3 / m2**1.5, rel=1e-12)
        assert d.excess_kurtosis == pytest.approx(m4 / m2**2 - 3.0, rel=1e-12)

    def test_constant_sample(self):
        d = describe([3.0, 3.0, 3.0, 3.0])
        assert d.sd == 0.0
        assert d.skewness is None and d.excess_kurtosis is None

    def test_small_samples_leave_moments_undefined(self):
        assert describe([1.0, 2.0]).skewness is None
        assert describe([1.0, 2.0, 4.0]).excess_kurtosis is None

    def test_empty(self):
        with pytest.raises(EmptyInput):
            describe([])

    @given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=30), st.randoms())
    def test_permutation_invariance(self, x, rnd):
        y = list(x)
        rnd.shuffle(y)
        a, b = describe(x), describe(y)
        assert a.mean == pytest.approx(b.mean, abs=1e-9)
        assert a.sd == pytest.approx(b.sd, abs=1e-9)
        if a.skewness is not None and a.sd > 1e-3:
            assert a.skewness == pytest.approx(b.skewness, abs=1e-6)
            assert a.excess_kurtosis == pytest.approx(b.excess_kurtosis, abs=1e-6)


class TestAcf:
    def test_lag_zero_is_one(self):
        r = acf([1.0, 3.0, 2.0, 5.0, 4.0], 2)
        assert r[0] == 1.0
        assert r.lags.tolist() == [0, 1, 2]

    def test_against_formula(self):
        x = np.array([1.0, 3.0, 2.0, 5.0, 4.0, 6.0])
        d = x - x.mean()
        expected = sum(d[i] * d[i - 2] for i in range(2, 6)) / sum(d**2)
        assert acf(x, 2)[2] == pytest.approx(expected, rel=1e-12)

    def test_lag_too_large(self):
        with pytest.raises(LagTooLarge):
            acf([1.0, 2.0, 3.0], 2)

    def test_constant(self):
        with pytest.raises(DegenerateInput):
            acf([2.0, 2.0, 2.0, 2.0], 1)

    def test_white_noise_band(self):
        x = np.random.default_rng(3).normal(size=2000)
        assert np.all(np.abs(acf(x, 10).coefficients[1:]) < 0.1)

    @given(st.lists(st.floats(-100, 100), min_size=5, max_size=40), st.floats(-1e3, 1e3))
    @settings(max_examples=60)
    def test_bounded_and_shift_invariant(self, x, c):
        x = np.asarray(x)
        if np.ptp(x) < 1e-3:
            return
        r = acf(x, 3).coefficients
        assert np.all(np.abs(r) <= 1.0)
        np.testing.assert_allclose(acf(x + c, 3).coefficients, r, atol=1e-6)


class TestSpearman:
    def test_monotone(self):
        assert spearman([1, 2, 3], [10, 20, 30]) == 1.0
        assert spearman([1, 2, 3], [30, 20, 10]) == -1.0

    def test_tie_against_rank_oracle(self):
        x = [3.0, 1.0, 4.0, 1.5, 5.0, 9.0]
        y = [2.0, 7.0, 1.0, 8.0, 2.0, 8.5]  # tie in y
        expected = brute_pearson(brute_ranks(x), brute_ranks(y))
        assert spearman(x, y) == pytest.approx(expected, rel=1e-12)

    def test_constant(self):
        with pytest.raises(DegenerateInput):
            spearman([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            spearman([1, 2, 3], [1, 2])

    @given(st.lists(st.tuples(finite, finite), min_size=3, max_size=30))
    def test_range_and_symmetry(self, pairs):
        x, y = map(list, zip(*pairs))
        if len(set(x)) < 2 or len(set(y)) < 2:
            return
        r = spearman(x, y)
        assert -1.0 <= r <= 1.0
        assert spearman(y, x) == pytest.approx(r, abs=1e-12)
