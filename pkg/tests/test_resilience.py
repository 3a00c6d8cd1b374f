import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone

from helpers import arima_levels, random_walk_levels, trend_stationary_levels
from welfare_resilience import AnalysisConfig, LevelSeries
from welfare_resilience.arma import ArmaParams, ArmaSpec
from welfare_resilience.exceptions import DegenerateSeries, InvalidInput, InvalidSigma, SeriesTooShort
from welfare_resilience.resilience import (
    ResilienceAnalyzer,
    classify_values,
    nonparametric_profile,
    persistence,
    persistence_category,
    profile,
    relative_volatility,
    trend_category,
)


class TestMetrics:
    def test_rho_zero_at_twice_trend(self):
        assert relative_volatility(10.0, 20.0) == 0.0
        assert relative_volatility(-2.5, 5.0) == 0.0

    def test_rho_formula(self):
        assert relative_volatility(10.0, 50.0) == pytest.approx(1.5)

    def test_rho_infinite_for_flat_trend(self):
        assert relative_volatility(0.0, 3.0) == math.inf

    def test_rho_rejects_bad_sigma(self):
        for s in (0.0, -1.0, math.nan):
            with pytest.raises(InvalidSigma):
                relative_volatility(1.0, s)

    @given(st.floats(0.01, 1e3), st.floats(0.01, 1e3), st.floats(0.01, 1e3))
    def test_rho_increases_with_sigma(self, g, s1, s2):
        if s1 == s2:
            return
        lo, hi = sorted((s1, s2))
        assert relative_volatility(g, lo) < relative_volatility(g, hi)

    def test_persistence_is_coefficient_sum(self):
        assert persistence(ArmaParams(0.0, (0.5, -0.2), (0.1,), 1.0)) == pytest.approx(0.4)
        assert persistence(ArmaParams(0.0, (), (), 1.0)) == 0.0

    def test_persistence_category(self):
        assert persistence_category(0.0, ArmaSpec(0, 0)) == "random"
        assert persistence_category(-1e-9, ArmaSpec(1, 0)) == "anti-persistent"
        assert persistence_category(0.3) == "persistent"

    def test_trend_category(self):
        assert trend_category(2.0, 0.5) == "improving"
        assert trend_category(-2.0, 0.5) == "deteriorating"
        assert trend_category(0.5, 0.5) == "neutral"
        # 1.96 sits on either side of the two-sided 5% and 10% critical values
        assert trend_category(1.8, 1.0, alpha=0.05) == "neutral"
        assert trend_category(1.8, 1.0, alpha=0.10) == "improving"
        with pytest.raises(InvalidInput):
            trend_category(1.0, 0.0)


@pytest.mark.parametrize(
    "trend,pi,rho",
    list(itertools.product(["improving", "neutral", "deteriorating"], [-0.4, 0.0, 0.4], [-0.5, 0.5])),
)
def test_truth_table(trend, pi, rho):
    c = classify_values(trend, pi, rho)
    ok = trend != "deteriorating"
    assert c.resilient == (ok and pi < 0)
    assert c.resistant == (ok and rho < 0)
    assert c.rationale == {"non_deteriorating": ok, "anti_persistent": pi < 0, "not_volatile": rho < 0}


def test_boundary_pi_is_not_resilient():
    assert not classify_values("improving", -1e-9, -0.5).resilient
    assert classify_values("improving", -1e-3, -0.5).resilient


def test_unknown_trend():
    with pytest.raises(InvalidInput):
        classify_values("sideways", 0.0, 0.0)


class TestProfile:
    def test_anti_persistent_series(self):
        prof = profile(arima_levels(-0.5, seed=1))
        assert prof.pi < 0
        assert prof.trend_category == "improving"
        assert prof.classification.resilient

    def test_fields(self):
        s = arima_levels(0.5, seed=2)
        prof = profile(s)
        assert prof.n_levels == 200
        assert prof.level == pytest.approx(np.mean(s.values))
        assert prof.rho == pytest.approx(prof.sigma / (2 * abs(prof.trend_g)) - 1)
        assert prof.ljung_box.lags == 10
        assert prof.adf_levels is not None and prof.adf_increments is not None
        assert prof.residual_stats.n == 199
        assert prof.fit.spec == prof.selected_spec

    def test_random_walk_majority_zero_order(self):
        profiles = [profile(random_walk_levels(seed=s)) for s in range(30)]
        zero = [p for p in profiles if p.selected_spec == ArmaSpec(0, 0)]
        assert len(zero) > 15
        for p in zero:
            assert p.pi == 0.0
            assert p.persistence_category == "random"
            assert not p.classification.resilient

    def test_constant_increments(self):
        with pytest.raises(DegenerateSeries):
            profile(LevelSeries.from_values(3.0 * np.arange(30)))

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            profile(LevelSeries.from_values(np.arange(10.0) ** 2))

    def test_short_series_skips_adf(self):
        prof = profile(arima_levels(-0.5, n=15, seed=3))
        assert "adf-levels-skipped" in prof.warnings
        assert "short-series" in prof.warnings
        assert prof.adf_levels is None

    def test_sample_window(self):
        s = arima_levels(-0.5, seed=4, unit="X")
        s = LevelSeries("X", s.times + 1961, s.values)
        cfg = AnalysisConfig(sample_windows={"X": (1990, None)})
        prof = profile(s, cfg)
        assert prof.n_levels == s.times[-1] - 1990 + 1
        with pytest.raises(SeriesTooShort):
            profile(s, AnalysisConfig(sample_windows={"X": (1961, 1962)}))

    def test_sign_rule(self):
        s = arima_levels(0.0, g=0.5, sigma=50.0, seed=5)
        prof = profile(s, AnalysisConfig(trend_rule="sign"))
        assert prof.trend_category == ("improving" if prof.trend_g > 0 else "deteriorating")

    def test_deterministic_trend_is_anti_persistent(self):
        prof = profile(trend_stationary_levels(seed=6))
        assert prof.pi < -0.5
        assert prof.classification.resilient


@pytest.mark.parametrize("seed", range(20))
def test_scale_and_translation_equivariance(seed):
    s = arima_levels(-0.3, g=5.0, sigma=20.0, n=120, seed=seed)
    base = profile(s)
    c = 3.7
    scaled = profile(LevelSeries(s.unit_id, s.times, c * s.values))
    assert scaled.level == pytest.approx(c * base.level, rel=1e-6)
    assert scaled.trend_g == pytest.approx(c * base.trend_g, rel=1e-6)
    assert scaled.sigma == pytest.approx(c * base.sigma, rel=1e-6)
    assert scaled.rho == pytest.approx(base.rho, abs=1e-6)
    assert scaled.pi == pytest.approx(base.pi, abs=1e-6)
    assert scaled.trend_category == base.trend_category
    assert scaled.classification == base.classification

    shifted = profile(LevelSeries(s.unit_id, s.times, s.values + 500.0))
    assert shifted.level == pytest.approx(base.level + 500.0, rel=1e-9)
    for name in ("trend_g", "sigma", "rho", "pi"):
        assert getattr(shifted, name) == pytest.approx(getattr(base, name), abs=1e-6)


class TestNonparametric:
    def test_constant_increments(self):
        np_prof = nonparametric_profile(LevelSeries.from_values(4.0 * np.arange(20)))
        assert np_prof.g_np == 4.0 and np_prof.sigma_np == 0.0

    def test_white_noise(self):
        np_prof = nonparametric_profile(random_walk_levels(n=501, seed=7))
        assert abs(np_prof.pi_np) < 0.1

    def test_ar1_lag_one(self):
        np_prof = nonparametric_profile(arima_levels(0.6, n=2001, seed=8))
        assert np_prof.pi_np == pytest.approx(0.6, abs=0.05)

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            nonparametric_profile(LevelSeries.from_values(np.arange(5.0)))

    @pytest.mark.parametrize("beta", [-0.5, -0.3, 0.3, 0.5])
    def test_sign_agreement_with_parametric(self, beta):
        agree = 0
        for seed in range(40):
            s = arima_levels(beta, g=1.0, sigma=5.0, n=501, seed=seed)
            agree += np.sign(profile(s).pi) == np.sign(nonparametric_profile(s).pi_np)
        assert agree >= 38


class TestAnalyzer:
    def test_clone(self):
        a = ResilienceAnalyzer(max_p=1, alpha_trend=0.1, trend_rule="sign")
        b = clone(a)
        assert b.get_params() == a.get_params()

    def test_fit_transform_predict(self):
        X = np.vstack([arima_levels(b, seed=i).values for i, b in enumerate([-0.5, 0.5, -0.5])])
        a = ResilienceAnalyzer()
        F = a.fit_transform(X)
        assert F.shape == (3, 5)
        assert list(a.get_feature_names_out()) == ["level", "g", "sigma", "rho", "pi"]
        assert len(a.profiles_) == 3
        flags = a.predict(X)
        assert flags.tolist() == [c.resilient for c in a.classifications_]
        np.testing.assert_allclose(a.transform(X), F)

    def test_accepts_mapping(self):
        a = ResilienceAnalyzer().fit({"A": arima_levels(-0.5, seed=1), "B": arima_levels(0.5, seed=2).values})
        assert [p.unit_id for p in a.profiles_] == ["u", "B"]

    def test_transform_requires_fit(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            ResilienceAnalyzer().transform(np.arange(30.0))

    def test_invalid_params_fail_at_fit(self):
        with pytest.raises(InvalidInput):
            ResilienceAnalyzer(aic_variant="bic").fit(arima_levels(seed=0).values)
