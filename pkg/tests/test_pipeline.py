import dataclasses
import datetime as dt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rainclaims.errors import DataError
from rainclaims.ga import GaConfig
from rainclaims.ingest import WeeklyRecord, WeeklySeries, build_claims_features
from rainclaims.kernels import KernelSpec
from rainclaims.pipeline import (
    delta,
    fit_two_stage,
    predict_batch,
    project,
    project_report,
    split_subperiods,
)
from rainclaims.svr import SvrHyperparams
from rainclaims.synth import SynthConfig, generate_synthetic

TIGHT = SvrHyperparams(c=1000.0, epsilon=1e-3, kernel=KernelSpec("rbf", 2.0))


def strip_targets(series: WeeklySeries, label="scenario", factor=1.0, shift_to=None) -> WeeklySeries:
    """Precipitation-only copy, optionally scaled and re-anchored in time."""
    records = []
    for i, r in enumerate(series.records):
        start = r.week_start if shift_to is None else shift_to + dt.timedelta(weeks=i)
        records.append(
            WeeklyRecord(
                week_start=start,
                total_precip=r.total_precip * factor,
                max_precip=r.max_precip * factor,
            )
        )
    return WeeklySeries(records=tuple(records), label=label)


@pytest.fixture(scope="module")
def memorizing_model(noiseless_series):
    return fit_two_stage(noiseless_series, kind="svr", svr_hyperparams=TIGHT)


class TestFitTwoStage:
    def test_noiseless_stage_one_recovery(self, noiseless_series, memorizing_model):
        fs = build_claims_features(noiseless_series)
        preds = predict_batch(memorizing_model.claims_model, fs.x)
        scaled_rmse = np.sqrt(np.mean((preds - fs.y) ** 2)) / np.std(fs.y)
        assert scaled_rmse < 1e-2

    def test_stage_two_gets_one_more_feature(self, memorizing_model):
        assert (
            memorizing_model.loss_model.n_features
            == memorizing_model.claims_model.n_features + 1
        )

    def test_fixed_path_records_zero_evaluations(self, memorizing_model):
        assert memorizing_model.provenance.mode == "fixed"
        assert memorizing_model.provenance.claims_evaluations == 0
        assert memorizing_model.provenance.loss_evaluations == 0

    def test_ga_path_records_evaluations(self, small_series):
        config = GaConfig(population_size=4, generations=3, seed=0)
        model = fit_two_stage(small_series, kind="ga-svr", ga_config=config)
        assert model.provenance.claims_evaluations == 12
        assert model.provenance.loss_evaluations == 12

    def test_control_summary_uses_lagged_weeks(self, noiseless_series, memorizing_model):
        fs = build_claims_features(noiseless_series)
        assert memorizing_model.control.weeks == len(fs.y) == len(noiseless_series) - 1
        assert memorizing_model.control.claims_sum == pytest.approx(np.sum(fs.y))

    def test_unknown_kind(self, small_series):
        with pytest.raises(ValueError, match="kind"):
            fit_two_stage(small_series, kind="forest")


class TestProject:
    def test_replay_equals_in_sample_predictions(self, noiseless_series, memorizing_model):
        fs = build_claims_features(noiseless_series)
        weeks, n_hat, l_hat = project(memorizing_model, strip_targets(noiseless_series))
        in_sample = np.clip(predict_batch(memorizing_model.claims_model, fs.x), 0.0, None)
        np.testing.assert_allclose(n_hat, in_sample, rtol=1e-12)
        assert weeks == fs.week_starts

    def test_all_zero_precipitation_constant_clamped(self, memorizing_model):
        start = dt.date(2021, 1, 4)
        records = tuple(
            WeeklyRecord(week_start=start + dt.timedelta(weeks=i), total_precip=0.0, max_precip=0.0)
            for i in range(8)
        )
        _, n_hat, l_hat = project(memorizing_model, WeeklySeries(records=records, label="dry"))
        np.testing.assert_allclose(n_hat, n_hat[0], rtol=1e-12)
        assert np.all(n_hat >= 0.0) and np.all(l_hat >= 0.0)

    def test_pipeline_equals_manual_composition(self, noiseless_series, memorizing_model):
        scenario = strip_targets(noiseless_series, factor=1.1)
        from rainclaims.ingest import precip_features

        x, _ = precip_features(scenario)
        n_manual = np.clip(predict_batch(memorizing_model.claims_model, x), 0.0, None)
        l_manual = np.clip(
            predict_batch(memorizing_model.loss_model, np.column_stack([x, n_manual])), 0.0, None
        )
        _, n_hat, l_hat = project(memorizing_model, scenario)
        np.testing.assert_array_equal(n_hat, n_manual)
        np.testing.assert_array_equal(l_hat, l_manual)

    def test_predictions_non_negative(self, small_series):
        model = fit_two_stage(small_series, kind="svr")
        scenario = strip_targets(small_series, factor=0.1)
        _, n_hat, l_hat = project(model, scenario)
        assert np.all(n_hat >= 0.0) and np.all(l_hat >= 0.0)

    def test_claims_model_swap_moves_loss(self, noiseless_series, memorizing_model):
        scenario = strip_targets(noiseless_series)
        _, _, l_base = project(memorizing_model, scenario)
        bumped = dataclasses.replace(
            memorizing_model,
            claims_model=dataclasses.replace(
                memorizing_model.claims_model, bias=memorizing_model.claims_model.bias + 1.0
            ),
        )
        _, _, l_bumped = project(bumped, scenario)
        assert np.max(np.abs(l_bumped - l_base)) > 0.0


class TestSplitSubperiods:
    def test_six_decades(self):
        periods = split_subperiods(2021, 2080, 10)
        assert len(periods) == 6
        assert periods[0].label == "2021-2030"
        assert periods[-1].label == "2071-2080"
        assert periods[3].start_year == 2051 and periods[3].end_year == 2060

    def test_single_period(self):
        periods = split_subperiods(2021, 2030, 10)
        assert len(periods) == 1

    def test_non_divisible_span(self):
        with pytest.raises(DataError, match="not divisible"):
            split_subperiods(2021, 2075, 10)


class TestDelta:
    def test_no_change(self):
        assert delta(200.0, 200.0) == 0.0

    def test_fifteen_percent(self):
        assert delta(230.0, 200.0) == pytest.approx(15.0, abs=1e-12)

    def test_halving(self):
        assert delta(100.0, 200.0) == -50.0

    def test_zero_control(self):
        with pytest.raises(DataError, match="positive"):
            delta(100.0, 0.0)

    @given(st.floats(1e-6, 1e12))
    def test_identity(self, s):
        assert delta(s, s) == 0.0


class TestProjectReport:
    def test_replay_deltas_near_zero(self, noiseless_series, memorizing_model):
        scenario = strip_targets(noiseless_series, label="replay")
        results = project_report(memorizing_model, [scenario])
        assert len(results) == 1
        for d in results[0].deltas:
            assert abs(d.delta_claims_pct) < 1.0
            assert abs(d.delta_loss_pct) < 1.0

    def test_two_scenarios_ordered(self, noiseless_series, memorizing_model):
        s1 = strip_targets(noiseless_series, label="first")
        s2 = strip_targets(noiseless_series, label="second", factor=1.05)
        results = project_report(memorizing_model, [s1, s2])
        assert [r.scenario for r in results] == ["first", "second"]

    def test_weeks_reported(self, noiseless_series, memorizing_model):
        results = project_report(memorizing_model, [strip_targets(noiseless_series)])
        d = results[0].deltas[0]
        assert d.weeks_control == memorizing_model.control.weeks
        assert abs(d.weeks_scenario - d.weeks_control) <= 1

    def test_uniform_precipitation_increase_raises_claims(self):
        # monotone world: every claim coefficient is non-negative
        series = generate_synthetic(SynthConfig(weeks=120, seed=13, noise_level=0.1))
        model = fit_two_stage(series, kind="svr", svr_hyperparams=SvrHyperparams(
            c=100.0, epsilon=0.05, kernel=KernelSpec("rbf", 2.0)))
        base = project_report(model, [strip_targets(series, label="base")])
        wet = project_report(model, [strip_targets(series, label="wet", factor=2.0)])
        for b, w in zip(base[0].deltas, wet[0].deltas):
            assert w.delta_claims_pct > b.delta_claims_pct
