"""Two-stage modeling and scenario projection.

Stage 1 maps weekly precipitation features to the claims rate; stage 2 maps
the same features plus the claims rate to the aggregate loss. Projection runs
stage 1 on scenario precipitation, clamps predictions at zero, feeds them into
stage 2, and reports percentage changes of sub-period totals against the
observed control totals.
"""

from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .ann import AnnModel, AnnTrainConfig, ann_predict, ann_train
from .errors import DataError
from .ga import GaConfig, GaResult, GenerationStats, ga_run
from .ingest import WeeklySeries, build_claims_features, build_loss_features, precip_features
from .svr import SvrHyperparams, SvrModel, default_rbf_hyperparams, svr_fit, svr_predict

logger = logging.getLogger(__name__)

KIND_GA_SVR = "ga-svr"
KIND_SVR = "svr"
KIND_ANN = "ann"
MODEL_KINDS = (KIND_GA_SVR, KIND_SVR, KIND_ANN)


def predict_batch(model, x: np.ndarray) -> np.ndarray:
    """Dispatch prediction for either regressor type."""
    if isinstance(model, SvrModel):
        return np.atleast_1d(svr_predict(model, x))
    if isinstance(model, AnnModel):
        return ann_predict(model, x)
    raise TypeError(f"unsupported model type {type(model).__name__}")


@dataclass(frozen=True)
class ControlSummary:
    """Observed totals over the control weeks the model was trained on."""

    claims_sum: float
    loss_sum: float
    weeks: int
    years: int
    label: str


@dataclass(frozen=True)
class TuningProvenance:
    mode: str  # "ga", "fixed" or "ann"
    claims_evaluations: int = 0
    loss_evaluations: int = 0
    claims_result: GaResult | None = None
    loss_result: GaResult | None = None


@dataclass(frozen=True)
class TwoStageModel:
    claims_model: SvrModel | AnnModel
    loss_model: SvrModel | AnnModel
    provenance: TuningProvenance
    control: ControlSummary

    def __post_init__(self):
        if self.loss_model.n_features != self.claims_model.n_features + 1:
            raise ValueError(
                "loss model must take one more feature (the claims rate) than the claims model"
            )


@dataclass(frozen=True)
class SubPeriod:
    label: str
    start_year: int
    end_year: int


@dataclass(frozen=True)
class SubPeriodDelta:
    period: SubPeriod
    delta_claims_pct: float
    delta_loss_pct: float
    weeks_scenario: int
    weeks_control: int


@dataclass(frozen=True)
class ProjectionResult:
    scenario: str
    deltas: tuple[SubPeriodDelta, ...]
    week_starts: tuple[dt.date, ...] = field(default_factory=tuple)
    claims_hat: np.ndarray | None = None
    loss_hat: np.ndarray | None = None


def fit_two_stage(
    control: WeeklySeries,
    kind: str = KIND_GA_SVR,
    svr_hyperparams: SvrHyperparams | None = None,
    ga_config: GaConfig | None = None,
    ann_config: AnnTrainConfig | None = None,
    ann_hidden: int = 2,
    on_claims_generation=None,
    on_loss_generation=None,
) -> TwoStageModel:
    """Fit both stages on a control series carrying claims and loss targets."""
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    claims_fs = build_claims_features(control)
    loss_fs = build_loss_features(control, claims_fs.y)

    if kind == KIND_ANN:
        config = ann_config or AnnTrainConfig()
        claims_model = ann_train(claims_fs.x, claims_fs.y, hidden=ann_hidden, config=config)
        loss_model = ann_train(loss_fs.x, loss_fs.y, hidden=ann_hidden, config=config)
        provenance = TuningProvenance(mode="ann")
    elif kind == KIND_SVR:
        hp = svr_hyperparams or default_rbf_hyperparams()
        claims_model = svr_fit(claims_fs.x, claims_fs.y, hp)
        loss_model = svr_fit(loss_fs.x, loss_fs.y, hp)
        provenance = TuningProvenance(mode="fixed")
    else:
        config = ga_config or GaConfig()
        claims_ga = ga_run(claims_fs.x, claims_fs.y, config, on_generation=on_claims_generation)
        # an independent stream for the second stage, still seed-determined
        loss_ga = ga_run(
            loss_fs.x, loss_fs.y, replace(config, seed=config.seed + 1),
            on_generation=on_loss_generation,
        )
        claims_model = svr_fit(claims_fs.x, claims_fs.y, claims_ga.best_hyperparams)
        loss_model = svr_fit(loss_fs.x, loss_fs.y, loss_ga.best_hyperparams)
        provenance = TuningProvenance(
            mode="ga",
            claims_evaluations=claims_ga.evaluations,
            loss_evaluations=loss_ga.evaluations,
            claims_result=claims_ga,
            loss_result=loss_ga,
        )

    weeks = [r.week_start for r in control.records]
    control_summary = ControlSummary(
        claims_sum=float(np.sum(claims_fs.y)),
        loss_sum=float(np.sum(loss_fs.y)),
        weeks=len(claims_fs.y),
        years=weeks[-1].year - weeks[0].year + 1,
        label=control.label,
    )
    return TwoStageModel(
        claims_model=claims_model,
        loss_model=loss_model,
        provenance=provenance,
        control=control_summary,
    )


def project(
    model: TwoStageModel, scenario: WeeklySeries
) -> tuple[tuple[dt.date, ...], np.ndarray, np.ndarray]:
    """Predicted weekly claims rate and loss for a precipitation-only series.

    Predictions are clamped at zero before the loss stage sees them and
    before any totals are formed.
    """
    x, weeks = precip_features(scenario)
    claims_hat = np.clip(predict_batch(model.claims_model, x), 0.0, None)
    loss_x = np.column_stack([x, claims_hat])
    loss_hat = np.clip(predict_batch(model.loss_model, loss_x), 0.0, None)
    return weeks, claims_hat, loss_hat


def split_subperiods(start_year: int, end_year: int, control_length_years: int) -> list[SubPeriod]:
    """Equal-length, contiguous year blocks covering [start_year, end_year]."""
    if control_length_years < 1:
        raise DataError(f"control length must be >= 1 year, got {control_length_years}")
    span = end_year - start_year + 1
    if span < 1:
        raise DataError(f"empty year span {start_year}..{end_year}")
    if span % control_length_years != 0:
        raise DataError(
            f"scenario span of {span} years is not divisible by the "
            f"{control_length_years}-year control period"
        )
    periods = []
    for base in range(start_year, end_year + 1, control_length_years):
        top = base + control_length_years - 1
        periods.append(SubPeriod(label=f"{base}-{top}", start_year=base, end_year=top))
    return periods


def delta(scenario_sum: float, control_sum: float) -> float:
    """Percentage change of a scenario total against the control total."""
    if control_sum <= 0:
        raise DataError(f"control total must be positive, got {control_sum}")
    return (scenario_sum / control_sum - 1.0) * 100.0


def project_report(
    model: TwoStageModel, scenarios: Sequence[WeeklySeries]
) -> list[ProjectionResult]:
    """Per-scenario, per-sub-period percentage changes against the control."""
    results = []
    for scenario in scenarios:
        weeks, claims_hat, loss_hat = project(model, scenario)
        start_year = scenario.records[0].week_start.year
        end_year = scenario.records[-1].week_start.year
        periods = split_subperiods(start_year, end_year, model.control.years)
        years = np.array([w.year for w in weeks])
        deltas = []
        for period in periods:
            mask = (years >= period.start_year) & (years <= period.end_year)
            n_weeks = int(np.sum(mask))
            if abs(n_weeks - model.control.weeks) > 1:
                logger.warning(
                    "scenario %s sub-period %s has %d weeks vs %d control weeks",
                    scenario.label, period.label, n_weeks, model.control.weeks,
                )
            deltas.append(
                SubPeriodDelta(
                    period=period,
                    delta_claims_pct=delta(float(np.sum(claims_hat[mask])), model.control.claims_sum),
                    delta_loss_pct=delta(float(np.sum(loss_hat[mask])), model.control.loss_sum),
                    weeks_scenario=n_weeks,
                    weeks_control=model.control.weeks,
                )
            )
        results.append(
            ProjectionResult(
                scenario=scenario.label,
                deltas=tuple(deltas),
                week_starts=weeks,
                claims_hat=claims_hat,
                loss_hat=loss_hat,
            )
        )
    return results
