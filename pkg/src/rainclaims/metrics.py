"""Fit-quality metrics and the three-model benchmark table."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from .ann import AnnTrainConfig, ann_train
from .errors import FitError
from .ga import GaConfig, ga_run
from .ingest import WeeklySeries, build_claims_features, build_loss_features
from .pipeline import predict_batch
from .svr import SvrHyperparams, default_rbf_hyperparams, svr_fit

logger = logging.getLogger(__name__)

MODEL_ORDER = ("ANN", "SVR", "GA-SVR")


@dataclass(frozen=True)
class ComparisonRow:
    model: str
    rmse_claims: float | None
    rmse_loss: float | None
    peak_capture_claims: float | None
    error: str | None = None


def rmse(predicted: np.ndarray, observed: np.ndarray) -> float:
    """Root mean squared residual."""
    predicted = np.asarray(predicted, dtype=float)
    observed = np.asarray(observed, dtype=float)
    if predicted.shape != observed.shape or predicted.ndim != 1:
        raise ValueError(f"shape mismatch: {predicted.shape} vs {observed.shape}")
    if predicted.size == 0:
        raise ValueError("empty vectors")
    return float(np.sqrt(np.mean((predicted - observed) ** 2)))


def peak_capture(observed: np.ndarray, fitted: np.ndarray) -> float:
    """Fraction of the top-decile observed weeks whose fitted value is also
    top-decile. Ties resolve by index, so constant fits land near the 0.1
    chance level instead of degenerating."""
    observed = np.asarray(observed, dtype=float)
    fitted = np.asarray(fitted, dtype=float)
    if observed.shape != fitted.shape or observed.ndim != 1 or observed.size == 0:
        raise ValueError("need two aligned non-empty vectors")
    k = max(1, math.ceil(observed.size / 10))
    top_obs = np.argsort(observed, kind="stable")[-k:]
    top_fit = set(np.argsort(fitted, kind="stable")[-k:])
    return sum(1 for i in top_obs if i in top_fit) / k


@dataclass(frozen=True)
class FittedSeries:
    week_starts: tuple
    observed: np.ndarray
    fitted: np.ndarray
    peak_capture: float


def fitted_series(model, control: WeeklySeries, stage: str = "claims") -> FittedSeries:
    """Aligned observed and fitted weekly vectors for one trained stage."""
    if stage == "claims":
        fs = build_claims_features(control)
        x, y = fs.x, fs.y
    elif stage == "loss":
        claims_fs = build_claims_features(control)
        fs = build_loss_features(control, claims_fs.y)
        x, y = fs.x, fs.y
    else:
        raise ValueError(f"stage must be 'claims' or 'loss', got {stage!r}")
    fitted = predict_batch(model, x)
    return FittedSeries(
        week_starts=fs.week_starts,
        observed=y,
        fitted=fitted,
        peak_capture=peak_capture(y, fitted),
    )


def compare_models(
    control: WeeklySeries,
    svr_hyperparams: SvrHyperparams | None = None,
    ga_config: GaConfig | None = None,
    ann_config: AnnTrainConfig | None = None,
    ann_hidden: int = 2,
    collect_fits: dict | None = None,
) -> list[ComparisonRow]:
    """Training RMSE of all three model kinds on identical feature matrices.

    A model that fails to train yields a flagged row rather than aborting the
    table. The tuned row can never beat worse than the fixed row on claims:
    the fixed triple is injected into the tuner's starting population.
    ``collect_fits`` optionally receives the fitted claims/loss vectors per
    model for plotting.
    """
    claims_fs = build_claims_features(control)
    loss_fs = build_loss_features(control, claims_fs.y)
    svr_hp = svr_hyperparams or default_rbf_hyperparams()
    ga_cfg = ga_config or GaConfig()
    ga_cfg = dataclasses.replace(
        ga_cfg,
        seed_hyperparams=(svr_hp.c, svr_hp.kernel.sigma_sq, svr_hp.epsilon),
    )

    def fitters():
        ann_cfg = ann_config or AnnTrainConfig()
        yield "ANN", (
            lambda: ann_train(claims_fs.x, claims_fs.y, hidden=ann_hidden, config=ann_cfg)
        ), (
            lambda: ann_train(loss_fs.x, loss_fs.y, hidden=ann_hidden, config=ann_cfg)
        )
        yield "SVR", (
            lambda: svr_fit(claims_fs.x, claims_fs.y, svr_hp)
        ), (
            lambda: svr_fit(loss_fs.x, loss_fs.y, svr_hp)
        )

        def ga_claims():
            result = ga_run(claims_fs.x, claims_fs.y, ga_cfg)
            return svr_fit(claims_fs.x, claims_fs.y, result.best_hyperparams)

        def ga_loss():
            result = ga_run(
                loss_fs.x, loss_fs.y, dataclasses.replace(ga_cfg, seed=ga_cfg.seed + 1)
            )
            return svr_fit(loss_fs.x, loss_fs.y, result.best_hyperparams)

        yield "GA-SVR", ga_claims, ga_loss

    rows = []
    for name, fit_claims, fit_loss in fitters():
        try:
            claims_model = fit_claims()
            loss_model = fit_loss()
        except FitError as exc:
            logger.warning("%s failed to train: %s", name, exc)
            rows.append(ComparisonRow(name, None, None, None, error=str(exc)))
            continue
        claims_fit = predict_batch(claims_model, claims_fs.x)
        loss_fit = predict_batch(loss_model, loss_fs.x)
        if collect_fits is not None:
            collect_fits[name] = {
                "week_starts": claims_fs.week_starts,
                "claims_observed": claims_fs.y,
                "claims_fitted": claims_fit,
                "loss_observed": loss_fs.y,
                "loss_fitted": loss_fit,
            }
        rows.append(
            ComparisonRow(
                model=name,
                rmse_claims=rmse(claims_fit, claims_fs.y),
                rmse_loss=rmse(loss_fit, loss_fs.y),
                peak_capture_claims=peak_capture(claims_fs.y, claims_fit),
            )
        )
    return rows
