"""Precipitation-driven home-insurance claim and loss modeling.

A two-stage regression pipeline (claims rate from weekly precipitation
features, losses from those features plus the claims rate) built on
tube-loss support vector regression with genetic-algorithm hyperparameter
tuning, benchmarked against a fixed-hyperparameter fit and a small neural
network, with climate-scenario projection of percentage changes.
"""

from .ann import AnnModel, AnnTrainConfig, ann_forward, ann_gradient, ann_predict, ann_train
from .errors import (
    AnnDivergenceError,
    ConfigError,
    DataError,
    FitError,
    ModelFormatError,
    RainclaimsError,
    SvrConvergenceError,
)
from .ga import GaBounds, GaConfig, GaResult, evaluate_fitness, evolve_generation, ga_run, init_population
from .ingest import (
    DailyRecord,
    FeatureSet,
    WeeklyRecord,
    WeeklySeries,
    aggregate_weekly,
    build_claims_features,
    build_loss_features,
    deflate_loss,
    normalize_claims,
    parse_daily_csv,
    write_weekly_csv,
)
from .kernels import KernelSpec, gram_matrix, kernel_eval
from .metrics import ComparisonRow, compare_models, fitted_series, peak_capture, rmse
from .model_io import load_two_stage, save_two_stage
from .pipeline import (
    ProjectionResult,
    SubPeriod,
    TwoStageModel,
    delta,
    fit_two_stage,
    project,
    project_report,
    split_subperiods,
)
from .svr import (
    Scaler,
    SvrHyperparams,
    SvrModel,
    dual_objective,
    eps_insensitive_loss,
    svr_fit,
    svr_predict,
)
from .synth import SynthConfig, generate_scenario, generate_synthetic, write_daily_csv

__version__ = "0.1.0"
