"""Command-line entry points: synth, fit, compare, project.

All outputs are written atomically (temp file + rename) into the output
directory, so a failed run leaves no partial artifacts. Exit codes: 0 ok,
1 config error, 2 data error, 3 fit failure, 4 model-format mismatch.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
import tempfile
from pathlib import Path

from . import model_io
from .config import SCHEMA, RunConfig, load_config
from .errors import ConfigError, DataError, FitError, ModelFormatError
from .ga import GenerationStats
from .ingest import WeeklySeries, aggregate_weekly, parse_daily_csv
from .metrics import compare_models
from .pipeline import KIND_GA_SVR, fit_two_stage, predict_batch, project_report
from .synth import write_daily_csv

EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_FIT = 3
EXIT_MODEL = 4


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _require_seed(config: RunConfig) -> int:
    if config.seed is None:
        raise ConfigError("a seed is required (set [run] seed or pass --seed)")
    return int(config.seed)


def _load_series(path: Path | None, config: RunConfig, label: str) -> WeeklySeries:
    if path is None:
        raise ConfigError("no control input configured (set [inputs] control)")
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    daily = parse_daily_csv(path, config.columns)
    return aggregate_weekly(daily, label=label)


def _ga_history_csv(rows: list[GenerationStats]) -> str:
    out = io.StringIO()
    out.write("generation,best_rmse,mean_rmse,c,sigma_sq,epsilon\n")
    for s in rows:
        hp = s.best_hyperparams
        out.write(
            f"{s.index},{s.best_fitness!r},{s.mean_fitness!r},"
            f"{hp.c!r},{hp.kernel.sigma_sq!r},{hp.epsilon!r}\n"
        )
    return out.getvalue()


def cmd_synth(config: RunConfig) -> int:
    synth_config = config.synth_config()
    buf = io.StringIO()
    write_daily_csv(synth_config, buf, include_targets=bool(config.get("synth", "include_targets")))
    out_path = config.out_dir / str(config.get("synth", "filename"))
    _write_atomic(out_path, buf.getvalue())
    print(f"wrote {out_path}")
    return 0


def cmd_fit(config: RunConfig) -> int:
    seed = _require_seed(config)
    kind = config.model_kind
    control = _load_series(config.control_path, config, label="control")

    claims_log: list[GenerationStats] = []
    loss_log: list[GenerationStats] = []
    model = fit_two_stage(
        control,
        kind=kind,
        svr_hyperparams=config.svr_hyperparams(),
        ga_config=config.ga_config() if kind == KIND_GA_SVR else None,
        ann_config=config.ann_config(),
        ann_hidden=config.ann_hidden,
        on_claims_generation=claims_log.append,
        on_loss_generation=loss_log.append,
    )

    out = config.out_dir
    model_path = out / "model.txt"
    _write_atomic(model_path, model_io.dump_two_stage(model))

    report = io.StringIO()
    report.write(f"model kind: {kind}\n")
    report.write(f"seed: {seed}\n")
    report.write(
        f"control: {model.control.weeks} weeks over {model.control.years} years, "
        f"claims total {model.control.claims_sum!r}, loss total {model.control.loss_sum!r}\n"
    )
    for stage_name, stage_model in (("claims", model.claims_model), ("loss", model.loss_model)):
        report.write(f"[{stage_name}]\n")
        if hasattr(stage_model, "hyperparams"):
            hp = stage_model.hyperparams
            report.write(
                f"  c={hp.c!r} sigma_sq={hp.kernel.sigma_sq!r} epsilon={hp.epsilon!r}\n"
            )
        else:
            report.write(f"  hidden units: {stage_model.hidden_size}\n")
    if kind == KIND_GA_SVR:
        p = model.provenance
        report.write(
            f"tuner: {p.claims_evaluations} + {p.loss_evaluations} fitness evaluations\n"
        )
        report.write(f"tuner history: ga_history_claims.csv, ga_history_loss.csv\n")
        if p.claims_result is not None:
            report.write(f"claims-stage best training rmse: {p.claims_result.best_fitness!r}\n")
        if p.loss_result is not None:
            report.write(f"loss-stage best training rmse: {p.loss_result.best_fitness!r}\n")
        _write_atomic(out / "ga_history_claims.csv", _ga_history_csv(claims_log))
        _write_atomic(out / "ga_history_loss.csv", _ga_history_csv(loss_log))
    _write_atomic(out / "fit_report.txt", report.getvalue())
    print(f"wrote {model_path}")
    return 0


def cmd_compare(config: RunConfig) -> int:
    _require_seed(config)
    control = _load_series(config.control_path, config, label="control")
    fits: dict = {}
    rows = compare_models(
        control,
        svr_hyperparams=config.svr_hyperparams(),
        ga_config=config.ga_config(),
        ann_config=config.ann_config(),
        ann_hidden=config.ann_hidden,
        collect_fits=fits,
    )
    if all(r.error is not None for r in rows):
        raise FitError("every model failed to train")

    def cell(v) -> str:
        return "" if v is None else repr(v)

    out = io.StringIO()
    out.write("model,rmse_claims,rmse_loss,peak_capture_claims\n")
    for r in rows:
        out.write(f"{r.model},{cell(r.rmse_claims)},{cell(r.rmse_loss)},{cell(r.peak_capture_claims)}\n")
    csv_path = config.out_dir / "comparison.csv"
    _write_atomic(csv_path, out.getvalue())

    if config.plots and fits:
        from . import plots

        any_fit = next(iter(fits.values()))
        plots.render_fitted_series(
            any_fit["week_starts"],
            any_fit["claims_observed"],
            {name: f["claims_fitted"] for name, f in fits.items()},
            "claims per 100k homes",
            config.out_dir / "compare_fitted_claims.svg",
        )
        plots.render_fitted_series(
            any_fit["week_starts"],
            any_fit["loss_observed"],
            {name: f["loss_fitted"] for name, f in fits.items()},
            "aggregate loss",
            config.out_dir / "compare_fitted_loss.svg",
        )
    print(f"wrote {csv_path}")
    return 0


def cmd_project(config: RunConfig, model_path_arg: str | None) -> int:
    model_path = Path(model_path_arg) if model_path_arg else config.model_path
    if model_path is None:
        raise ConfigError("no model file configured (set [inputs] model or pass --model)")
    model = model_io.load_two_stage(model_path)

    if not config.scenarios:
        raise ConfigError("no scenarios configured (add [scenarios] label = path entries)")
    series = []
    for label, path in config.scenarios:
        if not path.exists():
            raise DataError(f"scenario file not found: {path}")
        daily = parse_daily_csv(path, config.columns)
        series.append(aggregate_weekly(daily, label=label))

    results = project_report(model, series)

    out = io.StringIO()
    out.write("scenario,subperiod,delta_claims_pct,delta_loss_pct,weeks_scn,weeks_ctr\n")
    for res in results:
        for d in res.deltas:
            out.write(
                f"{res.scenario},{d.period.label},{d.delta_claims_pct!r},"
                f"{d.delta_loss_pct!r},{d.weeks_scenario},{d.weeks_control}\n"
            )
    csv_path = config.out_dir / "projection_report.csv"
    _write_atomic(csv_path, out.getvalue())

    if config.get("run", "write_series"):
        out = io.StringIO()
        out.write("scenario,week_start,claims_hat,loss_hat\n")
        for res in results:
            for week, n_hat, l_hat in zip(res.week_starts, res.claims_hat, res.loss_hat):
                out.write(f"{res.scenario},{week.isoformat()},{n_hat!r},{l_hat!r}\n")
        _write_atomic(config.out_dir / "predicted_weekly.csv", out.getvalue())

    if config.plots:
        from . import plots

        plots.render_delta_bars(results, config.out_dir / "projection_deltas.svg")
    print(f"wrote {csv_path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rainclaims",
        description="Model weekly precipitation-driven insurance claims and project climate scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("synth", "generate a synthetic daily CSV fixture"),
        ("fit", "fit the two-stage model on control data"),
        ("compare", "benchmark ANN, fixed SVR and tuned SVR on control data"),
        ("project", "project scenarios through a fitted model"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="INI config file")
        p.add_argument("--seed", type=int, help="random seed (overrides [run] seed)")
        p.add_argument("--out", help="output directory (overrides [run] out)")
        p.add_argument("--plots", action="store_true", help="also render SVG figures")
        if name == "project":
            p.add_argument("--model", help="fitted model file (overrides [inputs] model)")
        if name == "fit":
            p.add_argument("--control", help="control daily CSV (overrides [inputs] control)")
        if name == "compare":
            p.add_argument("--control", help="control daily CSV (overrides [inputs] control)")
        for section, keys in SCHEMA.items():
            for key in keys:
                p.add_argument(f"--{section}.{key}", dest=f"set__{section}__{key}", metavar="V")
        p.add_argument(
            "--scenario",
            action="append",
            default=[],
            metavar="LABEL=PATH",
            help="scenario daily CSV, repeatable",
        )
    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for attr, value in vars(args).items():
        if attr.startswith("set__") and value is not None:
            _, section, key = attr.split("__", 2)
            overrides[f"{section}.{key}"] = value
    if args.seed is not None:
        overrides["run.seed"] = str(args.seed)
    if args.out is not None:
        overrides["run.out"] = args.out
    if args.plots:
        overrides["run.plots"] = "true"
    if getattr(args, "control", None):
        overrides["inputs.control"] = args.control
    return overrides


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config, _overrides_from_args(args))
        for entry in args.scenario:
            if "=" not in entry:
                raise ConfigError(f"--scenario expects LABEL=PATH, got {entry!r}")
            label, path = entry.split("=", 1)
            config.scenarios.append((label, Path(path)))
        if args.command == "synth":
            return cmd_synth(config)
        if args.command == "fit":
            return cmd_fit(config)
        if args.command == "compare":
            return cmd_compare(config)
        return cmd_project(config, getattr(args, "model", None))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ModelFormatError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_FIT


if __name__ == "__main__":
    sys.exit(main())
