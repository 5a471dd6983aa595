"""Run configuration: an INI file (key = value under sections) plus
command-line overrides of the form --section.key value."""

from __future__ import annotations

import configparser
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path

from .ann import AnnTrainConfig
from .errors import ConfigError
from .ga import GaBounds, GaConfig
from .kernels import RBF, KernelSpec
from .pipeline import MODEL_KINDS
from .svr import DEFAULT_KKT_TOL, DEFAULT_MAX_ITER, SvrHyperparams
from .synth import SynthConfig

# section -> key -> (type tag, default); every key is overridable by a
# --section.key command-line flag
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "run": {
        "seed": ("int", None),
        "out": ("str", "out"),
        "plots": ("bool", False),
        "model": ("str", "ga-svr"),
        "write_series": ("bool", False),
    },
    "inputs": {
        "control": ("str", None),
        "model": ("str", None),
    },
    "columns": {
        "date": ("str", "date"),
        "precip_mm": ("str", "precip_mm"),
        "claims": ("str", "claims"),
        "loss": ("str", "loss"),
        "homes_insured": ("str", "homes_insured"),
        "price_index": ("str", "price_index"),
    },
    "svr": {
        "c": ("float", 1.0),
        "sigma_sq": ("float", 1.0),
        "epsilon": ("float", 0.1),
        "kkt_tol": ("float", DEFAULT_KKT_TOL),
        "max_iter": ("int", DEFAULT_MAX_ITER),
    },
    "ga": {
        "population_size": ("int", 50),
        "generations": ("int", 100),
        "tournament_size": ("int", 3),
        "crossover_prob": ("float", 0.8),
        "crossover_alpha": ("float", 0.5),
        "mutation_prob": ("float", 0.1),
        "mutation_scale": ("float", 0.15),
        "elite_count": ("int", 1),
        "fitness": ("str", "train"),
        "cv_folds": ("int", 5),
        "c_min": ("float", 1e-3),
        "c_max": ("float", 1e3),
        "sigma_sq_min": ("float", 1e-3),
        "sigma_sq_max": ("float", 16.0),
        "epsilon_min": ("float", 1e-2),
        "epsilon_max": ("float", 8.0),
        "solver_kkt_tol": ("float", 1e-3),
        "solver_max_iter": ("int", 30_000),
    },
    "ann": {
        "hidden": ("int", 2),
        "epochs": ("int", 5000),
        "learning_rate": ("float", 0.01),
        "init_scale": ("float", 1.0),
        "batch_size": ("int", None),
    },
    "synth": {
        "weeks": ("int", 520),
        "start": ("str", "2002-01-07"),
        "label": ("str", "control"),
        "precip_shape": ("float", 1.2),
        "precip_scale": ("float", 4.0),
        "claim_intercept": ("float", 2.0),
        "claim_coef_total": ("float", 0.3),
        "claim_coef_lag": ("float", 0.1),
        "claim_coef_max": ("float", 0.4),
        "claim_coef_sqrt": ("float", 0.8),
        "severity_mean": ("float", 2000.0),
        "severity_sigma": ("float", 0.4),
        "noise_level": ("float", 0.5),
        "include_targets": ("bool", True),
        "filename": ("str", "synthetic_daily.csv"),
    },
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(section: str, key: str, kind: str, raw: str):
    raw = raw.strip()
    if raw == "":
        return None
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            value = float(raw)
            if math.isnan(value):
                raise ValueError("nan")
            return value
        if kind == "bool":
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as {kind}") from None


@dataclass
class RunConfig:
    values: dict[str, dict[str, object]]
    scenarios: list[tuple[str, Path]] = field(default_factory=list)

    def get(self, section: str, key: str):
        return self.values[section][key]

    @property
    def seed(self) -> int | None:
        return self.get("run", "seed")

    @property
    def out_dir(self) -> Path:
        return Path(self.get("run", "out"))

    @property
    def plots(self) -> bool:
        return bool(self.get("run", "plots"))

    @property
    def model_kind(self) -> str:
        kind = self.get("run", "model")
        if kind not in MODEL_KINDS:
            raise ConfigError(f"[run] model must be one of {MODEL_KINDS}, got {kind!r}")
        return kind

    @property
    def control_path(self) -> Path | None:
        raw = self.get("inputs", "control")
        return Path(raw) if raw else None

    @property
    def model_path(self) -> Path | None:
        raw = self.get("inputs", "model")
        return Path(raw) if raw else None

    @property
    def columns(self) -> dict[str, str]:
        return {k: str(v) for k, v in self.values["columns"].items()}

    def svr_hyperparams(self) -> SvrHyperparams:
        s = self.values["svr"]
        return SvrHyperparams(
            c=s["c"], epsilon=s["epsilon"], kernel=KernelSpec(RBF, s["sigma_sq"])
        )

    def ga_config(self) -> GaConfig:
        g = self.values["ga"]
        for key in ("c", "sigma_sq", "epsilon"):
            lo, hi = g[f"{key}_min"], g[f"{key}_max"]
            if not 0 < lo < hi:
                raise ConfigError(f"[ga] {key} bounds must satisfy 0 < min < max")
        bounds = GaBounds(
            log_c=(math.log10(g["c_min"]), math.log10(g["c_max"])),
            log_sigma_sq=(math.log10(g["sigma_sq_min"]), math.log10(g["sigma_sq_max"])),
            log_epsilon=(math.log10(g["epsilon_min"]), math.log10(g["epsilon_max"])),
        )
        seed = self.seed if self.seed is not None else 0
        try:
            config = GaConfig(
                population_size=g["population_size"],
                generations=g["generations"],
                bounds=bounds,
                tournament_size=g["tournament_size"],
                crossover_prob=g["crossover_prob"],
                crossover_alpha=g["crossover_alpha"],
                mutation_prob=g["mutation_prob"],
                mutation_scale=g["mutation_scale"],
                elite_count=g["elite_count"],
                seed=seed,
                fitness_mode=g["fitness"],
                cv_folds=g["cv_folds"],
                seed_hyperparams=(
                    self.values["svr"]["c"],
                    self.values["svr"]["sigma_sq"],
                    self.values["svr"]["epsilon"],
                ),
                solver_kkt_tol=g["solver_kkt_tol"],
                solver_max_iter=g["solver_max_iter"],
            )
            config.validate()
        except ConfigError:
            raise
        return config

    def ann_config(self) -> AnnTrainConfig:
        a = self.values["ann"]
        seed = self.seed if self.seed is not None else 0
        config = AnnTrainConfig(
            learning_rate=a["learning_rate"],
            epochs=a["epochs"],
            seed=seed,
            init_scale=a["init_scale"],
            batch_size=a["batch_size"],
        )
        try:
            config.validate()
        except ValueError as exc:
            raise ConfigError(f"[ann] {exc}") from None
        return config

    @property
    def ann_hidden(self) -> int:
        return int(self.values["ann"]["hidden"])

    def synth_config(self) -> SynthConfig:
        s = self.values["synth"]
        try:
            start = dt.date.fromisoformat(str(s["start"]))
        except ValueError:
            raise ConfigError(f"[synth] start: {s['start']!r} is not YYYY-MM-DD") from None
        seed = self.seed if self.seed is not None else 0
        return SynthConfig(
            weeks=s["weeks"],
            precip_shape=s["precip_shape"],
            precip_scale=s["precip_scale"],
            claim_intercept=s["claim_intercept"],
            claim_coef_total=s["claim_coef_total"],
            claim_coef_lag=s["claim_coef_lag"],
            claim_coef_max=s["claim_coef_max"],
            claim_coef_sqrt=s["claim_coef_sqrt"],
            severity_mean=s["severity_mean"],
            severity_sigma=s["severity_sigma"],
            noise_level=s["noise_level"],
            seed=seed,
            start=start,
            label=str(s["label"]),
        )


def load_config(path: str | Path | None, overrides: dict[str, str] | None = None) -> RunConfig:
    """Defaults, overlaid with the INI file, overlaid with flag overrides.

    Scenario inputs live under ``[scenarios]`` as ``label = path`` lines.
    """
    values = {
        section: {key: default for key, (_, default) in keys.items()}
        for section, keys in SCHEMA.items()
    }
    scenarios: list[tuple[str, Path]] = []

    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file {path}: {exc}") from exc
        for section in parser.sections():
            if section == "scenarios":
                for label, raw in parser.items(section):
                    scenarios.append((label, Path(raw.strip())))
                continue
            if section not in SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown config key [{section}] {key}")
                kind = SCHEMA[section][key][0]
                values[section][key] = _convert(section, key, kind, raw)

    for dotted, raw in (overrides or {}).items():
        if "." not in dotted:
            raise ConfigError(f"override {dotted!r} must look like section.key")
        section, key = dotted.split(".", 1)
        if section == "scenarios":
            scenarios.append((key, Path(raw)))
            continue
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown config key [{section}] {key}")
        kind = SCHEMA[section][key][0]
        values[section][key] = _convert(section, key, kind, raw)

    return RunConfig(values=values, scenarios=scenarios)
