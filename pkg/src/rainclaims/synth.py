"""Synthetic weather/claims data generator.

Daily precipitation is drawn from a gamma distribution (right-skewed,
non-negative). The weekly claims rate is a smooth increasing function of the
weekly total, its lag and the weekly maximum, plus optional Gaussian noise and
clamped at zero. Weekly loss is the claims rate times a lognormal severity
draw whose mean is ``severity_mean``. Everything is deterministic for a fixed
seed. A hidden burn-in week supplies the lag for the first emitted week, so
every emitted week's claims rate has the same distribution.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace
from typing import IO

import numpy as np

from .errors import ConfigError
from .ingest import WeeklyRecord, WeeklySeries


@dataclass(frozen=True)
class SynthConfig:
    weeks: int = 520
    precip_shape: float = 1.2
    precip_scale: float = 4.0
    claim_intercept: float = 2.0
    claim_coef_total: float = 0.3
    claim_coef_lag: float = 0.1
    claim_coef_max: float = 0.4
    claim_coef_sqrt: float = 0.8
    severity_mean: float = 2000.0
    severity_sigma: float = 0.4
    noise_level: float = 0.5
    seed: int = 0
    start: dt.date = dt.date(2002, 1, 7)
    label: str = "control"
    homes_insured: float = 100_000.0
    price_index: float = 100.0

    def validate(self) -> None:
        if self.weeks < 10:
            raise ConfigError(f"weeks must be >= 10, got {self.weeks}")
        if self.precip_shape <= 0 or self.precip_scale <= 0:
            raise ConfigError("precipitation shape and scale must be positive")
        if self.severity_mean <= 0:
            raise ConfigError("severity_mean must be positive")
        if self.severity_sigma < 0 or self.noise_level < 0:
            raise ConfigError("noise levels must be non-negative")
        if self.homes_insured <= 0 or self.price_index <= 0:
            raise ConfigError("exposure and price index must be positive")
        if self.start.isoweekday() != 1:
            raise ConfigError(f"start date {self.start} is not a Monday")


def claims_mean(config: SynthConfig, total, lag_total, max_daily):
    """Noise-free weekly claims rate implied by the generator's coefficients."""
    total = np.asarray(total, dtype=float)
    return (
        config.claim_intercept
        + config.claim_coef_total * total
        + config.claim_coef_lag * np.asarray(lag_total, dtype=float)
        + config.claim_coef_max * np.asarray(max_daily, dtype=float)
        + config.claim_coef_sqrt * np.sqrt(total)
    )


def _draw(config: SynthConfig):
    rng = np.random.default_rng(config.seed)
    daily = rng.gamma(config.precip_shape, config.precip_scale, size=(config.weeks + 1, 7))
    noise = rng.standard_normal(config.weeks)
    sev_z = rng.standard_normal(config.weeks)

    totals = daily.sum(axis=1)
    maxima = daily.max(axis=1)
    mean_rate = claims_mean(config, totals[1:], totals[:-1], maxima[1:])
    rate = mean_rate + config.noise_level * noise
    np.clip(rate, 0.0, None, out=rate)

    # mean-one lognormal multiplier keeps E[loss | rate] = rate * severity_mean
    sev = config.severity_mean * np.exp(
        config.severity_sigma * sev_z - 0.5 * config.severity_sigma**2
    )
    loss = rate * sev
    return daily[1:], totals[1:], maxima[1:], rate, loss


def generate_synthetic(config: SynthConfig) -> WeeklySeries:
    """Weekly series of precipitation, claims rate and loss."""
    config.validate()
    _, totals, maxima, rate, loss = _draw(config)
    records = tuple(
        WeeklyRecord(
            week_start=config.start + dt.timedelta(weeks=i),
            total_precip=float(totals[i]),
            max_precip=float(maxima[i]),
            claims_rate=float(rate[i]),
            loss=float(loss[i]),
        )
        for i in range(config.weeks)
    )
    return WeeklySeries(records=records, label=config.label)


def generate_scenario(config: SynthConfig) -> WeeklySeries:
    """Precipitation-only series (targets absent, as in climate-model output)."""
    config.validate()
    _, totals, maxima, _, _ = _draw(config)
    records = tuple(
        WeeklyRecord(
            week_start=config.start + dt.timedelta(weeks=i),
            total_precip=float(totals[i]),
            max_precip=float(maxima[i]),
        )
        for i in range(config.weeks)
    )
    return WeeklySeries(records=records, label=config.label)


def write_daily_csv(config: SynthConfig, stream: IO[str], include_targets: bool = True) -> None:
    """Emit the generator's output at daily resolution.

    Weekly claims and losses are spread over the week proportionally to daily
    precipitation (uniformly in dry weeks) so that ingesting the file and
    re-aggregating reproduces the weekly truth. Exposure and price index are
    constant, which makes normalization and deflation exact identities.
    """
    config.validate()
    daily, totals, _, rate, loss = _draw(config)

    if include_targets:
        stream.write("date,precip_mm,claims,loss,homes_insured,price_index\n")
    else:
        stream.write("date,precip_mm\n")
    for w in range(config.weeks):
        week_total = totals[w]
        for d in range(7):
            day = config.start + dt.timedelta(weeks=w, days=d)
            precip = float(daily[w, d])
            if not include_targets:
                stream.write(f"{day.isoformat()},{precip!r}\n")
                continue
            share = precip / week_total if week_total > 0 else 1.0 / 7.0
            # claims column counts events among `homes_insured` homes; with the
            # default exposure of 100k the count equals the per-100k rate.
            claims_d = float(rate[w] * share * (config.homes_insured / 100_000.0))
            loss_d = float(loss[w] * share)
            stream.write(
                f"{day.isoformat()},{precip!r},{claims_d!r},{loss_d!r},"
                f"{config.homes_insured!r},{config.price_index!r}\n"
            )


def scaled_precip(config: SynthConfig, factor: float, seed: int | None = None) -> SynthConfig:
    """Config for a scenario whose precipitation is ``factor`` times stronger."""
    if factor <= 0:
        raise ConfigError(f"scale factor must be positive, got {factor}")
    return replace(
        config,
        precip_scale=config.precip_scale * factor,
        seed=config.seed if seed is None else seed,
    )
