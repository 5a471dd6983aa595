"""Daily CSV ingestion, exposure/inflation normalization, weekly aggregation
and lagged feature construction.

Input is a daily CSV with a ``date`` and ``precip_mm`` column plus optional
``claims``, ``loss``, ``homes_insured`` and ``price_index`` columns. Claim
counts are normalized to a rate per 100,000 insured homes; losses are deflated
to base-period prices. Days are grouped into ISO weeks, incomplete boundary
weeks are dropped, and regression features use the weekly total, its one-week
lag, and the weekly maximum of daily precipitation.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import DataError

NORMALIZATION_SCALE = 100_000.0

#: canonical name -> default CSV header
DEFAULT_COLUMNS = {
    "date": "date",
    "precip_mm": "precip_mm",
    "claims": "claims",
    "loss": "loss",
    "homes_insured": "homes_insured",
    "price_index": "price_index",
}

_REQUIRED = ("date", "precip_mm")


@dataclass(frozen=True)
class DailyRecord:
    date: dt.date
    precip_mm: float
    claims: float | None = None
    loss: float | None = None
    homes_insured: float | None = None
    price_index: float | None = None


@dataclass(frozen=True)
class WeeklyRecord:
    """One complete ISO week: precipitation totals plus optional targets.

    ``claims_rate`` is claims per 100,000 insured homes; ``loss`` is in
    base-period prices.
    """

    week_start: dt.date
    total_precip: float
    max_precip: float
    claims_rate: float | None = None
    loss: float | None = None


@dataclass(frozen=True)
class WeeklySeries:
    records: tuple[WeeklyRecord, ...]
    label: str = "control"

    def __post_init__(self):
        prev = None
        for rec in self.records:
            if rec.total_precip < 0 or rec.max_precip < 0:
                raise DataError(f"week {rec.week_start}: negative precipitation")
            if rec.max_precip > rec.total_precip + 1e-9:
                raise DataError(f"week {rec.week_start}: max precip exceeds weekly total")
            if rec.claims_rate is not None and rec.claims_rate < 0:
                raise DataError(f"week {rec.week_start}: negative claims rate")
            if rec.loss is not None and rec.loss < 0:
                raise DataError(f"week {rec.week_start}: negative loss")
            if prev is not None:
                gap = (rec.week_start - prev).days
                if gap <= 0 or gap % 7 != 0:
                    raise DataError(
                        f"week starts {prev} and {rec.week_start} are not aligned to whole weeks"
                    )
            prev = rec.week_start

    def __len__(self) -> int:
        return len(self.records)

    def week_starts(self) -> list[dt.date]:
        return [r.week_start for r in self.records]

    def segments(self) -> list[tuple[int, int]]:
        """(start, stop) index ranges of runs of consecutive weeks."""
        if not self.records:
            return []
        bounds = []
        start = 0
        for i in range(1, len(self.records)):
            if (self.records[i].week_start - self.records[i - 1].week_start).days != 7:
                bounds.append((start, i))
                start = i
        bounds.append((start, len(self.records)))
        return bounds


@dataclass(frozen=True)
class FeatureSet:
    """Design matrix with its target vector and the week each row describes."""

    x: np.ndarray
    y: np.ndarray
    week_starts: tuple[dt.date, ...] = field(default_factory=tuple)


def normalize_claims(claims: float, homes_insured: float) -> float:
    """Claim count as a rate per 100,000 insured homes."""
    if homes_insured <= 0:
        raise DataError(f"exposure must be positive, got {homes_insured}")
    return claims / homes_insured * NORMALIZATION_SCALE


def deflate_loss(loss_nominal: float, index_t: float, index_base: float) -> float:
    """Nominal loss converted to base-period prices via a price index."""
    if index_t <= 0 or index_base <= 0:
        raise DataError(f"price index must be positive, got {index_t} / {index_base}")
    return loss_nominal * index_base / index_t


def _parse_float(raw: str, line_num: int, column: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise DataError(f"line {line_num}: cannot parse {column}={raw!r} as a number") from None


def parse_daily_csv(source, columns: dict[str, str] | None = None) -> list[DailyRecord]:
    """Read daily records from a CSV path, text stream or byte stream.

    ``columns`` maps canonical names (``date``, ``precip_mm``, ``claims``,
    ``loss``, ``homes_insured``, ``price_index``) to the file's header names.
    Optional columns missing from the header yield unset fields; empty cells
    in present columns do too.
    """
    colmap = dict(DEFAULT_COLUMNS)
    if columns:
        colmap.update(columns)

    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return parse_daily_csv(fh, columns)
    if isinstance(source, (bytes, bytearray)):
        return parse_daily_csv(io.StringIO(source.decode("utf-8")), columns)
    if isinstance(source, io.IOBase) and not isinstance(source, io.TextIOBase):
        return parse_daily_csv(io.TextIOWrapper(source, encoding="utf-8"), columns)

    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        raise DataError("empty file: no header row")
    header = set(reader.fieldnames)
    for name in _REQUIRED:
        if colmap[name] not in header:
            raise DataError(f"missing required column {colmap[name]!r}")
    present = {name: colmap[name] for name in colmap if colmap[name] in header}

    records: list[DailyRecord] = []
    prev_date: dt.date | None = None
    for row in reader:
        line = reader.line_num
        raw_date = (row.get(present["date"]) or "").strip()
        try:
            day = dt.date.fromisoformat(raw_date)
        except ValueError:
            raise DataError(f"line {line}: cannot parse date {raw_date!r} (expected YYYY-MM-DD)") from None
        if prev_date is not None and day <= prev_date:
            raise DataError(f"line {line}: dates must be strictly increasing ({day} after {prev_date})")
        prev_date = day

        precip = _parse_float(row[present["precip_mm"]], line, "precip_mm")
        if precip < 0:
            raise DataError(f"line {line}: negative precipitation {precip}")

        optional: dict[str, float | None] = {}
        for name in ("claims", "loss", "homes_insured", "price_index"):
            cell = row.get(present.get(name, ""), None)
            if cell is None or cell.strip() == "":
                optional[name] = None
                continue
            value = _parse_float(cell, line, name)
            if name in ("claims", "loss") and value < 0:
                raise DataError(f"line {line}: negative {name} {value}")
            if name in ("homes_insured", "price_index") and value <= 0:
                raise DataError(f"line {line}: {name} must be positive, got {value}")
            optional[name] = value

        records.append(
            DailyRecord(
                date=day,
                precip_mm=precip,
                claims=optional["claims"],
                loss=optional["loss"],
                homes_insured=optional["homes_insured"],
                price_index=optional["price_index"],
            )
        )
    if not records:
        raise DataError("no data rows")
    return records


def _week_sum(
    days: Sequence[DailyRecord], base_index: float
) -> tuple[float | None, float | None]:
    """Weekly claims rate and deflated loss, or None when the column is absent.

    Days that carry a claim count but no exposure are taken as already
    normalized; days without a price index are taken as already deflated.
    """
    have_claims = [d.claims is not None for d in days]
    have_loss = [d.loss is not None for d in days]
    if any(have_claims) and not all(have_claims):
        raise DataError(f"week of {days[0].date}: claims present on some days but not all")
    if any(have_loss) and not all(have_loss):
        raise DataError(f"week of {days[0].date}: loss present on some days but not all")

    claims_rate = None
    if all(have_claims):
        claims_rate = 0.0
        for d in days:
            if d.homes_insured is not None:
                claims_rate += normalize_claims(d.claims, d.homes_insured)
            else:
                claims_rate += d.claims
    loss = None
    if all(have_loss):
        loss = 0.0
        for d in days:
            if d.price_index is not None:
                loss += deflate_loss(d.loss, d.price_index, base_index)
            else:
                loss += d.loss
    return claims_rate, loss


def aggregate_weekly(
    daily: Iterable[DailyRecord], label: str = "control", base_index: float | None = None
) -> WeeklySeries:
    """Aggregate daily records into complete ISO weeks.

    Weeks missing any day (the ragged ends of a file, or gaps) are dropped.
    ``base_index`` anchors loss deflation; it defaults to the price index of
    the earliest record that has one.
    """
    days = list(daily)
    if not days:
        raise DataError("no daily records to aggregate")

    if base_index is None:
        base_index = next((d.price_index for d in days if d.price_index is not None), 1.0)
    if base_index <= 0:
        raise DataError(f"base price index must be positive, got {base_index}")

    weeks: dict[tuple[int, int], list[DailyRecord]] = {}
    for d in days:
        iso = d.date.isocalendar()
        weeks.setdefault((iso.year, iso.week), []).append(d)

    records = []
    for (iso_year, iso_week), bucket in sorted(weeks.items()):
        if len(bucket) != 7:
            continue
        precs = [d.precip_mm for d in bucket]
        claims_rate, loss = _week_sum(bucket, base_index)
        records.append(
            WeeklyRecord(
                week_start=dt.date.fromisocalendar(iso_year, iso_week, 1),
                total_precip=float(np.sum(precs)),
                max_precip=float(np.max(precs)),
                claims_rate=claims_rate,
                loss=loss,
            )
        )
    if not records:
        raise DataError("no complete week in input")
    return WeeklySeries(records=tuple(records), label=label)


def precip_features(series: WeeklySeries) -> tuple[np.ndarray, tuple[dt.date, ...]]:
    """Rows (total, lagged total, weekly max); the first week of each
    contiguous segment is dropped because it has no lag."""
    if len(series) < 2:
        raise DataError("need at least two weeks to build lagged features")
    rows = []
    weeks = []
    for start, stop in series.segments():
        for i in range(start + 1, stop):
            cur = series.records[i]
            prev = series.records[i - 1]
            rows.append((cur.total_precip, prev.total_precip, cur.max_precip))
            weeks.append(cur.week_start)
    if not rows:
        raise DataError("no week has a preceding week to lag against")
    return np.array(rows, dtype=float), tuple(weeks)


def build_claims_features(series: WeeklySeries) -> FeatureSet:
    """Claims-stage training set: X = (total, lag, max), y = weekly claims rate."""
    x, weeks = precip_features(series)
    lookup = {r.week_start: r for r in series.records}
    y = []
    for w in weeks:
        rec = lookup[w]
        if rec.claims_rate is None:
            raise DataError(f"week {w} has no claims value (missing 'claims' column?)")
        y.append(rec.claims_rate)
    return FeatureSet(x=x, y=np.array(y, dtype=float), week_starts=weeks)


def build_loss_features(series: WeeklySeries, claims: np.ndarray) -> FeatureSet:
    """Loss-stage training set: the claims-stage features plus a claims column.

    ``claims`` must align with the lag-dropped weeks; pass observed rates when
    training and predicted rates when projecting.
    """
    x, weeks = precip_features(series)
    claims = np.asarray(claims, dtype=float)
    if claims.shape != (x.shape[0],):
        raise DataError(
            f"claims vector length {claims.shape} does not match {x.shape[0]} feature rows"
        )
    lookup = {r.week_start: r for r in series.records}
    y = []
    for w in weeks:
        rec = lookup[w]
        if rec.loss is None:
            raise DataError(f"week {w} has no loss value (missing 'loss' column?)")
        y.append(rec.loss)
    return FeatureSet(
        x=np.column_stack([x, claims]), y=np.array(y, dtype=float), week_starts=weeks
    )


def _cell(value: float | None) -> str:
    return "" if value is None else repr(value)


def write_weekly_csv(series: WeeklySeries, stream: IO[str]) -> None:
    """Export a weekly series; absent targets become empty cells."""
    stream.write("week_start,R_t,maxR_t,N_t,L_t\n")
    for r in series.records:
        stream.write(
            f"{r.week_start.isoformat()},{r.total_precip!r},{r.max_precip!r},"
            f"{_cell(r.claims_rate)},{_cell(r.loss)}\n"
        )
