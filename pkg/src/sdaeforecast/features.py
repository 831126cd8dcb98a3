"""Aligned feature matrix assembly and train-window min-max scaling."""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .indicators import IndicatorSpec, compute
from .market_data import BarSeries, label_direction


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureMatrix:
    """Row t holds indicator values on day t; label t is the move from t to t+1."""

    rows: np.ndarray
    labels: np.ndarray
    dates: tuple[dt.date, ...]
    columns: tuple[str, ...]

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise FeatureError("rows must be a 2-D array")
        if not (len(rows) == len(self.labels) == len(self.dates)):
            raise FeatureError("rows, labels and dates must share one length")
        if rows.shape[1] != len(self.columns):
            raise FeatureError("column names do not match row width")
        if not np.all(np.isfinite(rows)):
            raise FeatureError("feature matrix contains undefined entries")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int8))
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "columns", tuple(self.columns))

    def __len__(self):
        return len(self.rows)

    @property
    def width(self) -> int:
        return self.rows.shape[1]

    def slice(self, start: int, stop: int) -> "FeatureMatrix":
        return FeatureMatrix(self.rows[start:stop], self.labels[start:stop],
                             self.dates[start:stop], self.columns)

    def with_rows(self, rows: np.ndarray) -> "FeatureMatrix":
        return replace(self, rows=rows)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["date", *self.columns, "label"])
            for d, row, y in zip(self.dates, self.rows, self.labels):
                writer.writerow([d.isoformat(), *(repr(float(x)) for x in row), int(y)])


@dataclass(frozen=True)
class Scaler:
    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        if np.any(self.minimum > self.maximum):
            raise FeatureError("scaler min exceeds max")


def assemble(series: BarSeries, specs: list[IndicatorSpec]) -> FeatureMatrix:
    """Stack indicator columns in ``specs`` order and drop warm-up and unlabeled rows.

    Retained days run from the largest warm-up index to ``len(series) - 2``.
    """
    if not specs:
        raise FeatureError("no indicators requested")
    computed = [compute(s, series) for s in specs]
    first = max(c.warm_up for c in computed)
    last = len(series) - 2
    if last < first:
        raise FeatureError(
            f"no labeled row survives warm-up: {len(series)} bars, warm-up {first}")
    rows = np.column_stack([c.values[first:last + 1] for c in computed])
    labels = label_direction(series)[first:last + 1]
    dates = series.dates[first:last + 1]
    return FeatureMatrix(rows, labels, dates, tuple(s.name for s in specs))


def fit_scaler(train: FeatureMatrix | np.ndarray) -> Scaler:
    x = train.rows if isinstance(train, FeatureMatrix) else np.asarray(train, dtype=float)
    if len(x) == 0:
        raise FeatureError("cannot fit a scaler on an empty matrix")
    return Scaler(x.min(axis=0), x.max(axis=0))


def scale_rows(scaler: Scaler, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(scaler.minimum):
        raise FeatureError(
            f"column count {x.shape[-1]} does not match scaler width {len(scaler.minimum)}")
    span = scaler.maximum - scaler.minimum
    constant = span == 0
    out = (x - scaler.minimum) / np.where(constant, 1.0, span)
    out = np.clip(out, 0.0, 1.0)
    out[..., constant] = 0.5
    return out


def transform(scaler: Scaler, m: FeatureMatrix) -> FeatureMatrix:
    """Map each column to [0, 1] using training extrema; out-of-range values are clamped."""
    return m.with_rows(scale_rows(scaler, m.rows))
