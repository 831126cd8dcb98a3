"""Daily OHLCV bars: CSV ingestion, validation and next-day direction labels."""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

HEADER = ("date", "open", "high", "low", "close", "volume")

UP = 1
DOWN = -1


class DataError(ValueError):
    """Raised for malformed or inconsistent market data."""


@dataclass(frozen=True)
class Bar:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: float

    def __post_init__(self):
        prices = (self.open, self.high, self.low, self.close)
        if not all(np.isfinite(p) and p > 0 for p in prices):
            raise DataError(f"{self.date}: prices must be positive and finite")
        if not (np.isfinite(self.volume) and self.volume >= 0):
            raise DataError(f"{self.date}: volume must be non-negative")
        if self.high < max(self.open, self.close):
            raise DataError(f"{self.date}: high below open/close")
        if self.low > min(self.open, self.close):
            raise DataError(f"{self.date}: low above open/close")


@dataclass(frozen=True)
class BarSeries:
    """Immutable, strictly date-ordered sequence of bars."""

    bars: tuple[Bar, ...]

    def __post_init__(self):
        object.__setattr__(self, "bars", tuple(self.bars))
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date <= prev.date:
                raise DataError(f"dates not strictly increasing at {cur.date}")

    def __len__(self):
        return len(self.bars)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return BarSeries(self.bars[idx])
        return self.bars[idx]

    def _column(self, name):
        arr = np.array([getattr(b, name) for b in self.bars], dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def open(self) -> np.ndarray:
        return self._column("open")

    @cached_property
    def high(self) -> np.ndarray:
        return self._column("high")

    @cached_property
    def low(self) -> np.ndarray:
        return self._column("low")

    @cached_property
    def close(self) -> np.ndarray:
        return self._column("close")

    @cached_property
    def volume(self) -> np.ndarray:
        return self._column("volume")

    @property
    def dates(self) -> list[dt.date]:
        return [b.date for b in self.bars]

    @classmethod
    def from_arrays(cls, dates, open, high, low, close, volume) -> "BarSeries":
        return cls(tuple(
            Bar(d, float(o), float(h), float(l), float(c), float(v))
            for d, o, h, l, c, v in zip(dates, open, high, low, close, volume)
        ))


def load_series(path) -> BarSeries:
    """Read a ``date,open,high,low,close,volume`` CSV into a validated series.

    Rows may appear in any order; they are sorted by date before the
    ordering checks. Errors name the offending line number.
    """
    path = Path(path)
    rows: list[tuple[int, Bar]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: no bars")
        if tuple(h.strip().lower() for h in header) != HEADER:
            raise DataError(f"{path}:1: expected header {','.join(HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(HEADER):
                raise DataError(f"{path}:{lineno}: expected {len(HEADER)} columns, got {len(row)}")
            try:
                date = dt.date.fromisoformat(row[0].strip())
                nums = [float(cell) for cell in row[1:]]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            try:
                rows.append((lineno, Bar(date, *nums)))
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DataError(f"{path}: no bars")

    rows.sort(key=lambda r: r[1].date)
    for (_, prev), (lineno, cur) in zip(rows, rows[1:]):
        if cur.date == prev.date:
            raise DataError(f"{path}:{lineno}: duplicate date {cur.date}")
    return BarSeries(tuple(bar for _, bar in rows))


def save_series(series: BarSeries, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for b in series.bars:
            writer.writerow([b.date.isoformat(), repr(b.open), repr(b.high),
                             repr(b.low), repr(b.close), repr(b.volume)])


def label_direction(series: BarSeries) -> np.ndarray:
    """+1 where the next close is strictly higher, else -1 (ties are down).

    The result has one entry fewer than the series: the final bar has no
    next day to compare against.
    """
    if len(series) < 2:
        raise DataError("need at least 2 bars to label directions")
    close = series.close
    return np.where(close[1:] > close[:-1], UP, DOWN).astype(np.int8)
