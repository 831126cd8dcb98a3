"""Signal-driven strategy simulation, trade statistics and drawdown analysis.

Position on day t is held from close[t] to close[t+1]. Costs are charged in
basis points of notional per unit of position change, so entering or leaving
a position costs one unit and a long/short reversal costs two.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

LONG_FLAT = "long_flat"
LONG_SHORT = "long_short"


@dataclass(frozen=True)
class StrategyConfig:
    mode: str = LONG_SHORT
    fee_bps: float = 0.0
    impact_bps: float = 0.0

    def __post_init__(self):
        if self.mode not in (LONG_FLAT, LONG_SHORT):
            raise ValueError(f"unknown strategy mode {self.mode!r}")
        if self.fee_bps < 0 or self.impact_bps < 0:
            raise ValueError("costs must be non-negative")

    @property
    def cost_rate(self) -> float:
        return (self.fee_bps + self.impact_bps) / 1e4


@dataclass(frozen=True)
class EquityCurve:
    """Cumulative return (fraction) after each close; starts at 0."""

    dates: tuple
    cumulative_return: np.ndarray
    positions: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def percent(self) -> np.ndarray:
        return 100.0 * self.cumulative_return

    def __len__(self):
        return len(self.cumulative_return)


@dataclass(frozen=True)
class Trade:
    entry: int
    exit: int
    direction: str
    net_return: float
    entry_date: dt.date | None = None
    exit_date: dt.date | None = None


@dataclass(frozen=True)
class DrawdownRecord:
    begin: int
    bottom: int
    end: int
    depth: float
    recovered: bool
    begin_date: dt.date | None = None
    bottom_date: dt.date | None = None
    end_date: dt.date | None = None

    @property
    def fall(self) -> int:
        return self.bottom - self.begin

    @property
    def recovery(self) -> int:
        return self.end - self.bottom

    @property
    def length(self) -> int:
        return self.fall + self.recovery


def positions_for(predictions, mode: str) -> np.ndarray:
    """+1 -> long; -1 -> short (long_short) or cash (long_flat); 0 -> cash."""
    p = np.asarray(predictions)
    if not np.all(np.isin(p, (-1, 0, 1))):
        raise ValueError("predictions must be -1, 0 or +1")
    if mode == LONG_FLAT:
        return np.where(p > 0, 1, 0).astype(np.int8)
    return p.astype(np.int8)


def simulate(predictions, closes, cfg: StrategyConfig | None = None, dates=None):
    """Run the strategy; returns ``(EquityCurve, trades)``.

    ``closes`` has one more entry than ``predictions``. The curve has one point
    per close, the first being 0.
    """
    cfg = cfg or StrategyConfig()
    closes = np.asarray(closes, dtype=float)
    pos = positions_for(predictions, cfg.mode)
    m = len(pos)
    if len(closes) != m + 1:
        raise ValueError(f"need {m + 1} closes for {m} predictions, got {len(closes)}")
    if np.any(closes <= 0) or not np.all(np.isfinite(closes)):
        raise ValueError("prices must be positive and finite")
    dates = tuple(dates) if dates is not None else tuple(range(m + 1))
    if len(dates) != m + 1:
        raise ValueError("dates must align with closes")
    rate = cfg.cost_rate
    px_ret = closes[1:] / closes[:-1] - 1.0
    prev = np.concatenate([[0], pos[:-1]]).astype(float)
    turnover = np.abs(pos - prev)
    daily = pos * px_ret - rate * turnover
    equity = np.concatenate([[1.0], np.cumprod(1.0 + daily)])
    curve = EquityCurve(dates, equity - 1.0, pos)
    return curve, _trades(pos, px_ret, rate, dates)


def _trades(pos, px_ret, rate, dates):
    trades = []
    m = len(pos)
    t = 0
    while t < m:
        if pos[t] == 0:
            t += 1
            continue
        start, side = t, pos[t]
        while t + 1 < m and pos[t + 1] == side:
            t += 1
        growth = (1.0 + side * px_ret[start] - rate) * np.prod(1.0 + side * px_ret[start + 1:t + 1])
        if t + 1 < m:
            growth *= 1.0 - rate
        trades.append(Trade(start, t + 1, "long" if side > 0 else "short", float(growth - 1.0),
                            dates[start], dates[t + 1]))
        t += 1
    return trades


def transaction_success_rate(trades) -> float | None:
    """Share of trades with positive net return; None when there are no trades."""
    if not trades:
        return None
    return sum(1 for tr in trades if tr.net_return > 0) / len(trades)


def cumulative_return(curve) -> float:
    """Final return as a fraction.

    An :class:`EquityCurve` already holds cumulative returns; a plain sequence
    is read as equity values and measured against its first point.
    """
    if isinstance(curve, EquityCurve):
        if len(curve) == 0:
            raise ValueError("empty curve")
        return float(curve.cumulative_return[-1])
    values = np.asarray(curve, dtype=float)
    if len(values) == 0:
        raise ValueError("empty curve")
    return simple_return(values[0], values[-1])


def simple_return(original: float, current: float) -> float:
    return (current - original) / original


def _values(curve):
    if isinstance(curve, EquityCurve):
        return curve.percent, curve.dates
    return np.asarray(curve, dtype=float), None


def max_drawdown(curve) -> float:
    """Largest X(t) - X(tau) over t <= tau (percentage points for an EquityCurve)."""
    x, _ = _values(curve)
    if len(x) == 0:
        return 0.0
    return float(np.max(np.maximum.accumulate(x) - x))


def drawdown_episodes(curve) -> list[DrawdownRecord]:
    """All underwater episodes in time order.

    An episode starts at a running peak, bottoms at its first lowest point and
    ends on the first later point back at or above the peak (or at the end of
    the curve if it never recovers).
    """
    x, dates = _values(curve)
    out = []
    if len(x) == 0:
        return out
    peak, peak_idx = x[0], 0
    trough = trough_idx = None
    for t in range(1, len(x)):
        if x[t] >= peak:
            if trough_idx is not None:
                out.append(_record(peak_idx, trough_idx, t, trough - peak, True, dates))
                trough_idx = None
            peak, peak_idx = x[t], t
        elif trough_idx is None or x[t] < trough:
            trough, trough_idx = x[t], t
    if trough_idx is not None:
        out.append(_record(peak_idx, trough_idx, len(x) - 1, trough - peak, False, dates))
    return out


def _record(begin, bottom, end, depth, recovered, dates):
    d = (lambda i: dates[i]) if dates is not None else (lambda i: None)
    return DrawdownRecord(begin, bottom, end, float(depth), recovered, d(begin), d(bottom), d(end))


def top_drawdowns(curve, k: int = 5) -> list[DrawdownRecord]:
    """The k deepest episodes, deepest first (earlier episode wins ties)."""
    episodes = drawdown_episodes(curve)
    return sorted(episodes, key=lambda e: (e.depth, e.begin))[:k]
