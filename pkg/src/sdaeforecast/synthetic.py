"""Synthetic daily bars with an optional learnable direction pattern.

Log returns follow

    r[t+1] = s * amplitude * vol * g(z[t]) + vol * eps[t+1]

where z[t] is the sum of the last ``lookback`` log returns scaled by
vol * sqrt(lookback), g(z) = -tanh(z) (smooth mean reversion) and s is the
signal strength. With s = 0 the close is a driftless geometric random walk.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from .market_data import BarSeries

START_DATE = dt.date(2005, 8, 1)


def trading_days(n: int, start: dt.date = START_DATE) -> list[dt.date]:
    days = np.busday_offset(np.datetime64(start, "D"), np.arange(n), roll="forward")
    return [d.astype(dt.date) for d in days]


def pattern(window_returns: np.ndarray, vol: float) -> np.ndarray:
    """Signal term for each row of trailing log returns (last axis = lookback)."""
    lookback = window_returns.shape[-1]
    z = window_returns.sum(axis=-1) / (vol * np.sqrt(lookback))
    return -np.tanh(z)


def gen_log_returns(n_days: int, seed: int, signal_strength: float, *,
                    vol: float = 0.01, amplitude: float = 2.0, lookback: int = 5):
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal(n_days - 1)
    r = np.zeros(n_days - 1)
    for t in range(n_days - 1):
        drift = 0.0
        if t >= lookback and signal_strength > 0:
            drift = signal_strength * amplitude * vol * pattern(r[t - lookback:t], vol)
        r[t] = drift + vol * eps[t]
    return r, rng


def gen_synthetic(n_days: int, seed: int = 0, signal_strength: float = 0.0, *,
                  start_price: float = 1000.0, vol: float = 0.01, amplitude: float = 2.0,
                  lookback: int = 5, start: dt.date = START_DATE) -> BarSeries:
    """Generate ``n_days`` bars on consecutive business days.

    ``signal_strength`` in [0, 1] scales the mean-reversion drift; 0 gives a
    pure random walk. Opens, highs and lows are noise around the closes and
    always satisfy the bar invariants; volumes are lognormal.
    """
    if n_days < 100:
        raise ValueError("n_days must be at least 100")
    if not 0 <= signal_strength <= 1:
        raise ValueError("signal_strength must lie in [0, 1]")
    if vol <= 0 or start_price <= 0 or lookback < 1:
        raise ValueError("vol, start_price and lookback must be positive")
    r, rng = gen_log_returns(n_days, seed, signal_strength, vol=vol,
                             amplitude=amplitude, lookback=lookback)
    close = start_price * np.exp(np.concatenate([[0.0], np.cumsum(r)]))
    gap = rng.normal(0.0, 0.3 * vol, n_days)
    prev_close = np.concatenate([[close[0]], close[:-1]])
    open_ = prev_close * np.exp(gap)
    top = np.maximum(open_, close)
    bottom = np.minimum(open_, close)
    high = top * np.exp(np.abs(rng.normal(0.0, 0.5 * vol, n_days)))
    low = bottom * np.exp(-np.abs(rng.normal(0.0, 0.5 * vol, n_days)))
    volume = np.round(rng.lognormal(13.0, 0.4, n_days))
    return BarSeries.from_arrays(trading_days(n_days, start), open_, high, low, close, volume)
