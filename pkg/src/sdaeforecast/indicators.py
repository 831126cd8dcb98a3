"""The 28 technical indicators used as model inputs.

Each indicator is a causal function of the bars up to and including day t.
Values before the warm-up index are NaN; every value from the warm-up index
on is finite. Multi-line indicators are reduced to one scalar feature:
MACD -> MACD minus signal, AROON -> up minus down, Stoch -> %K, TDI -> the
TDI line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .market_data import BarSeries

CATEGORIES: dict[str, tuple[str, ...]] = {
    "moving_averages": ("EMA", "SMA", "EVWMA", "ZLEMA", "TRIX", "MACD"),
    "trend_detection": ("EMV", "DEMA", "ADX", "AROON", "CCI", "TDI", "VHF", "DPO", "ZigZag"),
    "oscillators": ("RSI", "ATR", "Volatility", "ROC", "CMO", "MFI", "WPR"),
    "volume": ("OBV", "CLV", "CMF", "ChaikinAD"),
    "momentum": ("Momentum", "Stoch"),
}

DEFAULT_PARAMS: dict[str, dict[str, float]] = {
    "EMA": {"period": 10},
    "SMA": {"period": 10},
    "EVWMA": {"period": 10},
    "ZLEMA": {"period": 10},
    "TRIX": {"period": 15},
    "MACD": {"fast": 12, "slow": 26, "signal": 9},
    "EMV": {"period": 14, "vol_divisor": 10000},
    "DEMA": {"period": 10},
    "ADX": {"period": 14},
    "AROON": {"period": 25},
    "CCI": {"period": 20},
    "TDI": {"period": 20, "multiple": 2},
    "VHF": {"period": 28},
    "DPO": {"period": 20},
    "ZigZag": {"change_pct": 5.0},
    "RSI": {"period": 14},
    "ATR": {"period": 14},
    "Volatility": {"period": 10, "annualization": 252},
    "ROC": {"period": 10},
    "CMO": {"period": 14},
    "MFI": {"period": 14},
    "WPR": {"period": 14},
    "OBV": {},
    "CLV": {},
    "CMF": {"period": 20},
    "ChaikinAD": {},
    "Momentum": {"period": 10},
    "Stoch": {"k_period": 14, "d_period": 3},
}

NAMES: tuple[str, ...] = tuple(n for names in CATEGORIES.values() for n in names)

# documented output ranges of the bounded oscillators
BOUNDS: dict[str, tuple[float, float]] = {
    "RSI": (0.0, 100.0),
    "MFI": (0.0, 100.0),
    "Stoch": (0.0, 100.0),
    "CMO": (-100.0, 100.0),
    "WPR": (-100.0, 0.0),
    "CLV": (-1.0, 1.0),
    "CMF": (-1.0, 1.0),
    "ZigZag": (-1.0, 1.0),
}

_INT_PARAMS = {"period", "fast", "slow", "signal", "multiple", "k_period", "d_period"}


class IndicatorError(ValueError):
    pass


@dataclass(frozen=True)
class IndicatorSpec:
    name: str
    params: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        if self.name not in DEFAULT_PARAMS:
            raise IndicatorError(f"unknown indicator {self.name!r}")
        merged = dict(DEFAULT_PARAMS[self.name])
        for key, value in dict(self.params).items():
            if key not in merged:
                raise IndicatorError(f"{self.name}: unknown parameter {key!r}")
            merged[key] = value
        for key, value in merged.items():
            if not value > 0:
                raise IndicatorError(f"{self.name}.{key} must be positive, got {value}")
            if key in _INT_PARAMS:
                if int(value) != value:
                    raise IndicatorError(f"{self.name}.{key} must be an integer")
                merged[key] = int(value)
        if self.name == "MACD" and merged["fast"] >= merged["slow"]:
            raise IndicatorError("MACD.fast must be below MACD.slow")
        object.__setattr__(self, "params", MappingProxyType(merged))

    @property
    def warm_up(self) -> int:
        return _WARM_UP[self.name](self.params)

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.params.items()))))

    def __eq__(self, other):
        return (isinstance(other, IndicatorSpec) and self.name == other.name
                and dict(self.params) == dict(other.params))


@dataclass(frozen=True)
class IndicatorSeries:
    name: str
    values: np.ndarray
    warm_up: int


def catalog(overrides: dict[str, dict[str, float]] | None = None) -> list[IndicatorSpec]:
    """All 28 indicators in category order, with default (or overridden) parameters."""
    overrides = overrides or {}
    unknown = set(overrides) - set(NAMES)
    if unknown:
        raise IndicatorError(f"unknown indicators in overrides: {sorted(unknown)}")
    return [IndicatorSpec(name, MappingProxyType(dict(overrides.get(name, {}))))
            for name in NAMES]


def category_of(name: str) -> str:
    for cat, names in CATEGORIES.items():
        if name in names:
            return cat
    raise IndicatorError(f"unknown indicator {name!r}")


def compute(spec: IndicatorSpec, series: BarSeries) -> IndicatorSeries:
    warm = spec.warm_up
    if len(series) <= warm:
        raise IndicatorError(
            f"{spec.name} needs more than {warm} bars, got {len(series)}")
    values = np.asarray(_FUNCS[spec.name](series, **spec.params), dtype=float)
    values[:warm] = np.nan
    if not np.all(np.isfinite(values[warm:])):
        raise IndicatorError(f"{spec.name}: non-finite value after warm-up")
    values.setflags(write=False)
    return IndicatorSeries(spec.name, values, warm)


def compute_all(specs: list[IndicatorSpec], series: BarSeries) -> list[IndicatorSeries]:
    return [compute(s, series) for s in specs]


# ---------------------------------------------------------------- primitives

def _nan(n):
    return np.full(n, np.nan)


def _rolling(x, n, fn):
    """Apply a reduction over each trailing window of length n; NaN-padded head."""
    out = _nan(len(x))
    if len(x) >= n:
        out[n - 1:] = fn(sliding_window_view(x, n), axis=-1)
    return out


def _sma(x, n):
    return _rolling(x, n, np.mean)


def _rolling_sum(x, n):
    return _rolling(x, n, np.sum)


def _ema(x, n, ratio=None, start=0):
    """Exponential average seeded with the simple mean of the first n inputs.

    ``start`` is the index of the first defined input value.
    """
    ratio = 2.0 / (n + 1) if ratio is None else ratio
    out = _nan(len(x))
    seed = start + n - 1
    if seed >= len(x):
        return out
    out[seed] = np.mean(x[start:seed + 1])
    for t in range(seed + 1, len(x)):
        out[t] = out[t - 1] + ratio * (x[t] - out[t - 1])
    return out


def _wilder(x, n, start=0):
    return _ema(x, n, ratio=1.0 / n, start=start)


def _safe_div(num, den, fill):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.full(np.broadcast(num, den).shape, float(fill))
    np.divide(num, den, out=out, where=den != 0)
    return out


def _true_range(s):
    h, l, c = s.high, s.low, s.close
    tr = _nan(len(c))
    prev = c[:-1]
    tr[1:] = np.maximum.reduce([h[1:] - l[1:], np.abs(h[1:] - prev), np.abs(l[1:] - prev)])
    return tr


def _clv(s):
    h, l, c = s.high, s.low, s.close
    return _safe_div((c - l) - (h - c), h - l, 0.0)


def _typical(s):
    return (s.high + s.low + s.close) / 3.0


# ------------------------------------------------------------ indicator funcs

def _f_sma(s, period):
    return _sma(s.close, period)


def _f_ema(s, period):
    return _ema(s.close, period)


def _f_evwma(s, period):
    c, v = s.close, s.volume
    vsum = _rolling_sum(v, period)
    out = _nan(len(c))
    out[period - 1] = c[period - 1]
    for t in range(period, len(c)):
        if vsum[t] > 0:
            out[t] = ((vsum[t] - v[t]) * out[t - 1] + v[t] * c[t]) / vsum[t]
        else:
            out[t] = out[t - 1]
    return out


def _f_zlema(s, period):
    c = s.close
    lag = (period - 1) // 2
    x = _nan(len(c))
    x[lag:] = 2 * c[lag:] - c[:len(c) - lag]
    return _ema(x, period, start=lag)


def _f_dema(s, period):
    e1 = _ema(s.close, period)
    e2 = _ema(e1, period, start=period - 1)
    return 2 * e1 - e2


def _f_trix(s, period):
    e1 = _ema(s.close, period)
    e2 = _ema(e1, period, start=period - 1)
    e3 = _ema(e2, period, start=2 * (period - 1))
    out = _nan(len(e3))
    out[1:] = 100.0 * (e3[1:] / e3[:-1] - 1.0)
    return out


def _f_macd(s, fast, slow, signal):
    line = _ema(s.close, fast) - _ema(s.close, slow)
    sig = _ema(line, signal, start=slow - 1)
    return line - sig


def _f_emv(s, period, vol_divisor):
    mid = (s.high + s.low) / 2.0
    raw = _nan(len(mid))
    box = (s.volume[1:] / vol_divisor)
    raw[1:] = _safe_div((mid[1:] - mid[:-1]) * (s.high[1:] - s.low[1:]), box, 0.0)
    out = _nan(len(mid))
    if len(mid) > period:
        out[period:] = np.mean(sliding_window_view(raw[1:], period), axis=-1)
    return out


def _f_adx(s, period):
    h, l = s.high, s.low
    up = np.zeros(len(h))
    dn = np.zeros(len(h))
    up[1:] = h[1:] - h[:-1]
    dn[1:] = l[:-1] - l[1:]
    plus_dm = np.where((up > dn) & (up > 0), up, 0.0)
    minus_dm = np.where((dn > up) & (dn > 0), dn, 0.0)
    tr = _true_range(s)
    s_tr = _wilder(tr, period, start=1)
    s_p = _wilder(plus_dm, period, start=1)
    s_m = _wilder(minus_dm, period, start=1)
    di_p = 100.0 * _safe_div(s_p, s_tr, 0.0)
    di_m = 100.0 * _safe_div(s_m, s_tr, 0.0)
    dx = 100.0 * _safe_div(np.abs(di_p - di_m), di_p + di_m, 0.0)
    dx[:period] = np.nan
    return _wilder(dx, period, start=period)


def _bars_since_extreme(x, period, argfn):
    out = _nan(len(x))
    if len(x) > period:
        win = sliding_window_view(x, period + 1)
        # reversed windows: argfn picks the most recent occurrence of the extreme
        out[period:] = argfn(win[:, ::-1], axis=-1)
    return out


def _f_aroon(s, period):
    since_high = _bars_since_extreme(s.high, period, np.argmax)
    since_low = _bars_since_extreme(s.low, period, np.argmin)
    up = 100.0 * (period - since_high) / period
    down = 100.0 * (period - since_low) / period
    return up - down


def _f_cci(s, period):
    tp = _typical(s)
    out = _nan(len(tp))
    if len(tp) >= period:
        win = sliding_window_view(tp, period)
        mean = win.mean(axis=-1)
        md = np.abs(win - mean[:, None]).mean(axis=-1)
        out[period - 1:] = _safe_div(tp[period - 1:] - mean, 0.015 * md, 0.0)
    return out


def _f_tdi(s, period, multiple):
    c = s.close
    mom = _nan(len(c))
    mom[period:] = c[period:] - c[:-period]
    di = np.abs(_rolling_sum(mom, period))
    long_abs = _rolling_sum(np.abs(mom), period * multiple)
    short_abs = _rolling_sum(np.abs(mom), period)
    return di - (long_abs - short_abs)


def _f_vhf(s, period):
    c = s.close
    rng = _rolling(c, period + 1, np.max) - _rolling(c, period + 1, np.min)
    path = _nan(len(c))
    path[1:] = np.abs(np.diff(c))
    moves = _nan(len(c))
    if len(c) > period:
        moves[period:] = np.sum(sliding_window_view(path[1:], period), axis=-1)
    return _safe_div(rng, moves, 0.0)


def _f_dpo(s, period):
    c = s.close
    shift = period // 2 + 1
    lagged = _nan(len(c))
    lagged[shift:] = c[:-shift]
    return lagged - _sma(c, period)


def _f_zigzag(s, change_pct):
    """Direction of the last confirmed swing; 0 until the first confirmation.

    A swing is confirmed only once the close has moved ``change_pct`` percent
    away from the running extreme, so no value ever depends on later bars.
    """
    c = s.close
    k = change_pct / 100.0
    out = np.zeros(len(c))
    trend = 0
    hi = lo = c[0]
    for t in range(len(c)):
        x = c[t]
        if trend >= 0 and x > hi:
            hi = x
        if trend <= 0 and x < lo:
            lo = x
        if trend <= 0 and x >= lo * (1 + k):
            trend, hi = 1, x
        elif trend >= 0 and x <= hi * (1 - k):
            trend, lo = -1, x
        out[t] = trend
    return out


def _f_rsi(s, period):
    d = np.zeros(len(s.close))
    d[1:] = np.diff(s.close)
    gain = _wilder(np.maximum(d, 0.0), period, start=1)
    loss = _wilder(np.maximum(-d, 0.0), period, start=1)
    rsi = 100.0 - 100.0 / (1.0 + _safe_div(gain, loss, np.inf))
    both_zero = (gain == 0) & (loss == 0)
    return np.where(both_zero, 50.0, rsi)


def _f_atr(s, period):
    return _wilder(_true_range(s), period, start=1)


def _f_volatility(s, period, annualization):
    r = _nan(len(s.close))
    r[1:] = np.diff(np.log(s.close))
    out = _nan(len(r))
    if len(r) > period:
        out[period:] = np.std(sliding_window_view(r[1:], period), axis=-1, ddof=1)
    return out * np.sqrt(annualization)


def _f_roc(s, period):
    c = s.close
    out = _nan(len(c))
    out[period:] = c[period:] / c[:-period] - 1.0
    return out


def _f_cmo(s, period):
    d = _nan(len(s.close))
    d[1:] = np.diff(s.close)
    up = _rolling_sum(np.maximum(d, 0.0), period)
    dn = _rolling_sum(np.maximum(-d, 0.0), period)
    return 100.0 * _safe_div(up - dn, up + dn, 0.0)


def _f_mfi(s, period):
    tp = _typical(s)
    flow = tp * s.volume
    pos = _nan(len(tp))
    neg = _nan(len(tp))
    pos[1:] = np.where(tp[1:] > tp[:-1], flow[1:], 0.0)
    neg[1:] = np.where(tp[1:] < tp[:-1], flow[1:], 0.0)
    p = _rolling_sum(pos, period)
    n = _rolling_sum(neg, period)
    return 100.0 * _safe_div(p, p + n, 0.5)


def _f_wpr(s, period):
    hh = _rolling(s.high, period, np.max)
    ll = _rolling(s.low, period, np.min)
    return -100.0 * _safe_div(hh - s.close, hh - ll, 0.5)


def _f_obv(s):
    c, v = s.close, s.volume
    step = np.zeros(len(c))
    step[1:] = np.sign(np.diff(c)) * v[1:]
    return np.cumsum(step)


def _f_clv(s):
    return _clv(s)


def _f_cmf(s, period):
    mfv = _clv(s) * s.volume
    return _safe_div(_rolling_sum(mfv, period), _rolling_sum(s.volume, period), 0.0)


def _f_chaikin_ad(s):
    return np.cumsum(_clv(s) * s.volume)


def _f_momentum(s, period):
    c = s.close
    out = _nan(len(c))
    out[period:] = c[period:] - c[:-period]
    return out


def _f_stoch(s, k_period, d_period):
    hh = _rolling(s.high, k_period, np.max)
    ll = _rolling(s.low, k_period, np.min)
    return 100.0 * _safe_div(s.close - ll, hh - ll, 0.5)


_FUNCS = {
    "EMA": _f_ema, "SMA": _f_sma, "EVWMA": _f_evwma, "ZLEMA": _f_zlema,
    "TRIX": _f_trix, "MACD": _f_macd, "EMV": _f_emv, "DEMA": _f_dema,
    "ADX": _f_adx, "AROON": _f_aroon, "CCI": _f_cci, "TDI": _f_tdi,
    "VHF": _f_vhf, "DPO": _f_dpo, "ZigZag": _f_zigzag, "RSI": _f_rsi,
    "ATR": _f_atr, "Volatility": _f_volatility, "ROC": _f_roc, "CMO": _f_cmo,
    "MFI": _f_mfi, "WPR": _f_wpr, "OBV": _f_obv, "CLV": _f_clv, "CMF": _f_cmf,
    "ChaikinAD": _f_chaikin_ad, "Momentum": _f_momentum, "Stoch": _f_stoch,
}

_WARM_UP = {
    "EMA": lambda p: p["period"] - 1,
    "SMA": lambda p: p["period"] - 1,
    "EVWMA": lambda p: p["period"] - 1,
    "ZLEMA": lambda p: (p["period"] - 1) // 2 + p["period"] - 1,
    "TRIX": lambda p: 3 * (p["period"] - 1) + 1,
    "MACD": lambda p: p["slow"] + p["signal"] - 2,
    "EMV": lambda p: p["period"],
    "DEMA": lambda p: 2 * (p["period"] - 1),
    "ADX": lambda p: 2 * p["period"] - 1,
    "AROON": lambda p: p["period"],
    "CCI": lambda p: p["period"] - 1,
    "TDI": lambda p: p["period"] + p["period"] * p["multiple"] - 1,
    "VHF": lambda p: p["period"],
    "DPO": lambda p: max(p["period"] - 1, p["period"] // 2 + 1),
    "ZigZag": lambda p: 0,
    "RSI": lambda p: p["period"],
    "ATR": lambda p: p["period"],
    "Volatility": lambda p: p["period"],
    "ROC": lambda p: p["period"],
    "CMO": lambda p: p["period"],
    "MFI": lambda p: p["period"],
    "WPR": lambda p: p["period"] - 1,
    "OBV": lambda p: 0,
    "CLV": lambda p: 0,
    "CMF": lambda p: p["period"] - 1,
    "ChaikinAD": lambda p: 0,
    "Momentum": lambda p: p["period"],
    "Stoch": lambda p: p["k_period"] - 1,
}
