from types import MappingProxyType

import numpy as np
import pytest

from conftest import random_walk_series, series_from_closes
from sdaeforecast.indicators import (BOUNDS, CATEGORIES, NAMES, IndicatorError, IndicatorSpec,
                                     catalog, category_of, compute, compute_all)
from sdaeforecast.market_data import BarSeries


def spec(name, **params):
    return IndicatorSpec(name, MappingProxyType(params))


def scaled(series, k):
    return BarSeries.from_arrays(series.dates, k * series.open, k * series.high, k * series.low,
                                 k * series.close, series.volume)


def test_catalog_shape():
    specs = catalog()
    assert len(specs) == 28 and len(set(s.name for s in specs)) == 28
    assert [len(v) for v in CATEGORIES.values()] == [6, 9, 7, 4, 2]
    assert [s.name for s in specs] == list(NAMES)
    assert category_of("RSI") == "oscillators"


def test_max_warm_up_default():
    assert max(s.warm_up for s in catalog()) == 59


def test_overrides_and_validation():
    assert dict(catalog({"RSI": {"period": 7}})[NAMES.index("RSI")].params) == {"period": 7}
    with pytest.raises(IndicatorError):
        spec("RSI", period=0)
    with pytest.raises(IndicatorError):
        spec("RSI", length=3)
    with pytest.raises(IndicatorError):
        spec("NOPE")
    with pytest.raises(IndicatorError):
        spec("MACD", fast=30, slow=26)
    with pytest.raises(IndicatorError):
        catalog({"XYZ": {}})


def test_sma_worked_example():
    out = compute(spec("SMA", period=3), series_from_closes([1, 2, 3, 4])).values
    assert np.isnan(out[:2]).all()
    assert out[2] == pytest.approx(2.0) and out[3] == pytest.approx(3.0)


def test_ema_of_constant():
    out = compute(spec("EMA", period=5), series_from_closes([7.0] * 30)).values
    np.testing.assert_allclose(out[4:], 7.0)


def test_rsi_rising_series():
    out = compute(spec("RSI", period=14), series_from_closes(np.arange(1, 41, dtype=float))).values
    np.testing.assert_allclose(out[14:], 100.0)


def test_obv_worked_example():
    s = series_from_closes([10, 11, 10], volumes=[3, 5, 2])
    np.testing.assert_allclose(compute(spec("OBV"), s).values, [0, 5, 3])


def test_momentum_and_roc():
    s = series_from_closes(np.arange(1, 21, dtype=float))
    np.testing.assert_allclose(compute(spec("Momentum", period=3), s).values[3:], 3.0)
    roc = compute(spec("ROC", period=1), s).values
    assert roc[1] == pytest.approx(1.0)


def test_too_short():
    with pytest.raises(IndicatorError):
        compute(spec("TDI"), random_walk_series(59))


def test_warm_up_boundary(walk300):
    for s in catalog():
        out = compute(s, walk300).values
        assert np.isnan(out[:s.warm_up]).all(), s.name
        assert np.isfinite(out[s.warm_up:]).all(), s.name


def test_causality_all_indicators(walk300):
    full = {r.name: r.values for r in compute_all(catalog(), walk300)}
    for k in (120, 200):
        prefix = walk300[:k]
        for s in catalog():
            np.testing.assert_array_equal(compute(s, prefix).values, full[s.name][:k], err_msg=s.name)


def test_causality_future_perturbation(walk300):
    k = 150
    c = walk300.close.copy()
    c[k + 1:] *= 1.7
    changed = BarSeries.from_arrays(walk300.dates, np.concatenate([walk300.open[:k + 1], 1.7 * walk300.open[k + 1:]]),
                                    np.concatenate([walk300.high[:k + 1], 1.7 * walk300.high[k + 1:]]),
                                    np.concatenate([walk300.low[:k + 1], 1.7 * walk300.low[k + 1:]]),
                                    c, walk300.volume)
    for s in catalog():
        a = compute(s, walk300).values[:k + 1]
        b = compute(s, changed).values[:k + 1]
        np.testing.assert_array_equal(a, b, err_msg=s.name)


def test_bounded_oscillators_stay_in_range():
    for seed in range(200):
        series = random_walk_series(120, seed=seed, vol=0.02)
        for name, (lo, hi) in BOUNDS.items():
            v = compute(spec(name), series).values
            v = v[np.isfinite(v)]
            assert v.min() >= lo - 1e-9 and v.max() <= hi + 1e-9, name


SCALE_FREE = ("RSI", "CMO", "WPR", "Stoch", "ROC", "CLV", "AROON", "VHF", "ADX", "TRIX",
              "Volatility", "MFI", "CMF", "ZigZag")
SCALE_LINEAR = ("SMA", "EMA", "EVWMA", "ZLEMA", "DEMA", "ATR", "Momentum", "MACD", "DPO")


def test_price_scale_behaviour(walk300):
    big = scaled(walk300, 3.0)
    for name in SCALE_FREE:
        np.testing.assert_allclose(compute(spec(name), big).values, compute(spec(name), walk300).values,
                                   rtol=1e-9, atol=1e-9, err_msg=name)
    for name in SCALE_LINEAR:
        np.testing.assert_allclose(compute(spec(name), big).values, 3 * compute(spec(name), walk300).values,
                                   rtol=1e-9, atol=1e-9, err_msg=name)


def test_deterministic(walk300):
    a = compute_all(catalog(), walk300)
    b = compute_all(catalog(), walk300)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.values, y.values)
