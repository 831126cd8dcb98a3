"""Walk-forward experiment: per-window training, evaluation, backtest and reports."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import backtest, bpnn, evaluation, sdae, svm
from .config import ExperimentConfig, MODELS, load_config
from .features import FeatureMatrix, Scaler, assemble, fit_scaler, transform
from .indicators import compute_all
from .market_data import BarSeries, load_series
from .synthetic import gen_synthetic

log = logging.getLogger(__name__)

METRICS = ("accuracy", "precision", "recall", "f_score")
MODEL_LABELS = {"bpnn": "BPNN", "svm": "SVM", "sdae": "SDAE"}
_MODEL_IDS = {name: i for i, name in enumerate(MODELS)}


@dataclass(frozen=True)
class Window:
    index: int
    train: tuple[int, int]  # half-open row ranges
    test: tuple[int, int]


@dataclass(frozen=True)
class WindowPlan:
    windows: tuple[Window, ...]
    n: int
    train_len: int
    test_len: int

    def __len__(self):
        return len(self.windows)

    def __iter__(self):
        return iter(self.windows)

    def test_sizes(self) -> list[int]:
        return [w.test[1] - w.test[0] for w in self.windows]


def make_windows(n: int, train_len: int = 1400, test_len: int = 100) -> WindowPlan:
    """Sliding windows over n labeled rows: train on ``train_len`` rows, test on the next block.

    Each window slides by ``test_len``; the last test block takes whatever remains.
    """
    if train_len < 1 or test_len < 1:
        raise ValueError("train_len and test_len must be positive")
    if n <= train_len:
        raise ValueError(f"need more than {train_len} labeled rows, got {n}")
    windows = []
    start = train_len
    k = 0
    while start < n:
        stop = min(start + test_len, n)
        windows.append(Window(k, (start - train_len, start), (start, stop)))
        start = stop
        k += 1
    return WindowPlan(tuple(windows), n, train_len, test_len)


def derive_seed(base: int, window: int, model: str, extra: int = 0) -> int:
    ss = np.random.SeedSequence([base, window, _MODEL_IDS[model], extra])
    return int(ss.generate_state(1)[0])


@dataclass
class WindowFit:
    """Everything learned from one training window."""

    window: Window
    scaler: Scaler
    models: dict = field(default_factory=dict)
    selection: svm.Selection | None = None
    predictions: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)


def _train_model(name, x, y, cfg: ExperimentConfig, seed):
    if name == "bpnn":
        model = bpnn.train(x, y, dataclasses.replace(cfg.bpnn, seed=seed))
        return model, None
    if name == "sdae":
        model = sdae.train(x, y, dataclasses.replace(cfg.sdae, seed=seed))
        return model, None
    model, selection = svm.train(x, y, cfg.svm)
    return model, selection


def _predict(name, model, x):
    return {"bpnn": bpnn.predict, "svm": svm.predict, "sdae": sdae.predict}[name](model, x)


def fit_window(fm: FeatureMatrix, window: Window, cfg: ExperimentConfig) -> WindowFit:
    """Scale with training statistics, train every enabled model, predict the test block."""
    train = fm.slice(*window.train)
    test = fm.slice(*window.test)
    scaler = fit_scaler(train)
    x_train = transform(scaler, train).rows
    x_test = transform(scaler, test).rows
    fit = WindowFit(window, scaler)
    for name in cfg.protocol.models:
        seed = derive_seed(cfg.protocol.seed, window.index, name,
                           getattr(getattr(cfg, name), "seed", 0))
        try:
            model, selection = _train_model(name, x_train, train.labels, cfg, seed)
            fit.models[name] = model
            if selection is not None:
                fit.selection = selection
            fit.predictions[name] = _predict(name, model, x_test)
        except Exception as exc:  # recorded per window; other models continue
            log.error("window %d: %s failed: %s", window.index, name, exc)
            fit.failures[name] = f"{type(exc).__name__}: {exc}"
            fit.predictions[name] = np.zeros(len(test), dtype=np.int8)
    return fit


def load_data(cfg: ExperimentConfig) -> BarSeries:
    path = cfg.data_path()
    if path is not None:
        return load_series(path)
    return gen_synthetic(cfg.data.synthetic_days, cfg.data.synthetic_seed,
                         cfg.data.synthetic_signal)


# ------------------------------------------------------------------- report

@dataclass
class RunReport:
    config: dict
    seed: int
    models: list
    backtest_models: list
    n_bars: int
    n_rows: int
    first_row_date: str
    windows: list
    averages: dict
    trading: dict
    drawdowns: dict

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


def _metrics_block(pred, actual):
    cm = evaluation.confusion(pred, actual)
    return {**evaluation.metrics(cm), "confusion": cm.as_dict()}


def _window_entry(fit: WindowFit, fm: FeatureMatrix, models) -> dict:
    w = fit.window
    actual = fm.labels[w.test[0]:w.test[1]]
    entry = {
        "index": w.index,
        "train": list(w.train),
        "test": list(w.test),
        "test_dates": [fm.dates[w.test[0]].isoformat(), fm.dates[w.test[1] - 1].isoformat()],
        "metrics": {},
        "failures": dict(fit.failures),
        "svm_selection": None,
    }
    for name in models:
        if name not in fit.failures:
            entry["metrics"][name] = _metrics_block(fit.predictions[name], actual)
    if fit.selection is not None:
        entry["svm_selection"] = {"sigma2": fit.selection.sigma2, "C": fit.selection.C,
                                  "m_x": fit.selection.m_x, "flags": list(fit.selection.flags)}
    return entry


def _averages(windows, models) -> dict:
    out = {}
    for name in models:
        rows = [w["metrics"][name] for w in windows if name in w["metrics"]]
        out[name] = {m: (float(np.mean([r[m] for r in rows])) if rows else None) for m in METRICS}
        out[name]["windows"] = len(rows)
    return out


def _drawdown_dict(rec: backtest.DrawdownRecord) -> dict:
    return {
        "begin": rec.begin_date.isoformat(), "bottom": rec.bottom_date.isoformat(),
        "end": rec.end_date.isoformat(), "depth": rec.depth, "length": rec.length,
        "fall": rec.fall, "recovery": rec.recovery, "recovered": rec.recovered,
    }


@dataclass
class RunResult:
    report: RunReport
    fits: list
    curves: dict
    trades: dict
    features: FeatureMatrix


def run_experiment(cfg: ExperimentConfig, series: BarSeries | None = None) -> RunResult:
    series = series if series is not None else load_data(cfg)
    fm = assemble(series, cfg.specs())
    plan = make_windows(len(fm), cfg.protocol.train_len, cfg.protocol.test_len)
    models = list(cfg.protocol.models)
    log.info("%d bars, %d feature rows, %d windows, models %s",
             len(series), len(fm), len(plan), models)

    if cfg.protocol.n_jobs > 1:
        with ProcessPoolExecutor(cfg.protocol.n_jobs) as pool:
            fits = list(pool.map(fit_window, [fm] * len(plan), plan.windows, [cfg] * len(plan)))
    else:
        fits = [fit_window(fm, w, cfg) for w in plan]

    windows = [_window_entry(f, fm, models) for f in fits]

    # bar index of feature row 0
    offset = len(series) - 1 - len(fm)
    span = slice(plan.windows[0].test[0], plan.n)
    closes = series.close[offset + span.start: offset + span.stop + 1]
    dates = series.dates[offset + span.start: offset + span.stop + 1]
    backtest_models = [m for m in models if m != "bpnn" or cfg.backtest.include_bpnn]
    trading, drawdowns, curves, trades = {}, {}, {}, {}
    for name in backtest_models:
        preds = np.concatenate([f.predictions[name] for f in fits])
        curve, tr = backtest.simulate(preds, closes, cfg.strategy, dates)
        curves[name], trades[name] = curve, tr
        trading[name] = {
            "success_rate": backtest.transaction_success_rate(tr),
            "n_trades": len(tr),
            "cumulative_return_pct": 100.0 * backtest.cumulative_return(curve),
            "max_drawdown_pct": backtest.max_drawdown(curve),
        }
        drawdowns[name] = [_drawdown_dict(r) for r in backtest.top_drawdowns(curve, 5)]

    report = RunReport(
        config=cfg.echo(), seed=cfg.protocol.seed, models=models,
        backtest_models=backtest_models, n_bars=len(series), n_rows=len(fm),
        first_row_date=fm.dates[0].isoformat(), windows=windows,
        averages=_averages(windows, models), trading=trading, drawdowns=drawdowns,
    )
    return RunResult(report, fits, curves, trades, fm)


# ------------------------------------------------------------------ outputs

def _pct(v):
    return "" if v is None else f"{100.0 * v:.2f}"


def metric_table(report: RunReport, metric: str) -> list[list[str]]:
    models = [m for m in MODELS if m in report.models]
    rows = [["Period", *(MODEL_LABELS[m] + "(%)" for m in models)]]
    for w in report.windows:
        rows.append([str(w["index"] + 1),
                     *(_pct(w["metrics"].get(m, {}).get(metric)) for m in models)])
    rows.append(["Average", *(_pct(report.averages[m][metric]) for m in models)])
    return rows


def trading_table(report: RunReport) -> list[list[str]]:
    models = report.backtest_models
    sr = [report.trading[m]["success_rate"] for m in models]
    return [
        ["", *(MODEL_LABELS[m] for m in models)],
        ["Transaction success rate(%)", *(_pct(v) for v in sr)],
        ["Cumulative return(%)", *(f"{report.trading[m]['cumulative_return_pct']:.2f}" for m in models)],
        ["Number of transactions", *(str(report.trading[m]["n_trades"]) for m in models)],
    ]


def drawdown_table(report: RunReport) -> list[list[str]]:
    rows = [["Stage", "Begin", "Bottom", "End", "Depth", "Length", "Fall", "Recovery"]]
    for m in report.backtest_models:
        for k, d in enumerate(report.drawdowns[m], start=1):
            rows.append([f"{k}({MODEL_LABELS[m]})", d["begin"], d["bottom"], d["end"],
                         f"{d['depth']:.2f}", str(d["length"]), str(d["fall"]), str(d["recovery"])])
    return rows


TABLES = {
    "table3_accuracy": lambda r: metric_table(r, "accuracy"),
    "table4_precision": lambda r: metric_table(r, "precision"),
    "table5_recall": lambda r: metric_table(r, "recall"),
    "table6_f_score": lambda r: metric_table(r, "f_score"),
    "table7_trading": trading_table,
    "table8_drawdowns": drawdown_table,
}


def write_rows(rows, fh):
    csv.writer(fh, lineterminator="\n").writerows(rows)


def write_outputs(result: RunResult, out_dir, plot: bool = True) -> Path:
    out = Path(out_dir)
    (out / "tables").mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(result.report.to_json(), encoding="utf-8")
    for name, build in TABLES.items():
        with (out / "tables" / f"{name}.csv").open("w", newline="", encoding="utf-8") as fh:
            write_rows(build(result.report), fh)
    names = list(result.curves)
    if names:
        dates = result.curves[names[0]].dates
        with (out / "equity_curve.csv").open("w", newline="", encoding="utf-8") as fh:
            rows = [["date", *(f"{MODEL_LABELS[n]}_cumulative_return_pct" for n in names)]]
            for i, d in enumerate(dates):
                rows.append([d.isoformat(), *(repr(float(result.curves[n].percent[i])) for n in names)])
            write_rows(rows, fh)
        if plot:
            plot_equity(result.curves, out / "equity_curve.svg")
    return out


def plot_equity(curves: dict, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4))
    for name, curve in curves.items():
        ax.plot(curve.dates, curve.percent, label=MODEL_LABELS[name])
    ax.set_ylabel("Cumulative return (%)")
    ax.set_title("Out-of-sample cumulative return")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def run(config_path) -> RunReport:
    cfg = load_config(config_path)
    result = run_experiment(cfg)
    write_outputs(result, cfg.output_dir(), cfg.output.plot)
    return result.report


def indicator_rows(series: BarSeries, specs) -> list[list[str]]:
    computed = compute_all(specs, series)
    rows = [["date", *(c.name for c in computed)]]
    for t, d in enumerate(series.dates):
        rows.append([d.isoformat(), *("" if np.isnan(c.values[t]) else repr(float(c.values[t]))
                                      for c in computed)])
    return rows


def scaled_window(cfg: ExperimentConfig, window_index: int = 0,
                  series: BarSeries | None = None) -> FeatureMatrix:
    """Train and test rows of one window, scaled with the train-fitted scaler."""
    series = series if series is not None else load_data(cfg)
    fm = assemble(series, cfg.specs())
    plan = make_windows(len(fm), cfg.protocol.train_len, cfg.protocol.test_len)
    w = plan.windows[window_index]
    scaler = fit_scaler(fm.slice(*w.train))
    return transform(scaler, fm.slice(w.train[0], w.test[1]))


def load_report(path) -> RunReport:
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    return RunReport.from_json(path.read_text(encoding="utf-8"))
