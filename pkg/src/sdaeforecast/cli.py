"""Command line entry point: ``sdaeforecast <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import experiment
from .config import ConfigError, load_config
from .features import FeatureError
from .indicators import IndicatorError, catalog
from .market_data import DataError, load_series, save_series
from .synthetic import gen_synthetic


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", newline="", encoding="utf-8")


def cmd_run(args):
    report = experiment.run(args.config)
    cfg = load_config(args.config)
    print(f"wrote {os.path.normpath(cfg.output_dir() / 'report.json')}")
    for name, avg in report.averages.items():
        acc = avg["accuracy"]
        print(f"{name:5s} mean accuracy {100 * acc:.1f}%" if acc is not None else f"{name}: no windows")
    return 0


def cmd_gen_synthetic(args):
    series = gen_synthetic(args.days, args.seed, args.signal)
    save_series(series, args.out)
    print(f"wrote {len(series)} bars to {args.out}")
    return 0


def cmd_dump_indicators(args):
    series = load_series(args.data)
    specs = load_config(args.config).specs() if args.config else catalog()
    fh = _open_out(args.out)
    try:
        experiment.write_rows(experiment.indicator_rows(series, specs), fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_dump_features(args):
    cfg = load_config(args.config)
    series = load_series(args.data) if args.data else None
    fm = experiment.scaled_window(cfg, args.window, series)
    if args.out in (None, "-"):
        experiment.write_rows([["date", *fm.columns, "label"]]
                              + [[d.isoformat(), *map(repr, map(float, r)), int(y)]
                                 for d, r, y in zip(fm.dates, fm.rows, fm.labels)], sys.stdout)
    else:
        fm.to_csv(args.out)
    return 0


def cmd_report(args):
    report = experiment.load_report(args.path)
    if args.format == "json":
        sys.stdout.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
        return 0
    for name, build in experiment.TABLES.items():
        print(f"# {name}")
        experiment.write_rows(build(report), sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sdaeforecast",
                                description="Next-day direction forecasting from technical indicators.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the walk-forward experiment")
    r.add_argument("--config", required=True)
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("gen-synthetic", help="write a synthetic OHLCV CSV")
    g.add_argument("--days", type=int, default=3000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--signal", type=float, default=0.8)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_synthetic)

    d = sub.add_parser("dump-indicators", help="write all 28 indicator series as CSV")
    d.add_argument("--data", required=True)
    d.add_argument("--config", help="take indicator parameters from this config")
    d.add_argument("--out", help="output CSV (default stdout)")
    d.set_defaults(func=cmd_dump_indicators)

    f = sub.add_parser("dump-features", help="write one window's scaled feature matrix")
    f.add_argument("--config", required=True)
    f.add_argument("--data", help="override the config's data source")
    f.add_argument("--window", type=int, default=0)
    f.add_argument("--out", help="output CSV (default stdout)")
    f.set_defaults(func=cmd_dump_features)

    rep = sub.add_parser("report", help="print a saved report")
    rep.add_argument("path", nargs="?", default="results",
                     help="report.json or the run's output directory")
    rep.add_argument("--format", choices=("json", "csv"), default="csv")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DataError, FeatureError, IndicatorError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
