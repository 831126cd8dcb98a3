"""Experiment configuration: INI sections mapped onto dataclasses.

Sections: ``data``, ``protocol``, ``indicators``, ``bpnn``, ``svm``, ``sdae``,
``strategy``, ``output``. Indicator overrides use ``NAME.param = value`` keys.
Errors name the offending ``section.key``.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .backtest import StrategyConfig
from .bpnn import BpnnConfig
from .indicators import DEFAULT_PARAMS, IndicatorError, catalog
from .sdae import SdaeConfig
from .svm import SvmConfig

MODELS = ("bpnn", "svm", "sdae")
SECTIONS = ("data", "protocol", "indicators", "bpnn", "svm", "sdae", "strategy", "output")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DataConfig:
    path: str = ""
    synthetic_days: int = 3000
    synthetic_seed: int = 0
    synthetic_signal: float = 0.8


@dataclass(frozen=True)
class ProtocolConfig:
    train_len: int = 1400
    test_len: int = 100
    seed: int = 0
    models: tuple[str, ...] = ("bpnn", "svm", "sdae")
    n_jobs: int = 1


@dataclass(frozen=True)
class BacktestOptions:
    include_bpnn: bool = False


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "results"
    plot: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataConfig = field(default_factory=DataConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    indicators: dict = field(default_factory=dict)
    bpnn: BpnnConfig = field(default_factory=BpnnConfig)
    svm: SvmConfig = field(default_factory=SvmConfig)
    sdae: SdaeConfig = field(default_factory=SdaeConfig)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    backtest: BacktestOptions = field(default_factory=BacktestOptions)
    output: OutputConfig = field(default_factory=OutputConfig)
    base_dir: str = "."

    def data_path(self) -> Path | None:
        if not self.data.path:
            return None
        p = Path(self.data.path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def output_dir(self) -> Path:
        p = Path(self.output.dir)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def specs(self):
        return catalog(self.indicators)

    def echo(self) -> dict:
        """JSON-ready view of every setting (paths excluded from the base dir)."""
        out = {}
        for name in ("data", "protocol", "bpnn", "svm", "sdae", "strategy", "backtest", "output"):
            out[name] = _jsonable(dataclasses.asdict(getattr(self, name)))
        out["indicators"] = {s.name: dict(s.params) for s in self.specs()}
        return out


def _jsonable(d):
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _convert(raw: str, default, where: str):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            kind = type(default[0]) if default else str
            return tuple(kind(s) for s in items)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _apply(cls, section: str, values: dict):
    defaults = cls()
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, raw in values.items():
        if key not in names:
            raise ConfigError(f"{section}.{key}: unknown key")
        kwargs[key] = _convert(raw, getattr(defaults, key), f"{section}.{key}")
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


def _indicator_overrides(values: dict) -> dict:
    out: dict[str, dict[str, float]] = {}
    for key, raw in values.items():
        name, _, param = key.partition(".")
        where = f"indicators.{key}"
        if name not in DEFAULT_PARAMS or not param:
            raise ConfigError(f"{where}: expected NAME.param with a known indicator")
        try:
            out.setdefault(name, {})[param] = float(raw)
        except ValueError:
            raise ConfigError(f"{where}: not a number: {raw!r}") from None
    try:
        catalog(out)
    except IndicatorError as exc:
        raise ConfigError(f"indicators: {exc}") from None
    return out


def parse_config(text: str, base_dir=".") -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from None
    unknown = set(parser.sections()) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")

    def section(name):
        return dict(parser[name]) if parser.has_section(name) else {}

    strategy = section("strategy")
    backtest_keys = {k: strategy.pop(k) for k in list(strategy) if k == "include_bpnn"}
    protocol = _apply(ProtocolConfig, "protocol", section("protocol"))
    bad = set(protocol.models) - set(MODELS)
    if bad or not protocol.models:
        raise ConfigError(f"protocol.models: expected a subset of {MODELS}, got {protocol.models}")
    if protocol.train_len < 1 or protocol.test_len < 1:
        raise ConfigError("protocol: train_len and test_len must be positive")
    return ExperimentConfig(
        data=_apply(DataConfig, "data", section("data")),
        protocol=protocol,
        indicators=_indicator_overrides(section("indicators")),
        bpnn=_apply(BpnnConfig, "bpnn", section("bpnn")),
        svm=_apply(SvmConfig, "svm", section("svm")),
        sdae=_apply(SdaeConfig, "sdae", section("sdae")),
        strategy=_apply(StrategyConfig, "strategy", strategy),
        backtest=_apply(BacktestOptions, "strategy", backtest_keys),
        output=_apply(OutputConfig, "output", section("output")),
        base_dir=str(base_dir),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=path.parent)
