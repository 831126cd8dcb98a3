"""Three-layer backpropagation network (input -> one sigmoid hidden layer -> sigmoid output)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import nn_core
from .nn_core import DenseLayer, TrainConfig


@dataclass(frozen=True)
class BpnnConfig:
    n_hidden: int = 50
    learning_rate: float = 0.05
    momentum: float = 0.9
    epochs: int = 500
    batch_size: int = 32
    validation_fraction: float = 0.15
    threshold: float = 0.5
    seed: int = 0

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.learning_rate, self.momentum, self.epochs,
                           self.batch_size, self.seed)


@dataclass
class BpnnModel:
    net: list[DenseLayer]
    threshold: float = 0.5
    config: BpnnConfig = field(default_factory=BpnnConfig)
    history: nn_core.FitHistory | None = None

    @property
    def n_inputs(self) -> int:
        return self.net[0].n_in


def labels_to_targets(labels) -> np.ndarray:
    labels = np.asarray(labels)
    if not np.all(np.isin(labels, (-1, 1))):
        raise ValueError("labels must be -1 or +1")
    return (labels > 0).astype(float)


def split_validation(n: int, fraction: float) -> int:
    """Index where the validation tail starts."""
    if not 0 <= fraction < 1:
        raise ValueError("validation_fraction must lie in [0, 1)")
    n_val = int(round(n * fraction))
    if n - n_val < 1:
        n_val = n - 1
    return n - n_val


def warn_if_degenerate(labels, who):
    if len(np.unique(labels)) < 2:
        warnings.warn(f"{who}: training labels contain a single class", RuntimeWarning,
                      stacklevel=3)


def train(x, labels, config: BpnnConfig | None = None) -> BpnnModel:
    """Fit on the head of the rows and early-stop on the trailing validation block."""
    config = config or BpnnConfig()
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise ValueError("no training rows")
    t = labels_to_targets(labels)
    warn_if_degenerate(labels, "bpnn")
    cut = split_validation(len(x), config.validation_fraction)
    rng = np.random.default_rng(config.seed)
    net = nn_core.init_network([x.shape[1], config.n_hidden, 1], rng)
    net, history = nn_core.train_binary_classifier(
        net, x[:cut], t[:cut], x[cut:], t[cut:], config.train_config(), config.threshold)
    return BpnnModel(net, config.threshold, config, history)


def decision_values(model: BpnnModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.n_inputs:
        raise ValueError(f"expected {model.n_inputs} features, got shape {x.shape}")
    return nn_core.forward(model.net, x)[0][:, 0]


def predict(model: BpnnModel, x) -> np.ndarray:
    return np.where(decision_values(model, x) >= model.threshold, 1, -1).astype(np.int8)
