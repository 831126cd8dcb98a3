"""Stacked denoising autoencoders with greedy layer-wise pretraining.

Each layer is a tied-weight sigmoid autoencoder trained to reconstruct its
clean input from a masked copy. The trained encoders are stacked, capped with
a single sigmoid unit, and the whole network is fine-tuned with binary
cross-entropy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn_core
from .bpnn import labels_to_targets, split_validation, warn_if_degenerate
from .nn_core import DenseLayer, TrainConfig


@dataclass(frozen=True)
class SdaeConfig:
    layer_sizes: tuple[int, ...] = (64, 32, 16)
    corruption: float = 0.3
    pretrain_epochs: int = 200
    finetune_epochs: int = 300
    learning_rate: float = 0.05
    momentum: float = 0.9
    batch_size: int = 32
    validation_fraction: float = 0.15
    threshold: float = 0.5
    seed: int = 0

    def pretrain_config(self) -> TrainConfig:
        return TrainConfig(self.learning_rate, self.momentum, self.pretrain_epochs,
                           self.batch_size, self.seed)

    def finetune_config(self) -> TrainConfig:
        return TrainConfig(self.learning_rate, self.momentum, self.finetune_epochs,
                           self.batch_size, self.seed + 1)


@dataclass
class DenoisingAutoencoder:
    encoder: DenseLayer
    visible_bias: np.ndarray
    corruption: float = 0.3

    def __post_init__(self):
        if not 0 <= self.corruption <= 1:
            raise ValueError("corruption rate must lie in [0, 1]")
        self.visible_bias = np.asarray(self.visible_bias, dtype=float)

    @property
    def decoder(self) -> DenseLayer:
        # tied weights: always rebuilt from the encoder
        return DenseLayer(self.encoder.W.T, self.visible_bias)

    @property
    def net(self) -> list[DenseLayer]:
        return [self.encoder, self.decoder]

    @classmethod
    def initialize(cls, n_in, n_hidden, rng, corruption=0.3):
        return cls(nn_core.init_layer(n_in, n_hidden, rng), np.zeros(n_in), corruption)


@dataclass
class SdaeModel:
    stack: list[DenseLayer]
    head: DenseLayer
    threshold: float = 0.5
    config: SdaeConfig = field(default_factory=SdaeConfig)
    pretrain_traces: list[list[float]] = field(default_factory=list)
    history: nn_core.FitHistory | None = None

    @property
    def net(self) -> list[DenseLayer]:
        return [*self.stack, self.head]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.stack[0].n_in, *(l.n_out for l in self.stack)]


def corrupt(x, p: float, rng: np.random.Generator) -> np.ndarray:
    """Masking noise: each entry independently zeroed with probability p."""
    if not 0 <= p <= 1:
        raise ValueError("corruption rate must lie in [0, 1]")
    x = np.asarray(x, dtype=float)
    if p == 0:
        return x.copy()
    return np.where(rng.random(x.shape) < p, 0.0, x)


def reconstruct(da: DenoisingAutoencoder, x) -> np.ndarray:
    return nn_core.forward(da.net, x)[0]


def reconstruction_loss(da: DenoisingAutoencoder, x) -> float:
    """Cross-entropy of the clean reconstruction minus the inputs' own entropy.

    Same gradient as the plain cross-entropy, but zero exactly when the
    reconstruction is perfect, so traces are comparable across datasets.
    """
    x = np.asarray(x, dtype=float)
    z = reconstruct(da, x)
    return nn_core.binary_cross_entropy(z, x) - _entropy(x)


def _entropy(x):
    x = np.clip(x, nn_core.PROB_CLIP, 1 - nn_core.PROB_CLIP)
    return float(-np.sum(x * np.log(x) + (1 - x) * np.log(1 - x)) / len(x))


def tied_gradients(da: DenoisingAutoencoder, x_noisy, x_clean):
    """Gradients of mean reconstruction cross-entropy w.r.t. (W, hidden bias, visible bias)."""
    net = da.net
    z, cache = nn_core.forward(net, x_noisy)
    delta = (z - x_clean) / len(x_clean)
    (gW1, gb1), (gW2, gb2) = nn_core.backward_from_delta(net, cache, delta)
    return gW1 + gW2.T, gb1, gb2


def pretrain_layer(da: DenoisingAutoencoder, inputs, config: TrainConfig):
    """Train one autoencoder in place; returns ``(da, trace)``.

    ``trace[0]`` is the loss before any update and ``trace[k]`` the loss after
    epoch k, both measured on clean inputs with :func:`reconstruction_loss`.
    """
    x = np.asarray(inputs, dtype=float)
    if x.ndim != 2 or x.shape[1] != da.encoder.n_in:
        raise ValueError(f"expected inputs of width {da.encoder.n_in}, got shape {x.shape}")
    rng = np.random.default_rng(config.seed)
    trace = [reconstruction_loss(da, x)]
    vW = np.zeros_like(da.encoder.W)
    vh = np.zeros_like(da.encoder.b)
    vv = np.zeros_like(da.visible_bias)
    lr, mom = config.learning_rate, config.momentum
    for _ in range(config.epochs):
        for idx in nn_core.minibatches(len(x), config.batch_size, rng):
            clean = x[idx]
            noisy = corrupt(clean, da.corruption, rng)
            gW, gh, gv = tied_gradients(da, noisy, clean)
            vW = mom * vW - lr * gW
            vh = mom * vh - lr * gh
            vv = mom * vv - lr * gv
            da.encoder.W += vW
            da.encoder.b += vh
            da.visible_bias += vv
        trace.append(reconstruction_loss(da, x))
    if not np.all(np.isfinite(trace)):
        raise FloatingPointError("non-finite reconstruction loss during pretraining")
    return da, trace


def encode_dataset(da: DenoisingAutoencoder, inputs) -> np.ndarray:
    """Hidden representation of clean inputs (encoder only)."""
    return nn_core.forward([da.encoder], inputs)[0]


def pretrain_stack(layer_sizes, inputs, config: TrainConfig, corruption: float = 0.3,
                   on_layer=None):
    """Greedy unsupervised pretraining; returns ``(autoencoders, traces)``.

    ``layer_sizes`` starts with the input width. Layer k is trained on the
    encoding of the data by the already trained layers 1..k-1, which are not
    touched again. ``on_layer(k, layer_inputs)`` is called before layer k trains.
    """
    sizes = list(layer_sizes)
    x = np.asarray(inputs, dtype=float)
    if len(sizes) < 2:
        raise ValueError("need an input width and at least one hidden size")
    if x.shape[1] != sizes[0]:
        raise ValueError(f"layer_sizes[0]={sizes[0]} but inputs have width {x.shape[1]}")
    rng = np.random.default_rng(config.seed)
    daes, traces = [], []
    for k, (n_in, n_hidden) in enumerate(zip(sizes, sizes[1:])):
        if on_layer is not None:
            on_layer(k, x)
        da = DenoisingAutoencoder.initialize(n_in, n_hidden, rng, corruption)
        layer_cfg = TrainConfig(config.learning_rate, config.momentum, config.epochs,
                                config.batch_size, config.seed + 1000 * (k + 1))
        da, trace = pretrain_layer(da, x, layer_cfg)
        daes.append(da)
        traces.append(trace)
        x = encode_dataset(da, x)
    return daes, traces


def init_head(n_in: int, rng) -> DenseLayer:
    return nn_core.init_layer(n_in, 1, rng)


def finetune(stack, head, x, labels, config: TrainConfig, validation_fraction=0.15,
             threshold=0.5):
    """Supervised backpropagation through the encoders and the head.

    Works on copies; returns ``(stack, head, history)``.
    """
    x = np.asarray(x, dtype=float)
    t = labels_to_targets(labels)
    warn_if_degenerate(labels, "sdae")
    cut = split_validation(len(x), validation_fraction)
    net = nn_core.copy_network([*stack, head])
    net, history = nn_core.train_binary_classifier(
        net, x[:cut], t[:cut], x[cut:], t[cut:], config, threshold)
    return net[:-1], net[-1], history


def train(x, labels, config: SdaeConfig | None = None) -> SdaeModel:
    """Pretrain the stack on all rows (labels unused), then fine-tune end to end."""
    config = config or SdaeConfig()
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise ValueError("no training rows")
    sizes = [x.shape[1], *config.layer_sizes]
    daes, traces = pretrain_stack(sizes, x, config.pretrain_config(), config.corruption)
    rng = np.random.default_rng(config.seed + 7)
    head = init_head(sizes[-1], rng)
    stack, head, history = finetune([d.encoder for d in daes], head, x, labels,
                                    config.finetune_config(), config.validation_fraction,
                                    config.threshold)
    return SdaeModel(list(stack), head, config.threshold, config, traces, history)


def decision_values(model: SdaeModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.stack[0].n_in:
        raise ValueError(f"expected {model.stack[0].n_in} features, got shape {x.shape}")
    return nn_core.forward(model.net, x)[0][:, 0]


def predict(model: SdaeModel, x) -> np.ndarray:
    return np.where(decision_values(model, x) >= model.threshold, 1, -1).astype(np.int8)
