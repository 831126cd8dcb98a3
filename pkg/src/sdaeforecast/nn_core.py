"""Dense sigmoid networks: forward/backward passes, momentum SGD, losses, gradient checks.

Networks are plain lists of :class:`DenseLayer`. Inputs are row-major batches of
shape ``(n_samples, n_features)``; a 1-D vector is treated as a single sample.
Losses average over samples and sum over output units.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SIGMOID = "sigmoid"
IDENTITY = "identity"
ACTIVATIONS = (SIGMOID, IDENTITY)

PROB_CLIP = 1e-12
FORMAT_VERSION = 1


@dataclass
class DenseLayer:
    W: np.ndarray  # (n_out, n_in)
    b: np.ndarray  # (n_out,)
    activation: str = SIGMOID

    def __post_init__(self):
        self.W = np.array(self.W, dtype=float)
        self.b = np.array(self.b, dtype=float)
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise ValueError(f"inconsistent layer shapes W{self.W.shape} b{self.b.shape}")

    @property
    def n_in(self) -> int:
        return self.W.shape[1]

    @property
    def n_out(self) -> int:
        return self.W.shape[0]

    def copy(self) -> "DenseLayer":
        return DenseLayer(self.W.copy(), self.b.copy(), self.activation)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    momentum: float = 0.9
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


@dataclass
class Cache:
    """Activations recorded by :func:`forward` for one network and batch."""

    inputs: list[np.ndarray]
    pre: list[np.ndarray]
    post: list[np.ndarray]
    shapes: tuple[tuple[int, int], ...]
    squeeze: bool = False
    layer_ids: tuple[int, ...] = field(default=())


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def init_layer(n_in: int, n_out: int, rng: np.random.Generator,
               activation: str = SIGMOID) -> DenseLayer:
    """Uniform weights in +-sqrt(6 / (n_in + n_out)), zero biases."""
    bound = np.sqrt(6.0 / (n_in + n_out))
    return DenseLayer(rng.uniform(-bound, bound, size=(n_out, n_in)),
                      np.zeros(n_out), activation)


def init_network(sizes, rng, activation=SIGMOID) -> list[DenseLayer]:
    return [init_layer(a, b, rng, activation) for a, b in zip(sizes, sizes[1:])]


def copy_network(net):
    return [layer.copy() for layer in net]


def _activate(z, kind):
    return sigmoid(z) if kind == SIGMOID else z


def _as_batch(x):
    x = np.asarray(x, dtype=float)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


def forward(net, x):
    """Run ``x`` through every layer; returns ``(output, cache)``."""
    a, squeeze = _as_batch(x)
    inputs, pre, post = [], [], []
    for i, layer in enumerate(net):
        if a.shape[1] != layer.n_in:
            raise ValueError(f"layer {i} expects width {layer.n_in}, got {a.shape[1]}")
        inputs.append(a)
        z = a @ layer.W.T + layer.b
        a = _activate(z, layer.activation)
        pre.append(z)
        post.append(a)
    cache = Cache(inputs, pre, post, tuple(l.W.shape for l in net), squeeze,
                  tuple(id(l) for l in net))
    return (a[0] if squeeze else a), cache


def predict_proba(net, x):
    return forward(net, x)[0]


def _check_cache(net, cache):
    if cache.shapes != tuple(l.W.shape for l in net) or cache.layer_ids != tuple(id(l) for l in net):
        raise ValueError("cache does not belong to this network")


def backward_from_delta(net, cache, delta):
    """Backpropagate ``delta`` = dLoss/d(pre-activation of the last layer)."""
    _check_cache(net, cache)
    delta = np.asarray(delta, dtype=float)
    if delta.ndim == 1:
        delta = delta[None, :]
    grads = [None] * len(net)
    for i in range(len(net) - 1, -1, -1):
        grads[i] = (delta.T @ cache.inputs[i], delta.sum(axis=0))
        if i:
            delta = delta @ net[i].W
            if net[i - 1].activation == SIGMOID:
                s = cache.post[i - 1]
                delta = delta * s * (1.0 - s)
    return grads


def backward(net, cache, loss_grad):
    """Exact parameter gradients given dLoss/d(network output)."""
    _check_cache(net, cache)
    g = np.asarray(loss_grad, dtype=float)
    if g.ndim == 1:
        g = g[None, :]
    if g.shape != cache.post[-1].shape:
        raise ValueError(f"loss gradient shape {g.shape} != output shape {cache.post[-1].shape}")
    if net[-1].activation == SIGMOID:
        s = cache.post[-1]
        g = g * s * (1.0 - s)
    return backward_from_delta(net, cache, g)


def sgd_momentum_step(net, grads, velocity, config: TrainConfig):
    """v <- momentum * v - lr * g; theta <- theta + v. Updates ``net`` in place."""
    if velocity is None:
        velocity = [(np.zeros_like(l.W), np.zeros_like(l.b)) for l in net]
    new_velocity = []
    for layer, (gW, gb), (vW, vb) in zip(net, grads, velocity):
        vW = config.momentum * vW - config.learning_rate * gW
        vb = config.momentum * vb - config.learning_rate * gb
        layer.W += vW
        layer.b += vb
        new_velocity.append((vW, vb))
    return net, new_velocity


# ------------------------------------------------------------------- losses

def _pair(pred, target):
    p, _ = _as_batch(pred)
    t, _ = _as_batch(target)
    if p.shape != t.shape:
        raise ValueError(f"prediction shape {p.shape} != target shape {t.shape}")
    return p, t


def mse(pred, target) -> float:
    p, t = _pair(pred, target)
    return float(np.mean((p - t) ** 2))


def mse_grad(pred, target):
    p, t = _pair(pred, target)
    g = 2.0 * (p - t) / p.size
    return g[0] if np.ndim(pred) == 1 else g


def binary_cross_entropy(pred, target) -> float:
    p, t = _pair(pred, target)
    p = np.clip(p, PROB_CLIP, 1 - PROB_CLIP)
    return float(-np.sum(t * np.log(p) + (1 - t) * np.log(1 - p)) / p.shape[0])


def binary_cross_entropy_grad(pred, target):
    p, t = _pair(pred, target)
    p = np.clip(p, PROB_CLIP, 1 - PROB_CLIP)
    g = (p - t) / (p * (1 - p)) / p.shape[0]
    return g[0] if np.ndim(pred) == 1 else g


LOSSES = {
    "mse": (mse, mse_grad),
    "bce": (binary_cross_entropy, binary_cross_entropy_grad),
}


# --------------------------------------------------------- gradient checking

@dataclass
class GradCheckReport:
    errors: dict[str, float]
    tol: float

    @property
    def max_error(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol


def relative_error(analytic, numeric) -> float:
    a = np.linalg.norm(np.ravel(analytic))
    n = np.linalg.norm(np.ravel(numeric))
    return float(np.linalg.norm(np.ravel(analytic) - np.ravel(numeric)) / max(a, n, 1e-12))


def numeric_gradient(f, params: np.ndarray, h: float) -> np.ndarray:
    """Central differences of scalar ``f()`` w.r.t. ``params`` (perturbed in place)."""
    grad = np.zeros_like(params)
    flat = params.reshape(-1)
    gflat = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + h
        up = f()
        flat[k] = orig - h
        down = f()
        flat[k] = orig
        gflat[k] = (up - down) / (2 * h)
    return grad


def gradient_check(net, loss, x, target, h: float = 1e-5, tol: float = 1e-4,
                   backward_fn=None) -> GradCheckReport:
    """Compare analytic gradients with central differences, per parameter block.

    ``loss`` is ``"mse"``, ``"bce"`` or a ``(value, grad)`` pair. The error for
    each block is ``|a - n| / max(|a|, |n|, 1e-12)`` with vector norms.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    loss_fn, grad_fn = LOSSES[loss] if isinstance(loss, str) else loss
    backward_fn = backward_fn or backward
    out, cache = forward(net, x)
    analytic = backward_fn(net, cache, grad_fn(out, target))

    def f():
        return loss_fn(forward(net, x)[0], target)

    errors = {}
    for i, (layer, (gW, gb)) in enumerate(zip(net, analytic)):
        errors[f"layer{i}.W"] = relative_error(gW, numeric_gradient(f, layer.W, h))
        errors[f"layer{i}.b"] = relative_error(gb, numeric_gradient(f, layer.b, h))
    return GradCheckReport(errors, tol)


# ------------------------------------------------------------ serialization

def network_to_dict(net) -> dict:
    return {
        "format": "sdaeforecast-dense",
        "version": FORMAT_VERSION,
        "layers": [
            {"n_in": l.n_in, "n_out": l.n_out, "activation": l.activation,
             "W": l.W.tolist(), "b": l.b.tolist()}
            for l in net
        ],
    }


def network_from_dict(data: dict) -> list[DenseLayer]:
    if data.get("format") != "sdaeforecast-dense":
        raise ValueError("not a dense-network checkpoint")
    if data.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {data.get('version')}")
    net = []
    for spec in data["layers"]:
        layer = DenseLayer(np.array(spec["W"], dtype=float).reshape(spec["n_out"], spec["n_in"]),
                           np.array(spec["b"], dtype=float), spec["activation"])
        net.append(layer)
    return net


def save_network(net, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net)), encoding="utf-8")


def load_network(path) -> list[DenseLayer]:
    return network_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ------------------------------------------------------------------ training

def minibatches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def all_finite(net) -> bool:
    return all(np.all(np.isfinite(l.W)) and np.all(np.isfinite(l.b)) for l in net)


@dataclass
class FitHistory:
    train_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = 0
    best_val_accuracy: float = float("nan")
    final_val_accuracy: float = float("nan")


def _accuracy01(net, x, t, threshold):
    if len(x) == 0:
        return float("nan")
    p = forward(net, x)[0][:, 0]
    return float(np.mean((p >= threshold) == (t[:, 0] >= 0.5)))


def train_binary_classifier(net, x, t, x_val, t_val, config: TrainConfig,
                            threshold: float = 0.5):
    """Momentum SGD on binary cross-entropy for a single sigmoid output unit.

    ``t`` holds 0/1 targets. When a validation set is given, the parameters
    with the best validation accuracy seen (epoch 0 included, earliest wins
    ties) are restored at the end. Mutates and returns ``net``.
    """
    if net[-1].activation != SIGMOID or net[-1].n_out != 1:
        raise ValueError("classifier head must be a single sigmoid unit")
    rng = np.random.default_rng(config.seed)
    t = np.asarray(t, dtype=float).reshape(-1, 1)
    t_val = np.asarray(t_val, dtype=float).reshape(-1, 1)
    history = FitHistory()
    use_val = len(x_val) > 0
    best = copy_network(net)
    if use_val:
        history.best_val_accuracy = _accuracy01(net, x_val, t_val, threshold)
        history.val_accuracy.append(history.best_val_accuracy)
    velocity = None
    for epoch in range(1, config.epochs + 1):
        total = 0.0
        for idx in minibatches(len(x), config.batch_size, rng):
            out, cache = forward(net, x[idx])
            total += binary_cross_entropy(out, t[idx]) * len(idx)
            grads = backward_from_delta(net, cache, (out - t[idx]) / len(idx))
            net, velocity = sgd_momentum_step(net, grads, velocity, config)
        history.train_loss.append(total / max(len(x), 1))
        if use_val:
            acc = _accuracy01(net, x_val, t_val, threshold)
            history.val_accuracy.append(acc)
            if acc > history.best_val_accuracy:
                history.best_val_accuracy = acc
                history.best_epoch = epoch
                best = copy_network(net)
    if not all_finite(net):
        raise FloatingPointError("non-finite parameters after training")
    if use_val:
        history.final_val_accuracy = history.val_accuracy[-1]
        for layer, keep in zip(net, best):
            layer.W[...] = keep.W
            layer.b[...] = keep.b
    else:
        history.best_epoch = config.epochs
    return net, history
