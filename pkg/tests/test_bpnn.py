import numpy as np
import pytest

from sdaeforecast import bpnn
from sdaeforecast.bpnn import BpnnConfig

FAST = BpnnConfig(n_hidden=8, epochs=60, learning_rate=0.2, validation_fraction=0.0)


def blobs(n, seed=0):
    rng = np.random.default_rng(seed)
    y = np.where(rng.random(n) < 0.5, 1, -1)
    x = np.clip(0.5 + 0.15 * y[:, None] + rng.normal(0, 0.05, (n, 4)), 0, 1)
    return x, y


def test_separable_blobs():
    x, y = blobs(200)
    model = bpnn.train(x, y, FAST)
    assert np.mean(bpnn.predict(model, x) == y) == 1.0


def test_single_class_warns_and_predicts_it():
    x = np.random.default_rng(0).random((50, 3))
    with pytest.warns(RuntimeWarning):
        model = bpnn.train(x, np.ones(50, dtype=int), FAST)
    assert np.all(bpnn.predict(model, x) == 1)


def test_xor():
    rng = np.random.default_rng(3)
    x = rng.random((400, 2))
    y = np.where((x[:, 0] > 0.5) ^ (x[:, 1] > 0.5), 1, -1)
    cfg = BpnnConfig(n_hidden=16, epochs=400, learning_rate=0.5, validation_fraction=0.0, seed=1)
    model = bpnn.train(x, y, cfg)
    assert np.mean(bpnn.predict(model, x) == y) > 0.9


def test_threshold_boundary_is_up():
    x, y = blobs(50)
    model = bpnn.train(x, y, FAST)
    head = model.net[-1]
    head.W[:] = 0.0
    head.b[:] = 0.0
    assert np.all(bpnn.predict(model, x) == 1)


def test_early_stopping_restores_best_epoch():
    x, y = blobs(200, seed=5)
    cfg = BpnnConfig(n_hidden=8, epochs=40, learning_rate=0.2, validation_fraction=0.25)
    model = bpnn.train(x, y, cfg)
    h = model.history
    assert len(h.val_accuracy) == cfg.epochs + 1
    assert h.best_val_accuracy == max(h.val_accuracy)
    assert h.val_accuracy.index(h.best_val_accuracy) == h.best_epoch
    val = x[-50:]
    acc = np.mean(bpnn.predict(model, val) == y[-50:])
    assert acc == pytest.approx(h.best_val_accuracy)


def test_seeded_runs_repeat_and_differ():
    x, y = blobs(120)
    a = bpnn.train(x, y, FAST)
    b = bpnn.train(x, y, FAST)
    c = bpnn.train(x, y, BpnnConfig(**{**FAST.__dict__, "seed": 4}))
    np.testing.assert_array_equal(a.net[0].W, b.net[0].W)
    assert not np.array_equal(a.net[0].W, c.net[0].W)


def test_input_validation():
    x, y = blobs(20)
    with pytest.raises(ValueError):
        bpnn.train(x, np.zeros(20), FAST)
    model = bpnn.train(x, y, FAST)
    with pytest.raises(ValueError):
        bpnn.predict(model, np.ones((3, 5)))
