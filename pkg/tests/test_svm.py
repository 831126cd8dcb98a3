import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import dual_projected_gradient, kernel_sum_decision
from sdaeforecast import svm
from sdaeforecast.svm import (ConvergenceError, DegenerateScaleError, SvmError, SvmSearchGrid,
                              dual_objective, gaussian_kernel, kernel_matrix, median_sigma,
                              model_select, smo_train, solve_dual)
from svm_checks import kkt_satisfied, random_problem


def test_kernel_value():
    assert gaussian_kernel([0, 0], [1, 1], 2.0) == pytest.approx(math.exp(-1))
    assert gaussian_kernel([3, 4], [3, 4], 0.7) == 1.0
    with pytest.raises(SvmError):
        gaussian_kernel([0], [1], 0.0)


def test_kernel_matrix_matches_pointwise():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(4, 3)), rng.normal(size=(5, 3))
    K = kernel_matrix(a, b, 1.5)
    for i in range(4):
        for j in range(5):
            assert K[i, j] == pytest.approx(gaussian_kernel(a[i], b[j], 1.5), rel=1e-12)


def test_median_sigma():
    assert median_sigma([[0, 0], [2, 0]]) == 1.0
    with pytest.raises(DegenerateScaleError):
        median_sigma([[1, 1], [1, 1]])


@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6), st.floats(-100, 100))
def test_median_sigma_translation_invariant(vals, shift):
    x = np.array(vals).reshape(3, 2)
    try:
        m = median_sigma(x)
    except DegenerateScaleError:
        return
    assert median_sigma(x + shift) == pytest.approx(m, rel=1e-6, abs=1e-6)


def test_sigma2_grid_has_ten_values():
    grid, m_x = svm.sigma2_grid([[0, 0], [2, 0]])
    assert m_x == 1.0
    np.testing.assert_allclose(grid, [0.2 * k for k in range(1, 11)])
    assert svm.sigma2_grid([[1, 1], [1, 1]]) == ([1.0], None)


def test_two_point_problem_by_hand():
    x = np.array([[0.0], [1.0]])
    y = np.array([-1, 1])
    model = smo_train(x, y, C=1000.0, sigma2=10.0, tol=1e-8)
    expected = 1 / (1 - math.exp(-0.1))
    np.testing.assert_allclose(model.alphas, [expected, expected], rtol=1e-8)
    assert model.bias == pytest.approx(0.0, abs=1e-8)
    assert len(model.support_vectors) == 2
    np.testing.assert_array_equal(svm.predict(model, x), y)
    f = svm.decision_function(model, x)
    assert np.all(y * f >= 1 - 1e-8)


def test_single_class_rejected():
    with pytest.raises(SvmError):
        smo_train(np.zeros((3, 1)) + [[0], [1], [2]], [1, 1, 1], 1.0, 1.0)


def test_iteration_cap():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(30, 2))
    y = np.where(rng.random(30) < 0.5, -1, 1)
    with pytest.raises(ConvergenceError):
        smo_train(x, y, 100.0, 0.5, tol=1e-12, max_iter_factor=0)


def test_dual_feasibility_and_kkt():
    rng = np.random.default_rng(1)
    for _ in range(30):
        x, y, s2, C = random_problem(rng)
        K = kernel_matrix(x, x, s2)
        sol = solve_dual(K, y, C)
        assert sol.converged
        assert abs(sol.alpha @ y) <= 1e-8
        assert sol.alpha.min() >= 0 and sol.alpha.max() <= C
        assert kkt_satisfied(K, y, sol.alpha, sol.bias, C, 1e-3).all()


def test_objective_matches_reference_solver():
    rng = np.random.default_rng(2)
    for _ in range(10):
        x, y, s2, C = random_problem(rng)
        K = kernel_matrix(x, x, s2)
        sol = solve_dual(K, y, C, tol=1e-8, max_iter=10**6)
        assert sol.converged
        _, ref = dual_projected_gradient(K, y, C)
        assert abs(dual_objective(K, y, sol.alpha) - ref) <= 1e-6


def test_warm_start_gives_same_objective():
    rng = np.random.default_rng(3)
    x, y, s2, _ = random_problem(rng)
    K = kernel_matrix(x, x, s2)
    small = solve_dual(K, y, 1.0, tol=1e-8)
    warm = solve_dual(K, y, 10.0, tol=1e-8, alpha0=small.alpha)
    cold = solve_dual(K, y, 10.0, tol=1e-8)
    assert dual_objective(K, y, warm.alpha) == pytest.approx(dual_objective(K, y, cold.alpha), abs=1e-7)


def test_kernel_matrix_psd():
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = rng.normal(size=(int(rng.integers(2, 30)), int(rng.integers(1, 6))))
        K = kernel_matrix(x, x, float(rng.uniform(0.1, 5)))
        np.testing.assert_allclose(K, K.T)
        assert np.linalg.eigvalsh(K).min() >= -1e-8


def test_decision_matches_kernel_sum_oracle():
    rng = np.random.default_rng(5)
    x, y, s2, C = random_problem(rng)
    model = smo_train(x, y, C, s2)
    q = rng.normal(size=(7, x.shape[1]))
    expected = kernel_sum_decision(model.support_vectors.tolist(), model.dual_coef.tolist(),
                                   model.bias, s2, q.tolist())
    np.testing.assert_allclose(svm.decision_function(model, q), expected, rtol=1e-10, atol=1e-12)


@given(st.floats(0.01, 100))
def test_positive_rescaling_keeps_labels(k):
    rng = np.random.default_rng(6)
    x, y, s2, C = random_problem(rng)
    model = smo_train(x, y, C, s2)
    scaled = svm.SvmModel(model.support_vectors, k * model.alphas, model.labels,
                          k * model.bias, model.sigma2, model.C)
    q = rng.normal(size=(20, x.shape[1]))
    f = svm.decision_function(model, q)
    keep = np.abs(f) > 1e-9
    np.testing.assert_array_equal(svm.predict(scaled, q)[keep], svm.predict(model, q)[keep])


def test_width_mismatch():
    model = smo_train([[0.0], [1.0]], [-1, 1], 1.0, 1.0)
    with pytest.raises(SvmError):
        svm.predict(model, np.zeros((2, 2)))


def test_contiguous_folds():
    folds = svm.contiguous_folds(11, 5)
    assert [f.tolist() for f in folds][0] == [0, 1, 2]
    assert np.concatenate(folds).tolist() == list(range(11))
    with pytest.raises(SvmError):
        svm.contiguous_folds(3, 5)


def test_single_candidate_grid():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(40, 2))
    y = np.where(x[:, 0] > 0, 1, -1)
    sel = model_select(x, y, SvmSearchGrid((1.0,), (10.0,), 5))
    assert sel.C == 10.0 and sel.sigma2 == pytest.approx(median_sigma(x))


def test_selection_prefers_small_width_on_fine_pattern():
    rng = np.random.default_rng(8)
    x = rng.random((150, 1))
    y = np.where(np.sin(2 * np.pi * 6 * x[:, 0]) >= 0, 1, -1)
    sel = model_select(x, y, SvmSearchGrid((0.02, 20.0), (100.0,), 5))
    assert sel.sigma2 == pytest.approx(0.02 * sel.m_x)
    assert sel.scores[(sel.sigma2, 100.0)] > sel.scores[(20.0 * sel.m_x, 100.0)]


def test_ties_go_to_smaller_c_then_smaller_width():
    x = np.array([[0.0], [0.1], [0.2], [10.0], [10.1], [10.2]] * 2)
    y = np.array([-1, -1, -1, 1, 1, 1] * 2)
    sel = model_select(x, y, SvmSearchGrid((0.5, 1.0), (1.0, 10.0), 2))
    best = max(sel.scores.values())
    assert sel.scores[(sel.sigma2, sel.C)] == best
    tied = [k for k, v in sel.scores.items() if v == best]
    assert (sel.sigma2, sel.C) == min(tied, key=lambda k: (k[1], k[0]))


def test_degenerate_fold_is_flagged():
    x = np.arange(20, dtype=float)[:, None]
    y = np.array([-1] * 4 + [1, -1] * 8)
    sel = model_select(x, y, SvmSearchGrid((1.0,), (1.0,), 5))
    assert any("single class" in f for f in sel.flags)


def test_train_refits_on_all_rows():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(60, 2))
    y = np.where(x[:, 0] + x[:, 1] > 0, 1, -1)
    cfg = svm.SvmConfig(C_candidates=(1.0, 10.0), sigma2_multipliers=(0.5, 1.0))
    model, sel = svm.train(x, y, cfg)
    assert (model.C, model.sigma2) == (sel.C, sel.sigma2)
    assert np.mean(svm.predict(model, x) == y) > 0.9
