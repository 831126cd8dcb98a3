"""Gaussian-kernel soft-margin SVM trained in the dual with SMO.

The dual problem is

    max_a  sum(a) - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t.   sum(y * a) = 0,  0 <= a_i <= C

with K(x, u) = exp(-||x - u||^2 / sigma2). The solver updates two
multipliers at a time, chosen by the maximal-violating-pair rule with
second-order selection of the partner, and stops once the KKT gap falls
below ``tol``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numba
import numpy as np

log = logging.getLogger(__name__)

SIGMA2_MULTIPLIERS = tuple(round(0.2 * k, 1) for k in range(1, 11))
C_CANDIDATES = (0.1, 1.0, 10.0, 100.0)

_TAU = 1e-12


class SvmError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


class DegenerateScaleError(SvmError):
    """All rows coincide, so the median distance is zero; use sigma2 = 1 instead."""


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray
    alphas: np.ndarray
    labels: np.ndarray
    bias: float
    sigma2: float
    C: float
    iterations: int = 0

    @property
    def dual_coef(self) -> np.ndarray:
        return self.alphas * self.labels


@dataclass(frozen=True)
class SvmSearchGrid:
    sigma2_multipliers: tuple[float, ...] = SIGMA2_MULTIPLIERS
    C_candidates: tuple[float, ...] = C_CANDIDATES
    folds: int = 5

    def __post_init__(self):
        if not self.sigma2_multipliers or not self.C_candidates:
            raise SvmError("search grid must not be empty")
        if self.folds < 2:
            raise SvmError("need at least 2 folds")
        if any(v <= 0 for v in (*self.sigma2_multipliers, *self.C_candidates)):
            raise SvmError("grid values must be positive")


@dataclass
class Selection:
    sigma2: float
    C: float
    m_x: float | None
    scores: dict[tuple[float, float], float] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)


def gaussian_kernel(x, u, sigma2: float) -> float:
    if sigma2 <= 0:
        raise SvmError("sigma2 must be positive")
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != u.shape:
        raise SvmError("kernel arguments differ in dimension")
    return float(np.exp(-np.sum((x - u) ** 2) / sigma2))


def squared_distances(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * a @ b.T
    return np.maximum(d, 0.0)


def kernel_matrix(a, b, sigma2: float) -> np.ndarray:
    if sigma2 <= 0:
        raise SvmError("sigma2 must be positive")
    return np.exp(-squared_distances(a, b) / sigma2)


def median_sigma(x) -> float:
    """Median Euclidean distance from each row to the column mean."""
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise SvmError("need at least one row")
    m = float(np.median(np.linalg.norm(x - x.mean(axis=0), axis=1)))
    if m == 0:
        raise DegenerateScaleError("all rows identical (m_x = 0); fall back to sigma2 = 1")
    return m


@numba.njit(cache=True)
def _smo_core(K, y, C, tol, max_iter, alpha, G):
    """Optimise ``alpha`` in place; ``G`` is the gradient Q a - 1 (also in place).

    Returns (iterations, converged).
    """
    n = y.size
    it = 0
    while it < max_iter:
        # i: maximal violator among indices that may increase y*a
        i = -1
        gmax = -np.inf
        for t in range(n):
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                v = -y[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        gmin = np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                v = -y[t] * G[t]
                if v < gmin:
                    gmin = v
                if i >= 0:
                    b = gmax - v
                    if b > 0:
                        a = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if a <= 0:
                            a = 1e-12
                        obj = -(b * b) / a
                        if obj < best:
                            best = obj
                            j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            return it, True
        it += 1

        yi = y[i]
        yj = y[j]
        ai_old = alpha[i]
        aj_old = alpha[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = 1e-12
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
            if diff > 0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            delta = (G[i] - G[j]) / quad
            s = ai_old + aj_old
            ai = ai_old - delta
            aj = aj_old + delta
            if s > C:
                if ai > C:
                    ai = C
                    aj = s - C
            else:
                if aj < 0:
                    aj = 0.0
                    ai = s
            if s > C:
                if aj > C:
                    aj = C
                    ai = s - C
            else:
                if ai < 0:
                    ai = 0.0
                    aj = s
        alpha[i] = ai
        alpha[j] = aj
        di = ai - ai_old
        dj = aj - aj_old
        for t in range(n):
            G[t] += y[t] * (yi * K[i, t] * di + yj * K[j, t] * dj)
    return it, False


def _bias(y, C, alpha, G):
    yg = -y * G
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        return float(np.mean(yg[free]))
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    lo = np.max(yg[up]) if np.any(up) else -np.inf
    hi = np.min(yg[low]) if np.any(low) else np.inf
    if np.isinf(lo):
        return float(hi)
    if np.isinf(hi):
        return float(lo)
    return float(0.5 * (lo + hi))


@dataclass
class DualSolution:
    alpha: np.ndarray
    bias: float
    iterations: int
    converged: bool


def solve_dual(K, y, C: float, tol: float = 1e-3, max_iter: int | None = None,
               alpha0=None) -> DualSolution:
    """Run SMO on a precomputed kernel matrix. ``alpha0`` must be dual-feasible."""
    K = np.ascontiguousarray(K, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    n = len(y)
    if max_iter is None:
        max_iter = 100 * n
    alpha = np.zeros(n) if alpha0 is None else np.array(alpha0, dtype=float)
    G = (y[:, None] * y[None, :] * K) @ alpha - 1.0
    iters, converged = _smo_core(K, y, float(C), float(tol), int(max_iter), alpha, G)
    return DualSolution(alpha, _bias(y, C, alpha, G), int(iters), bool(converged))


def dual_objective(K, y, alpha) -> float:
    """The maximised dual value sum(a) - 1/2 (a*y)^T K (a*y)."""
    ay = alpha * y
    return float(np.sum(alpha) - 0.5 * ay @ K @ ay)


def _check_labels(y):
    y = np.asarray(y)
    if not np.all(np.isin(y, (-1, 1))):
        raise SvmError("labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise SvmError("training data contain a single class")
    return y.astype(float)


def _model_from_solution(x, y, sol, sigma2, C) -> SvmModel:
    keep = sol.alpha > 0
    return SvmModel(x[keep].copy(), sol.alpha[keep].copy(), y[keep].astype(np.int8),
                    sol.bias, float(sigma2), float(C), sol.iterations)


def smo_train(x, y, C: float, sigma2: float, tol: float = 1e-3,
              max_iter_factor: int = 100) -> SvmModel:
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        raise SvmError("need at least 2 training rows")
    if C <= 0 or sigma2 <= 0 or tol <= 0:
        raise SvmError("C, sigma2 and tol must be positive")
    yf = _check_labels(y)
    cap = max_iter_factor * len(x)
    sol = solve_dual(kernel_matrix(x, x, sigma2), yf, C, tol, cap)
    if not sol.converged:
        raise ConvergenceError(f"SMO did not converge within {cap} iterations")
    return _model_from_solution(x, yf, sol, sigma2, C)


def decision_function(model: SvmModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.support_vectors.shape[1]:
        raise SvmError(f"expected {model.support_vectors.shape[1]} features, got shape {x.shape}")
    return kernel_matrix(x, model.support_vectors, model.sigma2) @ model.dual_coef + model.bias


def predict(model: SvmModel, x) -> np.ndarray:
    """sign(f(x)), with f(x) = 0 mapped to +1."""
    return np.where(decision_function(model, x) >= 0, 1, -1).astype(np.int8)


def contiguous_folds(n: int, k: int) -> list[np.ndarray]:
    if n < k:
        raise SvmError(f"{n} rows cannot be split into {k} folds")
    return [np.asarray(f) for f in np.array_split(np.arange(n), k)]


def sigma2_grid(x, multipliers=SIGMA2_MULTIPLIERS) -> tuple[list[float], float | None]:
    try:
        m_x = median_sigma(x)
    except DegenerateScaleError:
        return [1.0], None
    return [mult * m_x for mult in multipliers], m_x


def model_select(x, y, grid: SvmSearchGrid | None = None, tol: float = 1e-3,
                 max_iter_factor: int = 100) -> Selection:
    """Joint (sigma2, C) search by time-ordered contiguous k-fold accuracy.

    Ties go to the smaller C, then the smaller sigma2.
    """
    grid = grid or SvmSearchGrid()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    sigmas, m_x = sigma2_grid(x, grid.sigma2_multipliers)
    folds = contiguous_folds(len(x), grid.folds)
    cs = sorted(grid.C_candidates)
    flags: list[str] = []
    if m_x is None:
        flags.append("m_x = 0: sigma2 fixed at 1")
    scores = {(s, c): 0.0 for s in sigmas for c in cs}
    d2 = squared_distances(x, x)
    for f_idx, test in enumerate(folds):
        train = np.setdiff1d(np.arange(len(x)), test)
        yt = y[train].astype(float)
        if len(np.unique(y[test])) < 2:
            flags.append(f"fold {f_idx}: test block has a single class")
        if len(np.unique(yt)) < 2:
            flags.append(f"fold {f_idx}: training part has a single class")
            acc = float(np.mean(y[test] == yt[0]))
            for key in scores:
                scores[key] += acc / len(folds)
            continue
        d_tt = d2[np.ix_(train, train)]
        d_vt = d2[np.ix_(test, train)]
        for s in sigmas:
            K = np.exp(-d_tt / s)
            Kv = np.exp(-d_vt / s)
            alpha = None
            for c in cs:
                # a solution for a smaller C stays feasible for a larger one
                sol = solve_dual(K, yt, c, tol, max_iter_factor * len(train), alpha)
                if not sol.converged:
                    flags.append(f"fold {f_idx}: SMO hit the iteration cap at sigma2={s:g}, C={c:g}")
                alpha = sol.alpha
                f = Kv @ (sol.alpha * yt) + sol.bias
                pred = np.where(f >= 0, 1, -1)
                scores[(s, c)] += float(np.mean(pred == y[test])) / len(folds)
    best = None
    for c in cs:
        for s in sigmas:
            if best is None or scores[(s, c)] > scores[best]:
                best = (s, c)
    return Selection(best[0], best[1], m_x, scores, flags)


@dataclass(frozen=True)
class SvmConfig:
    tol: float = 1e-3
    C_candidates: tuple[float, ...] = C_CANDIDATES
    sigma2_multipliers: tuple[float, ...] = SIGMA2_MULTIPLIERS
    folds: int = 5
    max_iter_factor: int = 100

    def grid(self) -> SvmSearchGrid:
        return SvmSearchGrid(self.sigma2_multipliers, self.C_candidates, self.folds)


def train(x, y, config: SvmConfig | None = None) -> tuple[SvmModel, Selection]:
    """Select (sigma2, C) on the training rows, then refit on all of them."""
    config = config or SvmConfig()
    sel = model_select(x, y, config.grid(), config.tol, config.max_iter_factor)
    for flag in sel.flags:
        log.warning("svm model selection: %s", flag)
    model = smo_train(x, y, sel.C, sel.sigma2, config.tol, config.max_iter_factor)
    return model, sel
