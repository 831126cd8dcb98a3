"""Slow, independent reference implementations used to check the fast paths."""

import math

import numpy as np


def labels_by_loop(closes):
    out = []
    for t in range(len(closes) - 1):
        out.append(1 if closes[t + 1] > closes[t] else -1)
    return out


def confusion_by_tally(pred, actual):
    tp = fp = fn = tn = 0
    for p, a in zip(pred, actual):
        if p == 1 and a == 1:
            tp += 1
        elif p == 1 and a == -1:
            fp += 1
        elif p == -1 and a == 1:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def _peaks_quadratic(x):
    """Running maximum by taking the max over each prefix (O(n^2) work)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    prefix = np.tril(np.ones((n, n), dtype=bool))
    return np.max(np.where(prefix, x[None, :], -np.inf), axis=1)


def max_drawdown_brute(x):
    """max over t <= tau of x[t] - x[tau], from the full pair matrix."""
    x = np.asarray(x, dtype=float)
    pairs = x[:, None] - x[None, :]
    return float(max(0.0, np.max(np.where(np.triu(np.ones_like(pairs, dtype=bool)), pairs, -np.inf))))


def drawdown_episodes_brute(x):
    """Episodes as (begin, bottom, end, depth, recovered) from the O(n^2) definition.

    Every day's drawdown is measured against the maximum of all earlier values;
    an episode is a maximal run of days with positive drawdown.
    """
    x = [float(v) for v in x]
    n = len(x)
    peaks = _peaks_quadratic(x)
    under = [peaks[t] - x[t] > 0 for t in range(n)]
    episodes = []
    t = 0
    while t < n:
        if not under[t]:
            t += 1
            continue
        start = t
        while t + 1 < n and under[t + 1]:
            t += 1
        stop = t
        peak = peaks[start]
        begin = start - 1  # the day before going under sits at the peak
        assert x[begin] == peak
        run = x[start:stop + 1]
        low = min(run)
        bottom = start + run.index(low)
        recovered = stop + 1 < n
        end = stop + 1 if recovered else n - 1
        episodes.append((begin, bottom, end, low - peak, recovered))
        t = stop + 1
    return episodes


def sigmoid_scalar(z):
    return 1.0 / (1.0 + math.exp(-z))


def forward_by_loops(layers, x):
    """layers: list of (W, b, activation) with plain nested lists."""
    a = list(x)
    for W, b, act in layers:
        z = [sum(W[i][j] * a[j] for j in range(len(a))) + b[i] for i in range(len(W))]
        a = [sigmoid_scalar(v) for v in z] if act == "sigmoid" else z
    return a


def kernel_sum_decision(sv, coef, bias, sigma2, x):
    out = []
    for row in x:
        s = bias
        for v, c in zip(sv, coef):
            d = sum((ri - vi) ** 2 for ri, vi in zip(row, v))
            s += c * math.exp(-d / sigma2)
        out.append(s)
    return out


def _project(v, y, C):
    """Euclidean projection onto {a : y.a = 0, 0 <= a <= C}.

    a(lam) = clip(v - lam * y, 0, C) and y.a(lam) is piecewise linear and
    non-increasing in lam, so the root is found exactly between breakpoints.
    """
    bps = np.sort(np.concatenate([v * y, (v - C) * y]))
    vals = np.clip(v[None, :] - bps[:, None] * y[None, :], 0.0, C) @ y
    k = int(np.searchsorted(-vals, 0.0))
    if k == 0:
        lam = bps[0]
    elif k == len(bps):
        lam = bps[-1]
    else:
        l0, l1, g0, g1 = bps[k - 1], bps[k], vals[k - 1], vals[k]
        lam = l0 if g0 == g1 else l0 + g0 * (l1 - l0) / (g0 - g1)
    return np.clip(v - lam * y, 0.0, C)


def _polish(Q, y, C, a, eps=1e-9):
    """Solve the KKT system exactly on the free set identified by ``a``."""
    free = (a > eps) & (a < C - eps)
    if not free.any():
        return a
    fixed = np.where(a >= C - eps, C, 0.0) * ~free
    F = np.flatnonzero(free)
    n_f = len(F)
    A = np.zeros((n_f + 1, n_f + 1))
    A[:n_f, :n_f] = Q[np.ix_(F, F)]
    A[:n_f, n_f] = y[F]
    A[n_f, :n_f] = y[F]
    rhs = np.concatenate([1.0 - Q[F] @ fixed, [-(y @ fixed)]])
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        return a
    cand = fixed.copy()
    cand[F] = sol[:n_f]
    if np.all(cand >= -1e-12) and np.all(cand <= C + 1e-12):
        return np.clip(cand, 0.0, C)
    return a


def _objective(Q, a):
    return float(a.sum() - 0.5 * a @ Q @ a)


def dual_projected_gradient(K, y, C, iters=200_000):
    """Accelerated projected gradient ascent on the SVM dual, then an exact
    free-set polish; returns (alpha, objective)."""
    y = np.asarray(y, dtype=float)
    Q = (y[:, None] * y[None, :]) * K
    L = np.linalg.eigvalsh(Q).max()
    step = 1.0 / L
    a = np.zeros(len(y))
    z = a.copy()
    tk = 1.0
    for _ in range(iters):
        a_new = _project(z + step * (1.0 - Q @ z), y, C)
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * tk * tk))
        z = a_new + ((tk - 1) / t_new) * (a_new - a)
        if np.max(np.abs(a_new - a)) < 1e-14:
            a = a_new
            break
        a, tk = a_new, t_new
    polished = _polish(Q, y, C, a)
    if _objective(Q, polished) > _objective(Q, a):
        a = polished
    return a, _objective(Q, a)


def finite_difference(f, x, h=1e-5):
    x = np.array(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e.flat[k] = h
        g.flat[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g
