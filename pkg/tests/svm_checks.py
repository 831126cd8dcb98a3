"""KKT and feasibility checks shared by the SVM tests and the acceptance gate."""

import numpy as np


def margins(K, y, alpha, bias):
    return y * (K @ (alpha * y) + bias)


def kkt_satisfied(K, y, alpha, bias, C, tol):
    """Boolean mask of points meeting the KKT conditions within ``tol``."""
    m = margins(K, y, alpha, bias)
    at_zero = alpha <= 0
    at_c = alpha >= C
    free = ~at_zero & ~at_c
    ok = np.ones(len(y), dtype=bool)
    ok[at_zero] = m[at_zero] >= 1 - tol
    ok[free] = np.abs(m[free] - 1) <= tol
    ok[at_c] = m[at_c] <= 1 + tol
    return ok


def random_problem(rng):
    n = int(rng.integers(4, 31))
    d = int(rng.integers(1, 6))
    x = rng.normal(size=(n, d))
    y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    y[0], y[1] = -1.0, 1.0
    sigma2 = float(rng.choice([0.5, 1.0, 2.0, 5.0]))
    C = float(rng.choice([0.1, 1.0, 10.0, 100.0]))
    return x, y, sigma2, C
