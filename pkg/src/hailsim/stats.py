"""Small statistics helpers shared by the estimators and experiment reports."""

from __future__ import annotations

import math

import numpy as np


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("need at least one trial")
    p = successes / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic: max |F_a - F_b|."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(fa - fb).max())


def sign_test_pvalue(n_positive: int, n: int) -> float:
    """One-sided exact binomial p-value for P(median <= 0):
    probability of seeing >= n_positive positives under a fair coin."""
    if not 0 <= n_positive <= n:
        raise ValueError("invalid counts")
    total = sum(math.comb(n, k) for k in range(n_positive, n + 1))
    return total / 2.0**n


def mean_ci(xs, z: float = 1.96) -> tuple:
    """Sample mean with a normal-approximation confidence interval."""
    xs = np.asarray(xs, dtype=float)
    m = float(xs.mean())
    se = float(xs.std(ddof=1) / math.sqrt(xs.size)) if xs.size > 1 else 0.0
    return m, m - z * se, m + z * se
