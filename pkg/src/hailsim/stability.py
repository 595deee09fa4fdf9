"""Stability and instability experiments.

Stability side: start the system empty at time -n and read the workload at
the origin at time 0.  Reusing one arrival realization across a grid of
horizons couples the runs, so each replica's horizon sequence is
nondecreasing and its plateau certifies the stationary value; the fraction of
replicas that have flattened out is the tightness diagnostic.

Instability side: integer-valued services with tail P(service >= t) = t^-beta
for beta = d + 1 - epsilon and base cubes of radius equal to the service.  A
job landing anywhere in [0, t)^d with service >= 2t covers the origin, so the
count of such jobs per length-t block lower-bounds the workload growth; the
count has mean t^epsilon * rate / 2^(d+1-epsilon), which exceeds any bound as
t grows, and once it exceeds 1/2 the constant-at-origin path certifies a
positive drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clusters import LevelClusters, split_levels
from .core import Box, Job, MarkLaw, RngStream, Site, generate_arrivals
from .dynamics import run_jobs
from .parallel import parallel_map
from .stats import mean_ci, sign_test_pvalue

QUANTILES = (0.5, 0.9, 0.99)


def workload_at_zero(jobs: list, window: Box, horizon: int, probe: Site) -> float:
    """Workload at (0, probe) after starting empty at -horizon with the given
    jobs (all arrival times must lie in [-horizon, 0])."""
    usable = [j for j in jobs if j.time >= -horizon]
    return float(run_jobs(window, float(-horizon), usable, [probe], [0.0]).values[0, 0])


@dataclass
class StabilityReport:
    lam: float
    law: MarkLaw
    n_grid: list
    sequences: np.ndarray  # (replicas, len(n_grid))
    coalescence_depth: list
    plateau_fraction: float
    quantiles: dict
    monotone_violations: int
    max_cluster_diameter: int
    window_warning: bool

    def replica_records(self):
        for i in range(self.sequences.shape[0]):
            yield {
                "replica": i,
                "values": [float(v) for v in self.sequences[i]],
                "coalescence_depth": self.coalescence_depth[i],
            }

    def summary_rows(self):
        rows = []
        for j, n in enumerate(self.n_grid):
            col = self.sequences[:, j]
            row = {"n": n, "mean": float(col.mean())}
            for q in QUANTILES:
                row[f"q{int(q * 100)}"] = float(np.quantile(col, q))
            rows.append(row)
        return rows

    def stats_row(self):
        return {
            "lambda": self.lam,
            "replicas": self.sequences.shape[0],
            "plateau_fraction": self.plateau_fraction,
            "monotone_violations": self.monotone_violations,
            "max_cluster_diameter": self.max_cluster_diameter,
            "window_warning": int(self.window_warning),
        }


def _stability_replica(args) -> tuple:
    lam, law, n_max, n_grid, window, probe, seed, k = args
    jobs = [
        j
        for j in generate_arrivals(window, (float(-n_max), 0.0), lam, law, RngStream(seed, k))
        if j.time > -n_max
    ]
    seq = [workload_at_zero(jobs, window, n, probe) for n in n_grid]
    max_diam = 0
    if jobs:
        for lv in split_levels(jobs, -n_max + 1, 0, window):
            for c in LevelClusters.build(lv).clusters:
                max_diam = max(max_diam, c.diameter)
    return seq, max_diam


def backward_coupling(
    lam: float,
    law: MarkLaw,
    n_max: int,
    n_grid: list,
    replicas: int,
    window: Box,
    seed: int,
    probe: Site | None = None,
    workers: int = 1,
) -> StabilityReport:
    """Coupled horizon sweep of the time-0 workload at the probe site.

    One arrival realization per replica on [-n_max, 0] is reused for every
    horizon n in `n_grid` (restricted to arrivals after -n), which makes each
    replica's sequence nondecreasing.  A replica counts as plateaued when its
    values are constant over the top half of the grid.
    """
    n_grid = sorted(n_grid)
    if not n_grid or n_grid[0] < 1 or n_grid[-1] > n_max:
        raise ValueError("n_grid must lie within [1, n_max]")
    probe = probe if probe is not None else (0,) * window.dimension
    results = parallel_map(
        _stability_replica,
        [(lam, law, n_max, n_grid, window, probe, seed, k) for k in range(replicas)],
        workers=workers,
    )
    sequences = np.array([r[0] for r in results], dtype=float)
    max_diam = max((r[1] for r in results), default=0)

    violations = int((np.diff(sequences, axis=1) < 0).sum())
    top_half = sequences[:, len(n_grid) // 2 :]
    plateau = float(np.mean(np.all(top_half == top_half[:, -1:], axis=1)))
    depths = []
    for row in sequences:
        # smallest grid point after which the sequence stays constant; the
        # trivial "constant at the last point only" does not count
        idx = next(i for i in range(len(n_grid)) if np.all(row[i:] == row[-1]))
        depths.append(n_grid[idx] if idx < len(n_grid) - 1 else None)
    quantiles = {
        f"q{int(q * 100)}": [float(np.quantile(sequences[:, j], q)) for j in range(len(n_grid))]
        for q in QUANTILES
    }
    extent = min(h - l for l, h in zip(window.lo, window.hi))
    return StabilityReport(
        lam=lam,
        law=law,
        n_grid=list(n_grid),
        sequences=sequences,
        coalescence_depth=depths,
        plateau_fraction=plateau,
        quantiles=quantiles,
        monotone_violations=violations,
        max_cluster_diameter=max_diam,
        window_warning=max_diam >= extent // 2,
    )


# --- heavy-tail instability construction -----------------------------------


def instability_law(d: int, epsilon: float) -> MarkLaw:
    """Comonotone integer-tailed marks: P(service >= t) = t^-(d+1-epsilon) on
    positive integers, base cube radius equal to the service."""
    if not 0 < epsilon < d + 1:
        raise ValueError("epsilon must be in (0, d+1)")
    beta = d + 1 - epsilon
    return MarkLaw(
        tail_exponent_tau=beta,
        tail_exponent_radius=beta,
        coupling="comonotone",
    )


def expected_big_jobs(d: int, epsilon: float, lam: float, t: int) -> float:
    """Mean count of qualifying jobs per space-time block: t^eps*lam/2^(d+1-eps)."""
    return t**epsilon * lam / 2.0 ** (d + 1 - epsilon)


def count_big_jobs(jobs: list, t: int) -> int:
    """Jobs with service >= 2t, center inside [0, t)^d, arrival in [0, t).

    Every such job's base cube (radius = service under the comonotone law)
    covers the origin.
    """
    total = 0
    for j in jobs:
        if (
            j.service >= 2 * t
            and 0.0 <= j.time < t
            and all(0 <= c < t for c in j.center)
        ):
            total += 1
    return total


def big_job_count_samples(
    d: int, epsilon: float, lam: float, t: int, replicas: int, seed: int
) -> np.ndarray:
    """Vectorized replica counts of qualifying jobs on [0, t)^d x [0, t).

    Draws follow exactly the per-replica stream layout of generate_arrivals
    on the window [0, t-1]^d under the instability law, so replica k here
    equals count_big_jobs over that generated realization.
    """
    beta = d + 1 - epsilon
    out = np.empty(replicas, dtype=np.int64)
    n_sites = t**d
    for k in range(replicas):
        gen = RngStream(seed, k).generator()
        counts = gen.poisson(lam * t, n_sites)
        total = int(counts.sum())
        gen.random(total)  # arrival times: all fall in [0, t)
        tau = np.floor((1.0 - gen.random(total)) ** (-1.0 / beta))
        out[k] = int((tau >= 2 * t).sum())
    return out


@dataclass
class DriftReport:
    d: int
    epsilon: float
    lam: float
    t: int
    n_blocks: int
    expected_block_count: float
    block_counts: np.ndarray  # (replicas, n_blocks)
    lower_bounds: np.ndarray  # (replicas, n_blocks) at block boundaries
    workloads: np.ndarray  # (replicas, n_blocks) at block boundaries
    slopes: np.ndarray
    slope_mean: float
    slope_ci_low: float
    slope_ci_high: float
    positive_fraction: float
    sign_test_pvalue: float
    bound_violations: int

    @property
    def horizon(self) -> float:
        return float(self.t * self.n_blocks)

    def replica_records(self):
        for i in range(self.slopes.size):
            yield {
                "replica": i,
                "block_counts": [int(c) for c in self.block_counts[i]],
                "lower_bounds": [float(v) for v in self.lower_bounds[i]],
                "workload": [float(v) for v in self.workloads[i]],
                "slope": float(self.slopes[i]),
            }

    def summary_row(self):
        return {
            "d": self.d,
            "epsilon": self.epsilon,
            "lambda": self.lam,
            "t": self.t,
            "n_blocks": self.n_blocks,
            "replicas": self.slopes.size,
            "expected_block_count": self.expected_block_count,
            "slope_mean": self.slope_mean,
            "slope_ci_low": self.slope_ci_low,
            "slope_ci_high": self.slope_ci_high,
            "positive_fraction": self.positive_fraction,
            "sign_test_pvalue": self.sign_test_pvalue,
            "bound_violations": self.bound_violations,
        }


def _drift_replica(args) -> tuple:
    d, epsilon, lam, t, n_blocks, window, seed, k = args
    law = instability_law(d, epsilon)
    horizon = float(t * n_blocks)
    probe = (0,) * d
    jobs = generate_arrivals(window, (0.0, horizon), lam, law, RngStream(seed, k))
    counts = [0] * n_blocks
    for j in jobs:
        if j.service >= 2 * t and all(0 <= c < t for c in j.center):
            counts[min(int(j.time // t), n_blocks - 1)] += 1
    boundaries = [float(t * (b + 1)) for b in range(n_blocks)]
    workload = run_jobs(window, 0.0, jobs, [probe], boundaries).values[:, 0]
    bounds, acc = [], 0.0
    for b in range(n_blocks):
        acc += 2.0 * t * counts[b]
        bounds.append(acc - t * (b + 1))
    slope = float(np.polyfit(boundaries, workload, 1)[0])
    return counts, bounds, list(map(float, workload)), slope


def drift_experiment(
    d: int,
    epsilon: float,
    lam: float,
    t: int,
    n_blocks: int,
    replicas: int,
    seed: int,
    window: Box | None = None,
    workers: int = 1,
) -> DriftReport:
    """Simulated origin workload versus its block-count lower bound.

    Requires the per-block expectation of qualifying jobs to exceed 1/2 when
    the rate is positive (otherwise the lower bound has no drift and a larger
    t is needed); a zero rate is allowed as a degenerate control run.  The
    drift positivity certificate is an exact one-sided sign test on the
    per-replica fitted slopes, which stays meaningful under the heavy-tailed
    slope distribution; the normal-theory interval is reported alongside.
    """
    expected = expected_big_jobs(d, epsilon, lam, t)
    if lam > 0 and expected <= 0.5:
        raise ValueError(
            f"block expectation {expected:.4f} <= 1/2; choose a larger t"
        )
    if window is None:
        window = Box.centered(max(2 * t, 8), d)
    if not all(l <= 0 and h >= t - 1 for l, h in zip(window.lo, window.hi)):
        raise ValueError("window must contain [0, t)^d and the origin")
    results = parallel_map(
        _drift_replica,
        [(d, epsilon, lam, t, n_blocks, window, seed, k) for k in range(replicas)],
        workers=workers,
    )
    block_counts = np.array([r[0] for r in results], dtype=np.int64)
    lower_bounds = np.array([r[1] for r in results])
    workloads = np.array([r[2] for r in results])
    slopes = np.array([r[3] for r in results])
    violations = int((lower_bounds > workloads + 1e-9).sum())
    mean, lo, hi = mean_ci(slopes)
    n_pos = int((slopes > 0).sum())
    return DriftReport(
        d=d,
        epsilon=epsilon,
        lam=lam,
        t=t,
        n_blocks=n_blocks,
        expected_block_count=expected,
        block_counts=block_counts,
        lower_bounds=lower_bounds,
        workloads=workloads,
        slopes=slopes,
        slope_mean=mean,
        slope_ci_low=lo,
        slope_ci_high=hi,
        positive_fraction=n_pos / max(1, slopes.size),
        sign_test_pvalue=sign_test_pvalue(n_pos, slopes.size),
        bound_violations=violations,
    )
