"""Event-driven evolution of the workload field.

Between arrivals every positive workload melts at unit rate; when a job
arrives, every site of its base jumps to (max workload over the base) +
service.  The field stores lazily-decayed (value, stamp) pairs per site, so a
job costs O(base size) work and reads cost O(1).

The lattice is truncated to a finite window: job bases are intersected with
the window.  Enlarging bases can only increase workloads, so the untruncated
system dominates the truncated one and the truncation error is one-sided.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field as dc_field

import numpy as np

from .core import Box, Job, MarkLaw, RngStream, Site, generate_arrivals


class OutOfOrderError(ValueError):
    """A job was applied at a time earlier than the field clock."""


class TransformError(ValueError):
    """A job-list transform violated its stated parameter range."""


@dataclass
class WorkloadField:
    """Lazily-decaying map site -> (value, stamp); absent sites carry 0."""

    window: Box
    entries: dict = dc_field(default_factory=dict)
    clock: float = 0.0

    @classmethod
    def vacant(cls, window: Box, t0: float = 0.0) -> "WorkloadField":
        return cls(window=window, entries={}, clock=t0)


def read_workload(field: WorkloadField, t: float, x: Site) -> float:
    """Workload at (t, x): stored value minus unit-rate decay, floored at 0."""
    if not field.window.contains(x):
        raise ValueError(f"site {x} outside window")
    entry = field.entries.get(x)
    if entry is None:
        return 0.0
    value, stamp = entry
    if t < stamp:
        raise ValueError(f"read at t={t} before last update at {stamp}")
    return max(0.0, value - (t - stamp))


def apply_job(field: WorkloadField, job: Job) -> WorkloadField:
    """Apply one arrival: base sites jump to max-over-base + service.

    Sites outside the base are untouched; the field clock advances to the
    arrival time.  The stored value is the right limit W(t+, x).
    """
    if job.time < field.clock:
        raise OutOfOrderError(
            f"job at t={job.time} precedes field clock {field.clock}"
        )
    base = job.base_sites(field.window)
    if not base:
        raise ValueError("job base does not intersect the window")
    peak = max(read_workload(field, job.time, y) for y in base)
    value = peak + job.service
    for y in base:
        field.entries[y] = (value, job.time)
    field.clock = job.time
    return field


@dataclass
class Trajectory:
    """Workload samples at fixed probe sites over increasing sample times."""

    sample_times: list
    probes: list
    values: np.ndarray  # shape (len(sample_times), len(probes))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.sample_times), len(self.probes)):
            raise ValueError("values shape must be (times, probes)")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        dim = len(self.probes[0]) if self.probes else 0
        w.writerow(["time"] + [f"x{i}" for i in range(dim)] + ["value"])
        for ti, t in enumerate(self.sample_times):
            for pi, p in enumerate(self.probes):
                w.writerow(
                    [repr(float(t))]
                    + [str(c) for c in p]
                    + [repr(float(self.values[ti, pi]))]
                )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty trajectory CSV")
        header = rows[0]
        dim = len(header) - 2
        data: dict = {}
        times: list = []
        probes: list = []
        for row in rows[1:]:
            t = float(row[0])
            p = tuple(int(c) for c in row[1 : 1 + dim])
            if t not in times:
                times.append(t)
            if p not in probes:
                probes.append(p)
            data[(t, p)] = float(row[-1])
        values = np.array([[data[(t, p)] for p in probes] for t in times])
        return cls(sample_times=times, probes=probes, values=values)


def run_jobs(
    window: Box,
    start: float,
    jobs: list,
    probes: list,
    sample_times: list,
) -> Trajectory:
    """Evolve from full vacancy at `start` through `jobs`, sampling probes.

    Jobs must be time-sorted with times >= start.  A sample at time t sees
    every job with arrival <= t (right-continuity convention).
    """
    order = sorted(sample_times)
    if order != list(sample_times):
        raise ValueError("sample_times must be increasing")
    field = WorkloadField.vacant(window, start)
    values = np.zeros((len(sample_times), len(probes)))
    ji = 0
    for ti, t in enumerate(sample_times):
        while ji < len(jobs) and jobs[ji].time <= t:
            apply_job(field, jobs[ji])
            ji += 1
        for pi, p in enumerate(probes):
            values[ti, pi] = read_workload(field, t, p)
    return Trajectory(sample_times=list(sample_times), probes=list(probes), values=values)


def simulate(
    window: Box,
    interval: tuple,
    lam: float,
    law: MarkLaw,
    rng: RngStream,
    probes: list,
    sample_times: list,
    jobs: list | None = None,
) -> Trajectory:
    """Full run from vacancy at interval start; `jobs` overrides generation
    (forced-job injection for golden tests)."""
    if jobs is None:
        jobs = generate_arrivals(window, interval, lam, law, rng)
    bad = [j for j in jobs if not interval[0] <= j.time <= interval[1]]
    if bad:
        raise ValueError(f"{len(bad)} injected jobs outside the interval")
    return run_jobs(window, interval[0], jobs, probes, sample_times)


# --- coupled transforms for the monotonicity suite -------------------------


def delay_all(jobs: list, delta: float) -> list:
    if delta < 0:
        raise TransformError("delay must be nonnegative")
    return [
        Job(time=j.time + delta, center=j.center, radius=j.radius,
            service=j.service, base=j.base)
        for j in jobs
    ]


def scale_service(jobs: list, c: float) -> list:
    if c < 1:
        raise TransformError("service scale must be >= 1")
    return [
        Job(time=j.time, center=j.center, radius=j.radius,
            service=c * j.service, base=j.base)
        for j in jobs
    ]


def enlarge_radius(jobs: list, delta: int) -> list:
    if delta < 0:
        raise TransformError("radius increment must be nonnegative")
    if any(j.base is not None for j in jobs):
        raise TransformError("enlarge_radius only supports cube bases")
    return [
        Job(time=j.time, center=j.center, radius=j.radius + int(delta),
            service=j.service, base=j.base)
        for j in jobs
    ]


_TRANSFORMS = {
    "delay_all": delay_all,
    "scale_service": scale_service,
    "enlarge_radius": enlarge_radius,
}


def simulate_transformed(
    jobs: list,
    transform: str,
    amount,
    window: Box,
    interval: tuple,
    probes: list,
    sample_times: list,
) -> Trajectory:
    """Re-run the dynamics on a transformed copy of a fixed realization."""
    try:
        fn = _TRANSFORMS[transform]
    except KeyError:
        raise TransformError(f"unknown transform {transform!r}") from None
    moved = fn(jobs, amount)
    bad = [j for j in moved if not interval[0] <= j.time <= interval[1]]
    if bad:
        raise TransformError(
            f"transform pushes {len(bad)} jobs outside the interval"
        )
    return run_jobs(window, interval[0], moved, probes, sample_times)
