"""Brute-force path-score computation of the workload.

The workload started from vacancy admits a max-plus representation: it is the
supremum over backward space-time paths of (collected services) - (elapsed
time).  A path may jump between sites only at an arrival whose base contains
both sides of the jump, and it collects every job whose base contains its
position at the arrival instant.

Because a path's score depends only on the set of collected jobs and its start
time, the supremum is attained on "chains": time-ordered job sequences whose
consecutive bases intersect, ending in a job whose base contains the probe,
with the start time equal to the first collected arrival.  Enumerating chains
exhaustively is exponential in the job count, which is the point: this module
is the small-instance correctness oracle for the event-driven simulator, not a
scalable engine.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .core import Box, Job, RngStream, Site

EXHAUSTIVE_JOB_LIMIT = 14


@dataclass(frozen=True)
class Path:
    """Piecewise-constant cadlag path on [start, end].

    `segments` lists (from_time, site) pairs; segment i holds on
    [from_time_i, from_time_{i+1}) and the last one up to `end` inclusive.
    """

    start: float
    end: float
    segments: tuple

    def __post_init__(self):
        if not self.segments:
            raise ValueError("path needs at least one segment")
        times = [s[0] for s in self.segments]
        if times[0] != self.start:
            raise ValueError("first segment must begin at the start time")
        if any(a >= b for a, b in zip(times, times[1:])):
            raise ValueError("segment times must be strictly increasing")
        if times[-1] > self.end:
            raise ValueError("segment beyond the end time")
        if self.start > self.end:
            raise ValueError("start must not exceed end")

    def position(self, s: float) -> Site:
        if not self.start <= s <= self.end:
            raise ValueError("query time outside the path domain")
        times = [seg[0] for seg in self.segments]
        return self.segments[bisect_right(times, s) - 1][1]

    @property
    def terminal(self) -> Site:
        return self.segments[-1][1]


def validate_path(path: Path, jobs: list) -> bool:
    """True iff every jump is witnessed by a job covering both sides."""
    by_time: dict = {}
    for j in jobs:
        by_time.setdefault(j.time, []).append(j)
    for (s_prev, y), (s, z) in zip(path.segments, path.segments[1:]):
        witnesses = by_time.get(s, [])
        if not any(
            y in w and z in w
            for w in (frozenset(j.base_sites()) for j in witnesses)
        ):
            return False
    return True


def score(path: Path, jobs: list) -> float:
    """Path score: collected services minus elapsed time.

    A job is collected iff it arrives inside [start, end] and its base
    contains the path position at the arrival instant; each job counts once.
    """
    if not validate_path(path, jobs):
        raise ValueError("path has a jump with no witnessing job")
    total = 0.0
    for j in jobs:
        if path.start <= j.time <= path.end and path.position(j.time) in set(
            j.base_sites()
        ):
            total += j.service
    return total - (path.end - path.start)


def _chains(jobs: list):
    """Yield (first_time, total_service, last_index) for every chain.

    A chain is a nonempty job subset whose time-ordered consecutive bases
    intersect; it is enumerated backward from its last element, so each chain
    appears exactly once.
    """
    order = sorted(range(len(jobs)), key=lambda i: jobs[i].time)
    bases = [frozenset(jobs[i].base_sites()) for i in order]
    times = [jobs[i].time for i in order]
    services = [jobs[i].service for i in order]
    n = len(order)
    adj = [
        [a for a in range(b) if bases[a] & bases[b]]
        for b in range(n)
    ]

    def extend(first: int, total: float, last: int):
        yield times[first], total, order[last]
        for nxt in adj[first]:
            yield from extend(nxt, total + services[nxt], last)

    for last in range(n):
        yield from extend(last, services[last], last)


def max_scores(
    jobs: list,
    probes: list,
    sample_times: list,
    n: float,
    limit: int = EXHAUSTIVE_JOB_LIMIT,
) -> dict:
    """Exhaustive sup of path scores for every (probe, sample time) pair.

    Paths may start no earlier than -n; the returned workload is the score
    supremum floored at 0 (the empty path).  Jobs arriving after a sample time
    are invisible to it.
    """
    t_hi = max(sample_times)
    usable = [j for j in jobs if -n <= j.time <= t_hi]
    if len(usable) > limit:
        raise ValueError(
            f"{len(usable)} jobs exceed the exhaustive limit {limit}; "
            "use the event-driven simulator for instances this large"
        )
    best = {(p, t): 0.0 for p in probes for t in sample_times}
    if not usable:
        return best
    base_cache = [frozenset(j.base_sites()) for j in usable]
    for first_time, total, last in _chains(usable):
        last_time = usable[last].time
        last_base = base_cache[last]
        for t in sample_times:
            if last_time > t:
                continue
            value = total - (t - first_time)
            for p in probes:
                if p in last_base and value > best[(p, t)]:
                    best[(p, t)] = value
    return best


def max_score(
    jobs: list,
    x: Site,
    t: float,
    n: float,
    limit: int = EXHAUSTIVE_JOB_LIMIT,
) -> float:
    """Workload at (t, x) as max(0, sup over valid paths started after -n)."""
    return max_scores(jobs, [x], [t], n, limit)[(x, t)]


def random_small_instance(
    rng: RngStream,
    max_jobs: int = 12,
    halfwidth: int = 4,
    t_max: float = 6.0,
) -> tuple:
    """Reference d=1 instance for the equivalence suite.

    Jobs carry explicit window-clipped bases so the oracle and the simulator
    see exactly the same geometry.  Returns (window, jobs).
    """
    window = Box.centered(halfwidth, 1)
    gen = rng.generator()
    n = int(gen.integers(0, max_jobs + 1))
    jobs = []
    for _ in range(n):
        c = (int(gen.integers(window.lo[0], window.hi[0] + 1)),)
        r = int(gen.integers(0, 3))
        jobs.append(
            Job(
                time=float(gen.uniform(0.0, t_max)),
                center=c,
                radius=r,
                service=float(gen.uniform(0.3, 5.0)),
                base=frozenset(window.clip_cube(c, r)),
            )
        )
    jobs.sort(key=lambda j: j.time)
    return window, jobs
