"""Lattice geometry, heavy-tailed mark laws, and marked-Poisson arrivals.

Shared value types for the whole package: sites are plain ``tuple[int, ...]``
coordinates, finite windows are axis-aligned boxes, and jobs carry an arrival
time, a center site, a cube radius (or an explicit base set) and a service
requirement.  Every random quantity is drawn from a seedable ``RngStream`` so
identical (seed, stream_id) pairs reproduce identical realizations bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

Site = tuple

COUPLING_INDEPENDENT = "independent"
COUPLING_COMONOTONE = "comonotone"


def linf_norm(x: Site) -> int:
    """L-infinity norm: max over coordinates of the absolute value."""
    return max(abs(c) for c in x)


def diam(sites: Iterable[Site]) -> int:
    """Max pairwise L-infinity distance of a nonempty finite site set.

    Equals the largest per-coordinate range, which avoids the quadratic
    pairwise scan.
    """
    pts = list(sites)
    if not pts:
        raise ValueError("diam of an empty site set is undefined")
    dim = len(pts[0])
    return max(
        max(p[i] for p in pts) - min(p[i] for p in pts) for i in range(dim)
    )


def cube_sites(center: Site, radius: int) -> list[Site]:
    """All lattice sites of the cube center + [-radius, radius]^d."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    ranges = [range(c - radius, c + radius + 1) for c in center]
    return [tuple(p) for p in product(*ranges)]


@dataclass(frozen=True)
class Box:
    """Axis-aligned site box [lo_i, hi_i] per coordinate, endpoints included."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("lo/hi dimension mismatch")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError("empty box")

    @classmethod
    def centered(cls, halfwidth: int, dimension: int) -> "Box":
        return cls((-halfwidth,) * dimension, (halfwidth,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def n_sites(self) -> int:
        n = 1
        for l, h in zip(self.lo, self.hi):
            n *= h - l + 1
        return n

    def contains(self, x: Site) -> bool:
        return all(l <= c <= h for c, l, h in zip(x, self.lo, self.hi))

    def site_list(self) -> list[Site]:
        """All sites in lexicographic (row-major) order."""
        ranges = [range(l, h + 1) for l, h in zip(self.lo, self.hi)]
        return [tuple(p) for p in product(*ranges)]

    def clip_cube(self, center: Site, radius: int) -> list[Site]:
        """Sites of the cube around `center` that fall inside this box."""
        ranges = []
        for c, l, h in zip(center, self.lo, self.hi):
            a, b = max(c - radius, l), min(c + radius, h)
            if a > b:
                return []
            ranges.append(range(a, b + 1))
        return [tuple(p) for p in product(*ranges)]

    def shift(self, v: Site) -> "Box":
        return Box(
            tuple(l + s for l, s in zip(self.lo, v)),
            tuple(h + s for h, s in zip(self.hi, v)),
        )


def sample_tail(alpha: float, scale: float, u: float) -> float:
    """Inverse-CDF draw from the power tail P(X > x) = min(1, (x/scale)^-alpha).

    `u` is a uniform variate in (0, 1]; u = 0 would map to infinity and is
    rejected.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if scale <= 0:
        raise ValueError("scale must be positive")
    if not 0 < u <= 1:
        raise ValueError("u must lie in (0, 1]")
    return scale * u ** (-1.0 / alpha)


def _tail_array(gen: np.random.Generator, alpha: float, scale: float, n: int) -> np.ndarray:
    # 1 - random() lies in (0, 1], so the draw is a.s. finite.
    return scale * (1.0 - gen.random(n)) ** (-1.0 / alpha)


@dataclass(frozen=True)
class MarkLaw:
    """Joint law of a job's (service, radius) mark.

    `independent` coupling draws a continuous power-tailed service with
    exponent `tail_exponent_tau` and an integer radius obtained by flooring a
    continuous power-tailed draw with exponent `tail_exponent_radius`.

    `comonotone` coupling draws a single integer-valued service with
    P(service >= t) = t^-tail_exponent_tau exactly on positive integers and
    sets radius = service, so the base is the cube of side 2*service + 1.
    """

    tail_exponent_tau: float
    tail_exponent_radius: float
    scale_tau: float = 1.0
    scale_radius: float = 1.0
    coupling: str = COUPLING_INDEPENDENT

    def __post_init__(self):
        if self.tail_exponent_tau <= 0 or self.tail_exponent_radius <= 0:
            raise ValueError("tail exponents must be positive")
        if self.scale_tau <= 0 or self.scale_radius <= 0:
            raise ValueError("scales must be positive")
        if self.coupling not in (COUPLING_INDEPENDENT, COUPLING_COMONOTONE):
            raise ValueError(f"unknown coupling {self.coupling!r}")

    def sample_marks(self, gen: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw n i.i.d. marks; returns (services, integer radii)."""
        if self.coupling == COUPLING_COMONOTONE:
            tau = np.floor(_tail_array(gen, self.tail_exponent_tau, 1.0, n))
            return tau, tau.astype(np.int64)
        tau = _tail_array(gen, self.tail_exponent_tau, self.scale_tau, n)
        radii = np.floor(
            _tail_array(gen, self.tail_exponent_radius, self.scale_radius, n)
        ).astype(np.int64)
        return tau, radii


@dataclass(frozen=True)
class Job:
    """One hailstone: arrives at `time`, occupies a base around `center`.

    The base defaults to the cube center + [-radius, radius]^d; an explicit
    finite `base` set may be supplied instead (used by oracle tests), in which
    case `radius` is ignored for geometry.
    """

    time: float
    center: Site
    radius: int
    service: float
    base: frozenset | None = None

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        if not self.service > 0:
            raise ValueError("service must be positive")
        if self.base is not None and not self.base:
            raise ValueError("explicit base must be nonempty")

    def base_sites(self, window: Box | None = None) -> list[Site]:
        """Base sites, intersected with `window` when one is given."""
        if self.base is not None:
            sites = sorted(self.base)
            if window is not None:
                sites = [s for s in sites if window.contains(s)]
            return sites
        if window is not None:
            return window.clip_cube(self.center, self.radius)
        return cube_sites(self.center, self.radius)


@dataclass(frozen=True)
class RngStream:
    """Seedable, replicable random stream; stream_id indexes replicas."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence((self.seed & 0xFFFFFFFFFFFFFFFF, self.stream_id))
        return np.random.Generator(np.random.PCG64(ss))

    def stream(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


def generate_arrivals(
    window: Box,
    interval: tuple[float, float],
    lam: float,
    law: MarkLaw,
    rng: RngStream,
) -> list[Job]:
    """Marked-Poisson arrivals: per site, a rate-`lam` Poisson process on
    [t0, t1) with i.i.d. marks from `law`.

    Output is sorted by (time, center, draw order); the draw order per site is
    the generation order, which makes the realization a deterministic function
    of the stream.
    """
    t0, t1 = interval
    if not t0 < t1:
        raise ValueError("interval must satisfy t0 < t1")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if lam == 0:
        return []
    gen = rng.generator()
    sites = window.site_list()
    counts = gen.poisson(lam * (t1 - t0), len(sites))
    total = int(counts.sum())
    times = t0 + (t1 - t0) * gen.random(total)
    services, radii = law.sample_marks(gen, total)
    site_idx = np.repeat(np.arange(len(sites)), counts)
    jobs = [
        Job(
            time=float(times[i]),
            center=sites[site_idx[i]],
            radius=int(radii[i]),
            service=float(services[i]),
        )
        for i in range(total)
    ]
    jobs.sort(key=lambda j: (j.time, j.center))
    return jobs


# --- line-oriented job records: time, center coords, radius, service ------


def jobs_to_lines(jobs: Sequence[Job]) -> str:
    """One job per line: time, d center coordinates, radius, service."""
    out = []
    for j in jobs:
        coords = " ".join(str(c) for c in j.center)
        out.append(f"{j.time!r} {coords} {j.radius} {j.service!r}")
    return "\n".join(out) + ("\n" if out else "")


def jobs_from_lines(text: str) -> list[Job]:
    jobs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 4:
            raise ValueError(f"line {lineno}: expected time, coords, radius, service")
        time = float(parts[0])
        center = tuple(int(c) for c in parts[1:-2])
        radius = int(parts[-2])
        service = float(parts[-1])
        jobs.append(Job(time=time, center=center, radius=radius, service=service))
    return jobs
