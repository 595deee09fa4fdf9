"""Per-interval discretization and cube clusters.

All jobs arriving at a site during one unit time interval are summarized by
two aggregates: the summed radii (giving the site's cube) and the summed
services.  Clusters at a level are the connected components of the union of
those cubes, where two cubes connect when their centers are within the sum of
their radii.  Each cluster carries

* a diameter: the L-infinity diameter of its member sites, and
* a time value: the maximum total service over chains of jobs inside the
  cluster, taken in non-increasing arrival order with consecutive jobs'
  individual cubes overlapping.

A valid within-interval path that ends in a cluster can never leave it, and
the service it collects is at most the cluster's time value.  Stacking levels
gives a discrete upper bound on the continuous workload: a discrete path pays
one time unit per level and collects each visited cluster's time value.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .core import Box, Job, Site, diam, linf_norm


@dataclass
class LevelData:
    """Jobs of one unit interval (level-1, level], bucketed per site."""

    level: int
    window: Box
    jobs_by_site: dict = field(default_factory=dict)
    radius_sum: dict = field(default_factory=dict)
    service_sum: dict = field(default_factory=dict)

    @property
    def active_sites(self) -> list:
        return sorted(self.jobs_by_site)


def aggregate(jobs: list, level: int, window: Box) -> LevelData:
    """Per-site aggregates over the interval (level-1, level]."""
    data = LevelData(level=level, window=window)
    for j in jobs:
        if not level - 1 < j.time <= level:
            raise ValueError(
                f"job at t={j.time} outside interval ({level - 1}, {level}]"
            )
        data.jobs_by_site.setdefault(j.center, []).append(j)
        data.radius_sum[j.center] = data.radius_sum.get(j.center, 0) + j.radius
        data.service_sum[j.center] = data.service_sum.get(j.center, 0.0) + j.service
    return data


def split_levels(jobs: list, first_level: int, last_level: int, window: Box) -> list:
    """Bucket a realization on (first_level-1, last_level] into levels."""
    buckets: dict = {m: [] for m in range(first_level, last_level + 1)}
    for j in jobs:
        m = math.ceil(j.time)
        if m not in buckets:
            raise ValueError(f"job at t={j.time} outside the level range")
        buckets[m].append(j)
    return [aggregate(buckets[m], m, window) for m in sorted(buckets)]


@dataclass
class Cluster:
    """Connected component of overlapping per-site cubes at one level."""

    level: int
    generators: tuple
    members: frozenset
    diameter: int
    time_value: float | None = None


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def build_clusters(level_data: LevelData) -> list:
    """Partition the union of cubes into connected components.

    Cubes centered at y, y' merge iff |y - y'|_inf <= R_y + R_y'; touching
    counts as overlap.  Member sites are clipped to the window.
    """
    centers = level_data.active_sites
    radii = [level_data.radius_sum[c] for c in centers]
    uf = _UnionFind(len(centers))
    for i in range(len(centers)):
        for k in range(i + 1, len(centers)):
            gap = linf_norm(tuple(a - b for a, b in zip(centers[i], centers[k])))
            if gap <= radii[i] + radii[k]:
                uf.union(i, k)
    groups: dict = {}
    for i in range(len(centers)):
        groups.setdefault(uf.find(i), []).append(i)
    clusters = []
    for idx_list in groups.values():
        gens = tuple(centers[i] for i in idx_list)
        members: set = set()
        for i in idx_list:
            members.update(level_data.window.clip_cube(centers[i], radii[i]))
        clusters.append(
            Cluster(
                level=level_data.level,
                generators=gens,
                members=frozenset(members),
                diameter=diam(members),
            )
        )
    clusters.sort(key=lambda c: min(c.generators))
    return clusters


def cluster_time(cluster: Cluster, level_data: LevelData) -> float:
    """Maximum total service over job chains inside the cluster.

    Chains take jobs in non-increasing arrival order; consecutive jobs must
    have overlapping individual cubes (each contributes its own radius).  The
    value is the longest weighted path in the DAG of jobs ordered by
    decreasing time, each job visited at most once.
    """
    jobs = [j for g in cluster.generators for j in level_data.jobs_by_site[g]]
    if not jobs:
        return 0.0
    jobs = sorted(jobs, key=lambda j: -j.time)
    n = len(jobs)
    best = [0.0] * n
    for i in range(n - 1, -1, -1):
        tail = 0.0
        ji = jobs[i]
        for k in range(i + 1, n):
            jk = jobs[k]
            gap = linf_norm(tuple(a - b for a, b in zip(ji.center, jk.center)))
            if gap <= ji.radius + jk.radius and best[k] > tail:
                tail = best[k]
        best[i] = ji.service + tail
    return max(best)


@dataclass
class LevelClusters:
    """One level's aggregates plus its clusters with time values filled."""

    data: LevelData
    clusters: list
    site_map: dict  # member site -> cluster index

    @classmethod
    def build(cls, level_data: LevelData) -> "LevelClusters":
        clusters = build_clusters(level_data)
        for c in clusters:
            c.time_value = cluster_time(c, level_data)
        site_map = {}
        for i, c in enumerate(clusters):
            for s in c.members:
                site_map[s] = i
        return cls(data=level_data, clusters=clusters, site_map=site_map)


def _as_bundles(levels: list) -> list:
    return [
        lv if isinstance(lv, LevelClusters) else LevelClusters.build(lv)
        for lv in levels
    ]


def discrete_workload(levels: list, probe: Site) -> float:
    """Upper bound on the workload at the end of the last level at `probe`.

    `levels` is chronological; the path starts at the probe in the latest
    level and steps one level back at a time, each step restricted to the
    current cluster's members.  A site in no cluster acts as a singleton with
    time value 0.  The score collects time values and pays 1 per step; the
    result is floored at 0.
    """
    bundles = list(reversed(_as_bundles(levels)))
    if not bundles:
        return 0.0
    memo: dict = {}

    def value(pos: int, site: Site):
        bundle = bundles[pos]
        ci = bundle.site_map.get(site)
        key = (pos, ci) if ci is not None else (pos, site)
        if key in memo:
            return memo[key]
        if ci is None:
            t, members = 0.0, (site,)
        else:
            cl = bundle.clusters[ci]
            t, members = cl.time_value, cl.members
        if pos + 1 == len(bundles):
            out = t
        else:
            nxt = max(value(pos + 1, y) for y in members)
            out = t + max(0.0, nxt - 1)
        memo[key] = out
        return out

    return max(0.0, value(0, probe))


def count_heavy_clusters(levels: list, spatial: Box, u: float) -> int:
    """Number of clusters across the given levels with diameter + time value
    >= u whose members intersect the spatial box (boundary inclusive)."""
    if u < 0:
        raise ValueError("threshold u must be nonnegative")
    total = 0
    for bundle in _as_bundles(levels):
        for c in bundle.clusters:
            if c.diameter + c.time_value >= u and any(
                spatial.contains(s) for s in c.members
            ):
                total += 1
    return total


def cluster_summary_csv(levels: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["level", "generator_count", "member_count", "diameter", "time_value"])
    for bundle in _as_bundles(levels):
        for c in bundle.clusters:
            w.writerow(
                [c.level, len(c.generators), len(c.members), c.diameter,
                 repr(float(c.time_value))]
            )
    return buf.getvalue()
