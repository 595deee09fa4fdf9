import math

import numpy as np
import pytest

from hailsim.core import Box, Job, MarkLaw, RngStream, generate_arrivals, linf_norm
from hailsim.clusters import (
    Cluster,
    LevelClusters,
    aggregate,
    build_clusters,
    cluster_summary_csv,
    cluster_time,
    count_heavy_clusters,
    discrete_workload,
    split_levels,
)
from hailsim.dynamics import run_jobs

LAW = MarkLaw(3.0, 3.0)
W1 = Box.centered(6, 1)


def _job(t, center, r, s):
    if isinstance(center, int):
        center = (center,)
    return Job(time=t, center=center, radius=r, service=s)


def test_aggregate_sums_and_validation():
    data = aggregate([], 0, W1)
    assert data.radius_sum == {} and data.service_sum == {}
    jobs = [_job(-0.2, 1, 1, 0.5), _job(-0.7, 1, 2, 1.5)]
    data = aggregate(jobs, 0, W1)
    assert data.radius_sum[(1,)] == 3
    assert data.service_sum[(1,)] == 2.0
    with pytest.raises(ValueError):
        aggregate([_job(0.5, 0, 1, 1.0)], 0, W1)


def test_split_levels_buckets_half_open_intervals():
    jobs = [_job(-1.0, 0, 0, 1.0), _job(-0.5, 0, 0, 1.0), _job(0.0, 1, 0, 1.0)]
    levels = split_levels(jobs, -1, 0, W1)
    assert [lv.level for lv in levels] == [-1, 0]
    assert sum(len(v) for v in levels[0].jobs_by_site.values()) == 1  # t=-1.0
    assert sum(len(v) for v in levels[1].jobs_by_site.values()) == 2
    with pytest.raises(ValueError):
        split_levels([_job(0.5, 0, 0, 1.0)], -1, 0, W1)


def test_build_clusters_single_cube():
    window = Box.centered(5, 2)
    data = aggregate([_job(0.5, (0, 0), 1, 1.0)], 1, window)
    (cl,) = build_clusters(data)
    assert cl.members == frozenset(window.clip_cube((0, 0), 1))
    assert cl.diameter == 2
    assert cl.generators == ((0, 0),)


@pytest.mark.parametrize(
    "r_a,r_b,expected",
    [(1, 1, 2), (3, 2, 1)],  # gap 5: 1+1 < 5 splits, 3+2 >= 5 merges (touching counts)
)
def test_build_clusters_overlap_rule(r_a, r_b, expected):
    window = Box.centered(12, 1)
    jobs = [_job(0.3, 0, r_a, 1.0), _job(0.6, 5, r_b, 1.0)]
    data = aggregate(jobs, 1, window)
    assert len(build_clusters(data)) == expected


def test_cluster_time_singleton_and_same_site():
    window = Box.centered(5, 1)
    data = aggregate([_job(0.5, 0, 1, 2.5)], 1, window)
    (cl,) = build_clusters(data)
    assert cluster_time(cl, data) == 2.5

    jobs = [_job(0.8, 0, 0, 2.0), _job(0.3, 0, 0, 3.0)]
    data = aggregate(jobs, 1, window)
    (cl,) = build_clusters(data)
    assert cluster_time(cl, data) == 5.0


def _brute_chain_max(jobs):
    """Exhaustive max over chains: distinct jobs, non-increasing times,
    consecutive individual cubes overlapping."""
    best = 0.0
    n = len(jobs)

    def overlap(a, b):
        gap = linf_norm(tuple(x - y for x, y in zip(a.center, b.center)))
        return gap <= a.radius + b.radius

    def rec(last, used, total):
        nonlocal best
        if total > best:
            best = total
        for k in range(n):
            if k not in used and jobs[k].time <= jobs[last].time and overlap(jobs[last], jobs[k]):
                rec(k, used | {k}, total + jobs[k].service)

    for i in range(n):
        rec(i, {i}, jobs[i].service)
    return best


def _dyadic_level(stream, lam=0.9, window=Box.centered(8, 1), level=0):
    """Random level with services on a dyadic grid so float sums are exact."""
    gen = RngStream(4242, stream).generator()
    jobs = []
    for j in generate_arrivals(window, (float(level - 1), float(level)), lam, LAW, RngStream(24, stream)):
        if j.time <= level - 1:
            continue
        s = float(int(gen.integers(1, 129))) / 32.0
        jobs.append(Job(time=j.time, center=j.center, radius=min(j.radius, 3), service=s))
    return aggregate(jobs, level, window)


def test_cluster_time_matches_brute_force():
    checked = 0
    for k in range(400):
        data = _dyadic_level(k)
        for cl in build_clusters(data):
            jobs = [j for g in cl.generators for j in data.jobs_by_site[g]]
            if len(jobs) > 10:
                continue
            assert cluster_time(cl, data) == _brute_chain_max(jobs)
            checked += 1
        if checked >= 200:
            break
    assert checked >= 200


def test_discrete_workload_trivials():
    empties = [aggregate([], m, W1) for m in (-2, -1, 0)]
    assert discrete_workload(empties, (0,)) == 0.0

    one = aggregate([_job(-0.5, 0, 1, 4.25)], 0, W1)
    assert discrete_workload([one], (0,)) == 4.25
    assert discrete_workload([one], (4,)) == 0.0


def _brute_discrete(levels, probe):
    """Exhaustive enumeration of discrete paths, no memoization."""
    bundles = [LevelClusters.build(lv) for lv in levels][::-1]
    best = 0.0

    def rec(pos, site, acc, depth):
        nonlocal best
        ci = bundles[pos].site_map.get(site)
        if ci is None:
            t, members = 0.0, (site,)
        else:
            cl = bundles[pos].clusters[ci]
            t, members = cl.time_value, cl.members
        total = acc + t
        if total - depth > best:
            best = total - depth
        if pos + 1 < len(bundles):
            for y in members:
                rec(pos + 1, y, total, depth + 1)

    rec(0, probe, 0.0, 0)
    return max(0.0, best)


def test_discrete_workload_matches_enumeration():
    for k in range(120):
        n = 1 + k % 4  # up to 4 backward steps
        levels = [_dyadic_level(1000 + 7 * k + m, lam=0.5, level=m) for m in range(-n, 1)]
        dp = discrete_workload(levels, (0,))
        brute = _brute_discrete(levels, (0,))
        assert dp == brute


def test_discrete_workload_dominates_simulation():
    window = Box.centered(6, 1)
    for k in range(120):
        n = 3
        jobs = [
            j
            for j in generate_arrivals(window, (-float(n + 1), 0.0), 0.35, LAW, RngStream(606, k))
            if j.time > -(n + 1)
        ]
        levels = split_levels(jobs, -n, 0, window)
        bound = discrete_workload(levels, (0,))
        sim = run_jobs(window, -(n + 1.0), jobs, [(0,)], [0.0]).values[0, 0]
        assert bound >= sim


def _random_level_path(data, gen):
    """Random valid within-interval path built by walking overlapping jobs.

    Jumps only happen at a job whose base contains both sides.  Returns
    (positions visited, endpoint, collected service total)."""
    jobs = sorted(
        (j for js in data.jobs_by_site.values() for j in js), key=lambda j: j.time
    )
    if not jobs:
        return None
    window = data.window
    bases = [window.clip_cube(j.center, j.radius) for j in jobs]
    start = int(gen.integers(0, len(jobs)))
    pos = bases[start][int(gen.integers(0, len(bases[start])))]
    positions = [pos]
    pos_at_job = {start: pos}
    for i in range(start + 1, len(jobs)):
        b = bases[i]
        if pos in b and gen.random() < 0.8:
            pos = b[int(gen.integers(0, len(b)))]
            positions.append(pos)
        pos_at_job[i] = pos
    collected = sum(
        jobs[i].service
        for i in range(start, len(jobs))
        if pos_at_job[i] in bases[i]
    )
    return positions, pos, collected


def test_containment_random_paths():
    """A valid within-interval path ending in a cluster never leaves it."""
    gen = RngStream(31337, 0).generator()
    checked = 0
    k = 0
    while checked < 500:
        k += 1
        data = _dyadic_level(5000 + k, lam=0.8)
        out = _random_level_path(data, gen)
        if out is None:
            continue
        positions, endpoint, _ = out
        bundle = LevelClusters.build(data)
        ci = bundle.site_map.get(endpoint)
        assert ci is not None
        members = bundle.clusters[ci].members
        assert set(positions) <= set(members)
        checked += 1


def test_interval_accrual_bounded_by_cluster_time():
    """Service collected by a within-interval path never exceeds the time
    value of the endpoint's cluster."""
    gen = RngStream(808, 0).generator()
    checked = 0
    k = 0
    while checked < 300:
        k += 1
        data = _dyadic_level(9000 + k, lam=0.8)
        out = _random_level_path(data, gen)
        if out is None:
            continue
        _, endpoint, collected = out
        bundle = LevelClusters.build(data)
        ci = bundle.site_map[endpoint]
        assert collected <= bundle.clusters[ci].time_value + 1e-9
        checked += 1


def test_count_heavy_clusters():
    assert count_heavy_clusters([aggregate([], 0, W1)], W1, 1.0) == 0
    window = Box.centered(8, 1)
    data = aggregate([_job(0.5, 0, 2, 3.0)], 1, window)  # D=4, T=3 -> D+T=7
    assert count_heavy_clusters([data], window, 7.0) == 1  # boundary inclusive
    assert count_heavy_clusters([data], window, 7.5) == 0
    assert count_heavy_clusters([data], Box((6,), (8,)), 1.0) == 0  # disjoint box
    with pytest.raises(ValueError):
        count_heavy_clusters([data], window, -1.0)


def test_aggregate_tail_slope_matches_mark_exponent():
    """Summed-radius tail keeps the mark exponent (log-log slope check)."""
    alpha, lam, n = 3.0, 0.05, 10**6
    gen = RngStream(17, 0).generator()
    counts = gen.poisson(lam, n)
    total = int(counts.sum())
    radii = np.floor((1.0 - gen.random(total)) ** (-1.0 / alpha))
    sums = np.bincount(np.repeat(np.arange(n), counts), weights=radii, minlength=n)
    ts = np.array([2.0, 4.0, 8.0])
    ps = np.array([(sums >= t).mean() for t in ts])
    slope = np.polyfit(np.log(ts), np.log(ps), 1)[0]
    assert abs(slope + alpha) <= 0.3


def test_cluster_diameter_shrinks_with_rate():
    """Coupled thinning: the origin's cluster diameter is pointwise monotone
    in lambda, so its tail decreases as lambda does."""
    window = Box.centered(20, 1)
    lam_max, grid, reps = 0.4, [0.1, 0.2, 0.4], 400
    exceed = {lam: 0 for lam in grid}
    for k in range(reps):
        jobs = [
            j
            for j in generate_arrivals(window, (0.0, 1.0), lam_max, LAW, RngStream(55, k))
            if j.time > 0
        ]
        thin = RngStream(56, k).generator().random(len(jobs))
        prev = None
        for lam in grid:
            kept = [j for j, u in zip(jobs, thin) if u < lam / lam_max]
            bundle = LevelClusters.build(aggregate(kept, 1, window))
            ci = bundle.site_map.get((0,))
            d = bundle.clusters[ci].diameter if ci is not None else 0
            if prev is not None:
                assert d >= prev  # pointwise monotone by the coupling
            prev = d
            exceed[lam] += d >= 2
    fracs = [exceed[lam] / reps for lam in grid]
    assert fracs[0] < fracs[1] < fracs[2]


def test_heavy_cluster_count_trends():
    """Mean heavy-cluster count decreases in u (pointwise) and in lambda."""
    window = Box.centered(20, 1)
    H = Box.centered(8, 1)
    lam_max, grid, reps = 0.4, [0.1, 0.2, 0.4], 300
    means = {lam: 0.0 for lam in grid}
    for k in range(reps):
        jobs = [
            j
            for j in generate_arrivals(window, (0.0, 1.0), lam_max, LAW, RngStream(155, k))
            if j.time > 0
        ]
        thin = RngStream(156, k).generator().random(len(jobs))
        for lam in grid:
            kept = [j for j, u in zip(jobs, thin) if u < lam / lam_max]
            lvl = LevelClusters.build(aggregate(kept, 1, window))
            c2 = count_heavy_clusters([lvl], H, 2.0)
            c4 = count_heavy_clusters([lvl], H, 4.0)
            assert c4 <= c2  # pointwise monotone in u
            means[lam] += c4
    ordered = [means[lam] / reps for lam in grid]
    assert ordered[0] < ordered[1] < ordered[2]


def test_cluster_summary_csv_columns():
    data = aggregate([_job(0.5, 0, 2, 3.0)], 1, Box.centered(8, 1))
    text = cluster_summary_csv([data])
    lines = text.strip().splitlines()
    assert lines[0] == "level,generator_count,member_count,diameter,time_value"
    assert lines[1] == "1,1,5,4,3.0"
