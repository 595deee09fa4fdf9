"""Batch experiment runner.

Every experiment kind is a subcommand; outputs are flat CSV summaries plus
JSONL per-replica records, and each run directory gets a manifest naming the
exact config hash, seed, and code version that produced every file.  Identical
configs reproduce byte-identical data files: nothing in the outputs depends on
wall-clock time or directory state.

Exit codes: 0 success, 1 config validation failure, 2 runtime failure.  On a
runtime failure the run directory contains a FAILED marker instead of a
manifest, so partial outputs are never mistaken for results.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .clusters import LevelClusters, count_heavy_clusters, cluster_summary_csv, split_levels
from .config import KINDS, ExperimentConfig, load_config, validate
from .core import Box, RngStream, generate_arrivals, jobs_to_lines
from .dynamics import run_jobs, simulate
from .gla import WeightLaw, estimate_box_event, estimate_size_event
from .oracle import max_scores, random_small_instance
from .parallel import parallel_map
from .stability import (
    backward_coupling,
    big_job_count_samples,
    drift_experiment,
    expected_big_jobs,
)

OUT_DIR_ENV = "HAILSIM_OUT"
ORACLE_SAMPLE_TIMES = (3.0, 4.5, 6.0)


def _write_text(path: Path, text: str):
    path.write_text(text)


def _csv_text(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for row in rows:
        w.writerow(
            [repr(float(v)) if isinstance(v, float) else str(v) for v in row]
        )
    return buf.getvalue()


def _jsonl_text(records) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


# --- experiment implementations --------------------------------------------


def _run_simulate(cfg: ExperimentConfig) -> dict:
    window = Box.centered(cfg.window, cfg.d)
    times = cfg.sample_times or tuple(
        cfg.t0 + (cfg.t1 - cfg.t0) * k / 4 for k in range(1, 5)
    )
    probes = [p for p in cfg.probes]
    for p in probes:
        if len(p) != cfg.d or not window.contains(p):
            raise ValueError(f"probe {p} outside the window")
    jobs = generate_arrivals(
        window, (cfg.t0, cfg.t1), cfg.lam, cfg.mark_law(), RngStream(cfg.seed, 0)
    )
    traj = run_jobs(window, cfg.t0, jobs, probes, list(times))
    return {"trajectory.csv": traj.to_csv(), "jobs.txt": jobs_to_lines(jobs)}


def _oracle_instance(args) -> tuple:
    seed, i, max_jobs = args
    window, jobs = random_small_instance(RngStream(seed, i), max_jobs=max_jobs)
    probes = window.site_list()
    times = list(ORACLE_SAMPLE_TIMES)
    sim = run_jobs(window, 0.0, jobs, probes, times)
    want = max_scores(jobs, probes, times, 0.0)
    worst = (0.0, 0.0, 0.0)
    for ti, t in enumerate(times):
        for pi, p in enumerate(probes):
            d = abs(sim.values[ti, pi] - want[(p, t)])
            if d >= worst[0]:
                worst = (d, want[(p, t)], float(sim.values[ti, pi]))
    digest = hashlib.sha256(jobs_to_lines(jobs).encode()).hexdigest()[:12]
    return digest, worst[1], worst[2], worst[0]


def _run_oracle_check(cfg: ExperimentConfig) -> dict:
    rows = parallel_map(
        _oracle_instance,
        [(cfg.seed, i, cfg.max_jobs) for i in range(cfg.instances)],
        workers=cfg.threads,
    )
    max_diff = max((r[3] for r in rows), default=0.0)
    summary = _csv_text(
        ["instances", "max_abs_diff", "tolerance", "ok"],
        [[cfg.instances, max_diff, 1e-9, int(max_diff <= 1e-9)]],
    )
    return {
        "oracle_check.csv": _csv_text(
            ["instance", "oracle", "simulated", "abs_diff"], rows
        ),
        "summary.csv": summary,
    }


def _run_clusters(cfg: ExperimentConfig) -> dict:
    window = Box.centered(cfg.window, cfg.d)
    jobs = [
        j
        for j in generate_arrivals(
            window, (0.0, float(cfg.levels)), cfg.lam, cfg.mark_law(), RngStream(cfg.seed, 0)
        )
        if j.time > 0.0
    ]
    levels = [LevelClusters.build(lv) for lv in split_levels(jobs, 1, cfg.levels, window)]
    heavy = count_heavy_clusters(levels, window, cfg.heavy_u)
    summary = _csv_text(
        ["levels", "jobs", "clusters", "heavy_u", "heavy_count"],
        [[cfg.levels, len(jobs), sum(len(b.clusters) for b in levels), cfg.heavy_u, heavy]],
    )
    return {
        "clusters.csv": cluster_summary_csv(levels),
        "jobs.txt": jobs_to_lines(jobs),
        "summary.csv": summary,
    }


def _run_gla_ak(cfg: ExperimentConfig) -> dict:
    law = WeightLaw(alpha=cfg.gla_alpha)
    rows = []
    for k in cfg.k_grid:
        for lam in cfg.lambda_grid:
            est = estimate_size_event(
                cfg.c1, 2**k, lam, law, cfg.replicas, cfg.seed,
                dimension=cfg.gla_dimension, mode=cfg.mode,
            )
            rows.append(
                [cfg.c1, k, lam, est.replicas, est.estimate, est.ci_low,
                 est.ci_high, est.mode]
            )
    return {
        "estimates.csv": _csv_text(
            ["c1", "k", "lambda", "replicas", "estimate", "ci_low", "ci_high", "mode"],
            rows,
        )
    }


def _run_gla_box(cfg: ExperimentConfig) -> dict:
    law = WeightLaw(alpha=cfg.gla_alpha)
    cap = cfg.size_cap if cfg.size_cap else cfg.u
    rows = []
    for lam in cfg.lambda_grid:
        est = estimate_box_event(
            cfg.c1, cfg.u, cfg.box_radius, lam, law, cfg.replicas, cfg.seed,
            dimension=cfg.gla_dimension, size_cap=cap,
        )
        rows.append(
            [cfg.c1, cfg.u, lam, est.replicas, est.estimate, est.ci_low,
             est.ci_high, est.mode]
        )
    return {
        "estimates.csv": _csv_text(
            ["c1", "u", "lambda", "replicas", "estimate", "ci_low", "ci_high", "mode"],
            rows,
        )
    }


def _run_stability(cfg: ExperimentConfig) -> dict:
    report = backward_coupling(
        cfg.lam, cfg.mark_law(), cfg.n_max, list(cfg.n_grid), cfg.replicas,
        Box.centered(cfg.window, cfg.d), cfg.seed, workers=cfg.threads,
    )
    summary_rows = [
        [r["n"], r["mean"], r["q50"], r["q90"], r["q99"]]
        for r in report.summary_rows()
    ]
    stats = report.stats_row()
    return {
        "replicas.jsonl": _jsonl_text(report.replica_records()),
        "summary.csv": _csv_text(["n", "mean", "q50", "q90", "q99"], summary_rows),
        "stats.csv": _csv_text(list(stats.keys()), [list(stats.values())]),
    }


def _run_thm2_count(cfg: ExperimentConfig) -> dict:
    counts = big_job_count_samples(
        cfg.d, cfg.epsilon, cfg.lam, cfg.t, cfg.replicas, cfg.seed
    )
    mu = expected_big_jobs(cfg.d, cfg.epsilon, cfg.lam, cfg.t)
    se = float(counts.std(ddof=1) / math.sqrt(counts.size)) if counts.size > 1 else 0.0
    z = float((counts.mean() - mu) / se) if se > 0 else 0.0
    summary = _csv_text(
        ["d", "epsilon", "lambda", "t", "replicas", "mean", "se", "expected", "z", "within_3se"],
        [[cfg.d, cfg.epsilon, cfg.lam, cfg.t, cfg.replicas, float(counts.mean()),
          se, mu, z, int(abs(z) <= 3.0)]],
    )
    return {
        "replicas.jsonl": _jsonl_text(
            {"replica": i, "count": int(c)} for i, c in enumerate(counts)
        ),
        "summary.csv": summary,
    }


def _run_thm2_drift(cfg: ExperimentConfig) -> dict:
    report = drift_experiment(
        cfg.d, cfg.epsilon, cfg.lam, cfg.t, cfg.n_blocks, cfg.replicas,
        cfg.seed, window=Box.centered(cfg.window, cfg.d), workers=cfg.threads,
    )
    row = report.summary_row()
    return {
        "replicas.jsonl": _jsonl_text(report.replica_records()),
        "summary.csv": _csv_text(list(row.keys()), [list(row.values())]),
    }


_RUNNERS = {
    "simulate": _run_simulate,
    "oracle-check": _run_oracle_check,
    "clusters": _run_clusters,
    "gla-ak": _run_gla_ak,
    "gla-box": _run_gla_box,
    "stability": _run_stability,
    "thm2-count": _run_thm2_count,
    "thm2-drift": _run_thm2_drift,
}


def run(cfg: ExperimentConfig) -> Path:
    """Validate, dispatch, and write artifacts plus the manifest.

    Raises ValueError with the validation messages for a bad config; any
    runtime failure leaves a FAILED marker in the output directory.
    """
    errors = validate(cfg)
    if errors:
        raise ValueError("; ".join(errors))
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        files = _RUNNERS[cfg.kind](cfg)
        digests = {}
        for name, text in files.items():
            _write_text(out / name, text)
            digests[name] = hashlib.sha256(text.encode()).hexdigest()
        manifest = {
            "experiment": cfg.kind,
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "code_version": __version__,
            "files": digests,
        }
        _write_text(out / "manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n")
        marker = out / "FAILED"
        if marker.exists():
            marker.unlink()
    except Exception as exc:
        _write_text(out / "FAILED", f"{type(exc).__name__}: {exc}\n")
        manifest = out / "manifest.json"
        if manifest.exists():
            manifest.unlink()
        raise
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hailsim",
        description="Experiment runner for the Poisson hail workload model.",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", type=Path, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--replicas", type=int, default=None)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    cfg = ExperimentConfig()
    if args.config is not None:
        try:
            cfg = load_config(Path(args.config).read_text())
        except (OSError, ValueError, configparser.Error) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
    cfg.kind = args.kind
    if os.environ.get(OUT_DIR_ENV):
        cfg.out_dir = os.environ[OUT_DIR_ENV]
    if args.seed is not None:
        cfg.seed = args.seed
    if args.replicas is not None:
        cfg.replicas = args.replicas
    if args.out is not None:
        cfg.out_dir = str(args.out)
    if args.threads is not None:
        cfg.threads = args.threads

    errors = validate(cfg)
    if errors:
        for e in errors:
            print(f"invalid config: {e}", file=sys.stderr)
        return 1
    try:
        out = run(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures exit 2
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
