"""Figure rendering from manifest-verified experiment artifacts.

Each figure kind names its required inputs; every input file must be listed
in the `manifest.json` of its directory with a matching content hash, so a
figure can always be traced back to the exact config and seed that produced
its data.  Rendering is a pure function of the input bytes: fixed figure
geometry, pinned SVG hash salt, no timestamps.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "hailplots"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGURE_KINDS = ("trajectory", "plateau-quantiles", "ak-decay", "drift")

REQUIRED_INPUTS = {
    "trajectory": ("trajectory",),
    "plateau-quantiles": ("summary",),
    "ak-decay": ("estimates",),
    "drift": ("replicas", "summary"),
}


class ManifestError(ValueError):
    """Input file not covered by a valid run manifest."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: dict
    output: str

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        missing = [k for k in REQUIRED_INPUTS[self.kind] if k not in self.inputs]
        if missing:
            raise ValueError(f"{self.kind}: missing inputs {missing}")

    @classmethod
    def from_json(cls, text: str) -> "FigureSpec":
        raw = json.loads(text)
        return cls(kind=raw["kind"], inputs=dict(raw["inputs"]), output=raw["output"])


def _verify_against_manifest(path: Path):
    manifest_path = path.parent / "manifest.json"
    if not manifest_path.exists():
        raise ManifestError(f"no manifest.json next to {path}")
    manifest = json.loads(manifest_path.read_text())
    recorded = manifest.get("files", {}).get(path.name)
    if recorded is None:
        raise ManifestError(f"{path.name} not listed in {manifest_path}")
    actual = hashlib.sha256(path.read_bytes()).hexdigest()
    if actual != recorded:
        raise ManifestError(
            f"{path} does not match its manifest hash (data changed after the run?)"
        )


def _read_csv(path: Path, required: tuple) -> list:
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows:
        for col in required:
            if col not in rows[0]:
                raise ValueError(f"{path.name}: missing column {col!r}")
    elif required:
        raise ValueError(f"{path.name}: empty, expected columns {list(required)}")
    return rows


def _new_axes(title: str):
    fig, ax = plt.subplots(figsize=(7.0, 4.5), dpi=120)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _render_trajectory(spec: FigureSpec, path: Path) -> dict:
    rows = _read_csv(path, ("time", "value"))
    if not rows:
        raise ValueError(f"{path.name}: empty trajectory")
    coord_cols = [c for c in rows[0] if c.startswith("x")]
    series: dict = {}
    for row in rows:
        site = tuple(row[c] for c in coord_cols)
        series.setdefault(site, []).append((float(row["time"]), float(row["value"])))
    fig, ax = _new_axes("workload trajectories")
    for site in sorted(series):
        pts = sorted(series[site])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                label="site " + ",".join(site))
    ax.set_xlabel("time")
    ax.set_ylabel("workload")
    ax.legend(fontsize=8)
    return {"figure": fig, "series": len(series)}


def _render_plateau(spec: FigureSpec, path: Path) -> dict:
    rows = _read_csv(path, ("n", "q50", "q90", "q99"))
    ns = [int(r["n"]) for r in rows]
    fig, ax = _new_axes("workload quantiles vs backward horizon")
    for q in ("q50", "q90", "q99"):
        ax.plot(ns, [float(r[q]) for r in rows], marker="o", label=q)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("horizon n")
    ax.set_ylabel("workload at time 0")
    ax.legend()
    return {"figure": fig, "points": len(ns)}


def _render_ak_decay(spec: FigureSpec, path: Path) -> dict:
    rows = _read_csv(path, ("k", "lambda", "estimate", "ci_low", "ci_high"))
    by_lam: dict = {}
    for r in rows:
        by_lam.setdefault(r["lambda"], []).append(r)
    fig, ax = _new_axes("animal-event probability decay")
    for lam in sorted(by_lam, key=float):
        pts = sorted(by_lam[lam], key=lambda r: int(r["k"]))
        ks = [int(r["k"]) for r in pts]
        est = [float(r["estimate"]) for r in pts]
        lo = [float(r["ci_low"]) for r in pts]
        hi = [float(r["ci_high"]) for r in pts]
        ax.plot(ks, est, marker="o", label=f"thinning {lam}")
        ax.fill_between(ks, lo, hi, alpha=0.2)
    ax.set_yscale("log")
    ax.set_xlabel("k (animal size 2^k)")
    ax.set_ylabel("estimated probability")
    ax.legend()
    return {"figure": fig, "groups": len(by_lam)}


def _render_drift(spec: FigureSpec, replicas_path: Path, summary_path: Path) -> dict:
    summary_rows = _read_csv(summary_path, ("slope_mean", "t", "n_blocks"))
    if not summary_rows:
        raise ValueError(f"{summary_path.name}: empty summary")
    slope_text = summary_rows[0]["slope_mean"]
    slope = float(slope_text)
    block = float(summary_rows[0]["t"])
    times_all, values_all = [], []
    with replicas_path.open() as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if "workload" not in rec:
                raise ValueError(f"{replicas_path.name}: missing column 'workload'")
            for b, w in enumerate(rec["workload"]):
                times_all.append(block * (b + 1))
                values_all.append(w)
    if not times_all:
        raise ValueError(f"{replicas_path.name}: empty replica records")
    fig, ax = _new_axes("workload drift at the origin")
    ax.scatter(times_all, values_all, s=6, alpha=0.25, label="replica samples")
    t_max = max(times_all)
    ax.plot([0.0, t_max], [0.0, slope * t_max], color="C3",
            label=f"fitted slope = {slope_text}")
    ax.set_xlabel("time")
    ax.set_ylabel("workload")
    ax.legend()
    return {"figure": fig, "slope_label": slope_text, "samples": len(times_all)}


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns {"output": path, ...figure info}.

    Every input is verified against its directory manifest before any file
    is read for plotting; on error no output file is written.
    """
    paths = {name: Path(p) for name, p in spec.inputs.items()}
    for name in REQUIRED_INPUTS[spec.kind]:
        path = paths[name]
        if not path.exists():
            raise FileNotFoundError(f"input {name}: {path} does not exist")
        _verify_against_manifest(path)
    if spec.kind == "trajectory":
        info = _render_trajectory(spec, paths["trajectory"])
    elif spec.kind == "plateau-quantiles":
        info = _render_plateau(spec, paths["summary"])
    elif spec.kind == "ak-decay":
        info = _render_ak_decay(spec, paths["estimates"])
    else:
        info = _render_drift(spec, paths["replicas"], paths["summary"])
    fig = info.pop("figure")
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        if out.suffix == ".svg":
            fig.savefig(out, metadata={"Date": None})
        else:
            fig.savefig(out)
    finally:
        plt.close(fig)
    info["output"] = str(out)
    return info
