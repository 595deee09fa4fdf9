"""Experiment configuration: INI text with [model], [run], [experiment],
[output] sections, every number in decimal text.

`validate` is a pure check returning a list of field-level error strings;
`run`-time preconditions enforced inside the operations (exhaustive limits,
block-expectation thresholds) surface as runtime errors instead.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field, fields

from .core import MarkLaw
from .gla import ANIMAL_SIZE_LIMITS, DEFAULT_SIZE_LIMIT

KINDS = (
    "simulate",
    "oracle-check",
    "clusters",
    "gla-ak",
    "gla-box",
    "stability",
    "thm2-count",
    "thm2-drift",
)


@dataclass
class ExperimentConfig:
    kind: str = "simulate"
    # model
    d: int = 1
    lam: float = 0.1
    alpha_tau: float = 3.0
    alpha_radius: float = 3.0
    scale_tau: float = 1.0
    scale_radius: float = 1.0
    coupling: str = "independent"
    epsilon: float = 0.5
    # run
    window: int = 8
    t0: float = 0.0
    t1: float = 8.0
    seed: int = 1
    replicas: int = 200
    threads: int = 1
    n_max: int = 64
    n_grid: tuple = (4, 8, 16, 32, 64)
    # experiment-specific
    probes: tuple = ((0,),)
    sample_times: tuple = ()
    instances: int = 1000
    max_jobs: int = 12
    levels: int = 4
    heavy_u: float = 4.0
    c1: float = 1.0
    k_grid: tuple = (0, 1, 2, 3)
    lambda_grid: tuple = (0.05, 0.1, 0.2)
    u: int = 3
    box_radius: int = 2
    size_cap: int = 0  # 0 means "same as u"
    gla_dimension: int = 1
    gla_alpha: float = 3.0
    mode: str = "exact"
    t: int = 16
    n_blocks: int = 40
    # output
    out_dir: str = "out"

    def mark_law(self) -> MarkLaw:
        return MarkLaw(
            tail_exponent_tau=self.alpha_tau,
            tail_exponent_radius=self.alpha_radius,
            scale_tau=self.scale_tau,
            scale_radius=self.scale_radius,
            coupling=self.coupling,
        )

    def canonical_text(self) -> str:
        # out_dir and threads are execution details: they never change the
        # computed data, so they stay out of the identifying hash.
        skip = {"out_dir", "threads"}
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name in skip:
                continue
            v = getattr(self, f.name)
            if isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


_SECTION_KEYS = {
    "model": {
        "d": ("d", int),
        "lambda": ("lam", float),
        "alpha_tau": ("alpha_tau", float),
        "alpha_radius": ("alpha_radius", float),
        "scale_tau": ("scale_tau", float),
        "scale_radius": ("scale_radius", float),
        "coupling": ("coupling", str),
        "epsilon": ("epsilon", float),
    },
    "run": {
        "window": ("window", int),
        "t0": ("t0", float),
        "t1": ("t1", float),
        "seed": ("seed", int),
        "replicas": ("replicas", int),
        "threads": ("threads", int),
        "n_max": ("n_max", int),
        "n_grid": ("n_grid", "int_list"),
    },
    "experiment": {
        "kind": ("kind", str),
        "probes": ("probes", "probes"),
        "sample_times": ("sample_times", "float_list"),
        "instances": ("instances", int),
        "max_jobs": ("max_jobs", int),
        "levels": ("levels", int),
        "heavy_u": ("heavy_u", float),
        "c1": ("c1", float),
        "k_grid": ("k_grid", "int_list"),
        "lambda_grid": ("lambda_grid", "float_list"),
        "u": ("u", int),
        "box_radius": ("box_radius", int),
        "size_cap": ("size_cap", int),
        "gla_dimension": ("gla_dimension", int),
        "gla_alpha": ("gla_alpha", float),
        "mode": ("mode", str),
        "t": ("t", int),
        "n_blocks": ("n_blocks", int),
    },
    "output": {
        "dir": ("out_dir", str),
    },
}


def _parse_value(kind, raw: str):
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is str:
        return raw.strip()
    if kind == "int_list":
        return tuple(int(x) for x in raw.split())
    if kind == "float_list":
        return tuple(float(x) for x in raw.split())
    if kind == "probes":
        groups = [g.strip() for g in raw.split(";") if g.strip()]
        return tuple(tuple(int(x) for x in g.split()) for g in groups)
    raise AssertionError(kind)


def load_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse INI text onto a fresh (or given) config."""
    cfg = base if base is not None else ExperimentConfig()
    parser = configparser.ConfigParser()
    parser.read_string(text)
    for section, keys in _SECTION_KEYS.items():
        if not parser.has_section(section):
            continue
        for key in parser.options(section):
            if key not in keys:
                raise ValueError(f"unknown key [{section}] {key}")
            attr, kind = keys[key]
            setattr(cfg, attr, _parse_value(kind, parser.get(section, key)))
    return cfg


def config_to_ini(cfg: ExperimentConfig) -> str:
    """Serialize back to the INI layout (decimal text numbers)."""
    parser = configparser.ConfigParser()
    for section, keys in _SECTION_KEYS.items():
        parser.add_section(section)
        for key, (attr, kind) in keys.items():
            v = getattr(cfg, attr)
            if kind == "int_list" or kind == "float_list":
                text = " ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif kind == "probes":
                text = "; ".join(" ".join(str(c) for c in p) for p in v)
            elif isinstance(v, float):
                text = repr(v)
            else:
                text = str(v)
            parser.set(section, key, text)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def validate(cfg: ExperimentConfig) -> list:
    """Pure field-level validation; returns error strings, empty when ok."""
    errors = []
    if cfg.kind not in KINDS:
        errors.append(f"kind: unknown experiment {cfg.kind!r}")
    if cfg.d < 1:
        errors.append("d: dimension must be at least 1")
    if cfg.lam < 0:
        errors.append("lambda: arrival rate must be nonnegative")
    for name in ("alpha_tau", "alpha_radius", "scale_tau", "scale_radius"):
        if getattr(cfg, name) <= 0:
            errors.append(f"{name}: must be positive")
    if cfg.coupling not in ("independent", "comonotone"):
        errors.append(f"coupling: unknown value {cfg.coupling!r}")
    if cfg.window < 1:
        errors.append("window: half-width must be at least 1")
    if not cfg.t0 < cfg.t1:
        errors.append("t0/t1: need t0 < t1")
    if cfg.replicas < 1:
        errors.append("replicas: must be at least 1")
    if cfg.threads < 1:
        errors.append("threads: must be at least 1")
    if cfg.kind in ("thm2-count", "thm2-drift") and not 0 < cfg.epsilon < cfg.d + 1:
        errors.append("epsilon: epsilon must be in (0, d+1)")
    if cfg.kind == "stability":
        if not cfg.n_grid:
            errors.append("n_grid: must be nonempty")
        elif min(cfg.n_grid) < 1 or max(cfg.n_grid) > cfg.n_max:
            errors.append("n_grid: values must lie in [1, n_max]")
    if cfg.kind in ("gla-ak", "gla-box"):
        if cfg.c1 < 0:
            errors.append("c1: threshold must be nonnegative")
        if cfg.gla_alpha <= 0:
            errors.append("gla_alpha: must be positive")
        if any(l < 0 or l > 1 for l in cfg.lambda_grid):
            errors.append("lambda_grid: thinning levels must lie in [0, 1]")
        limit = ANIMAL_SIZE_LIMITS.get(cfg.gla_dimension, DEFAULT_SIZE_LIMIT)
        if cfg.kind == "gla-ak" and cfg.mode == "exact":
            biggest = 2 ** max(cfg.k_grid) if cfg.k_grid else 0
            if biggest > limit:
                errors.append(
                    f"k_grid: exact mode needs 2^k <= {limit} for dimension "
                    f"{cfg.gla_dimension}; use mode=heuristic for larger sizes"
                )
        if cfg.kind == "gla-box":
            cap = cfg.size_cap if cfg.size_cap else cfg.u
            if cap < cfg.u:
                errors.append("size_cap: must be at least u")
            if cap > limit:
                errors.append(
                    f"size_cap: exact enumeration bounded by {limit} for "
                    f"dimension {cfg.gla_dimension}"
                )
            if cfg.box_radius < 0:
                errors.append("box_radius: must be nonnegative")
    if cfg.kind == "thm2-count" and cfg.t < 1:
        errors.append("t: block length must be a positive integer")
    if cfg.kind == "thm2-drift" and (cfg.t < 1 or cfg.n_blocks < 2):
        errors.append("t/n_blocks: need t >= 1 and at least 2 blocks")
    if cfg.kind == "oracle-check" and cfg.instances < 1:
        errors.append("instances: must be at least 1")
    return errors
