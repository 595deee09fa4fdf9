import subprocess
import sys

import pytest


def _hailsim(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "hailsim.cli", *args], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """Real run artifacts produced through the hailsim CLI."""
    root = tmp_path_factory.mktemp("runs")
    sim = root / "simulate"
    _hailsim("simulate", "--out", str(sim), "--seed", "3")
    flat = root / "flat"
    cfg = root / "flat.ini"
    cfg.write_text("[model]\nlambda = 0.0\n")
    _hailsim("simulate", "--config", str(cfg), "--out", str(flat))
    stab = root / "stability"
    _hailsim("stability", "--out", str(stab), "--replicas", "20", "--seed", "4")
    gla = root / "gla"
    gla_cfg = root / "gla.ini"
    gla_cfg.write_text(
        "[experiment]\nkind = gla-ak\nk_grid = 0 1 2\nlambda_grid = 0.05 0.1\n"
    )
    _hailsim("gla-ak", "--config", str(gla_cfg), "--out", str(gla), "--replicas", "500")
    drift = root / "drift"
    drift_cfg = root / "drift.ini"
    drift_cfg.write_text(
        "[model]\nlambda = 0.5\nepsilon = 1.0\n"
        "[run]\nwindow = 8\n"
        "[experiment]\nt = 4\nn_blocks = 6\n"
    )
    _hailsim("thm2-drift", "--config", str(drift_cfg), "--out", str(drift),
             "--replicas", "6", "--seed", "5")
    return root
