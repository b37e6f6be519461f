import shutil
import subprocess
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent.parent

SMALL_CFG = """
world.n_points = 40
run.target_pose = 0.45 0.08 0.5
run.max_steps = 60
run.stop_tol = 2.5
run.feature_model_path = model.txt
run.log_path = out/run.csv
"""

CLAMPED_CFG = """
world.n_points = 40
run.target_pose = 0.45 0.08 0.5
run.max_steps = 40
run.stop_tol = 2.5
control.u_max = 0.003
run.feature_model_path = model.txt
run.log_path = out/clamped.csv
"""


def _rodservo(*args):
    exe = shutil.which("rodservo")
    assert exe is not None, "rodservo CLI must be installed for figgen tests"
    proc = subprocess.run([exe, *args], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, f"rodservo {args[0]} failed: {proc.stderr}"


@pytest.fixture(scope="session")
def run_artifacts(tmp_path_factory):
    """Logs produced through the rodservo CLI only (no library coupling)."""
    root = tmp_path_factory.mktemp("figgen-e2e")
    (root / "run.cfg").write_text(SMALL_CFG)
    (root / "clamped.cfg").write_text(CLAMPED_CFG)
    _rodservo("gen-data", "--config", str(root / "run.cfg"), "--samples", "400",
              "--out", str(root / "data.txt"), "--quiet")
    _rodservo("fit-feature", "--data", str(root / "data.txt"), "--p", "5",
              "--out", str(root / "model.txt"), "--quiet")
    _rodservo("run", "--config", str(root / "run.cfg"), "--dump-shapes", "--quiet")
    _rodservo("run", "--config", str(root / "clamped.cfg"), "--quiet")
    return {
        "log": root / "out" / "run.csv",
        "shapes": root / "out" / "run_shapes.csv",
        "clamped_log": root / "out" / "clamped.csv",
    }


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    """The shipped default scenario, executed through the rodservo CLI."""
    out = tmp_path_factory.mktemp("figgen-default") / "default.csv"
    _rodservo("run", "--config", str(REPO_ROOT / "scenarios" / "default.cfg"),
              "--out", str(out), "--dump-shapes", "--quiet")
    return out
