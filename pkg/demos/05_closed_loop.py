"""Run the shipped closed-loop scenario end to end.

Loads scenarios/default.cfg, redirects the log into demos/out, runs the
servo loop, and plots the error decay, the rod shape sweeping from start
to target, and how well the online Jacobian estimate tracks a
finite-difference oracle along the trajectory.
Writes demos/out/05_closed_loop.png.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rodservo import (
    EffectorPose,
    load_model,
    load_run_config,
    oracle_jacobian,
    pose_feature_fn,
    read_step_log,
    run_servo,
    shapes_path,
)
from rodservo.config import with_log_path

ROOT = Path(__file__).resolve().parent.parent
OUT = Path(__file__).resolve().parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    log = OUT / "05_run.csv"
    config = with_log_path(load_run_config(ROOT / "scenarios" / "default.cfg"), log)

    sink = []
    summary = run_servo(config, jacobian_sink=sink, dump_shapes=True)
    print(
        f"steps={summary.steps_taken} initial_t1={summary.initial_t1:.1f} "
        f"final_t1={summary.final_t1:.3g} converged={summary.converged}"
    )

    cols = read_step_log(log)
    model = load_model(config.feature_model_path)
    shape_fn = pose_feature_fn(model, config.world)
    rels = [
        float(np.linalg.norm(j_hat - oracle_jacobian(
            EffectorPose.from_array(r), shape_fn, config.world)) /
            np.linalg.norm(oracle_jacobian(
                EffectorPose.from_array(r), shape_fn, config.world)))
        for _, r, j_hat in sink
    ]
    print(f"median oracle tracking error: {np.median(rels):.3f}")

    shape_lines = shapes_path(log).read_text().splitlines()[1:]
    shapes = {
        int(ln.split(",", 1)[0]): np.array(
            [float(v) for v in ln.split(",")[1:]]
        ).reshape(-1, 2)
        for ln in shape_lines
    }

    fig, axes = plt.subplots(1, 3, figsize=(15, 4.5))
    ax_err, ax_shapes, ax_oracle = axes

    ax_err.semilogy(cols["k"], cols["t1"], "o-")
    ax_err.axhline(config.stop_tol, color="k", ls="--", label="stop tolerance")
    ax_err.set_title("feature error per step")
    ax_err.set_xlabel("step")
    ax_err.set_ylabel("T1")
    ax_err.legend(fontsize=8)

    for k in sorted(shapes):
        if k == -1:
            ax_shapes.plot(*shapes[k].T, "r-", lw=3, label="target", zorder=3)
        elif k == 0:
            ax_shapes.plot(*shapes[k].T, "k-", lw=2, label="initial", zorder=2)
        elif k % 3 == 0:
            ax_shapes.plot(*shapes[k].T, "-", color="tab:blue", alpha=0.35, lw=1)
    ax_shapes.set_title("rod shape every third step")
    ax_shapes.set_xlabel("u [px]")
    ax_shapes.set_ylabel("v [px]")
    ax_shapes.set_aspect("equal")
    ax_shapes.legend(fontsize=8)

    ax_oracle.plot(cols["k"], rels, "o-")
    ax_oracle.set_title("estimate vs finite-difference oracle")
    ax_oracle.set_xlabel("step")
    ax_oracle.set_ylabel("relative Frobenius error")
    ax_oracle.set_ylim(bottom=0)

    path = OUT / "05_closed_loop.png"
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
