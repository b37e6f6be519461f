"""Anatomy of one control step.

Builds a controller context from the rod world, solves the quadratic
objective in closed form, verifies the solution against a dense grid of
the objective restricted to a 2-D slice, and shows saturation.
Writes demos/out/04_controller.png.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rodservo import (
    ControllerContext,
    ControllerWeights,
    EffectorPose,
    WorldConfig,
    extract_feature,
    fit_feature_model,
    generate_dataset,
    gradient,
    objective,
    oracle_jacobian,
    pose_feature_fn,
    render_centerline,
    saturate,
    solve_command,
)
from rodservo.config import DEFAULT_WEIGHTS

OUT = Path(__file__).resolve().parent / "out"


def main():
    world = WorldConfig()
    model = fit_feature_model(generate_dataset(world, 1500, seed=7), 5)
    shape_fn = pose_feature_fn(model, world)

    pose = world.center_pose()
    target = EffectorPose(0.42, 0.1, 0.7)
    s_prev = extract_feature(render_centerline(pose, world), model)
    s_star = extract_feature(render_centerline(target, world), model)
    jac = oracle_jacobian(pose, shape_fn, world)

    weights = ControllerWeights.from_sequence(DEFAULT_WEIGHTS)
    ctx = ControllerContext(
        s_prev=s_prev, s_star=s_star, r_prev=pose.as_array(),
        u_prev=np.zeros(3), j_k=jac, j_prev=jac,
    )
    u_star, _ = solve_command(ctx, weights)
    u_applied = saturate(u_star, 0.05)
    print(f"feature error |s* - s| = {np.linalg.norm(s_star - s_prev):.1f}")
    print(f"unsaturated command: {np.round(u_star, 4)}")
    print(f"saturated command:   {np.round(u_applied, 4)} (|u_i| <= 0.05)")
    print(f"gradient norm at minimizer: {np.linalg.norm(gradient(u_star, ctx, weights)):.2e}")

    # objective on the (u_x, u_y) slice through the minimizer
    span = np.linspace(-0.15, 0.15, 121)
    grid = np.empty((span.size, span.size))
    for i, dy in enumerate(span):
        for j, dx in enumerate(span):
            grid[i, j] = objective(u_star + np.array([dx, dy, 0.0]), ctx, weights)

    fig, (ax_obj, ax_sat) = plt.subplots(1, 2, figsize=(11, 4.5))
    cs = ax_obj.contourf(
        u_star[0] + span, u_star[1] + span, np.log10(grid), levels=30, cmap="viridis"
    )
    fig.colorbar(cs, ax=ax_obj, label="log10 Q")
    ax_obj.plot(*u_star[:2], "r*", ms=12, label="closed-form minimizer")
    ax_obj.set_title("objective slice at the solved theta rate")
    ax_obj.set_xlabel("u_x")
    ax_obj.set_ylabel("u_y")
    ax_obj.legend(fontsize=8)

    raw = np.linspace(-0.12, 0.12, 200)
    ax_sat.plot(raw, [saturate(np.array([r, 0, 0]), 0.05)[0] for r in raw], lw=2)
    ax_sat.axhline(0.05, color="0.6", ls=":")
    ax_sat.axhline(-0.05, color="0.6", ls=":")
    ax_sat.set_title("componentwise saturation at u_max = 0.05")
    ax_sat.set_xlabel("raw command component")
    ax_sat.set_ylabel("applied command component")

    OUT.mkdir(exist_ok=True)
    path = OUT / "04_controller.png"
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
