"""Render the synthetic rod world.

Sweeps the effector through a handful of poses and draws the resulting
centerlines in pixel space, plus a noisy observation of one of them.
Writes demos/out/01_rod_world.png.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rodservo import EffectorPose, WorldConfig, render_centerline

OUT = Path(__file__).resolve().parent / "out"


def main():
    world = WorldConfig()
    print(f"world: {world.n_points} points per curve, workspace {world.workspace}")

    poses = [
        EffectorPose(0.35, 0.12, 0.9),
        EffectorPose(0.5, 0.0, 0.0),
        EffectorPose(0.62, -0.1, -0.7),
        EffectorPose(0.45, 0.2, 1.6),
    ]

    fig, (ax_clean, ax_noisy) = plt.subplots(1, 2, figsize=(11, 4.5))
    for pose in poses:
        curve = render_centerline(pose, world)
        ax_clean.plot(curve[:, 0], curve[:, 1], lw=2,
                      label=f"({pose.x:.2f}, {pose.y:.2f}, {pose.theta:.1f})")
        ax_clean.plot(curve[-1, 0], curve[-1, 1], "ko", ms=4)
    base = np.asarray(world.pixel_offset) + world.pixel_scale * np.asarray(world.base_point)
    ax_clean.plot(*base, "ks", ms=8, label="clamped base")
    ax_clean.set_title("centerlines for four effector poses")
    ax_clean.legend(fontsize=8)
    ax_clean.set_aspect("equal")

    noisy_world = WorldConfig(obs_noise_sigma=2.0)
    rng = np.random.default_rng(0)
    clean = render_centerline(poses[0], world)
    noisy = render_centerline(poses[0], noisy_world, rng)
    ax_noisy.plot(clean[:, 0], clean[:, 1], "k-", lw=2, label="noise-free")
    ax_noisy.plot(noisy[:, 0], noisy[:, 1], ".", ms=4, label="sigma = 2 px")
    ax_noisy.set_title("observation noise")
    ax_noisy.legend(fontsize=8)
    ax_noisy.set_aspect("equal")

    for ax in (ax_clean, ax_noisy):
        ax.set_xlabel("u [px]")
        ax.set_ylabel("v [px]")

    OUT.mkdir(exist_ok=True)
    path = OUT / "01_rod_world.png"
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
