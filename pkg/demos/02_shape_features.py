"""Fit and inspect the linear shape-feature model.

Collects a random-walk dataset, fits the principal-direction model,
reports the spectrum of the centerline family (it has exactly five
nonzero directions), and overlays reconstructions at increasing p.
Writes demos/out/02_shape_features.png.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rodservo import (
    EffectorPose,
    RankDeficiencyError,
    WorldConfig,
    extract_feature,
    fit_feature_model,
    generate_dataset,
    reconstruct_centerline,
    render_centerline,
)

OUT = Path(__file__).resolve().parent / "out"


def main():
    world = WorldConfig()
    dataset = generate_dataset(world, 2000, seed=7)
    print(f"dataset: {dataset.n_samples} centerlines from a seeded walk")

    flat = dataset.centerlines.reshape(dataset.n_samples, -1)
    singvals = np.linalg.svd(flat - flat.mean(axis=0), compute_uv=False)
    print("top singular values:", np.round(singvals[:8], 6))

    try:
        fit_feature_model(dataset, 6)
    except RankDeficiencyError as exc:
        print(f"p = 6 is rejected as expected: {exc}")

    probe = EffectorPose(0.38, 0.15, 1.1)
    curve = render_centerline(probe, world)

    fig, (ax_spec, ax_recon) = plt.subplots(1, 2, figsize=(11, 4.5))
    ax_spec.semilogy(np.arange(1, 11), singvals[:10], "o-")
    ax_spec.set_title("centerline family spectrum (rank 5)")
    ax_spec.set_xlabel("component")
    ax_spec.set_ylabel("singular value")

    ax_recon.plot(curve[:, 0], curve[:, 1], "k-", lw=3, label="rendered")
    for p in (1, 2, 5):
        model = fit_feature_model(dataset, p)
        s = extract_feature(curve, model)
        recon = reconstruct_centerline(s, model)
        err = float(np.max(np.abs(recon - curve)))
        ax_recon.plot(recon[:, 0], recon[:, 1], "--", lw=1.5,
                      label=f"p = {p} (max err {err:.2g} px)")
        print(f"p = {p}: reconstruction max err {err:.3g} px, feature {np.round(s, 2)}")
    ax_recon.set_title("reconstruction vs feature dimension")
    ax_recon.set_xlabel("u [px]")
    ax_recon.set_ylabel("v [px]")
    ax_recon.set_aspect("equal")
    ax_recon.legend(fontsize=8)

    OUT.mkdir(exist_ok=True)
    path = OUT / "02_shape_features.png"
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
