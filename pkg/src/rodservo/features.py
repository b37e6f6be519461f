"""Linear shape features for rod centerlines.

A centerline of N pixel points is flattened to a 2N-vector; the feature
is its projection onto the top-p principal directions of a training set,
after subtracting the training mean. Orthonormal rows make the map
exactly invertible on its range, which downstream estimation relies on.
Model and dataset files use a plain text schema, see save_model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ModelFormatError, RankDeficiencyError
from .world import EffectorPose, WorldConfig, apply_command, render_centerline

MODEL_FORMAT = "rodservo-feature-model/1"
DATASET_FORMAT = "rodservo-dataset/1"


@dataclass(frozen=True)
class FeatureModel:
    """Affine-linear centerline-to-feature map: s = projection @ (vec(c) - mean)."""

    mean: np.ndarray
    projection: np.ndarray
    p: int
    n_points: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        projection = np.asarray(self.projection, dtype=float)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "projection", projection)
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.p > 2 * self.n_points:
            raise ValueError(f"p = {self.p} exceeds 2*n_points = {2 * self.n_points}")
        if mean.shape != (2 * self.n_points,):
            raise ValueError(f"mean must have shape ({2 * self.n_points},), got {mean.shape}")
        if projection.shape != (self.p, 2 * self.n_points):
            raise ValueError(
                f"projection must have shape ({self.p}, {2 * self.n_points}), "
                f"got {projection.shape}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(projection))):
            raise ValueError("model entries must be finite")
        gram = projection @ projection.T
        if np.max(np.abs(gram - np.eye(self.p))) > 1e-8:
            raise ValueError("projection rows are not orthonormal")


@dataclass(frozen=True)
class ShapeDataset:
    """Pose/centerline pairs from a random walk, plus the generating config."""

    poses: Tuple[EffectorPose, ...]
    centerlines: np.ndarray
    config: WorldConfig
    seed: int

    def __post_init__(self):
        centerlines = np.asarray(self.centerlines, dtype=float)
        object.__setattr__(self, "centerlines", centerlines)
        object.__setattr__(self, "poses", tuple(self.poses))
        n = len(self.poses)
        if n < 1:
            raise ValueError("dataset must contain at least one sample")
        if centerlines.shape != (n, self.config.n_points, 2):
            raise ValueError(
                f"centerlines must have shape ({n}, {self.config.n_points}, 2), "
                f"got {centerlines.shape}"
            )

    @property
    def n_samples(self) -> int:
        return len(self.poses)


def generate_dataset(config: WorldConfig, n_samples: int, seed: int) -> ShapeDataset:
    """Collect centerlines along a seeded bounded random walk of the effector.

    The walk starts at the workspace center with zero rotation. Each step
    perturbs every pose component by a uniform draw in
    [-walk_delta, walk_delta]; positions are clamped to the workspace.
    Centerlines are rendered noise-off so the fitted model is independent
    of the observation-noise setting.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    pose = config.center_pose()
    poses = [pose]
    centerlines = [render_centerline(pose, config)]
    for _ in range(n_samples - 1):
        du = rng.uniform(-config.walk_delta, config.walk_delta, size=3)
        pose, _ = apply_command(pose, du, config)
        poses.append(pose)
        centerlines.append(render_centerline(pose, config))
    return ShapeDataset(tuple(poses), np.array(centerlines), config, seed)


def fit_feature_model(dataset: ShapeDataset, p: int) -> FeatureModel:
    """Fit the mean and top-p principal directions of the centerline vectors.

    Rows are ordered by decreasing explained variance. Each row's sign is
    fixed so its first nonzero entry is positive, making the fit
    deterministic across platforms.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if dataset.n_samples < p:
        raise RankDeficiencyError(
            f"dataset has {dataset.n_samples} samples, need at least p = {p}"
        )
    x = dataset.centerlines.reshape(dataset.n_samples, -1)
    mean = x.mean(axis=0)
    centered = x - mean
    _, singvals, vt = np.linalg.svd(centered, full_matrices=False)
    tol = max(centered.shape) * np.finfo(float).eps * (singvals[0] if singvals.size else 0.0)
    rank = int(np.sum(singvals > tol))
    if p > rank:
        raise RankDeficiencyError(
            f"requested p = {p} but centered data has rank {rank}"
        )
    rows = vt[:p].copy()
    for row in rows:
        nonzero = np.nonzero(np.abs(row) > 1e-12)[0]
        if nonzero.size and row[nonzero[0]] < 0:
            row *= -1.0
    return FeatureModel(mean, rows, p, dataset.config.n_points)


def extract_feature(centerline, model: FeatureModel) -> np.ndarray:
    """Project a centerline into feature space: s = P (vec(c) - mean)."""
    c = np.asarray(centerline, dtype=float)
    if c.shape != (model.n_points, 2):
        raise ValueError(
            f"centerline must have shape ({model.n_points}, 2), got {c.shape}"
        )
    if not np.all(np.isfinite(c)):
        raise ValueError("centerline entries must be finite")
    return model.projection @ (c.ravel() - model.mean)


def reconstruct_centerline(feature, model: FeatureModel) -> np.ndarray:
    """Back-project a feature to the closest centerline in the model's range."""
    s = np.asarray(feature, dtype=float)
    if s.shape != (model.p,):
        raise ValueError(f"feature must have shape ({model.p},), got {s.shape}")
    return (model.mean + model.projection.T @ s).reshape(model.n_points, 2)


def pose_feature_fn(
    model: FeatureModel, config: WorldConfig
) -> Callable[[np.ndarray], np.ndarray]:
    """Noise-free composed map from a pose array to a feature vector."""

    def shape_fn(r: np.ndarray) -> np.ndarray:
        return extract_feature(render_centerline(EffectorPose.from_array(r), config), model)

    return shape_fn


def _format_vector(v: np.ndarray) -> str:
    return " ".join("%.17g" % x for x in v)


def save_model(model: FeatureModel, path) -> None:
    """Write a model file: header (format, p, n_points), mean, projection rows."""
    lines = [
        f"format: {MODEL_FORMAT}",
        f"p: {model.p}",
        f"n_points: {model.n_points}",
        f"mean: {_format_vector(model.mean)}",
    ]
    for row in model.projection:
        lines.append(f"row: {_format_vector(row)}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header_int(line: Optional[str], key: str, path) -> int:
    prefix = key + ": "
    if line is None or not line.startswith(prefix):
        raise ModelFormatError(f"{path}: expected '{key}: <int>' line")
    try:
        return int(line[len(prefix):])
    except ValueError as exc:
        raise ModelFormatError(f"{path}: bad {key} value") from exc


def _parse_vector(line: Optional[str], key: str, length: int, path) -> np.ndarray:
    prefix = key + ": "
    if line is None or not line.startswith(prefix):
        raise ModelFormatError(f"{path}: expected '{key}:' line")
    try:
        v = np.array([float(tok) for tok in line[len(prefix):].split()])
    except ValueError as exc:
        raise ModelFormatError(f"{path}: unparseable {key} vector") from exc
    if v.shape != (length,):
        raise ModelFormatError(
            f"{path}: {key} vector has {v.size} entries, expected {length}"
        )
    return v


def load_model(path) -> FeatureModel:
    """Read a model file written by save_model; round-trip is bit-exact."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as exc:
        raise ModelFormatError(f"{path}: cannot read model file: {exc}") from exc
    it = iter(lines)
    first = next(it, None)
    if first != f"format: {MODEL_FORMAT}":
        raise ModelFormatError(f"{path}: not a {MODEL_FORMAT} file")
    p = _parse_header_int(next(it, None), "p", path)
    n_points = _parse_header_int(next(it, None), "n_points", path)
    if p < 1 or n_points < 2 or p > 2 * n_points:
        raise ModelFormatError(
            f"{path}: inconsistent dimensions p = {p}, n_points = {n_points}"
        )
    mean = _parse_vector(next(it, None), "mean", 2 * n_points, path)
    rows = [_parse_vector(next(it, None), "row", 2 * n_points, path) for _ in range(p)]
    trailing = next(it, None)
    if trailing not in (None, ""):
        raise ModelFormatError(f"{path}: unexpected trailing content")
    try:
        return FeatureModel(mean, np.array(rows), p, n_points)
    except ValueError as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc


def save_dataset(dataset: ShapeDataset, path) -> None:
    """Write a dataset file: header, world parameters, then pose/shape records."""
    c = dataset.config
    lines = [
        f"format: {DATASET_FORMAT}",
        f"n_samples: {dataset.n_samples}",
        f"seed: {dataset.seed}",
        f"world.n_points: {c.n_points}",
        f"world.base_point: {_format_vector(np.asarray(c.base_point, dtype=float))}",
        "world.base_tangent: %.17g" % c.base_tangent,
        "world.pixel_scale: %.17g" % c.pixel_scale,
        f"world.pixel_offset: {_format_vector(np.asarray(c.pixel_offset, dtype=float))}",
        "world.obs_noise_sigma: %.17g" % c.obs_noise_sigma,
        f"world.workspace: {_format_vector(np.asarray(c.workspace, dtype=float))}",
        "world.walk_delta: %.17g" % c.walk_delta,
        f"world.seed: {c.seed}",
    ]
    for pose, centerline in zip(dataset.poses, dataset.centerlines):
        lines.append(f"pose: {_format_vector(pose.as_array())}")
        lines.append(f"shape: {_format_vector(centerline.ravel())}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset(path) -> ShapeDataset:
    """Read a dataset file written by save_dataset."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as exc:
        raise ModelFormatError(f"{path}: cannot read dataset file: {exc}") from exc
    it = iter(lines)
    first = next(it, None)
    if first != f"format: {DATASET_FORMAT}":
        raise ModelFormatError(f"{path}: not a {DATASET_FORMAT} file")
    n_samples = _parse_header_int(next(it, None), "n_samples", path)
    seed = _parse_header_int(next(it, None), "seed", path)
    n_points = _parse_header_int(next(it, None), "world.n_points", path)
    base_point = _parse_vector(next(it, None), "world.base_point", 2, path)
    base_tangent = _parse_vector(next(it, None), "world.base_tangent", 1, path)[0]
    pixel_scale = _parse_vector(next(it, None), "world.pixel_scale", 1, path)[0]
    pixel_offset = _parse_vector(next(it, None), "world.pixel_offset", 2, path)
    obs_noise_sigma = _parse_vector(next(it, None), "world.obs_noise_sigma", 1, path)[0]
    workspace = _parse_vector(next(it, None), "world.workspace", 4, path)
    walk_delta = _parse_vector(next(it, None), "world.walk_delta", 1, path)[0]
    world_seed = _parse_header_int(next(it, None), "world.seed", path)
    try:
        config = WorldConfig(
            n_points=n_points,
            base_point=tuple(base_point),
            base_tangent=float(base_tangent),
            pixel_scale=float(pixel_scale),
            pixel_offset=tuple(pixel_offset),
            obs_noise_sigma=float(obs_noise_sigma),
            workspace=tuple(workspace),
            walk_delta=float(walk_delta),
            seed=world_seed,
        )
    except ValueError as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc
    poses = []
    centerlines = []
    for _ in range(n_samples):
        r = _parse_vector(next(it, None), "pose", 3, path)
        flat = _parse_vector(next(it, None), "shape", 2 * n_points, path)
        try:
            poses.append(EffectorPose.from_array(r))
        except ValueError as exc:
            raise ModelFormatError(f"{path}: {exc}") from exc
        centerlines.append(flat.reshape(n_points, 2))
    trailing = next(it, None)
    if trailing not in (None, ""):
        raise ModelFormatError(f"{path}: unexpected trailing content")
    try:
        return ShapeDataset(tuple(poses), np.array(centerlines), config, seed)
    except ValueError as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc
