"""Synthetic planar rod world.

The rod is clamped at a fixed base (position plus tangent direction) and
held at its other end by the robot effector. Its centerline is a cubic
Hermite curve whose far endpoint and end tangent follow the effector
pose (x, y, theta). Sampling the curve at N uniform parameter values and
applying an affine pixel map gives the camera-style observation the rest
of the package consumes. Both tangents are scaled by the base-to-effector
chord length, which keeps the curve smooth in the pose as long as the
workspace excludes the base point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import (
    DegenerateCurveError,
    InvalidCommandError,
    StencilError,
    WorkspaceError,
)


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    t = math.remainder(theta, math.tau)
    if t <= -math.pi:
        t += math.tau
    return t


@dataclass(frozen=True)
class EffectorPose:
    """Planar effector pose; theta is normalized to (-pi, pi] on write."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError("pose components must be finite")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta], dtype=float)

    @classmethod
    def from_array(cls, r) -> "EffectorPose":
        r = np.asarray(r, dtype=float)
        if r.shape != (3,):
            raise ValueError(f"pose array must have shape (3,), got {r.shape}")
        return cls(float(r[0]), float(r[1]), float(r[2]))


@dataclass(frozen=True)
class WorldConfig:
    """Static parameters of one rod world instance.

    ``workspace`` is (x_min, x_max, y_min, y_max) in meters and bounds the
    effector position only; theta is unconstrained. ``walk_delta`` is the
    per-component step bound used by dataset-generation random walks.
    """

    n_points: int = 100
    base_point: Tuple[float, float] = (0.0, 0.0)
    base_tangent: float = 0.0
    pixel_scale: float = 600.0
    pixel_offset: Tuple[float, float] = (80.0, 240.0)
    obs_noise_sigma: float = 0.0
    workspace: Tuple[float, float, float, float] = (0.2, 0.8, -0.3, 0.3)
    walk_delta: float = 0.02
    seed: int = 7

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("n_points must be >= 2")
        if self.pixel_scale <= 0:
            raise ValueError("pixel_scale must be positive")
        if self.obs_noise_sigma < 0:
            raise ValueError("obs_noise_sigma must be >= 0")
        x_min, x_max, y_min, y_max = self.workspace
        if not (x_min < x_max and y_min < y_max):
            raise ValueError("workspace bounds must satisfy x_min < x_max and y_min < y_max")
        if self.walk_delta <= 0:
            raise ValueError("walk_delta must be positive")

    def contains(self, x: float, y: float, margin: float = 0.0) -> bool:
        x_min, x_max, y_min, y_max = self.workspace
        return (x_min + margin <= x <= x_max - margin) and (y_min + margin <= y <= y_max - margin)

    def center_pose(self) -> EffectorPose:
        x_min, x_max, y_min, y_max = self.workspace
        return EffectorPose(0.5 * (x_min + x_max), 0.5 * (y_min + y_max), 0.0)


def render_centerline(
    pose: EffectorPose,
    config: WorldConfig,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Render the rod centerline for a pose, as an (N, 2) pixel array.

    Deterministic when ``rng`` is None (noise off). With ``rng`` given and
    ``config.obs_noise_sigma > 0``, i.i.d. zero-mean Gaussian pixel noise is
    drawn from the generator, advancing its stream.
    """
    if not config.contains(pose.x, pose.y):
        raise WorkspaceError(
            f"pose ({pose.x:.6g}, {pose.y:.6g}) outside workspace {config.workspace}"
        )

    p0 = np.asarray(config.base_point, dtype=float)
    p1 = np.array([pose.x, pose.y], dtype=float)
    chord = float(np.linalg.norm(p1 - p0))
    m0 = chord * np.array([math.cos(config.base_tangent), math.sin(config.base_tangent)])
    m1 = chord * np.array([math.cos(pose.theta), math.sin(pose.theta)])

    t = np.linspace(0.0, 1.0, config.n_points)
    t2 = t * t
    t3 = t2 * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + t
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    points = (
        np.outer(h00, p0) + np.outer(h10, m0) + np.outer(h01, p1) + np.outer(h11, m1)
    )

    if not np.all(np.any(points[1:] != points[:-1], axis=1)):
        raise DegenerateCurveError("consecutive centerline points coincide")

    pixels = np.asarray(config.pixel_offset, dtype=float) + config.pixel_scale * points
    if rng is not None and config.obs_noise_sigma > 0:
        pixels = pixels + rng.normal(0.0, config.obs_noise_sigma, size=pixels.shape)
    return pixels


def apply_command(
    pose: EffectorPose, du, config: WorldConfig
) -> Tuple[EffectorPose, bool]:
    """Integrate a velocity command exactly; clamp (x, y) to the workspace.

    Returns the new pose and a flag that is True when clamping occurred.
    """
    du = np.asarray(du, dtype=float)
    if du.shape != (3,) or not np.all(np.isfinite(du)):
        raise InvalidCommandError(f"command must be a finite 3-vector, got {du!r}")
    x = pose.x + du[0]
    y = pose.y + du[1]
    x_min, x_max, y_min, y_max = config.workspace
    x_c = min(max(x, x_min), x_max)
    y_c = min(max(y, y_min), y_max)
    clamped = (x_c != x) or (y_c != y)
    return EffectorPose(x_c, y_c, pose.theta + du[2]), clamped


def oracle_jacobian(
    pose: EffectorPose,
    shape_fn: Callable[[np.ndarray], np.ndarray],
    config: WorldConfig,
    h: float = 1e-6,
) -> np.ndarray:
    """Ground-truth deformation Jacobian by central finite differences.

    ``shape_fn`` maps a pose array (3,) to a feature vector, typically the
    noise-free render-then-extract composition (see
    ``features.pose_feature_fn``). Column j is
    (shape_fn(r + h e_j) - shape_fn(r - h e_j)) / (2 h).
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    if not config.contains(pose.x, pose.y, margin=h):
        raise StencilError(
            f"pose ({pose.x:.6g}, {pose.y:.6g}) closer than h={h:g} to the workspace boundary"
        )
    r = pose.as_array()
    cols = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        cols.append((np.asarray(shape_fn(r + e), dtype=float)
                     - np.asarray(shape_fn(r - e), dtype=float)) / (2 * h))
    return np.column_stack(cols)
