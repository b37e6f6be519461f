import math

import numpy as np
import pytest

from rodservo import (
    DegenerateCurveError,
    EffectorPose,
    InvalidCommandError,
    StencilError,
    WorkspaceError,
    WorldConfig,
    apply_command,
    oracle_jacobian,
    pose_feature_fn,
    render_centerline,
    wrap_angle,
)


class TestWrapAngle:
    def test_identity_inside_range(self):
        for theta in (0.0, 0.5, -0.5, 3.0, -3.0):
            assert wrap_angle(theta) == theta

    def test_boundary_is_half_open(self):
        # range is (-pi, pi]: pi stays, -pi maps to pi
        assert wrap_angle(math.pi) == pytest.approx(math.pi)
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)
        assert wrap_angle(math.pi) > 0
        assert wrap_angle(-math.pi) > 0

    def test_multiple_turns(self):
        assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
        assert wrap_angle(2 * math.pi) == pytest.approx(0.0, abs=1e-15)
        assert wrap_angle(-7 * math.pi / 2) == pytest.approx(math.pi / 2)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        for theta in rng.uniform(-20, 20, 200):
            w = wrap_angle(theta)
            assert -math.pi < w <= math.pi
            assert wrap_angle(w) == w


class TestEffectorPose:
    def test_theta_normalized_on_construction(self):
        pose = EffectorPose(0.5, 0.1, 3 * math.pi)
        assert pose.theta == pytest.approx(math.pi)

    def test_array_round_trip(self):
        pose = EffectorPose(0.4, -0.2, 1.1)
        back = EffectorPose.from_array(pose.as_array())
        assert back == pose

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            EffectorPose(math.nan, 0.0, 0.0)
        with pytest.raises(ValueError):
            EffectorPose(0.0, math.inf, 0.0)

    def test_from_array_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            EffectorPose.from_array(np.zeros(4))


class TestWorldConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            WorldConfig(n_points=1)
        with pytest.raises(ValueError):
            WorldConfig(pixel_scale=0.0)
        with pytest.raises(ValueError):
            WorldConfig(obs_noise_sigma=-0.1)
        with pytest.raises(ValueError):
            WorldConfig(workspace=(0.5, 0.2, -0.3, 0.3))
        with pytest.raises(ValueError):
            WorldConfig(walk_delta=0.0)

    def test_contains_with_margin(self, world):
        assert world.contains(0.5, 0.0)
        assert world.contains(0.2, -0.3)
        assert not world.contains(0.19, 0.0)
        assert not world.contains(0.2, 0.0, margin=1e-6)
        assert world.contains(0.21, 0.0, margin=0.005)
        assert not world.contains(0.21, 0.0, margin=0.02)

    def test_center_pose(self, world):
        pose = world.center_pose()
        assert (pose.x, pose.y, pose.theta) == (0.5, 0.0, 0.0)


class TestRenderCenterline:
    def test_endpoints_exact(self, world):
        pose = EffectorPose(0.55, 0.12, 0.4)
        curve = render_centerline(pose, world)
        assert curve.shape == (world.n_points, 2)
        offset = np.asarray(world.pixel_offset)
        start = offset + world.pixel_scale * np.asarray(world.base_point)
        end = offset + world.pixel_scale * np.array([pose.x, pose.y])
        assert np.array_equal(curve[0], start)
        assert np.array_equal(curve[-1], end)

    def test_deterministic_without_noise(self, world):
        pose = EffectorPose(0.6, -0.1, -0.7)
        a = render_centerline(pose, world)
        b = render_centerline(pose, world)
        assert np.array_equal(a, b)

    def test_continuous_in_pose(self, world):
        pose = EffectorPose(0.5, 0.05, 0.3)
        nudged = EffectorPose(0.5 + 1e-9, 0.05 - 1e-9, 0.3 + 1e-9)
        diff = render_centerline(nudged, world) - render_centerline(pose, world)
        assert np.max(np.abs(diff)) < 1e-5

    def test_noise_uses_passed_generator(self):
        config = WorldConfig(obs_noise_sigma=0.5)
        pose = EffectorPose(0.5, 0.0, 0.0)
        a = render_centerline(pose, config, np.random.default_rng(5))
        b = render_centerline(pose, config, np.random.default_rng(5))
        clean = render_centerline(pose, config)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, clean)
        rng = np.random.default_rng(5)
        first = render_centerline(pose, config, rng)
        second = render_centerline(pose, config, rng)
        assert not np.array_equal(first, second)

    def test_zero_sigma_ignores_generator(self, world):
        pose = EffectorPose(0.5, 0.0, 0.0)
        noisy_path = render_centerline(pose, world, np.random.default_rng(5))
        assert np.array_equal(noisy_path, render_centerline(pose, world))

    def test_outside_workspace_raises(self, world):
        with pytest.raises(WorkspaceError):
            render_centerline(EffectorPose(0.1, 0.0, 0.0), world)

    def test_pose_at_base_point_is_degenerate(self):
        config = WorldConfig(workspace=(-0.1, 0.8, -0.3, 0.3))
        with pytest.raises(DegenerateCurveError):
            render_centerline(EffectorPose(0.0, 0.0, 0.0), config)


class TestApplyCommand:
    def test_zero_command_is_identity(self, world):
        pose = EffectorPose(0.5, 0.1, 0.3)
        new, clamped = apply_command(pose, np.zeros(3), world)
        assert new == pose
        assert not clamped

    def test_in_bounds_move_is_exact(self, world):
        pose = EffectorPose(0.5, 0.1, 0.3)
        new, clamped = apply_command(pose, [0.02, -0.03, 0.1], world)
        assert new.x == 0.5 + 0.02
        assert new.y == 0.1 + -0.03
        assert new.theta == pytest.approx(0.4)
        assert not clamped

    def test_theta_wraps(self, world):
        pose = EffectorPose(0.5, 0.0, math.pi - 0.1)
        new, _ = apply_command(pose, [0.0, 0.0, 0.2], world)
        assert new.theta == pytest.approx(-math.pi + 0.1)

    def test_position_clamped_at_boundary(self, world):
        pose = EffectorPose(0.79, 0.29, 0.0)
        new, clamped = apply_command(pose, [0.05, 0.05, 0.0], world)
        assert (new.x, new.y) == (0.8, 0.3)
        assert clamped

    def test_rejects_bad_commands(self, world):
        pose = EffectorPose(0.5, 0.0, 0.0)
        with pytest.raises(InvalidCommandError):
            apply_command(pose, [0.0, 0.0], world)
        with pytest.raises(InvalidCommandError):
            apply_command(pose, [0.0, math.nan, 0.0], world)


class TestOracleJacobian:
    def test_zero_map(self, world):
        jac = oracle_jacobian(
            EffectorPose(0.5, 0.0, 0.0), lambda r: np.zeros(4), world
        )
        assert np.array_equal(jac, np.zeros((4, 3)))

    def test_recovers_linear_map(self, world):
        rng = np.random.default_rng(2)
        lin = rng.uniform(-1, 1, size=(5, 3))
        jac = oracle_jacobian(
            EffectorPose(0.5, 0.1, 0.3), lambda r: lin @ r, world
        )
        assert np.max(np.abs(jac - lin)) < 1e-8

    def test_full_rank_on_rod_features(self, world, model):
        shape_fn = pose_feature_fn(model, world)
        jac = oracle_jacobian(world.center_pose(), shape_fn, world)
        assert jac.shape == (model.p, 3)
        singvals = np.linalg.svd(jac, compute_uv=False)
        assert singvals[-1] > 1.0

    def test_consistent_across_step_sizes(self, world, model):
        shape_fn = pose_feature_fn(model, world)
        pose = EffectorPose(0.45, -0.08, 0.6)
        coarse = oracle_jacobian(pose, shape_fn, world, h=1e-5)
        fine = oracle_jacobian(pose, shape_fn, world, h=1e-6)
        rel = np.linalg.norm(coarse - fine) / np.linalg.norm(fine)
        assert rel < 1e-6

    def test_boundary_pose_raises_stencil_error(self, world):
        pose = EffectorPose(0.2 + 5e-7, 0.0, 0.0)
        with pytest.raises(StencilError):
            oracle_jacobian(pose, lambda r: r, world, h=1e-6)

    def test_rejects_non_positive_step(self, world):
        with pytest.raises(ValueError):
            oracle_jacobian(EffectorPose(0.5, 0.0, 0.0), lambda r: r, world, h=0.0)
