import numpy as np
import pytest

from rodservo import (
    AkfConfig,
    EffectorPose,
    FilterNumericalError,
    FilterState,
    Measurement,
    WorkspaceError,
    WorldConfig,
    build_observation_matrix,
    compute_adaptive_factor,
    current_jacobian,
    forgetting_weight,
    vectorize_jacobian,
)
from rodservo import akf


def _fresh_state(p=6, q=3):
    n = p * q
    return FilterState(
        x_hat=np.zeros(n),
        P=np.eye(n),
        R_hat=1e-2 * np.eye(p),
        Q_hat=1e-4 * np.eye(n),
        k=0,
        p=p,
        q=q,
    )


class TestObservationMatrix:
    def test_small_example(self):
        m = build_observation_matrix([1.0, 2.0, 3.0], 2)
        expected = np.array(
            [
                [1.0, 2.0, 3.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 1.0, 2.0, 3.0],
            ]
        )
        assert np.array_equal(m, expected)

    def test_matches_matrix_product(self, rng):
        for _ in range(20):
            jac = rng.normal(size=(4, 3))
            du = rng.normal(size=3)
            m = build_observation_matrix(du, 4)
            assert np.max(np.abs(m @ vectorize_jacobian(jac) - jac @ du)) < 1e-13

    def test_validation(self):
        with pytest.raises(ValueError):
            build_observation_matrix(np.zeros((2, 2)), 2)
        with pytest.raises(ValueError):
            build_observation_matrix([np.nan, 0.0], 2)
        with pytest.raises(ValueError):
            build_observation_matrix([1.0], 0)


class TestVectorization:
    def test_round_trip(self, rng):
        jac = rng.normal(size=(5, 3))
        state = _fresh_state(p=5)
        state = FilterState(
            x_hat=vectorize_jacobian(jac),
            P=state.P,
            R_hat=1e-2 * np.eye(5),
            Q_hat=state.Q_hat,
            k=0,
            p=5,
            q=3,
        )
        assert np.array_equal(current_jacobian(state), jac)

    def test_row_major_order(self):
        jac = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        assert np.array_equal(vectorize_jacobian(jac), np.arange(1.0, 7.0))

    def test_current_jacobian_returns_copy(self):
        state = _fresh_state(p=2)
        jac = current_jacobian(state)
        jac[0, 0] = 99.0
        assert state.x_hat[0] == 0.0


class TestFilterStateValidation:
    def test_rejects_asymmetric_covariance(self):
        bad = np.eye(6)
        bad[0, 1] = 0.5
        with pytest.raises(ValueError, match="symmetric"):
            FilterState(np.zeros(6), bad, np.eye(2), np.eye(6), 0, 2, 3)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            FilterState(np.zeros(5), np.eye(6), np.eye(2), np.eye(6), 0, 2, 3)

    def test_rejects_non_finite(self):
        x = np.zeros(6)
        x[0] = np.inf
        with pytest.raises(ValueError):
            FilterState(x, np.eye(6), np.eye(2), np.eye(6), 0, 2, 3)


class TestAkfConfigValidation:
    def test_branch_bounds(self):
        with pytest.raises(ValueError):
            AkfConfig(c0=2.0, c1=1.0)
        with pytest.raises(ValueError):
            AkfConfig(b=1.0)
        with pytest.raises(ValueError):
            AkfConfig(alpha_min=0.0)
        with pytest.raises(ValueError):
            AkfConfig(probe_delta=0.0)
        with pytest.raises(ValueError):
            AkfConfig(r0_scale=0.0)


class TestInitialize:
    def test_linear_channel_recovers_vectorized_map(self, rng):
        lin = rng.normal(size=(6, 3))
        config = AkfConfig()
        state = akf.initialize(
            lambda r: lin @ r, EffectorPose(0.5, 0.1, 0.2), config
        )
        assert state.p == 6 and state.q == 3 and state.k == 0
        assert np.allclose(state.x_hat, vectorize_jacobian(lin), atol=1e-9)
        assert np.array_equal(state.P, config.p0_scale * np.eye(18))
        assert np.array_equal(state.R_hat, config.r0_scale * np.eye(6))
        assert np.array_equal(state.Q_hat, config.q0_scale * np.eye(18))

    def test_feature_dimension_inferred(self, rng):
        lin = rng.normal(size=(4, 3))
        state = akf.initialize(
            lambda r: lin @ r, EffectorPose(0.5, 0.0, 0.0), AkfConfig()
        )
        assert state.p == 4
        assert state.x_hat.shape == (12,)

    def test_probing_near_boundary_rejected(self):
        world = WorldConfig()
        pose = EffectorPose(0.2 + 5e-4, 0.0, 0.0)
        with pytest.raises(WorkspaceError):
            akf.initialize(lambda r: r, pose, AkfConfig(), world_config=world)


class TestPredict:
    def test_covariance_grows_by_process_noise(self):
        state = _fresh_state(p=2)
        pred = akf.predict(state)
        assert np.array_equal(pred.x_hat, state.x_hat)
        assert np.array_equal(pred.P, state.P + state.Q_hat)
        assert pred.k == state.k


class TestAdaptiveFactor:
    CONFIG = AkfConfig(c0=1.0, c1=4.0)

    def test_unit_branch(self):
        assert compute_adaptive_factor(0.0, self.CONFIG) == 1.0
        assert compute_adaptive_factor(0.5, self.CONFIG) == 1.0
        assert compute_adaptive_factor(1.0, self.CONFIG) == 1.0

    def test_uses_magnitude(self):
        assert compute_adaptive_factor(-0.5, self.CONFIG) == 1.0

    def test_middle_branch_values(self):
        # (c0/x) * ((c0-x)/(c1-c0))^2 at x = 2: (1/2) * (1/3)^2 = 1/18
        assert compute_adaptive_factor(2.0, self.CONFIG) == pytest.approx(1 / 18)
        assert compute_adaptive_factor(4.0, self.CONFIG) == pytest.approx(1 / 4)

    def test_discontinuous_at_lower_knot(self):
        just_above = compute_adaptive_factor(1.0 + 1e-9, self.CONFIG)
        assert just_above < 1e-17

    def test_middle_branch_rises_toward_upper_knot(self):
        xs = np.linspace(1.0 + 1e-6, 4.0, 200)
        vals = [compute_adaptive_factor(x, self.CONFIG) for x in xs]
        assert np.all(np.diff(vals) >= 0)
        assert max(vals) <= self.CONFIG.c0 / self.CONFIG.c1

    def test_zero_branch(self):
        assert compute_adaptive_factor(4.0 + 1e-12, self.CONFIG) == 0.0
        assert compute_adaptive_factor(100.0, self.CONFIG) == 0.0


class TestForgettingWeight:
    def test_first_weight_is_one(self):
        for b in (0.5, 0.9, 0.95, 0.999):
            assert forgetting_weight(0, b) == 1.0

    def test_limit(self):
        assert forgetting_weight(5000, 0.95) == pytest.approx(0.05, abs=1e-12)

    def test_monotone_decreasing(self):
        ws = [forgetting_weight(k, 0.9) for k in range(100)]
        assert np.all(np.diff(ws) < 0)

    def test_rejects_negative_index(self):
        with pytest.raises(ValueError):
            forgetting_weight(-1, 0.9)


class TestUpdate:
    def test_skip_guard_returns_same_state(self):
        state = _fresh_state()
        m = Measurement(np.array([1e-12, 0.0, 0.0]), np.zeros(6))
        new, diag = akf.update(state, m, AkfConfig())
        assert new is state
        assert diag.skipped
        assert diag.alpha == 1.0 and diag.d == 0.0
        assert np.array_equal(diag.epsilon, np.zeros(6))
        assert diag.trace_p == pytest.approx(np.trace(state.P))

    def test_first_update_closed_form(self):
        # with x0 = 0 and isotropic P the gain has a scalar closed form,
        # and d0 = 1 makes the first noise estimate exactly eps eps^T
        p, q = 2, 3
        state = FilterState(
            np.zeros(p * q), np.eye(p * q), 1e-2 * np.eye(p), 1e-4 * np.eye(p * q),
            0, p, q,
        )
        du = np.array([0.1, -0.05, 0.2])
        ds = np.array([0.3, -0.1])
        config = AkfConfig()
        new, diag = akf.update(state, Measurement(du, ds), config)

        c = 1.0 + 1e-4
        nrm2 = float(du @ du)
        assert diag.alpha == 1.0
        assert diag.d == 1.0
        assert new.k == 1
        assert np.allclose(diag.epsilon, ds, atol=1e-15)
        # K = (c / (c |du|^2 + r0)) M^T, so x_new stacks scaled eps_i du
        scale = c / (c * nrm2 + 1e-2)
        expected = scale * np.concatenate([ds[0] * du, ds[1] * du])
        assert np.allclose(new.x_hat, expected, atol=1e-12)
        assert np.allclose(new.R_hat, np.outer(ds, ds), atol=1e-12)

    def test_gain_uses_previous_noise_estimate(self):
        # the measurement-noise estimate in the gain must be the value held
        # before this update; inflate R_hat and watch the step shrink
        du = np.array([0.1, -0.05, 0.2])
        ds = np.array([0.3, -0.1])
        small = FilterState(
            np.zeros(6), np.eye(6), 1e-4 * np.eye(2), 1e-4 * np.eye(6), 0, 2, 3
        )
        large = FilterState(
            np.zeros(6), np.eye(6), 10.0 * np.eye(2), 1e-4 * np.eye(6), 0, 2, 3
        )
        step_small = akf.update(small, Measurement(du, ds), AkfConfig())[0].x_hat
        step_large = akf.update(large, Measurement(du, ds), AkfConfig())[0].x_hat
        assert np.linalg.norm(step_large) < 0.1 * np.linalg.norm(step_small)

    def test_update_counter_and_forgetting_schedule(self, rng):
        config = AkfConfig()
        state = _fresh_state()
        for expected_k in range(5):
            du = rng.uniform(-0.2, 0.2, 3)
            ds = rng.normal(size=6)
            state, diag = akf.update(state, Measurement(du, ds), config)
            assert diag.d == pytest.approx(forgetting_weight(expected_k, config.b))
        assert state.k == 5

    def test_covariances_stay_symmetric_psd(self, rng):
        config = AkfConfig()
        state = _fresh_state()
        lin = rng.normal(size=(6, 3))
        for _ in range(50):
            du = rng.uniform(-0.2, 0.2, 3)
            ds = lin @ du + rng.normal(0, 0.02, 6)
            state, diag = akf.update(state, Measurement(du, ds), config)
            for mat in (state.P, state.R_hat, state.Q_hat):
                assert np.array_equal(mat, mat.T)
                floor = -1e-9 * max(1.0, float(np.trace(mat)))
                assert np.linalg.eigvalsh(mat)[0] >= floor
            assert config.alpha_min <= diag.alpha <= 1.0

    def test_noiseless_convergence_single_seed(self):
        rng = np.random.default_rng(0)
        lin = rng.normal(size=(6, 3))
        config = AkfConfig()
        state = _fresh_state()
        for _ in range(200):
            du = rng.uniform(-0.05, 0.05, 3)
            state, _ = akf.update(state, Measurement(du, lin @ du), config)
        rel = np.linalg.norm(state.x_hat - lin.ravel()) / np.linalg.norm(lin.ravel())
        assert rel < 1e-2

    def test_error_shrinks_as_data_accumulates(self):
        # under mild noise the estimate after 500 updates should beat the
        # estimate after 10 for nearly every draw of the system
        def trial(seed):
            rng = np.random.default_rng(seed)
            lin = rng.normal(size=(6, 3))
            config = AkfConfig()
            state = _fresh_state()
            err10 = None
            for k in range(500):
                du = rng.uniform(-0.2, 0.2, 3)
                ds = lin @ du + rng.normal(0, 0.002, 6)
                state, _ = akf.update(state, Measurement(du, ds), config)
                if k == 9:
                    err10 = np.linalg.norm(state.x_hat - lin.ravel())
            return np.linalg.norm(state.x_hat - lin.ravel()) < err10

        wins = sum(trial(seed) for seed in range(30))
        assert wins >= 26

    def test_singular_innovation_reports_diagnostics(self):
        state = FilterState(
            np.zeros(6), np.zeros((6, 6)), np.zeros((2, 2)), np.zeros((6, 6)), 0, 2, 3
        )
        m = Measurement(np.array([0.1, 0.0, 0.0]), np.array([1.0, 0.0]))
        with pytest.raises(FilterNumericalError) as info:
            akf.update(state, m, AkfConfig())
        assert info.value.diagnostics["k"] == 0
        assert "trace_innovation" in info.value.diagnostics

    def test_dimension_mismatch_rejected(self):
        state = _fresh_state(p=2)
        with pytest.raises(ValueError, match="do not match"):
            akf.update(state, Measurement(np.zeros(2), np.zeros(2)), AkfConfig())

    def test_measurement_validation(self):
        with pytest.raises(ValueError):
            Measurement(np.zeros((3, 1)), np.zeros(2))
        with pytest.raises(ValueError):
            Measurement(np.zeros(3), np.array([np.nan, 0.0]))
