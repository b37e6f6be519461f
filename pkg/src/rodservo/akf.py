"""Adaptive Kalman filtering of the deformation Jacobian.

The unknown p x q Jacobian is tracked through its row-major vectorization
x = vec(J). A pose increment du turns one control step into a linear
observation ds = M x with M block-diagonal in du^T, so the filter sees
the Jacobian as a slowly drifting constant. Two departures from a plain
Kalman filter: the prior covariance is divided by an adaptive factor
alpha computed from the normalized residual statistic (history is
down-weighted when the residual outgrows what the covariance explains),
and the noise covariances R and Q are re-estimated online with a
forgetting-factor schedule d_k = (1-b)/(1-b^(k+1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import FilterNumericalError, WorkspaceError
from .world import EffectorPose, WorldConfig

Q_DIM = 3


@dataclass(frozen=True)
class AkfConfig:
    """Filter tuning constants.

    c0/c1 bound the adaptive-factor branches (practical ranges [1, 1.5]
    and [3, 8]); b is the forgetting factor of the noise recursions;
    alpha_min keeps the gain finite where the raw factor reaches zero;
    du_min guards against untrustworthy near-zero-motion updates;
    probe_delta is the finite-difference step of the probing initializer.
    """

    c0: float = 1.2
    c1: float = 5.0
    b: float = 0.95
    alpha_min: float = 1e-3
    p0_scale: float = 1.0
    r0_scale: float = 1e-2
    q0_scale: float = 1e-4
    du_min: float = 1e-9
    probe_delta: float = 1e-3
    use_unbiased_r: bool = False

    def __post_init__(self):
        if not (0 < self.c0 < self.c1):
            raise ValueError("need 0 < c0 < c1")
        if not (0 < self.b < 1):
            raise ValueError("forgetting factor b must lie in (0, 1)")
        if not (0 < self.alpha_min <= 1):
            raise ValueError("alpha_min must lie in (0, 1]")
        if self.p0_scale <= 0 or self.r0_scale <= 0 or self.q0_scale <= 0:
            raise ValueError("covariance scales must be positive")
        if self.du_min < 0:
            raise ValueError("du_min must be >= 0")
        if self.probe_delta <= 0:
            raise ValueError("probe_delta must be positive")


@dataclass(frozen=True)
class FilterState:
    """Filter state; k counts completed measurement updates."""

    x_hat: np.ndarray
    P: np.ndarray
    R_hat: np.ndarray
    Q_hat: np.ndarray
    k: int
    p: int
    q: int

    def __post_init__(self):
        x_hat = np.asarray(self.x_hat, dtype=float)
        P = np.asarray(self.P, dtype=float)
        R_hat = np.asarray(self.R_hat, dtype=float)
        Q_hat = np.asarray(self.Q_hat, dtype=float)
        for name, arr in (("x_hat", x_hat), ("P", P), ("R_hat", R_hat), ("Q_hat", Q_hat)):
            object.__setattr__(self, name, arr)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        n = self.p * self.q
        if x_hat.shape != (n,):
            raise ValueError(f"x_hat must have shape ({n},), got {x_hat.shape}")
        if P.shape != (n, n) or Q_hat.shape != (n, n) or R_hat.shape != (self.p, self.p):
            raise ValueError("covariance shapes inconsistent with (p, q)")
        for name, arr in (("P", P), ("R_hat", R_hat), ("Q_hat", Q_hat)):
            if np.max(np.abs(arr - arr.T)) > 1e-10:
                raise ValueError(f"{name} is not symmetric")


@dataclass(frozen=True)
class Measurement:
    """One control step: applied pose increment du and observed feature increment ds."""

    du: np.ndarray
    ds: np.ndarray

    def __post_init__(self):
        du = np.asarray(self.du, dtype=float)
        ds = np.asarray(self.ds, dtype=float)
        object.__setattr__(self, "du", du)
        object.__setattr__(self, "ds", ds)
        if du.ndim != 1 or ds.ndim != 1:
            raise ValueError("du and ds must be vectors")
        if not (np.all(np.isfinite(du)) and np.all(np.isfinite(ds))):
            raise ValueError("measurement entries must be finite")


@dataclass(frozen=True)
class UpdateDiagnostics:
    epsilon: np.ndarray
    delta_eps: float
    alpha: float
    d: float
    trace_p: float
    skipped: bool


def build_observation_matrix(du, p: int) -> np.ndarray:
    """Observation matrix M with du^T repeated block-diagonally p times.

    Satisfies M @ vec(J) == J @ du for the row-major vectorization.
    """
    du = np.asarray(du, dtype=float)
    if du.ndim != 1:
        raise ValueError("du must be a vector")
    if not np.all(np.isfinite(du)):
        raise ValueError("du must be finite")
    if p < 1:
        raise ValueError("p must be >= 1")
    return np.kron(np.eye(p), du)


def current_jacobian(state: FilterState) -> np.ndarray:
    """The p x q Jacobian estimate; row i is x_hat[i*q : (i+1)*q]."""
    return state.x_hat.reshape(state.p, state.q).copy()


def vectorize_jacobian(jacobian) -> np.ndarray:
    """Row-major vectorization, the inverse of current_jacobian."""
    j = np.asarray(jacobian, dtype=float)
    if j.ndim != 2:
        raise ValueError("jacobian must be a matrix")
    return j.ravel().copy()


def initialize(
    shape_fn: Callable[[np.ndarray], np.ndarray],
    pose: EffectorPose,
    config: AkfConfig,
    world_config: Optional[WorldConfig] = None,
) -> FilterState:
    """Build the initial state by central-difference probing around a pose.

    ``shape_fn`` is the observation channel (pose array to feature vector);
    each pose axis is probed at +/- probe_delta, costing 2q evaluations.
    When ``world_config`` is given, probing that would leave the workspace
    raises a workspace violation before any move is made.
    """
    h = config.probe_delta
    if world_config is not None and not world_config.contains(pose.x, pose.y, margin=h):
        raise WorkspaceError(
            f"probing with probe_delta={h:g} would exit the workspace "
            f"from ({pose.x:.6g}, {pose.y:.6g})"
        )
    r = pose.as_array()
    cols = []
    for j in range(Q_DIM):
        e = np.zeros(Q_DIM)
        e[j] = h
        s_plus = np.asarray(shape_fn(r + e), dtype=float)
        s_minus = np.asarray(shape_fn(r - e), dtype=float)
        cols.append((s_plus - s_minus) / (2 * h))
    jacobian = np.column_stack(cols)
    p = jacobian.shape[0]
    n = p * Q_DIM
    return FilterState(
        x_hat=vectorize_jacobian(jacobian),
        P=config.p0_scale * np.eye(n),
        R_hat=config.r0_scale * np.eye(p),
        Q_hat=config.q0_scale * np.eye(n),
        k=0,
        p=p,
        q=Q_DIM,
    )


def predict(state: FilterState) -> FilterState:
    """Time update under an identity transition: x unchanged, P grows by Q_hat."""
    return replace(state, P=state.P + state.Q_hat)


def compute_adaptive_factor(delta_eps: float, config: AkfConfig) -> float:
    """Raw piecewise adaptive factor, before the alpha_min clamp.

    1 up to c0, then (c0/x) * ((c0 - x) / (c1 - c0))^2 up to c1, then 0.
    The middle branch starts near zero just above c0, so the factor is
    deliberately discontinuous at that boundary.
    """
    x = abs(delta_eps)
    if x <= config.c0:
        return 1.0
    if x <= config.c1:
        return (config.c0 / x) * ((config.c0 - x) / (config.c1 - config.c0)) ** 2
    return 0.0


def forgetting_weight(k: int, b: float) -> float:
    """Noise-recursion weight d_k = (1-b)/(1-b^(k+1)); d_0 = 1, limit 1-b."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return (1.0 - b) / (1.0 - b ** (k + 1))


def _symmetrize_floor(x: np.ndarray) -> np.ndarray:
    """Symmetrize and, if the minimum eigenvalue is negative, add jitter to zero it."""
    x = 0.5 * (x + x.T)
    lo = float(np.linalg.eigvalsh(x)[0])
    if lo < 0:
        x = x + (-lo) * np.eye(x.shape[0])
    return x


def update(
    state: FilterState, m: Measurement, config: AkfConfig
) -> Tuple[FilterState, UpdateDiagnostics]:
    """One measurement update; returns the new state and per-step diagnostics.

    Steps with ``norm(du) < du_min`` are skipped: the returned state is the
    input object and the diagnostics carry the skip flag.
    """
    if m.du.shape != (state.q,) or m.ds.shape != (state.p,):
        raise ValueError(
            f"measurement dims {m.du.shape}/{m.ds.shape} do not match filter ({state.p}, {state.q})"
        )
    if float(np.linalg.norm(m.du)) < config.du_min:
        diag = UpdateDiagnostics(
            epsilon=np.zeros(state.p),
            delta_eps=0.0,
            alpha=1.0,
            d=0.0,
            trace_p=float(np.trace(state.P)),
            skipped=True,
        )
        return state, diag

    pred = predict(state)
    obs = build_observation_matrix(m.du, state.p)
    epsilon = m.ds - obs @ pred.x_hat
    residual_cov = obs @ pred.P @ obs.T
    trace_res = max(float(np.trace(residual_cov)), 1e-12)
    delta_eps = math.sqrt(float(epsilon @ epsilon) / trace_res)
    alpha = min(max(compute_adaptive_factor(delta_eps, config), config.alpha_min), 1.0)

    innovation = residual_cov / alpha + state.R_hat
    cross = pred.P @ obs.T / alpha
    try:
        gain = np.linalg.solve(innovation, cross.T).T
    except np.linalg.LinAlgError as exc:
        raise FilterNumericalError(
            "innovation matrix is singular",
            diagnostics={
                "k": state.k,
                "delta_eps": delta_eps,
                "alpha": alpha,
                "trace_innovation": float(np.trace(innovation)),
            },
        ) from exc
    x_new = pred.x_hat + gain @ epsilon
    if not np.all(np.isfinite(x_new)):
        raise FilterNumericalError(
            "state update produced non-finite entries",
            diagnostics={"k": state.k, "delta_eps": delta_eps, "alpha": alpha},
        )
    n = state.p * state.q
    p_new = _symmetrize_floor((np.eye(n) - gain @ obs) @ pred.P / alpha)

    d = forgetting_weight(state.k, config.b)
    eps_outer = np.outer(epsilon, epsilon)
    r_target = eps_outer - residual_cov if config.use_unbiased_r else eps_outer
    r_new = _symmetrize_floor((1.0 - d) * state.R_hat + d * r_target)
    q_new = _symmetrize_floor(
        (1.0 - d) * state.Q_hat + d * (gain @ eps_outer @ gain.T + p_new - pred.P)
    )

    new_state = FilterState(
        x_hat=x_new, P=p_new, R_hat=r_new, Q_hat=q_new, k=state.k + 1, p=state.p, q=state.q
    )
    diag = UpdateDiagnostics(
        epsilon=epsilon,
        delta_eps=delta_eps,
        alpha=alpha,
        d=d,
        trace_p=float(np.trace(p_new)),
        skipped=False,
    )
    return new_state, diag
