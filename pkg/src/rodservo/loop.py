"""Closed-loop servoing: world + features + filter + controller.

One run proceeds as: load the feature model, render the target, probe to
initialize the Jacobian filter, then step until the feature error drops
below stop_tol or max_steps is reached. Each step solves the control
objective with the latest completed Jacobian estimate (one step old by
construction), saturates and applies the command, observes the result
and feeds the applied increment back into the filter.

Logs are plain CSV with floats at 17 significant digits so repeated runs
at the same seed are byte-identical; wall time lives only in the summary
file, which is excluded from that guarantee.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import akf as akf_mod
from .config import RunConfig, config_echo_lines
from .controller import ControllerContext, objective, saturate, solve_command
from .errors import ConfigError, FilterNumericalError
from .features import (
    FeatureModel,
    extract_feature,
    load_model,
    reconstruct_centerline,
)
from .world import EffectorPose, apply_command, render_centerline, wrap_angle


@dataclass(frozen=True)
class StepRecord:
    """Everything logged for one control step; pose and s are post-step."""

    k: int
    pose: EffectorPose
    u: np.ndarray
    s: np.ndarray
    t1: float
    alpha: float
    delta_eps: float
    trace_p: float
    q_value: float
    clamped: bool
    skipped: bool


@dataclass(frozen=True)
class RunSummary:
    steps_taken: int
    final_t1: float
    converged: bool
    initial_t1: float
    wall_time: float
    config: RunConfig


def metric_t1(s, s_star) -> float:
    """Deformation error: Euclidean norm of the feature difference."""
    s = np.asarray(s, dtype=float)
    s_star = np.asarray(s_star, dtype=float)
    if s.shape != s_star.shape:
        raise ValueError(f"feature shapes differ: {s.shape} vs {s_star.shape}")
    return float(np.linalg.norm(s_star - s))


def summary_path(log_path) -> Path:
    p = Path(log_path)
    return p.with_name(p.stem + "_summary.txt")


def shapes_path(log_path) -> Path:
    p = Path(log_path)
    return p.with_name(p.stem + "_shapes.csv")


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_step_log(path, records: Sequence[StepRecord], p: int) -> None:
    header = (
        ["k", "pose_x", "pose_y", "pose_theta", "u_x", "u_y", "u_theta"]
        + [f"s_{i + 1}" for i in range(p)]
        + ["t1", "alpha", "delta_eps", "trace_p", "q_value", "clamped", "skipped"]
    )
    lines = [",".join(header)]
    for r in records:
        fields = (
            [str(r.k), _fmt(r.pose.x), _fmt(r.pose.y), _fmt(r.pose.theta)]
            + [_fmt(v) for v in r.u]
            + [_fmt(v) for v in r.s]
            + [_fmt(r.t1), _fmt(r.alpha), _fmt(r.delta_eps), _fmt(r.trace_p), _fmt(r.q_value)]
            + [str(int(r.clamped)), str(int(r.skipped))]
        )
        lines.append(",".join(fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_step_log(path) -> Dict[str, np.ndarray]:
    """Read a step log back as a column-name-to-array mapping."""
    text = Path(path).read_text(encoding="ascii")
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise ValueError(f"{path}: empty log file")
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"{path}: row width does not match header")
    columns: Dict[str, np.ndarray] = {}
    for i, name in enumerate(header):
        vals = [row[i] for row in rows]
        if name in ("k", "clamped", "skipped"):
            columns[name] = np.array([int(v) for v in vals])
        else:
            columns[name] = np.array([float(v) for v in vals])
    return columns


def write_summary(path, summary: RunSummary) -> None:
    lines = [
        f"steps_taken = {summary.steps_taken}",
        "initial_t1 = " + _fmt(summary.initial_t1),
        "final_t1 = " + _fmt(summary.final_t1),
        f"converged = {'true' if summary.converged else 'false'}",
        "wall_time = %.6f" % summary.wall_time,
    ]
    lines.extend("config." + ln for ln in config_echo_lines(summary.config))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def write_shapes_dump(path, entries: Sequence[Tuple[int, np.ndarray]], n_points: int) -> None:
    """Centerline dump: k = -1 target, k = 0 initial, k >= 1 per step."""
    header = ["k"]
    for i in range(n_points):
        header.extend([f"x{i}", f"y{i}"])
    lines = [",".join(header)]
    for k, centerline in entries:
        lines.append(",".join([str(k)] + [_fmt(v) for v in np.asarray(centerline).ravel()]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _target_feature(config: RunConfig, model: FeatureModel):
    if config.target_pose is not None:
        target_curve = render_centerline(config.target_pose, config.world)
        return extract_feature(target_curve, model), target_curve
    s_star = np.asarray(config.target_feature, dtype=float)
    if s_star.shape != (model.p,):
        raise ConfigError(
            f"target feature has length {s_star.size}, model expects {model.p}"
        )
    return s_star, reconstruct_centerline(s_star, model)


def run_servo(
    config: RunConfig,
    jacobian_sink: Optional[List[Tuple[int, np.ndarray, np.ndarray]]] = None,
    dump_shapes: bool = False,
) -> RunSummary:
    """Execute one closed-loop run; writes log files when log_path is set.

    ``jacobian_sink``, when given, receives (k, pose array, Jacobian
    estimate) after every filter update, which is how the estimate can be
    compared against a finite-difference oracle along the trajectory.
    """
    world = config.world
    model = load_model(config.feature_model_path)
    if model.n_points != world.n_points:
        raise ConfigError(
            f"feature model n_points = {model.n_points} does not match world "
            f"n_points = {world.n_points}"
        )
    if dump_shapes and config.log_path is None:
        raise ConfigError("shape dumping requires run.log_path")

    s_star, target_curve = _target_feature(config, model)
    rng = np.random.default_rng(config.seed)

    def observe_curve(pose: EffectorPose) -> np.ndarray:
        return render_centerline(pose, world, rng)

    def observe(pose: EffectorPose) -> np.ndarray:
        return extract_feature(observe_curve(pose), model)

    def probe_fn(r: np.ndarray) -> np.ndarray:
        return observe(EffectorPose.from_array(r))

    t_start = time.perf_counter()
    state = akf_mod.initialize(probe_fn, config.start_pose, config.akf, world_config=world)

    pose = config.start_pose
    s = observe(pose)
    initial_t1 = metric_t1(s, s_star)
    u_prev = np.zeros(3)
    j_prev = akf_mod.current_jacobian(state)

    records: List[StepRecord] = []
    shape_entries: List[Tuple[int, np.ndarray]] = []
    if dump_shapes:
        shape_entries.append((-1, target_curve))
        shape_entries.append((0, render_centerline(pose, world)))

    for k in range(1, config.max_steps + 1):
        j_k = akf_mod.current_jacobian(state)
        ctx = ControllerContext(
            s_prev=s,
            s_star=s_star,
            r_prev=pose.as_array(),
            u_prev=u_prev,
            j_k=j_k,
            j_prev=j_prev,
        )
        u_raw, _ = solve_command(ctx, config.weights)
        u = saturate(u_raw, config.u_max)
        q_value = objective(u, ctx, config.weights)

        new_pose, clamped = apply_command(pose, u, world)
        s_new = observe(new_pose)
        du_applied = np.array(
            [
                new_pose.x - pose.x,
                new_pose.y - pose.y,
                wrap_angle(new_pose.theta - pose.theta),
            ]
        )
        ds = s_new - s
        try:
            state, diag = akf_mod.update(
                state, akf_mod.Measurement(du_applied, ds), config.akf
            )
        except FilterNumericalError as exc:
            raise FilterNumericalError(
                f"step {k}: {exc}", diagnostics=exc.diagnostics
            ) from exc

        t1 = metric_t1(s_new, s_star)
        records.append(
            StepRecord(
                k=k,
                pose=new_pose,
                u=u,
                s=s_new,
                t1=t1,
                alpha=diag.alpha,
                delta_eps=diag.delta_eps,
                trace_p=diag.trace_p,
                q_value=q_value,
                clamped=clamped,
                skipped=diag.skipped,
            )
        )
        if jacobian_sink is not None:
            jacobian_sink.append((k, new_pose.as_array(), akf_mod.current_jacobian(state)))
        if dump_shapes:
            shape_entries.append((k, render_centerline(new_pose, world)))

        j_prev = j_k
        u_prev = u
        pose = new_pose
        s = s_new
        if t1 < config.stop_tol:
            break

    wall_time = time.perf_counter() - t_start
    final_t1 = records[-1].t1
    summary = RunSummary(
        steps_taken=records[-1].k,
        final_t1=final_t1,
        converged=final_t1 < config.stop_tol,
        initial_t1=initial_t1,
        wall_time=wall_time,
        config=config,
    )

    if config.log_path is not None:
        log_path = Path(config.log_path)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        write_step_log(log_path, records, model.p)
        write_summary(summary_path(log_path), summary)
        if dump_shapes:
            write_shapes_dump(shapes_path(log_path), shape_entries, world.n_points)
    return summary
