"""Run configuration: the RunConfig bundle and its file format.

Config files are flat key-value text, one `section.key = value` pair per
line, with `#` comments and blank lines ignored. Unknown keys and
duplicate keys are errors so that typos in sweep automation fail loudly
instead of silently using defaults. Relative paths are resolved against
the directory containing the config file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .akf import AkfConfig
from .controller import ControllerWeights
from .errors import ConfigError
from .world import EffectorPose, WorldConfig

DEFAULT_WEIGHTS = (0.60, 0.0, 0.10, 0.10, 0.0, 0.10, 0.10)


@dataclass(frozen=True)
class RunConfig:
    """Everything one servo run needs, assembled from a config file."""

    world: WorldConfig
    akf: AkfConfig
    weights: ControllerWeights
    u_max: float
    start_pose: EffectorPose
    feature_model_path: str
    target_pose: Optional[EffectorPose] = None
    target_feature: Optional[np.ndarray] = None
    max_steps: int = 200
    stop_tol: float = 1e-2
    seed: int = 0
    log_path: Optional[str] = None

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.stop_tol <= 0:
            raise ValueError("stop_tol must be positive")
        if self.u_max <= 0:
            raise ValueError("u_max must be positive")
        if (self.target_pose is None) == (self.target_feature is None):
            raise ValueError("exactly one of target_pose / target_feature must be set")
        if self.target_feature is not None:
            tf = np.asarray(self.target_feature, dtype=float)
            if tf.ndim != 1 or not np.all(np.isfinite(tf)):
                raise ValueError("target_feature must be a finite vector")
            object.__setattr__(self, "target_feature", tf)


def _parse_floats(text: str, count: int, key: str) -> Tuple[float, ...]:
    toks = text.split()
    if len(toks) != count:
        raise ConfigError(f"{key}: expected {count} numbers, got {len(toks)}")
    try:
        vals = tuple(float(t) for t in toks)
    except ValueError as exc:
        raise ConfigError(f"{key}: unparseable number") from exc
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"{key}: values must be finite")
    return vals


def _parse_float(text: str, key: str) -> float:
    return _parse_floats(text, 1, key)[0]


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from exc


def _parse_bool(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t == "true":
        return True
    if t == "false":
        return False
    raise ConfigError(f"{key}: expected true or false, got {text!r}")


# Every legal config key. Values are parsed lazily in build_run_config so
# error messages can carry the key name.
_KNOWN_KEYS = frozenset(
    [
        "world.n_points",
        "world.base_point",
        "world.base_tangent",
        "world.pixel_scale",
        "world.pixel_offset",
        "world.obs_noise_sigma",
        "world.workspace",
        "world.walk_delta",
        "world.seed",
        "akf.c0",
        "akf.c1",
        "akf.b",
        "akf.alpha_min",
        "akf.p0_scale",
        "akf.r0_scale",
        "akf.q0_scale",
        "akf.du_min",
        "akf.probe_delta",
        "akf.use_unbiased_r",
        "control.weights",
        "control.u_max",
        "run.start_pose",
        "run.target_pose",
        "run.target_feature",
        "run.max_steps",
        "run.stop_tol",
        "run.seed",
        "run.log_path",
        "run.feature_model_path",
    ]
)


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, str]:
    """Parse config text into a raw key-to-string mapping with validation."""
    raw: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value'")
        key, value = stripped.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{source}:{lineno}: empty value for {key!r}")
        raw[key] = value
    return raw


def read_config_file(path) -> Dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def build_world_config(raw: Dict[str, str]) -> WorldConfig:
    """World parameters from raw key strings; absent keys keep their defaults."""
    try:
        return WorldConfig(
            n_points=_parse_int(raw["world.n_points"], "world.n_points")
            if "world.n_points" in raw else WorldConfig.n_points,
            base_point=_parse_floats(raw["world.base_point"], 2, "world.base_point")
            if "world.base_point" in raw else WorldConfig.base_point,
            base_tangent=_parse_float(raw["world.base_tangent"], "world.base_tangent")
            if "world.base_tangent" in raw else WorldConfig.base_tangent,
            pixel_scale=_parse_float(raw["world.pixel_scale"], "world.pixel_scale")
            if "world.pixel_scale" in raw else WorldConfig.pixel_scale,
            pixel_offset=_parse_floats(raw["world.pixel_offset"], 2, "world.pixel_offset")
            if "world.pixel_offset" in raw else WorldConfig.pixel_offset,
            obs_noise_sigma=_parse_float(raw["world.obs_noise_sigma"], "world.obs_noise_sigma")
            if "world.obs_noise_sigma" in raw else WorldConfig.obs_noise_sigma,
            workspace=_parse_floats(raw["world.workspace"], 4, "world.workspace")
            if "world.workspace" in raw else WorldConfig.workspace,
            walk_delta=_parse_float(raw["world.walk_delta"], "world.walk_delta")
            if "world.walk_delta" in raw else WorldConfig.walk_delta,
            seed=_parse_int(raw["world.seed"], "world.seed")
            if "world.seed" in raw else WorldConfig.seed,
        )
    except ValueError as exc:
        raise ConfigError(f"world configuration invalid: {exc}") from exc


def build_akf_config(raw: Dict[str, str]) -> AkfConfig:
    try:
        return AkfConfig(
            c0=_parse_float(raw["akf.c0"], "akf.c0") if "akf.c0" in raw else AkfConfig.c0,
            c1=_parse_float(raw["akf.c1"], "akf.c1") if "akf.c1" in raw else AkfConfig.c1,
            b=_parse_float(raw["akf.b"], "akf.b") if "akf.b" in raw else AkfConfig.b,
            alpha_min=_parse_float(raw["akf.alpha_min"], "akf.alpha_min")
            if "akf.alpha_min" in raw else AkfConfig.alpha_min,
            p0_scale=_parse_float(raw["akf.p0_scale"], "akf.p0_scale")
            if "akf.p0_scale" in raw else AkfConfig.p0_scale,
            r0_scale=_parse_float(raw["akf.r0_scale"], "akf.r0_scale")
            if "akf.r0_scale" in raw else AkfConfig.r0_scale,
            q0_scale=_parse_float(raw["akf.q0_scale"], "akf.q0_scale")
            if "akf.q0_scale" in raw else AkfConfig.q0_scale,
            du_min=_parse_float(raw["akf.du_min"], "akf.du_min")
            if "akf.du_min" in raw else AkfConfig.du_min,
            probe_delta=_parse_float(raw["akf.probe_delta"], "akf.probe_delta")
            if "akf.probe_delta" in raw else AkfConfig.probe_delta,
            use_unbiased_r=_parse_bool(raw["akf.use_unbiased_r"], "akf.use_unbiased_r")
            if "akf.use_unbiased_r" in raw else AkfConfig.use_unbiased_r,
        )
    except ValueError as exc:
        raise ConfigError(f"akf configuration invalid: {exc}") from exc


def build_weights(raw: Dict[str, str]) -> ControllerWeights:
    try:
        return ControllerWeights.from_sequence(
            _parse_floats(raw["control.weights"], 7, "control.weights")
            if "control.weights" in raw else DEFAULT_WEIGHTS
        )
    except ValueError as exc:
        raise ConfigError(f"control.weights invalid: {exc}") from exc


def build_run_config(raw: Dict[str, str], base_dir) -> RunConfig:
    """Assemble a RunConfig from raw key strings; base_dir anchors relative paths."""
    base_dir = Path(base_dir)
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")

    world = build_world_config(raw)
    akf = build_akf_config(raw)
    weights = build_weights(raw)
    u_max = _parse_float(raw["control.u_max"], "control.u_max") if "control.u_max" in raw else 0.05

    if "run.feature_model_path" not in raw:
        raise ConfigError("run.feature_model_path is required")
    feature_model_path = str((base_dir / raw["run.feature_model_path"]).resolve())
    log_path = (
        str((base_dir / raw["run.log_path"]).resolve()) if "run.log_path" in raw else None
    )

    if "run.target_pose" in raw and "run.target_feature" in raw:
        raise ConfigError("set only one of run.target_pose / run.target_feature")
    target_pose = None
    target_feature = None
    if "run.target_pose" in raw:
        target_pose = EffectorPose(*_parse_floats(raw["run.target_pose"], 3, "run.target_pose"))
    elif "run.target_feature" in raw:
        toks = raw["run.target_feature"].split()
        target_feature = np.array(
            _parse_floats(raw["run.target_feature"], len(toks), "run.target_feature")
        )
    else:
        raise ConfigError("one of run.target_pose / run.target_feature is required")

    start_pose = (
        EffectorPose(*_parse_floats(raw["run.start_pose"], 3, "run.start_pose"))
        if "run.start_pose" in raw else world.center_pose()
    )

    try:
        return RunConfig(
            world=world,
            akf=akf,
            weights=weights,
            u_max=u_max,
            start_pose=start_pose,
            feature_model_path=feature_model_path,
            target_pose=target_pose,
            target_feature=target_feature,
            max_steps=_parse_int(raw["run.max_steps"], "run.max_steps")
            if "run.max_steps" in raw else 200,
            stop_tol=_parse_float(raw["run.stop_tol"], "run.stop_tol")
            if "run.stop_tol" in raw else 1e-2,
            seed=_parse_int(raw["run.seed"], "run.seed") if "run.seed" in raw else 0,
            log_path=log_path,
        )
    except ValueError as exc:
        raise ConfigError(f"run configuration invalid: {exc}") from exc


def load_run_config(path) -> RunConfig:
    """Read and validate a config file into a RunConfig."""
    path = Path(path)
    raw = read_config_file(path)
    return build_run_config(raw, path.parent)


def with_seed(config: RunConfig, seed: int) -> RunConfig:
    return replace(config, seed=seed)


def with_log_path(config: RunConfig, log_path) -> RunConfig:
    return replace(config, log_path=str(log_path) if log_path is not None else None)


def config_echo_lines(config: RunConfig) -> list:
    """Flat key = value lines echoing the effective configuration."""
    w = config.world
    a = config.akf
    wt = config.weights.as_array()
    lines = [
        f"world.n_points = {w.n_points}",
        "world.base_point = %.17g %.17g" % tuple(w.base_point),
        "world.base_tangent = %.17g" % w.base_tangent,
        "world.pixel_scale = %.17g" % w.pixel_scale,
        "world.pixel_offset = %.17g %.17g" % tuple(w.pixel_offset),
        "world.obs_noise_sigma = %.17g" % w.obs_noise_sigma,
        "world.workspace = %.17g %.17g %.17g %.17g" % tuple(w.workspace),
        "world.walk_delta = %.17g" % w.walk_delta,
        f"world.seed = {w.seed}",
        "akf.c0 = %.17g" % a.c0,
        "akf.c1 = %.17g" % a.c1,
        "akf.b = %.17g" % a.b,
        "akf.alpha_min = %.17g" % a.alpha_min,
        "akf.p0_scale = %.17g" % a.p0_scale,
        "akf.r0_scale = %.17g" % a.r0_scale,
        "akf.q0_scale = %.17g" % a.q0_scale,
        "akf.du_min = %.17g" % a.du_min,
        "akf.probe_delta = %.17g" % a.probe_delta,
        f"akf.use_unbiased_r = {'true' if a.use_unbiased_r else 'false'}",
        "control.weights = " + " ".join("%.17g" % v for v in wt),
        "control.u_max = %.17g" % config.u_max,
        "run.start_pose = %.17g %.17g %.17g" % (config.start_pose.x, config.start_pose.y, config.start_pose.theta),
    ]
    if config.target_pose is not None:
        lines.append(
            "run.target_pose = %.17g %.17g %.17g"
            % (config.target_pose.x, config.target_pose.y, config.target_pose.theta)
        )
    else:
        lines.append(
            "run.target_feature = " + " ".join("%.17g" % v for v in config.target_feature)
        )
    lines.extend(
        [
            f"run.max_steps = {config.max_steps}",
            "run.stop_tol = %.17g" % config.stop_tol,
            f"run.seed = {config.seed}",
            f"run.feature_model_path = {config.feature_model_path}",
        ]
    )
    if config.log_path is not None:
        lines.append(f"run.log_path = {config.log_path}")
    return lines
