"""Planar elastic-rod shape servoing toolkit.

A synthetic rod world renders centerlines from an effector pose, a
fitted linear model reduces them to a low-dimensional shape feature, an
adaptive Kalman filter tracks the feature-to-pose Jacobian online, and a
closed-form quadratic controller drives the feature to a target. The
loop module ties these together; the cli module exposes the pipeline as
the ``rodservo`` command.
"""

from .akf import (
    AkfConfig,
    FilterState,
    Measurement,
    UpdateDiagnostics,
    build_observation_matrix,
    compute_adaptive_factor,
    current_jacobian,
    forgetting_weight,
    initialize,
    predict,
    update,
    vectorize_jacobian,
)
from .config import (
    RunConfig,
    build_run_config,
    load_run_config,
    parse_config_text,
    read_config_file,
)
from .controller import (
    ControllerContext,
    ControllerWeights,
    gradient,
    objective,
    saturate,
    solve_command,
)
from .errors import (
    ConfigError,
    DegenerateCurveError,
    FilterNumericalError,
    InvalidCommandError,
    ModelFormatError,
    RankDeficiencyError,
    ShapeServoError,
    SingularGainError,
    StencilError,
    WorkspaceError,
)
from .features import (
    FeatureModel,
    ShapeDataset,
    extract_feature,
    fit_feature_model,
    generate_dataset,
    load_dataset,
    load_model,
    pose_feature_fn,
    reconstruct_centerline,
    save_dataset,
    save_model,
)
from .loop import (
    RunSummary,
    StepRecord,
    metric_t1,
    read_step_log,
    run_servo,
    shapes_path,
    summary_path,
)
from .world import (
    EffectorPose,
    WorldConfig,
    apply_command,
    oracle_jacobian,
    render_centerline,
    wrap_angle,
)

__all__ = [
    "AkfConfig",
    "ConfigError",
    "ControllerContext",
    "ControllerWeights",
    "DegenerateCurveError",
    "EffectorPose",
    "FeatureModel",
    "FilterNumericalError",
    "FilterState",
    "InvalidCommandError",
    "Measurement",
    "ModelFormatError",
    "RankDeficiencyError",
    "RunConfig",
    "RunSummary",
    "ShapeDataset",
    "ShapeServoError",
    "SingularGainError",
    "StencilError",
    "StepRecord",
    "UpdateDiagnostics",
    "WorkspaceError",
    "WorldConfig",
    "apply_command",
    "build_observation_matrix",
    "build_run_config",
    "compute_adaptive_factor",
    "current_jacobian",
    "extract_feature",
    "fit_feature_model",
    "forgetting_weight",
    "generate_dataset",
    "gradient",
    "initialize",
    "load_dataset",
    "load_model",
    "load_run_config",
    "metric_t1",
    "objective",
    "oracle_jacobian",
    "parse_config_text",
    "pose_feature_fn",
    "predict",
    "read_config_file",
    "read_step_log",
    "reconstruct_centerline",
    "render_centerline",
    "run_servo",
    "saturate",
    "save_dataset",
    "save_model",
    "shapes_path",
    "solve_command",
    "summary_path",
    "update",
    "vectorize_jacobian",
    "wrap_angle",
]

__version__ = "0.1.0"
