"""Figure generation for rodservo experiment logs."""

from .plots import (
    FigureSpec,
    SchemaError,
    load_shapes,
    plot_commands,
    plot_error,
    plot_shapes,
    read_log,
    shapes_path_for,
    transitional_keys,
)

__all__ = [
    "FigureSpec",
    "SchemaError",
    "load_shapes",
    "plot_commands",
    "plot_error",
    "plot_shapes",
    "read_log",
    "shapes_path_for",
    "transitional_keys",
]

__version__ = "0.1.0"
