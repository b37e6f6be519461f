"""Figures from rodservo step logs.

Three figure types, all driven by the CSV files a servo run writes: the
step log itself (error curve, command traces) and the optional per-step
centerline dump next to it (shape snapshots). The dump convention is
`<log stem>_shapes.csv` with rows k = -1 for the target curve, k = 0 for
the initial curve and k >= 1 per step; snapshots draw the initial curve
black, every stride-th step blue and the target red.

Outputs are deterministic: rendering the same inputs twice produces
byte-identical files (svg date metadata is suppressed and the hash salt
is pinned).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "figgen"

TARGET_COLOR = "red"
INITIAL_COLOR = "black"
TRANSITIONAL_COLOR = "tab:blue"

_FORMATS = ("png", "svg")


class SchemaError(Exception):
    """An input file does not match the expected log layout."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: input logs, output directory, stride, format."""

    log_paths: Tuple[str, ...]
    out_dir: str
    stride: int = 3
    image_format: str = "png"

    def __post_init__(self):
        object.__setattr__(self, "log_paths", tuple(str(p) for p in self.log_paths))
        if not self.log_paths:
            raise ValueError("at least one log path is required")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.image_format not in _FORMATS:
            raise ValueError(
                f"image format must be one of {_FORMATS}, got {self.image_format!r}"
            )


def read_log(path, required: Sequence[str]) -> Dict[str, np.ndarray]:
    """Read a step-log CSV into float columns, checking required names."""
    try:
        text = Path(path).read_text(encoding="ascii")
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read log: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = lines[0].split(",")
    for col in required:
        if col not in header:
            raise SchemaError(f"{path}: missing column '{col}'")
    if len(lines) < 2:
        raise SchemaError(f"{path}: no data rows")
    columns: Dict[str, List[float]] = {name: [] for name in header}
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != len(header):
            raise SchemaError(
                f"{path}:{lineno}: row has {len(fields)} fields, header has {len(header)}"
            )
        for name, field in zip(header, fields):
            try:
                columns[name].append(float(field))
            except ValueError as exc:
                raise SchemaError(
                    f"{path}:{lineno}: unparseable value in column '{name}'"
                ) from exc
    return {name: np.array(vals) for name, vals in columns.items()}


def shapes_path_for(log_path) -> Path:
    """The centerline-dump path a run writes next to its log."""
    p = Path(log_path)
    return p.with_name(p.stem + "_shapes.csv")


def load_shapes(path) -> List[Tuple[int, np.ndarray]]:
    """Read a centerline dump as (k, (N, 2) array) entries in file order."""
    try:
        text = Path(path).read_text(encoding="ascii")
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read shape dump: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = lines[0].split(",")
    if not header or header[0] != "k":
        raise SchemaError(f"{path}: missing column 'k'")
    if len(header) < 3 or len(header) % 2 == 0:
        raise SchemaError(f"{path}: expected x/y column pairs after 'k'")
    if len(lines) < 2:
        raise SchemaError(f"{path}: no data rows")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != len(header):
            raise SchemaError(
                f"{path}:{lineno}: row has {len(fields)} fields, header has {len(header)}"
            )
        try:
            k = int(fields[0])
            flat = np.array([float(v) for v in fields[1:]])
        except ValueError as exc:
            raise SchemaError(f"{path}:{lineno}: unparseable row") from exc
        entries.append((k, flat.reshape(-1, 2)))
    return entries


def transitional_keys(ks: Sequence[int], stride: int) -> List[int]:
    """Step indices drawn as transitional curves: every stride-th step."""
    return [k for k in ks if k >= 1 and k % stride == 0]


def _save(fig, spec: FigureSpec, name: str) -> Path:
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.{spec.image_format}"
    if spec.image_format == "svg":
        fig.savefig(path, metadata={"Date": None})
    else:
        fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def _render_shapes(entries: Sequence[Tuple[int, np.ndarray]], stride: int):
    curves = dict(entries)
    if -1 not in curves:
        raise SchemaError("shape dump has no target row (k = -1)")
    if 0 not in curves:
        raise SchemaError("shape dump has no initial row (k = 0)")
    fig, ax = plt.subplots(figsize=(6.5, 5))
    for k in transitional_keys(sorted(curves), stride):
        ax.plot(*curves[k].T, color=TRANSITIONAL_COLOR, lw=1.0, alpha=0.5)
    ax.plot(*curves[0].T, color=INITIAL_COLOR, lw=2.0, label="initial")
    ax.plot(*curves[-1].T, color=TARGET_COLOR, lw=2.0, label="target")
    ax.set_xlabel("u [px]")
    ax.set_ylabel("v [px]")
    ax.set_aspect("equal")
    ax.set_title("shape evolution")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def plot_shapes(spec: FigureSpec) -> Path:
    """Shape-evolution snapshot figure from one run's centerline dump."""
    if len(spec.log_paths) != 1:
        raise ValueError("shapes takes exactly one --log")
    entries = load_shapes(shapes_path_for(spec.log_paths[0]))
    fig = _render_shapes(entries, spec.stride)
    return _save(fig, spec, "shapes")


def plot_error(spec: FigureSpec) -> Path:
    """Deformation-error curve, one line per log."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for log in spec.log_paths:
        cols = read_log(log, required=("k", "t1"))
        ax.plot(cols["k"], cols["t1"], lw=1.5, label=Path(log).stem)
    ax.set_xlabel("step")
    ax.set_ylabel("T1")
    ax.set_title("deformation error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, spec, "error")


def plot_commands(spec: FigureSpec) -> Path:
    """Velocity-command traces: three stacked subplots, one line per log."""
    fig, axes = plt.subplots(3, 1, figsize=(6.5, 7), sharex=True)
    labels = ("u_x", "u_y", "u_theta")
    titles = ("x speed", "y speed", "rotation speed about z")
    for log in spec.log_paths:
        cols = read_log(log, required=("k",) + labels)
        for ax, col in zip(axes, labels):
            ax.plot(cols["k"], cols[col], lw=1.5, label=Path(log).stem)
    for ax, col, title in zip(axes, labels, titles):
        ax.set_ylabel(col)
        ax.set_title(title, fontsize=9)
        ax.legend(fontsize=8)
    axes[-1].set_xlabel("step")
    fig.tight_layout()
    return _save(fig, spec, "commands")
