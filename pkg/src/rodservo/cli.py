"""Command-line interface.

Subcommands cover the full pipeline: gen-data collects a random-walk
dataset, fit-feature fits the linear shape model, run executes one servo
run, sweep runs a grid of parameter overrides, and oracle-check compares
the online Jacobian estimate against a finite-difference oracle along a
run's trajectory. Exit code 0 on success, 2 for usage, file, or
configuration problems, 1 for runtime numerical failures.
"""

from __future__ import annotations

import argparse
import itertools
import re
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .config import (
    build_run_config,
    build_world_config,
    load_run_config,
    read_config_file,
    with_log_path,
    with_seed,
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
    fit_feature_model,
    generate_dataset,
    load_dataset,
    load_model,
    pose_feature_fn,
    save_dataset,
    save_model,
)
from .loop import run_servo
from .world import EffectorPose, WorldConfig, oracle_jacobian

_USAGE_ERRORS = (
    ConfigError,
    ModelFormatError,
    RankDeficiencyError,
    WorkspaceError,
    StencilError,
    InvalidCommandError,
    ValueError,
    OSError,
)
_RUNTIME_ERRORS = (FilterNumericalError, SingularGainError, DegenerateCurveError)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rodservo",
        description="Planar elastic-rod shape servoing: data, models, runs, sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen-data", help="collect a random-walk pose/centerline dataset")
    p_gen.add_argument("--config", help="config file supplying the world.* section")
    p_gen.add_argument("--samples", type=int, default=5000, help="number of samples")
    p_gen.add_argument("--seed", type=int, help="walk seed (default: world seed)")
    p_gen.add_argument("--out", required=True, help="dataset file to write")
    p_gen.add_argument("--quiet", action="store_true")

    p_fit = sub.add_parser("fit-feature", help="fit the linear shape-feature model")
    p_fit.add_argument("--data", required=True, help="dataset file from gen-data")
    # Noise-free rod curves span exactly five principal directions (the
    # clamped base tangent removes one), so 5 is the largest default that
    # fits cleanly; larger values fail with the achievable rank.
    p_fit.add_argument("--p", type=int, default=5, help="feature dimension")
    p_fit.add_argument("--out", required=True, help="model file to write")
    p_fit.add_argument("--quiet", action="store_true")

    p_run = sub.add_parser("run", help="execute one closed-loop servo run")
    p_run.add_argument("--config", required=True, help="run configuration file")
    p_run.add_argument("--seed", type=int, help="override run.seed")
    p_run.add_argument("--out", help="override run.log_path")
    p_run.add_argument("--dump-shapes", action="store_true",
                       help="also write per-step centerlines next to the log")
    p_run.add_argument("--quiet", action="store_true")

    p_sweep = sub.add_parser("sweep", help="run a grid of config overrides")
    p_sweep.add_argument("--config", required=True, help="base run configuration file")
    p_sweep.add_argument(
        "--vary",
        action="append",
        default=[],
        metavar="KEY=V1,V2[,...]",
        help="grid axis: config key with comma-separated values (repeatable)",
    )
    p_sweep.add_argument("--out", required=True, help="directory for per-cell logs")
    p_sweep.add_argument("--seed", type=int, help="override run.seed for every cell")
    p_sweep.add_argument("--quiet", action="store_true")

    p_oracle = sub.add_parser(
        "oracle-check",
        help="compare the estimated Jacobian with a finite-difference oracle",
    )
    p_oracle.add_argument("--config", required=True, help="run configuration file")
    p_oracle.add_argument("--seed", type=int, help="override run.seed")
    p_oracle.add_argument("--out", help="write per-step relative errors as CSV")
    p_oracle.add_argument("--last", type=int, default=50,
                          help="window (in steps) for the reported median")
    p_oracle.add_argument("--quiet", action="store_true")
    return parser


def _cmd_gen_data(args) -> int:
    if args.config is not None:
        world = build_world_config(read_config_file(args.config))
    else:
        world = WorldConfig()
    seed = args.seed if args.seed is not None else world.seed
    if args.samples < 1:
        raise ConfigError("--samples must be >= 1")
    dataset = generate_dataset(world, args.samples, seed)
    save_dataset(dataset, args.out)
    if not args.quiet:
        print(f"wrote {args.samples} samples to {args.out}")
    return 0


def _cmd_fit_feature(args) -> int:
    dataset = load_dataset(args.data)
    model = fit_feature_model(dataset, args.p)
    save_model(model, args.out)
    if not args.quiet:
        print(f"fitted p={model.p} model from {dataset.n_samples} samples, wrote {args.out}")
    return 0


def _load_config_with_overrides(args):
    config = load_run_config(args.config)
    if getattr(args, "seed", None) is not None:
        config = with_seed(config, args.seed)
    if getattr(args, "out", None):
        config = with_log_path(config, args.out)
    return config


def _cmd_run(args) -> int:
    config = _load_config_with_overrides(args)
    summary = run_servo(config, dump_shapes=args.dump_shapes)
    if not args.quiet:
        dest = config.log_path if config.log_path is not None else "(no log)"
        print(
            f"steps={summary.steps_taken} initial_t1={summary.initial_t1:.6g} "
            f"final_t1={summary.final_t1:.6g} "
            f"converged={'true' if summary.converged else 'false'} log={dest}"
        )
    return 0


def _sanitize(token: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", token)


def _cmd_sweep(args) -> int:
    base_path = Path(args.config)
    base_raw = read_config_file(base_path)
    axes = []
    for spec_str in args.vary:
        if "=" not in spec_str:
            raise ConfigError(f"--vary needs KEY=V1,V2 form, got {spec_str!r}")
        key, values = spec_str.split("=", 1)
        key = key.strip()
        cells = [v.strip() for v in values.split(",") if v.strip()]
        if not cells:
            raise ConfigError(f"--vary {key}: no values given")
        axes.append((key, cells))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    combos = list(itertools.product(*[vals for _, vals in axes])) if axes else [()]
    for idx, combo in enumerate(combos):
        raw = dict(base_raw)
        name_bits = []
        for (key, _), value in zip(axes, combo):
            raw[key] = value
            name_bits.append(f"{_sanitize(key)}-{_sanitize(value)}")
        stem = "_".join(["cell%03d" % idx] + name_bits) if name_bits else "cell%03d" % idx
        raw.pop("run.log_path", None)
        config = build_run_config(raw, base_path.parent)
        if args.seed is not None:
            config = with_seed(config, args.seed)
        config = with_log_path(config, out_dir / f"{stem}.csv")
        summary = run_servo(config)
        if not args.quiet:
            print(
                f"{stem}: steps={summary.steps_taken} final_t1={summary.final_t1:.6g} "
                f"converged={'true' if summary.converged else 'false'}"
            )
    if not args.quiet:
        print(f"{len(combos)} cells written to {out_dir}")
    return 0


def _cmd_oracle_check(args) -> int:
    config = load_run_config(args.config)
    if args.seed is not None:
        config = with_seed(config, args.seed)
    config = with_log_path(config, None)
    model = load_model(config.feature_model_path)
    sink: List = []
    run_servo(config, jacobian_sink=sink)
    shape_fn = pose_feature_fn(model, config.world)

    rows = []
    skipped = 0
    for k, pose_arr, j_hat in sink:
        try:
            j_true = oracle_jacobian(
                EffectorPose.from_array(pose_arr), shape_fn, config.world
            )
        except StencilError:
            skipped += 1
            continue
        denom = float(np.linalg.norm(j_true))
        rel = float(np.linalg.norm(j_hat - j_true)) / max(denom, 1e-300)
        rows.append((k, rel))
    if not rows:
        raise ConfigError("no steps available for the oracle comparison")

    window = min(max(args.last, 1), len(rows))
    tail = np.array([rel for _, rel in rows[-window:]])
    median_rel = float(np.median(tail))
    if args.out:
        lines = ["k,rel_frobenius_err"] + ["%d,%.17g" % (k, rel) for k, rel in rows]
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="ascii")
    if not args.quiet:
        note = f" (skipped {skipped} boundary steps)" if skipped else ""
        print(
            f"steps={len(rows)} median_rel_err_last_{window}={median_rel:.6g}{note}"
        )
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "fit-feature": _cmd_fit_feature,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "oracle-check": _cmd_oracle_check,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return _COMMANDS[args.command](args)
    except _USAGE_ERRORS as exc:
        print(f"rodservo {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except _RUNTIME_ERRORS as exc:
        print(f"rodservo {args.command}: runtime failure: {exc}", file=sys.stderr)
        return 1
    except ShapeServoError as exc:
        print(f"rodservo {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
