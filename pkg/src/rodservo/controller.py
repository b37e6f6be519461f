"""Model-free adaptive velocity controller.

The command u minimizes a seven-term quadratic built from the estimated
Jacobian: tracking of the previous error, amplitude limits on the
predicted feature, feature rate, rate change, pose, speed, and
acceleration. Because every term is quadratic in u the minimizer is the
solution of one q x q linear system; no iteration is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import SingularGainError

_WEIGHT_COUNT = 7


@dataclass(frozen=True)
class ControllerWeights:
    """Objective weights w1..w7, normalized to sum 1 at construction.

    All must be non-negative with a positive sum. A positive w5+w6+w7
    makes the controller gain positive definite for any Jacobian; with
    w5+w6+w7 = 0 solvability depends on the Jacobian having full column
    rank, and solve_command reports failure otherwise.
    """

    w1: float
    w2: float
    w3: float
    w4: float
    w5: float
    w6: float
    w7: float

    def __post_init__(self):
        vals = self.as_array()
        if not np.all(np.isfinite(vals)):
            raise ValueError("weights must be finite")
        if np.any(vals < 0):
            raise ValueError("weights must be non-negative")
        total = float(vals.sum())
        if total <= 0:
            raise ValueError("weights must not all be zero")
        vals = vals / total
        for i, name in enumerate(("w1", "w2", "w3", "w4", "w5", "w6", "w7")):
            object.__setattr__(self, name, float(vals[i]))

    def as_array(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.w3, self.w4, self.w5, self.w6, self.w7])

    @classmethod
    def from_sequence(cls, seq) -> "ControllerWeights":
        vals = np.asarray(seq, dtype=float)
        if vals.shape != (_WEIGHT_COUNT,):
            raise ValueError(f"need exactly {_WEIGHT_COUNT} weights, got shape {vals.shape}")
        return cls(*vals)


@dataclass(frozen=True)
class ControllerContext:
    """Quantities frozen at the start of one control step.

    s_prev and r_prev are the latest observed feature and pose, u_prev the
    previously applied command, j_k the current Jacobian estimate and
    j_prev the one used on the previous step.
    """

    s_prev: np.ndarray
    s_star: np.ndarray
    r_prev: np.ndarray
    u_prev: np.ndarray
    j_k: np.ndarray
    j_prev: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("s_prev", "s_star", "r_prev", "u_prev", "j_k", "j_prev"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            arrays[name] = arr
            object.__setattr__(self, name, arr)
        p, q = arrays["j_k"].shape
        if arrays["j_prev"].shape != (p, q):
            raise ValueError("j_prev shape differs from j_k")
        if arrays["s_prev"].shape != (p,) or arrays["s_star"].shape != (p,):
            raise ValueError("feature vectors do not match the Jacobian row count")
        if arrays["r_prev"].shape != (q,) or arrays["u_prev"].shape != (q,):
            raise ValueError("pose/command vectors do not match the Jacobian column count")

    @property
    def error_prev(self) -> np.ndarray:
        return self.s_star - self.s_prev


def objective(u, ctx: ControllerContext, w: ControllerWeights) -> float:
    """Seven-term quadratic cost of a candidate command."""
    u = np.asarray(u, dtype=float)
    ju = ctx.j_k @ u
    e = ctx.error_prev
    terms = (
        w.w1 * float(np.dot(e - ju, e - ju)),
        w.w2 * float(np.dot(ctx.s_prev + ju, ctx.s_prev + ju)),
        w.w3 * float(np.dot(ju, ju)),
        w.w4 * float(np.dot(ju - ctx.j_prev @ ctx.u_prev, ju - ctx.j_prev @ ctx.u_prev)),
        w.w5 * float(np.dot(ctx.r_prev + u, ctx.r_prev + u)),
        w.w6 * float(np.dot(u, u)),
        w.w7 * float(np.dot(u - ctx.u_prev, u - ctx.u_prev)),
    )
    return float(sum(terms))


def _gain_and_rhs(ctx: ControllerContext, w: ControllerWeights):
    jtj = ctx.j_k.T @ ctx.j_k
    q = ctx.j_k.shape[1]
    a = (w.w1 + w.w2 + w.w3 + w.w4) * jtj + (w.w5 + w.w6 + w.w7) * np.eye(q)
    rhs = (
        w.w1 * (ctx.j_k.T @ ctx.error_prev)
        - w.w2 * (ctx.j_k.T @ ctx.s_prev)
        - w.w5 * ctx.r_prev
        + w.w4 * (ctx.j_k.T @ (ctx.j_prev @ ctx.u_prev))
        + w.w7 * ctx.u_prev
    )
    return a, rhs


def gradient(u, ctx: ControllerContext, w: ControllerWeights) -> np.ndarray:
    """Analytic gradient of the objective with respect to u."""
    u = np.asarray(u, dtype=float)
    a, rhs = _gain_and_rhs(ctx, w)
    return 2.0 * (a @ u - rhs)


def solve_command(
    ctx: ControllerContext, w: ControllerWeights
) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form minimizer of the objective and the inverse gain matrix.

    Solves A u = rhs with A = (w1+w2+w3+w4) J^T J + (w5+w6+w7) I via one
    factorization; the returned gain is A^{-1} from the same
    factorization, never formed by explicit inversion of a product.
    """
    a, rhs = _gain_and_rhs(ctx, w)
    q = a.shape[0]
    try:
        solution = np.linalg.solve(a, np.concatenate([rhs[:, None], np.eye(q)], axis=1))
    except np.linalg.LinAlgError as exc:
        raise SingularGainError(
            "controller gain matrix is singular; "
            "needs w5+w6+w7 > 0 or a full-column-rank Jacobian"
        ) from exc
    if not np.all(np.isfinite(solution)):
        raise SingularGainError("controller solve produced non-finite values")
    return solution[:, 0], solution[:, 1:]


def saturate(u, u_max: float) -> np.ndarray:
    """Componentwise clamp of a command to [-u_max, u_max]."""
    if u_max <= 0:
        raise ValueError("u_max must be positive")
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("command must be finite")
    return np.clip(u, -u_max, u_max)
