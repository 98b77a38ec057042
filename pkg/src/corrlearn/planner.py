"""Local trajectory optimizer for a given weight vector.

Minimizes

    J(xi) = w . phi(xi) + smooth_mu * sum_t |xi(t+1) - xi(t)|^2

over the interior waypoints, endpoints pinned, starting from the
start-goal straight line (or a warm start). Descent directions are the
gradient preconditioned by the inverse of the smoothness Hessian — the
usual trick in trajectory optimization, which keeps a step meaningful at
every frequency of the trajectory instead of crawling on the smooth
modes — with a backtracking line search that halves the step until the
objective stops increasing. Everything is deterministic: same inputs,
same output, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .envs import Environment, _cost_gradient_raw, _features_raw
from .kernels import velocity_matrix
from .trajectory import Trajectory

_MAX_HALVINGS = 20


class PlannerError(RuntimeError):
    """Non-finite objective encountered while planning."""

    def __init__(self, message: str, w: np.ndarray, iteration: int):
        super().__init__(f"{message} (iteration {iteration}, weights {w.tolist()})")
        self.w = w
        self.iteration = iteration


@dataclass(frozen=True)
class PlannerConfig:
    """Planner knobs. T counts segments, so a trajectory has T+1 waypoints."""

    T: int = 40
    smooth_mu: float = 0.5
    step: float = 0.05
    max_iters: int = 500
    tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.T < 2:
            raise ValueError(f"T must be >= 2, got {self.T}")
        if not (self.smooth_mu > 0 and self.step > 0 and self.tol > 0):
            raise ValueError("smooth_mu, step, and tol must be positive")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")


def straight_line(env: Environment, T: int) -> Trajectory:
    """Uniform linear interpolation from start to goal with T+1 waypoints."""
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    return Trajectory(np.linspace(env.start, env.goal, T + 1))


def _objective(pts: np.ndarray, env: Environment, w: np.ndarray, mu: float) -> float:
    steps = np.diff(pts, axis=0)
    smooth = float(np.einsum("td,td->", steps, steps))
    return float(w @ _features_raw(pts, env)) + mu * smooth


def plan(
    env: Environment,
    w: np.ndarray,
    cfg: Optional[PlannerConfig] = None,
    warm_start: Optional[Trajectory] = None,
) -> Trajectory:
    """Locally optimal trajectory for weights w with fixed endpoints.

    Returns a trajectory with J(result) <= J(initial). Terminates when the
    interior gradient norm drops below cfg.tol, after cfg.max_iters
    accepted iterations, or when the line search cannot find a decrease.
    """
    cfg = cfg or PlannerConfig()
    w = np.asarray(w, dtype=float)
    if w.shape != (env.num_types,):
        raise ValueError(f"weight vector has shape {w.shape}, expected ({env.num_types},)")

    if warm_start is not None:
        if warm_start.T != cfg.T or warm_start.dim != env.dim:
            raise ValueError("warm start does not match planner T / environment dimension")
        pts = warm_start.waypoints.copy()
    else:
        pts = straight_line(env, cfg.T).waypoints.copy()

    mu = cfg.smooth_mu
    n = cfg.T - 1
    # Smoothness Hessian over interior waypoints and its inverse as the
    # descent metric; computed once per call, O(n^3) at n <= a few hundred.
    precond = np.linalg.inv(2.0 * mu * velocity_matrix(n))

    current = _objective(pts, env, w, mu)
    if not np.isfinite(current):
        raise PlannerError("non-finite objective at the initial trajectory", w, 0)

    for iteration in range(cfg.max_iters):
        grad = _cost_gradient_raw(pts, env, w)[1:-1]
        grad += 2.0 * mu * (2.0 * pts[1:-1] - pts[:-2] - pts[2:])
        if not np.all(np.isfinite(grad)):
            raise PlannerError("non-finite gradient", w, iteration)
        if np.linalg.norm(grad) <= cfg.tol:
            break

        direction = precond @ grad
        step = cfg.step
        for _ in range(_MAX_HALVINGS + 1):
            trial = pts.copy()
            trial[1:-1] -= step * direction
            value = _objective(trial, env, w, mu)
            if not np.isfinite(value):
                raise PlannerError("non-finite objective during line search", w, iteration)
            if value <= current:
                pts, current = trial, value
                break
            step *= 0.5
        else:
            break  # no decrease at any step length; converged for our purposes

    return Trajectory(pts)
