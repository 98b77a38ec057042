"""Environments, trajectory features, and the normalized ground-truth cost.

An environment is a start/goal pair plus typed obstacles. Each obstacle
type k contributes one feature: a Gaussian proximity accumulator

    phi_k(xi) = (1/(T+1)) * sum_t sum_{o of type k} exp(-|xi(t) - o.pos|^2 / (2 r_o^2))

which is smooth everywhere (the planner needs its gradient), bounded, and
averaged over waypoints so its magnitude does not depend on how finely
the trajectory is discretized. Trajectory cost is a linear combination
w . phi(xi); hidden ground-truth weights live on the environment, with
negative components attracting and positive ones repelling.

Reported costs are normalized against two anchor trajectories cached on
the environment: the ground-truth optimum scores 0 and the start-goal
straight line scores 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import serialize
from .trajectory import Trajectory

# Environments whose straight line is already (numerically) optimal carry
# no learning signal; generation rejects denominators below this.
DENOMINATOR_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class Obstacle:
    """A point obstacle with a feature type and Gaussian length-scale."""

    position: np.ndarray
    type_id: int
    radius: float = 1.0

    def __post_init__(self) -> None:
        pos = np.array(self.position, dtype=float).reshape(-1)
        pos.setflags(write=False)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "type_id", int(self.type_id))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError(f"obstacle radius must be positive, got {self.radius}")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Cached anchors for cost normalization, fixed at generation time."""

    optimal: Trajectory
    straight: Trajectory
    cost_optimal: float
    cost_straight: float

    @property
    def denominator(self) -> float:
        return self.cost_straight - self.cost_optimal


@dataclass(frozen=True, eq=False)
class Environment:
    """Immutable world description: endpoints, typed obstacles, hidden weights.

    ``ground_truth_w`` is the weight vector the simulated user knows and the
    learner must estimate. ``ground_truth`` holds the normalization anchors
    and is only present once the environment has been planned against its
    true weights (generate_environment does this automatically).
    """

    start: np.ndarray
    goal: np.ndarray
    obstacles: tuple[Obstacle, ...]
    num_types: int
    ground_truth_w: np.ndarray
    seed: int = 0
    instances_per_type: Optional[int] = None
    ground_truth: Optional[GroundTruth] = None

    def __post_init__(self) -> None:
        start = np.array(self.start, dtype=float).reshape(-1)
        goal = np.array(self.goal, dtype=float).reshape(-1)
        if start.shape != goal.shape:
            raise ValueError("start and goal must have the same dimension")
        if np.array_equal(start, goal):
            raise ValueError("start and goal must differ")
        w = np.array(self.ground_truth_w, dtype=float).reshape(-1)
        if w.shape[0] != self.num_types:
            raise ValueError(
                f"ground_truth_w has {w.shape[0]} entries for {self.num_types} types"
            )
        obstacles = tuple(self.obstacles)
        for ob in obstacles:
            if not 0 <= ob.type_id < self.num_types:
                raise ValueError(f"obstacle type {ob.type_id} outside [0, {self.num_types})")
            if ob.position.shape != start.shape:
                raise ValueError("obstacle dimension does not match start/goal")
        for arr in (start, goal, w):
            arr.setflags(write=False)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "goal", goal)
        object.__setattr__(self, "obstacles", obstacles)
        object.__setattr__(self, "ground_truth_w", w)
        # Dense obstacle arrays for vectorized feature evaluation.
        if obstacles:
            positions = np.stack([ob.position for ob in obstacles])
            type_ids = np.array([ob.type_id for ob in obstacles], dtype=int)
            radii = np.array([ob.radius for ob in obstacles])
        else:
            positions = np.zeros((0, start.shape[0]))
            type_ids = np.zeros(0, dtype=int)
            radii = np.zeros(0)
        for arr in (positions, type_ids, radii):
            arr.setflags(write=False)
        object.__setattr__(self, "_positions", positions)
        object.__setattr__(self, "_type_ids", type_ids)
        object.__setattr__(self, "_radii", radii)

    @property
    def dim(self) -> int:
        return self.start.shape[0]

    @property
    def num_features(self) -> int:
        return self.num_types

    def with_ground_truth(self, gt: GroundTruth) -> "Environment":
        return replace(self, ground_truth=gt)


def _check_dim(xi: Trajectory, env: Environment) -> None:
    if xi.dim != env.dim:
        raise ValueError(f"trajectory dimension {xi.dim} != environment dimension {env.dim}")


def _features_raw(pts: np.ndarray, env: Environment) -> np.ndarray:
    diff = pts[:, None, :] - env._positions[None, :, :]
    sq = np.einsum("tod,tod->to", diff, diff)
    prox = np.exp(-sq / (2.0 * env._radii**2))
    out = np.zeros(env.num_types)
    np.add.at(out, env._type_ids, prox.sum(axis=0))
    return out / pts.shape[0]


def _cost_gradient_raw(pts: np.ndarray, env: Environment, w: np.ndarray) -> np.ndarray:
    diff = pts[:, None, :] - env._positions[None, :, :]
    sq = np.einsum("tod,tod->to", diff, diff)
    prox = np.exp(-sq / (2.0 * env._radii**2))
    coef = -(prox * w[env._type_ids]) / env._radii**2 / pts.shape[0]
    return np.einsum("to,tod->td", coef, diff)


def features(xi: Trajectory, env: Environment) -> np.ndarray:
    """Feature vector phi(xi): one accumulated proximity per obstacle type."""
    _check_dim(xi, env)
    return _features_raw(xi.waypoints, env)


def feature_gradients(xi: Trajectory, env: Environment) -> np.ndarray:
    """d phi_k / d xi(t): array of shape (num_types, T+1, dim)."""
    _check_dim(xi, env)
    pts = xi.waypoints
    diff = pts[:, None, :] - env._positions[None, :, :]
    sq = np.einsum("tod,tod->to", diff, diff)
    prox = np.exp(-sq / (2.0 * env._radii**2))
    coef = -prox / env._radii**2 / pts.shape[0]
    per_obstacle = coef[:, :, None] * diff
    out = np.zeros((env.num_types, pts.shape[0], xi.dim))
    np.add.at(out, env._type_ids, per_obstacle.transpose(1, 0, 2))
    return out


def cost(xi: Trajectory, env: Environment, w: np.ndarray) -> float:
    """Linear trajectory cost w . phi(xi)."""
    _check_dim(xi, env)
    w = np.asarray(w, dtype=float)
    if w.shape != (env.num_types,):
        raise ValueError(f"weight vector has shape {w.shape}, expected ({env.num_types},)")
    return float(w @ _features_raw(xi.waypoints, env))


def cost_gradient(xi: Trajectory, env: Environment, w: np.ndarray) -> np.ndarray:
    """Gradient of w . phi(xi) with respect to every waypoint, shape (T+1, dim).

    Fused form of w @ feature_gradients: obstacles are weighted by their
    type's weight directly, skipping the per-type intermediate.
    """
    _check_dim(xi, env)
    w = np.asarray(w, dtype=float)
    if w.shape != (env.num_types,):
        raise ValueError(f"weight vector has shape {w.shape}, expected ({env.num_types},)")
    return _cost_gradient_raw(xi.waypoints, env, w)


def true_cost(xi: Trajectory, env: Environment) -> float:
    """Cost under the hidden ground-truth weights."""
    return cost(xi, env, env.ground_truth_w)


def normalized_cost(xi: Trajectory, env: Environment) -> float:
    """Ground-truth cost rescaled so the optimum scores 0 and the straight line 1.

    Requires the environment's cached anchors; generate_environment attaches
    them and guarantees the denominator is at least DENOMINATOR_FLOOR.
    """
    gt = env.ground_truth
    if gt is None:
        raise ValueError("environment has no cached ground-truth anchors")
    den = gt.denominator
    if den < DENOMINATOR_FLOOR:
        raise ValueError(f"degenerate normalization denominator {den!r}")
    return (true_cost(xi, env) - gt.cost_optimal) / den


def to_json_dict(env: Environment) -> dict:
    """Canonical serializable form; field order is part of the format."""
    return {
        "dim": env.dim,
        "start": env.start.tolist(),
        "goal": env.goal.tolist(),
        "obstacles": [
            {"position": ob.position.tolist(), "type_id": ob.type_id, "radius": ob.radius}
            for ob in env.obstacles
        ],
        "num_types": env.num_types,
        "ground_truth_w": env.ground_truth_w.tolist(),
        "seed": env.seed,
    }


def to_json(env: Environment) -> str:
    return serialize.dumps(to_json_dict(env))


def from_json_dict(doc: dict) -> Environment:
    obstacles = tuple(
        Obstacle(position=o["position"], type_id=o["type_id"], radius=o["radius"])
        for o in doc["obstacles"]
    )
    num_types = int(doc["num_types"])
    counts = np.bincount(
        [ob.type_id for ob in obstacles] if obstacles else [], minlength=num_types
    )
    uniform = len(set(counts.tolist())) == 1 and obstacles
    return Environment(
        start=doc["start"],
        goal=doc["goal"],
        obstacles=obstacles,
        num_types=num_types,
        ground_truth_w=doc["ground_truth_w"],
        seed=int(doc.get("seed", 0)),
        instances_per_type=int(counts[0]) if uniform else None,
    )


def from_json(text: str) -> Environment:
    return from_json_dict(serialize.loads(text))
