"""Seeded random environment generation with rejection of degenerate worlds.

Obstacle positions are drawn uniformly in a fixed 10 x 10 workspace,
ground-truth weights uniformly on [-1, 1] per type, and the environment
is kept only if planning against the true weights actually beats the
start-goal straight line (normalization needs a positive denominator).
Rejected draws retry with an incremented sub-seed, so generation stays a
pure function of (num_types, instances_per_type, seed, config).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .envs import DENOMINATOR_FLOOR, Environment, GroundTruth, Obstacle, true_cost
from .planner import PlannerConfig, plan, straight_line

MAX_ATTEMPTS = 100


class EnvironmentRejected(RuntimeError):
    """Every attempt for a seed produced a world with no learning signal."""


@dataclass(frozen=True)
class GenConfig:
    """Environment generation knobs; the planner config also fixes the anchors."""

    radius: float = 1.0
    box_low: float = 0.0
    box_high: float = 10.0
    start: tuple[float, ...] = (0.0, 5.0)
    goal: tuple[float, ...] = (10.0, 5.0)
    planner: PlannerConfig = field(default_factory=PlannerConfig)

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not self.box_high > self.box_low:
            raise ValueError("workspace box is empty")


def attach_ground_truth(env: Environment, planner_cfg: PlannerConfig) -> Environment:
    """Plan the anchors for an environment that already has true weights.

    Returns a copy carrying the ground-truth optimum, the straight line,
    and their costs. Raises ValueError if the straight line is already
    optimal to within the normalization floor.
    """
    line = straight_line(env, planner_cfg.T)
    optimal = plan(env, env.ground_truth_w, planner_cfg)
    gt = GroundTruth(
        optimal=optimal,
        straight=line,
        cost_optimal=true_cost(optimal, env),
        cost_straight=true_cost(line, env),
    )
    if gt.denominator < DENOMINATOR_FLOOR:
        raise ValueError(
            f"straight line is already optimal (denominator {gt.denominator!r})"
        )
    return env.with_ground_truth(gt)


def generate_environment(
    num_types: int,
    instances_per_type: int,
    seed: int,
    config: GenConfig | None = None,
) -> Environment:
    """Deterministically generate one environment with usable normalization.

    Obstacles are laid out type-major (all instances of type 0 first), the
    draw order is positions then weights, and each rejected attempt
    re-draws from sub-seed (seed, attempt+1).

    Raises:
        EnvironmentRejected: after MAX_ATTEMPTS degenerate draws.
    """
    if num_types < 1 or instances_per_type < 1:
        raise ValueError("need at least one type and one instance per type")
    config = config or GenConfig()

    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=[int(seed), attempt]))
        count = num_types * instances_per_type
        positions = rng.uniform(config.box_low, config.box_high, size=(count, len(config.start)))
        weights = rng.uniform(-1.0, 1.0, size=num_types)
        obstacles = tuple(
            Obstacle(position=positions[i], type_id=i // instances_per_type, radius=config.radius)
            for i in range(count)
        )
        env = Environment(
            start=config.start,
            goal=config.goal,
            obstacles=obstacles,
            num_types=num_types,
            ground_truth_w=weights,
            seed=int(seed),
            instances_per_type=instances_per_type,
        )
        try:
            return attach_ground_truth(env, config.planner)
        except ValueError:
            continue
    raise EnvironmentRejected(
        f"no usable environment after {MAX_ATTEMPTS} attempts for seed {seed} "
        f"(num_types={num_types}, instances_per_type={instances_per_type})"
    )
