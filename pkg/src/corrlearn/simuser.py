"""Simulated user: corrects the planned trajectory toward a known optimum.

The simulated user compares the current plan against the ground-truth
trajectory and corrects one interior waypoint to its ground-truth value.
Two timepoint-selection strategies are supported:

- "largest": the interior timepoint where the squared deviation between
  plan and optimum is largest, ties broken toward the smaller index.
- "anywhere": a seeded-uniform pick among interior timepoints whose
  deviation exceeds a quarter of the maximum — a stand-in for a person
  choosing any visibly-wrong spot rather than the single worst one.

When no interior waypoint deviates by at least 1e-3 workspace units the
user is satisfied and stops correcting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .trajectory import Correction, Trajectory

STRATEGIES = ("largest", "anywhere")

DONE_THRESHOLD = 1e-3
ANYWHERE_FRACTION = 0.25


@dataclass(frozen=True)
class SimUserConfig:
    strategy: str = "largest"
    seed: int = 0
    noise: float = 0.0

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.noise < 0:
            raise ValueError(f"noise must be non-negative, got {self.noise}")


def simulate_correction(
    xi_star: Trajectory,
    xi: Trajectory,
    cfg: SimUserConfig,
    rng: Optional[np.random.Generator] = None,
) -> Optional[Correction]:
    """One simulated correction of ``xi`` toward ``xi_star``, or None when satisfied.

    The returned correction moves the chosen waypoint exactly onto the
    optimum (plus Gaussian noise if cfg.noise > 0). Randomness comes from
    ``rng`` when given; otherwise a generator is seeded from cfg.seed, which
    makes a bare call a pure function of its arguments.
    """
    if xi_star.waypoints.shape != xi.waypoints.shape:
        raise ValueError(
            f"trajectory shapes differ: {xi_star.waypoints.shape} vs {xi.waypoints.shape}"
        )
    deviations = ((xi_star.waypoints - xi.waypoints) ** 2).sum(axis=1)
    interior = deviations[1:-1]
    max_dev = float(interior.max())
    if np.sqrt(max_dev) < DONE_THRESHOLD:
        return None

    if cfg.strategy == "largest":
        t = int(np.argmax(interior)) + 1
    else:
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        eligible = np.flatnonzero(interior > ANYWHERE_FRACTION * max_dev) + 1
        t = int(eligible[rng.integers(len(eligible))])

    q = xi_star.waypoints[t]
    if cfg.noise > 0:
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        q = q + cfg.noise * rng.standard_normal(xi.dim)
    return Correction(t=t, q=q)


def make_simulated_user(
    xi_star: Trajectory, cfg: SimUserConfig
) -> Callable[[Trajectory], Optional[Correction]]:
    """Correction source for a learning loop, deterministic given cfg.seed.

    Each call advances its own seeded random stream (sub-seeded per call
    index), so "anywhere" picks vary across iterations yet replay
    identically for the same seed.
    """
    counter = [0]

    def source(xi: Trajectory) -> Optional[Correction]:
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=cfg.seed, spawn_key=(counter[0],))
        )
        counter[0] += 1
        return simulate_correction(xi_star, xi, cfg, rng=rng)

    return source
