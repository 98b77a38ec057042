"""Trajectory and correction value types.

A trajectory is an ordered sequence of T+1 configurations in d-dimensional
workspace, indexed by uniform unit timesteps 0..T. Both endpoints are
treated as fixed by every consumer in this package: corrections and
deformations only ever touch interior timepoints 1..T-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Immutable (T+1) x d array of waypoints with fixed endpoints.

    T >= 2 so there is at least one interior waypoint to correct. The
    backing array is copied on construction and marked read-only, so a
    Trajectory can be shared freely across threads.
    """

    waypoints: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.waypoints, dtype=float)
        if pts.ndim != 2:
            raise ValueError(f"waypoints must be a 2-D array, got shape {pts.shape}")
        if pts.shape[0] < 3:
            raise ValueError(
                f"trajectory needs at least 3 waypoints (one interior), got {pts.shape[0]}"
            )
        if not np.all(np.isfinite(pts)):
            raise ValueError("trajectory coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "waypoints", pts)

    @property
    def T(self) -> int:
        """Index of the final timepoint (waypoint count minus one)."""
        return self.waypoints.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.waypoints.shape[1]

    @property
    def num_interior(self) -> int:
        return self.T - 1

    def point(self, t: int) -> np.ndarray:
        return self.waypoints[t]

    def interior(self) -> np.ndarray:
        """Read-only view of waypoints 1..T-1."""
        return self.waypoints[1:-1]


@dataclass(frozen=True, eq=False)
class Correction:
    """A single-waypoint correction: move waypoint ``t`` to configuration ``q``.

    ``t`` must be an interior timepoint; the endpoints are constrained and
    cannot be corrected.
    """

    t: int
    q: np.ndarray

    def __post_init__(self) -> None:
        q = np.array(self.q, dtype=float).reshape(-1)
        if not np.all(np.isfinite(q)):
            raise ValueError("corrected configuration must be finite")
        q.setflags(write=False)
        object.__setattr__(self, "t", int(self.t))
        object.__setattr__(self, "q", q)
