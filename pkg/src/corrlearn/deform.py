"""Constrained minimum-norm trajectory deformation.

Given a trajectory, a single-waypoint correction, and a propagation
kernel, find the full trajectory the correction was most plausibly aiming
for: the one that passes exactly through the corrected waypoint, keeps
both endpoints fixed, and moves least in the kernel's norm.

With the kernel K defined over the interior timepoints (endpoints
eliminated by construction), the minimizing displacement has the closed
form

    delta_interior = K[:, t] * (correction / K[t, t])

applied independently per coordinate dimension. K[t, t] > 0 because K is
positive definite, so the system is always solvable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import PropagationKernel
from .trajectory import Correction, Trajectory


class DeformError(ValueError):
    """Correction or kernel incompatible with the trajectory."""


@dataclass(frozen=True, eq=False)
class Deformation:
    """The displacement field and Lagrange multipliers of one deformation.

    ``delta`` is (T+1) x d with zero first and last rows. ``lam`` is the
    multiplier of the corrected-waypoint constraint, one value per
    coordinate dimension; ``gamma`` and ``kappa`` are the endpoint
    multipliers, identically zero here because the endpoint constraints
    are eliminated before solving.
    """

    delta: np.ndarray
    lam: np.ndarray
    gamma: np.ndarray
    kappa: np.ndarray

    def __post_init__(self) -> None:
        for name in ("delta", "lam", "gamma", "kappa"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def deform(
    xi: Trajectory, correction: Correction, kernel: PropagationKernel
) -> tuple[Trajectory, Deformation]:
    """Extrapolate a single-waypoint correction to a full trajectory.

    Returns the deformed trajectory and the Deformation that produced it.
    The corrected waypoint lands exactly on the requested configuration,
    endpoints are untouched bit-for-bit, and a zero-magnitude correction
    returns the trajectory unchanged.

    Raises:
        DeformError: correction at an endpoint, kernel sized for a
            different trajectory length, or dimension mismatch.
    """
    T = xi.T
    t = correction.t
    if not 0 < t < T:
        raise DeformError(f"correction timepoint {t} must be interior (0 < t < {T})")
    if kernel.size != T - 1:
        raise DeformError(
            f"kernel covers {kernel.size} interior points but trajectory has {T - 1}"
        )
    if correction.q.shape != (xi.dim,):
        raise DeformError(
            f"correction dimension {correction.q.shape[0]} != trajectory dimension {xi.dim}"
        )

    pivot = kernel.entries[t - 1, t - 1]
    if not pivot > 0:
        raise DeformError(f"kernel diagonal at timepoint {t} is {pivot}; cannot solve")

    magnitude = correction.q - xi.waypoints[t]
    profile = kernel.entries[:, t - 1] / pivot

    delta = np.zeros_like(xi.waypoints)
    delta[1:T] = np.outer(profile, magnitude)

    deformed = xi.waypoints.copy()
    deformed[1:T] += delta[1:T]

    deformation = Deformation(
        delta=delta,
        lam=-magnitude / pivot,
        gamma=np.zeros(xi.dim),
        kappa=np.zeros(xi.dim),
    )
    return Trajectory(deformed), deformation
