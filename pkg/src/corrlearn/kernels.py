"""Propagation kernels for extrapolating a waypoint correction.

A propagation kernel is a symmetric positive-definite matrix over the
interior timepoints 1..T-1 of a trajectory. It is the inverse of the
inner-product matrix of the Hilbert space used to measure how far a
corrected trajectory is from the current one, and its column at the
corrected timepoint determines how the correction spreads to neighbors:

- identity: the Euclidean inner product. Nothing propagates; only the
  corrected waypoint moves.
- velocity: the sum-squared-velocity inner product, whose matrix is
  tridiagonal with 2 on the diagonal and -1 off it. Its inverse
  propagates a correction linearly out to the endpoints (a tent shape).
- rbf: a Gaussian kernel over timestep distance, entries
  exp(-(i-j)^2 / (2 sigma^2)) with unit diagonal. sigma tunes how local
  or global the propagation is, in timestep units.

Defining the kernel on interior timepoints only bakes the fixed-endpoint
constraints into the operator, so a single scalar multiplier per
coordinate dimension solves the constrained minimum-norm problem (see
corrlearn.deform).
"""

from __future__ import annotations

from dataclasses import dataclass
from threading import Lock
from typing import Optional

import numpy as np

VARIANTS = ("identity", "velocity", "rbf")

# Roundoff allowance for the positive-definiteness certificate. Gaussian
# kernel matrices are positive definite in exact arithmetic but their
# trailing eigenvalues underflow to ~ -1e-15 for wide sigma, so the
# Cholesky check runs on entries + jitter*I while the stored entries stay
# exact.
_PD_JITTER_SCALE = 64.0


class KernelError(ValueError):
    """Invalid kernel request or numerically non-positive-definite matrix."""


@dataclass(frozen=True, eq=False)
class PropagationKernel:
    """Symmetric positive-definite matrix over the T-1 interior timepoints.

    ``entries[i, j]`` couples interior timepoints i+1 and j+1. The array is
    read-only; kernels are shared across threads and cached by
    (variant, T, sigma).
    """

    variant: str
    size: int
    entries: np.ndarray
    sigma: Optional[float] = None

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def T(self) -> int:
        return self.size + 1

    def column(self, t: int) -> np.ndarray:
        """Kernel column for trajectory timepoint t (1 <= t <= size)."""
        if not 1 <= t <= self.size:
            raise KernelError(f"timepoint {t} outside interior range 1..{self.size}")
        return self.entries[:, t - 1]


_cache: dict[tuple[str, int, Optional[float]], PropagationKernel] = {}
_cache_lock = Lock()


def velocity_matrix(n: int) -> np.ndarray:
    """The n x n sum-squared-velocity matrix: 2 on the diagonal, -1 adjacent."""
    A = np.diag(np.full(n, 2.0))
    A -= np.diag(np.ones(n - 1), 1)
    A -= np.diag(np.ones(n - 1), -1)
    return A


def _certify_positive_definite(entries: np.ndarray, variant: str, sigma, n: int) -> None:
    # Cholesky on a jittered copy: accepts matrices that are PD up to
    # roundoff, rejects genuinely indefinite ones. The jitter never touches
    # the stored entries.
    jitter = _PD_JITTER_SCALE * np.finfo(float).eps * n
    try:
        np.linalg.cholesky(entries + jitter * np.eye(n))
    except np.linalg.LinAlgError:
        raise KernelError(
            f"{variant} kernel is not numerically positive definite "
            f"(sigma={sigma}, interior size n={n})"
        ) from None


def make_kernel(variant: str, T: int, sigma: Optional[float] = None) -> PropagationKernel:
    """Build (or fetch from cache) the propagation kernel for a T-segment trajectory.

    Args:
        variant: one of "identity", "velocity", "rbf".
        T: final timepoint index; the kernel covers the n = T-1 interior points.
        sigma: propagation width in timestep units. Required for "rbf",
            rejected otherwise.

    Raises:
        KernelError: unknown variant, T < 2, missing/invalid sigma, or an
            rbf matrix that fails the positive-definiteness certificate.
    """
    variant = str(variant).lower()
    if variant not in VARIANTS:
        raise KernelError(f"unknown kernel variant {variant!r}; expected one of {VARIANTS}")
    if T < 2:
        raise KernelError(f"T must be >= 2 (at least one interior timepoint), got {T}")
    if variant == "rbf":
        if sigma is None:
            raise KernelError("rbf kernel requires sigma")
        sigma = float(sigma)
        if not sigma > 0:
            raise KernelError(f"sigma must be positive, got {sigma}")
    elif sigma is not None:
        raise KernelError(f"sigma is only meaningful for the rbf variant, got {variant}")

    key = (variant, int(T), sigma)
    kernel = _cache.get(key)
    if kernel is not None:
        return kernel

    n = T - 1
    if variant == "identity":
        entries = np.eye(n)
    elif variant == "velocity":
        inv = np.linalg.inv(velocity_matrix(n))
        entries = 0.5 * (inv + inv.T)
    else:
        idx = np.arange(1, T, dtype=float)
        entries = np.exp(-((idx[:, None] - idx[None, :]) ** 2) / (2.0 * sigma**2))
        _certify_positive_definite(entries, variant, sigma, n)

    kernel = PropagationKernel(variant=variant, size=n, entries=entries, sigma=sigma)
    with _cache_lock:
        return _cache.setdefault(key, kernel)


def deformation_profile(kernel: PropagationKernel, t: int) -> np.ndarray:
    """Unit-correction deformation shape over the interior timepoints.

    Entry i is how far interior timepoint i+1 moves when timepoint t is
    corrected by one unit: kernel column t divided by its diagonal entry,
    so the value at t itself is exactly 1.
    """
    col = kernel.column(t)
    return col / kernel.entries[t - 1, t - 1]
