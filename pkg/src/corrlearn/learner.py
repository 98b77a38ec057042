"""Online weight learning from extrapolated corrections.

Each iteration plans with the current weight estimate, obtains a
single-waypoint correction, extrapolates it to a full intended trajectory
through the propagation kernel, and steps the weights against the feature
difference:

    w_next = w - beta * (phi(corrected) - phi(planned))

Weights start at zero, there is no projection or extra regularization,
and the loop stops early if the correction source reports that the
planned trajectory is already satisfactory.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import serialize
from .deform import deform
from .envs import Environment, features, normalized_cost
from .kernels import PropagationKernel
from .planner import PlannerConfig, plan
from .trajectory import Correction, Trajectory

CorrectionSource = Callable[[Trajectory], Optional[Correction]]


@dataclass(frozen=True, eq=False)
class LearnerState:
    """Current weight estimate plus the loop's fixed learning knobs."""

    w: np.ndarray
    iteration: int
    beta: float
    kernel: PropagationKernel

    def __post_init__(self) -> None:
        w = np.array(self.w, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if self.iteration < 0:
            raise ValueError(f"iteration must be >= 0, got {self.iteration}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


def initial_state(num_features: int, beta: float, kernel: PropagationKernel) -> LearnerState:
    """Fresh state with zero weights at iteration 0."""
    return LearnerState(w=np.zeros(num_features), iteration=0, beta=beta, kernel=kernel)


@dataclass(frozen=True, eq=False)
class TraceRecord:
    """Everything observable about one learning iteration."""

    iteration: int
    w_before: np.ndarray
    w_after: np.ndarray
    planned: Trajectory
    correction: Correction
    corrected: Trajectory
    phi_planned: np.ndarray
    phi_corrected: np.ndarray
    normalized_cost: Optional[float]

    def to_json_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "w_before": self.w_before.tolist(),
            "w_after": self.w_after.tolist(),
            "planned": self.planned.waypoints.tolist(),
            "correction": {"t": self.correction.t, "q": self.correction.q.tolist()},
            "corrected": self.corrected.waypoints.tolist(),
            "phi_planned": self.phi_planned.tolist(),
            "phi_corrected": self.phi_corrected.tolist(),
            "normalized_cost": self.normalized_cost,
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "TraceRecord":
        return TraceRecord(
            iteration=int(doc["iteration"]),
            w_before=np.array(doc["w_before"], dtype=float),
            w_after=np.array(doc["w_after"], dtype=float),
            planned=Trajectory(doc["planned"]),
            correction=Correction(t=doc["correction"]["t"], q=doc["correction"]["q"]),
            corrected=Trajectory(doc["corrected"]),
            phi_planned=np.array(doc["phi_planned"], dtype=float),
            phi_corrected=np.array(doc["phi_corrected"], dtype=float),
            normalized_cost=(
                None if doc["normalized_cost"] is None else float(doc["normalized_cost"])
            ),
        )


@dataclass(eq=False)
class LearningTrace:
    """Append-only record of a learning run."""

    records: list[TraceRecord]

    def __len__(self) -> int:
        return len(self.records)

    def validate(self) -> None:
        """Check iteration contiguity and weight chaining between records."""
        for i, rec in enumerate(self.records):
            if rec.iteration != i + 1:
                raise ValueError(f"record {i} has iteration {rec.iteration}, expected {i + 1}")
            if i > 0 and not np.array_equal(self.records[i - 1].w_after, rec.w_before):
                raise ValueError(f"w_after of record {i - 1} does not chain into record {i}")

    def to_jsonl(self) -> str:
        return "".join(serialize.dumps(rec.to_json_dict()) + "\n" for rec in self.records)

    def write_jsonl(self, path: Path | str) -> None:
        Path(path).write_text(self.to_jsonl())

    @staticmethod
    def from_jsonl(text: str) -> "LearningTrace":
        records = [
            TraceRecord.from_json_dict(serialize.loads(line))
            for line in text.splitlines()
            if line.strip()
        ]
        return LearningTrace(records)


def update_weights(
    w: np.ndarray, phi_corrected: np.ndarray, phi_planned: np.ndarray, beta: float
) -> np.ndarray:
    """One co-active step: w - beta * (phi_corrected - phi_planned)."""
    w = np.asarray(w, dtype=float)
    phi_corrected = np.asarray(phi_corrected, dtype=float)
    phi_planned = np.asarray(phi_planned, dtype=float)
    if not (w.shape == phi_corrected.shape == phi_planned.shape):
        raise ValueError(
            f"shape mismatch: w {w.shape}, phi_corrected {phi_corrected.shape}, "
            f"phi_planned {phi_planned.shape}"
        )
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return w - beta * (phi_corrected - phi_planned)


def run_iteration(
    state: LearnerState,
    env: Environment,
    correction_source: CorrectionSource,
    planner_cfg: Optional[PlannerConfig] = None,
    planned: Optional[Trajectory] = None,
) -> tuple[LearnerState, Optional[TraceRecord]]:
    """Execute one learning iteration.

    Plans with the current weights (or reuses ``planned``, which callers may
    pass when they already hold this iteration's plan), asks the source for
    a correction, extrapolates it, and updates the weights. Returns the new
    state and the trace record, or ``(state, None)`` unchanged when the
    source signals it is satisfied.
    """
    xi = planned if planned is not None else plan(env, state.w, planner_cfg)
    correction = correction_source(xi)
    if correction is None:
        return state, None

    corrected, _ = deform(xi, correction, state.kernel)
    phi_planned = features(xi, env)
    phi_corrected = features(corrected, env)
    w_next = update_weights(state.w, phi_corrected, phi_planned, state.beta)

    record = TraceRecord(
        iteration=state.iteration + 1,
        w_before=state.w,
        w_after=w_next,
        planned=xi,
        correction=correction,
        corrected=corrected,
        phi_planned=phi_planned,
        phi_corrected=phi_corrected,
        normalized_cost=(normalized_cost(xi, env) if env.ground_truth is not None else None),
    )
    next_state = LearnerState(
        w=w_next, iteration=state.iteration + 1, beta=state.beta, kernel=state.kernel
    )
    return next_state, record


def run_loop(
    env: Environment,
    kernel: PropagationKernel,
    beta: float,
    iterations: int,
    correction_source: CorrectionSource,
    planner_cfg: Optional[PlannerConfig] = None,
    warm_start: bool = False,
) -> LearningTrace:
    """Run up to ``iterations`` learning iterations from zero weights.

    Deterministic whenever the correction source is. ``warm_start`` seeds
    each plan from the previous iteration's plan instead of the straight
    line (off by default so every iteration is a pure function of its
    weights).
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    state = initial_state(env.num_features, beta, kernel)
    records: list[TraceRecord] = []
    previous: Optional[Trajectory] = None
    for _ in range(iterations):
        xi = plan(env, state.w, planner_cfg, warm_start=previous if warm_start else None)
        state, record = run_iteration(state, env, correction_source, planner_cfg, planned=xi)
        if record is None:
            break
        records.append(record)
        previous = xi
    return LearningTrace(records)
