"""Learning trajectory cost functions from single-waypoint corrections.

The package plans trajectories against linear obstacle-proximity costs,
extrapolates a user's single-waypoint correction to a full intended
trajectory via selectable propagation kernels (identity, velocity, RBF),
and updates the cost weights online from the feature difference. A
benchmark harness sweeps kernels across environment complexities, and an
HTTP service exposes the loop for interactive correction.
"""

from .deform import Deformation, DeformError, deform
from .envgen import EnvironmentRejected, GenConfig, attach_ground_truth, generate_environment
from .envs import (
    Environment,
    GroundTruth,
    Obstacle,
    cost,
    cost_gradient,
    feature_gradients,
    features,
    normalized_cost,
    true_cost,
)
from .kernels import KernelError, PropagationKernel, deformation_profile, make_kernel
from .learner import (
    LearnerState,
    LearningTrace,
    TraceRecord,
    initial_state,
    run_iteration,
    run_loop,
    update_weights,
)
from .planner import PlannerConfig, PlannerError, plan, straight_line
from .simuser import SimUserConfig, make_simulated_user, simulate_correction
from .trajectory import Correction, Trajectory

__all__ = [
    "Correction",
    "Deformation",
    "DeformError",
    "Environment",
    "EnvironmentRejected",
    "GenConfig",
    "GroundTruth",
    "KernelError",
    "LearnerState",
    "LearningTrace",
    "Obstacle",
    "PlannerConfig",
    "PlannerError",
    "PropagationKernel",
    "SimUserConfig",
    "TraceRecord",
    "Trajectory",
    "attach_ground_truth",
    "cost",
    "cost_gradient",
    "deform",
    "deformation_profile",
    "feature_gradients",
    "features",
    "generate_environment",
    "initial_state",
    "make_kernel",
    "make_simulated_user",
    "normalized_cost",
    "plan",
    "run_iteration",
    "run_loop",
    "simulate_correction",
    "straight_line",
    "true_cost",
    "update_weights",
]
