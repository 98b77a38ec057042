"""Simulation-study harness: seeded environment sweeps with per-kernel tuning.

A sweep runs the learning loop for every combination of environment cell
(number of obstacle types x instances per type), propagation kernel, and
learning rate, over a set of seeded environments per cell. It emits the
full per-run trace set as JSONL plus an aggregate CSV of median
normalized cost per iteration, where each (cell, kernel) row uses that
kernel's best learning rate (lowest median final cost, ties to the
smaller rate). All outputs are byte-deterministic in the base seed, and
the aggregates can be recomputed from the traces by check_outputs.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import serialize
from .envgen import GenConfig, generate_environment
from .envs import Environment
from .kernels import make_kernel
from .learner import LearningTrace, run_loop
from .planner import PlannerConfig
from .simuser import SimUserConfig, make_simulated_user

DEFAULT_BETA_GRID = (0.02, 0.05, 0.1, 0.2, 0.5, 1.0)

# Sweeps run tens of thousands of plans, so their default planner profile
# trades trajectory resolution and a tight tolerance for speed. The
# learning dynamics are self-consistent for any fixed profile because the
# ground-truth anchors are planned with the same configuration.
SWEEP_PLANNER = PlannerConfig(T=30, smooth_mu=0.5, step=0.5, max_iters=150, tol=1e-5)

TRACES_NAME = "traces.jsonl"
AGGREGATE_NAME = "aggregate.csv"
SELECTION_NAME = "selection.csv"
FAILURES_NAME = "failures.csv"
PLOT_NAME = "plot_data.csv"


@dataclass(frozen=True)
class KernelChoice:
    """A kernel variant plus sigma, independent of trajectory length."""

    variant: str
    sigma: Optional[float] = None

    @property
    def label(self) -> str:
        if self.variant == "rbf":
            return f"rbf{self.sigma:g}"
        return self.variant

    def build(self, T: int):
        return make_kernel(self.variant, T, self.sigma)


DEFAULT_KERNELS = (
    KernelChoice("identity"),
    KernelChoice("velocity"),
    KernelChoice("rbf", 1.0),
    KernelChoice("rbf", 5.0),
)

# Rates the grid search lands on for the default kernels over the simple
# cells; used when a spec does not bring its own learning-rate lists so
# the stock sweep stays single-rate and brisk.
DEFAULT_TUNED_BETAS = ((1.0,), (1.0,), (1.0,), (1.0,))


@dataclass(frozen=True)
class SweepSpec:
    """Full description of a sweep; serializable so runs are reproducible."""

    feature_counts: tuple[int, ...] = (1, 2, 5)
    instance_counts: tuple[int, ...] = (1, 2, 5)
    envs_per_cell: int = 25
    kernels: tuple[KernelChoice, ...] = DEFAULT_KERNELS
    betas: tuple[tuple[float, ...], ...] = DEFAULT_TUNED_BETAS
    iterations: int = 20
    base_seed: int = 0
    strategy: str = "largest"
    gen: GenConfig = field(default_factory=lambda: GenConfig(planner=SWEEP_PLANNER))

    def __post_init__(self) -> None:
        if not (self.feature_counts and self.instance_counts and self.kernels):
            raise ValueError("feature_counts, instance_counts, and kernels must be non-empty")
        if len(self.betas) != len(self.kernels):
            raise ValueError("betas must provide one learning-rate list per kernel")
        if not all(self.betas):
            raise ValueError("every kernel needs at least one beta")
        if self.envs_per_cell < 1 or self.iterations < 1:
            raise ValueError("envs_per_cell and iterations must be >= 1")

    def to_json_dict(self) -> dict:
        return {
            "feature_counts": list(self.feature_counts),
            "instance_counts": list(self.instance_counts),
            "envs_per_cell": self.envs_per_cell,
            "kernels": [
                {"variant": k.variant, **({"sigma": k.sigma} if k.sigma is not None else {})}
                for k in self.kernels
            ],
            "betas": [list(b) for b in self.betas],
            "iterations": self.iterations,
            "base_seed": self.base_seed,
            "strategy": self.strategy,
            "gen": {
                "radius": self.gen.radius,
                "box_low": self.gen.box_low,
                "box_high": self.gen.box_high,
                "start": list(self.gen.start),
                "goal": list(self.gen.goal),
                "planner": {
                    "T": self.gen.planner.T,
                    "smooth_mu": self.gen.planner.smooth_mu,
                    "step": self.gen.planner.step,
                    "max_iters": self.gen.planner.max_iters,
                    "tol": self.gen.planner.tol,
                },
            },
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "SweepSpec":
        defaults = SweepSpec()
        kernels = tuple(
            KernelChoice(k["variant"], k.get("sigma")) for k in doc.get("kernels", [])
        ) or defaults.kernels
        if "betas" in doc:
            betas = tuple(tuple(float(b) for b in row) for row in doc["betas"])
        elif kernels == defaults.kernels:
            betas = defaults.betas
        else:
            betas = tuple(DEFAULT_BETA_GRID for _ in kernels)
        gen_doc = doc.get("gen", {})
        planner_doc = gen_doc.get("planner", {})
        planner = replace(SWEEP_PLANNER, **planner_doc) if planner_doc else SWEEP_PLANNER
        gen = GenConfig(
            radius=float(gen_doc.get("radius", 1.0)),
            box_low=float(gen_doc.get("box_low", 0.0)),
            box_high=float(gen_doc.get("box_high", 10.0)),
            start=tuple(gen_doc.get("start", (0.0, 5.0))),
            goal=tuple(gen_doc.get("goal", (10.0, 5.0))),
            planner=planner,
        )
        return SweepSpec(
            feature_counts=tuple(int(f) for f in doc.get("feature_counts", defaults.feature_counts)),
            instance_counts=tuple(int(m) for m in doc.get("instance_counts", defaults.instance_counts)),
            envs_per_cell=int(doc.get("envs_per_cell", defaults.envs_per_cell)),
            kernels=kernels,
            betas=betas,
            iterations=int(doc.get("iterations", defaults.iterations)),
            base_seed=int(doc.get("base_seed", defaults.base_seed)),
            strategy=str(doc.get("strategy", defaults.strategy)),
            gen=gen,
        )


def env_seed_for(base_seed: int, num_types: int, instances: int, index: int) -> int:
    """Stable per-environment seed derived from the sweep seed and cell."""
    ss = np.random.SeedSequence(entropy=[int(base_seed), int(num_types), int(instances), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def cell_environments(spec: SweepSpec, num_types: int, instances: int) -> list[Environment]:
    return [
        generate_environment(
            num_types, instances, env_seed_for(spec.base_seed, num_types, instances, i), spec.gen
        )
        for i in range(spec.envs_per_cell)
    ]


def run_single(
    env: Environment,
    kernel: KernelChoice,
    beta: float,
    iterations: int,
    strategy: str,
    planner_cfg: PlannerConfig,
    user_seed: int,
) -> LearningTrace:
    """One learning run against the simulated user."""
    built = kernel.build(planner_cfg.T)
    source = make_simulated_user(
        env.ground_truth.optimal, SimUserConfig(strategy=strategy, seed=user_seed)
    )
    return run_loop(env, built, beta, iterations, source, planner_cfg)


def cost_curve(trace: LearningTrace, iterations: int) -> list[float]:
    """Per-iteration normalized planned cost, padded for early-stopped runs.

    A run that stops early keeps reporting its last observed cost (the
    plan no longer changes once the user is satisfied); a run that stops
    before producing any record was already at the straight line, cost 1.
    """
    observed = [rec.normalized_cost for rec in trace.records]
    if any(c is None for c in observed):
        raise ValueError("cost curve requires traces with normalized costs")
    return _pad_curve(observed, iterations)


def _pad_curve(observed: Sequence[float], iterations: int) -> list[float]:
    out: list[float] = []
    for i in range(iterations):
        if i < len(observed):
            out.append(float(observed[i]))
        elif observed:
            out.append(float(observed[-1]))
        else:
            out.append(1.0)
    return out


@dataclass(frozen=True)
class RunSummary:
    """Cost curve of one run; the full trace lives in the JSONL output."""

    num_types: int
    instances: int
    kernel: KernelChoice
    beta: float
    env_index: int
    env_seed: int
    costs: tuple[float, ...]


@dataclass(frozen=True)
class FailureRow:
    num_types: int
    instances: int
    kernel: KernelChoice
    beta: float
    env_seed: int
    error: str


@dataclass
class SweepResult:
    spec: SweepSpec
    runs: list[RunSummary]
    failures: list[FailureRow]
    out_dir: Path

    @property
    def ok(self) -> bool:
        return not self.failures

    def median_curve(self, num_types, instances, kernel, beta) -> list[float]:
        curves = [
            r.costs
            for r in self.runs
            if (r.num_types, r.instances, r.kernel, r.beta)
            == (num_types, instances, kernel, beta)
        ]
        if not curves:
            raise KeyError((num_types, instances, kernel, beta))
        return np.median(np.array(curves), axis=0).tolist()


def _run_unit(args: tuple) -> tuple[str, list[RunSummary], list[FailureRow]]:
    """Worker: all runs for one (cell, kernel); returns this unit's JSONL chunk."""
    spec, num_types, instances, kernel_index = args
    kernel = spec.kernels[kernel_index]
    chunk: list[str] = []
    summaries: list[RunSummary] = []
    failures: list[FailureRow] = []
    for index in range(spec.envs_per_cell):
        seed = env_seed_for(spec.base_seed, num_types, instances, index)
        try:
            env = generate_environment(num_types, instances, seed, spec.gen)
        except Exception as exc:  # noqa: BLE001 - cell failures must not kill the sweep
            for beta in spec.betas[kernel_index]:
                failures.append(_failure(num_types, instances, kernel, beta, seed, exc))
            continue
        for beta in spec.betas[kernel_index]:
            try:
                trace = run_single(
                    env, kernel, beta, spec.iterations, spec.strategy, spec.gen.planner, seed
                )
            except Exception as exc:  # noqa: BLE001
                failures.append(_failure(num_types, instances, kernel, beta, seed, exc))
                continue
            chunk.append(
                serialize.dumps(
                    {
                        "num_types": num_types,
                        "instances": instances,
                        "variant": kernel.variant,
                        "sigma": kernel.sigma,
                        "beta": beta,
                        "env_index": index,
                        "env_seed": seed,
                        "records": [rec.to_json_dict() for rec in trace.records],
                    }
                )
                + "\n"
            )
            summaries.append(
                RunSummary(
                    num_types=num_types,
                    instances=instances,
                    kernel=kernel,
                    beta=beta,
                    env_index=index,
                    env_seed=seed,
                    costs=tuple(cost_curve(trace, spec.iterations)),
                )
            )
    return "".join(chunk), summaries, failures


def _failure(num_types, instances, kernel, beta, seed, exc) -> FailureRow:
    return FailureRow(
        num_types=num_types,
        instances=instances,
        kernel=kernel,
        beta=beta,
        env_seed=seed,
        error=f"{type(exc).__name__}: {exc}",
    )


def run_sweep(
    spec: SweepSpec,
    out_dir: Path | str,
    jobs: int = 1,
    emit_plot_data: bool = False,
) -> SweepResult:
    """Execute the sweep and write traces, aggregates, and failure reports.

    Cells are independent; with jobs > 1 they execute in a process pool.
    Outputs are identical regardless of job count: results are reduced in
    (cell, kernel, beta, environment) order, never completion order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    units = [
        (spec, num_types, instances, kernel_index)
        for num_types in spec.feature_counts
        for instances in spec.instance_counts
        for kernel_index in range(len(spec.kernels))
    ]

    summaries: list[RunSummary] = []
    failures: list[FailureRow] = []
    with open(out / TRACES_NAME, "w") as traces_file:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for chunk, unit_summaries, unit_failures in pool.map(_run_unit, units):
                    traces_file.write(chunk)
                    summaries.extend(unit_summaries)
                    failures.extend(unit_failures)
        else:
            for unit in units:
                chunk, unit_summaries, unit_failures = _run_unit(unit)
                traces_file.write(chunk)
                summaries.extend(unit_summaries)
                failures.extend(unit_failures)

    aggregate_csv, selection_csv, plot_csv = _aggregate_csvs(spec, summaries, emit_plot_data)
    (out / AGGREGATE_NAME).write_text(aggregate_csv)
    (out / SELECTION_NAME).write_text(selection_csv)
    (out / FAILURES_NAME).write_text(_failures_csv(failures))
    if plot_csv is not None:
        (out / PLOT_NAME).write_text(plot_csv)

    return SweepResult(spec=spec, runs=summaries, failures=failures, out_dir=out)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return serialize.format_float(value)
    return str(value)


def _median_curves(
    spec: SweepSpec, runs: Sequence[RunSummary]
) -> dict[tuple[int, int, int, float], list[float]]:
    """Median cost per iteration for every (cell, kernel, beta) group."""
    kernel_index = {k: i for i, k in enumerate(spec.kernels)}
    grouped: dict[tuple[int, int, int, float], list[tuple[float, ...]]] = {}
    for run in runs:
        key = (run.num_types, run.instances, kernel_index[run.kernel], run.beta)
        grouped.setdefault(key, []).append(run.costs)
    return {
        key: np.median(np.array(curves), axis=0).tolist() for key, curves in grouped.items()
    }


def _aggregate_csvs(
    spec: SweepSpec, runs: Sequence[RunSummary], emit_plot_data: bool
) -> tuple[str, str, Optional[str]]:
    curves = _median_curves(spec, runs)

    selection_lines = ["num_types,instances,variant,sigma,beta,final_median_cost"]
    best: dict[tuple[int, int, int], tuple[float, float]] = {}
    for num_types in spec.feature_counts:
        for instances in spec.instance_counts:
            for k_idx, kernel in enumerate(spec.kernels):
                for beta in sorted(spec.betas[k_idx]):
                    curve = curves.get((num_types, instances, k_idx, beta))
                    if curve is None:
                        continue  # every run of this beta failed
                    final = curve[-1]
                    selection_lines.append(
                        f"{num_types},{instances},{kernel.variant},{_fmt(kernel.sigma)},"
                        f"{_fmt(beta)},{_fmt(final)}"
                    )
                    cell = (num_types, instances, k_idx)
                    if cell not in best or final < best[cell][1]:
                        best[cell] = (beta, final)

    aggregate_lines = ["num_types,instances,variant,sigma,beta,iteration,median_cost"]
    plot_lines = ["panel,num_types,instances,kernel,iteration,median_cost"]
    for num_types in spec.feature_counts:
        for instances in spec.instance_counts:
            for k_idx, kernel in enumerate(spec.kernels):
                cell = (num_types, instances, k_idx)
                if cell not in best:
                    continue
                beta = best[cell][0]
                curve = curves[(num_types, instances, k_idx, beta)]
                for i, value in enumerate(curve, start=1):
                    aggregate_lines.append(
                        f"{num_types},{instances},{kernel.variant},{_fmt(kernel.sigma)},"
                        f"{_fmt(beta)},{i},{_fmt(value)}"
                    )
                    plot_lines.append(
                        f"F{num_types}M{instances},{num_types},{instances},{kernel.label},"
                        f"{i},{_fmt(value)}"
                    )

    aggregate_csv = "\n".join(aggregate_lines) + "\n"
    selection_csv = "\n".join(selection_lines) + "\n"
    plot_csv = "\n".join(plot_lines) + "\n" if emit_plot_data else None
    return aggregate_csv, selection_csv, plot_csv


def _failures_csv(failures: Sequence[FailureRow]) -> str:
    lines = ["num_types,instances,variant,sigma,beta,env_seed,error"]
    for f in failures:
        error = f.error.replace('"', "'")
        lines.append(
            f"{f.num_types},{f.instances},{f.kernel.variant},{_fmt(f.kernel.sigma)},"
            f'{_fmt(f.beta)},{f.env_seed},"{error}"'
        )
    return "\n".join(lines) + "\n"


def tune_beta(
    envs: Sequence[Environment],
    kernel: KernelChoice,
    beta_grid: Sequence[float],
    iterations: int,
    strategy: str = "largest",
    planner_cfg: PlannerConfig = SWEEP_PLANNER,
) -> float:
    """Grid-search the learning rate for one kernel over an environment set.

    Returns the rate with the lowest median final-iteration normalized
    cost; exact ties go to the smaller rate.
    """
    if not beta_grid:
        raise ValueError("beta grid must be non-empty")
    best_beta: Optional[float] = None
    best_median: Optional[float] = None
    for beta in sorted(float(b) for b in beta_grid):
        finals = [
            cost_curve(
                run_single(env, kernel, beta, iterations, strategy, planner_cfg, env.seed),
                iterations,
            )[-1]
            for env in envs
        ]
        median = float(np.median(finals))
        if best_median is None or median < best_median:
            best_beta, best_median = beta, median
    return best_beta


def check_outputs(out_dir: Path | str) -> list[str]:
    """Recompute aggregates from the emitted traces and diff against the CSVs.

    Returns a list of human-readable mismatches; empty means the files are
    mutually consistent.
    """
    out = Path(out_dir)
    rows = [serialize.loads(line) for line in (out / TRACES_NAME).read_text().splitlines() if line]
    if not rows:
        return [f"{TRACES_NAME} is empty"]

    # The iteration count cannot be inferred from traces alone (runs may all
    # stop early), so take it from the aggregate being checked.
    aggregate_text = (out / AGGREGATE_NAME).read_text()
    iterations = max(
        (int(line.split(",")[5]) for line in aggregate_text.splitlines()[1:] if line),
        default=0,
    )
    if iterations < 1:
        return [f"{AGGREGATE_NAME} has no data rows"]

    kernels: list[KernelChoice] = []
    betas: dict[KernelChoice, set[float]] = {}
    feature_counts: list[int] = []
    instance_counts: list[int] = []
    for r in rows:
        k = KernelChoice(r["variant"], r["sigma"])
        if k not in kernels:
            kernels.append(k)
        betas.setdefault(k, set()).add(r["beta"])
        if r["num_types"] not in feature_counts:
            feature_counts.append(r["num_types"])
        if r["instances"] not in instance_counts:
            instance_counts.append(r["instances"])

    spec = SweepSpec(
        feature_counts=tuple(feature_counts),
        instance_counts=tuple(instance_counts),
        envs_per_cell=max(r["env_index"] for r in rows) + 1,
        kernels=tuple(kernels),
        betas=tuple(tuple(sorted(betas[k])) for k in kernels),
        iterations=iterations,
    )
    summaries = [
        RunSummary(
            num_types=r["num_types"],
            instances=r["instances"],
            kernel=KernelChoice(r["variant"], r["sigma"]),
            beta=r["beta"],
            env_index=r["env_index"],
            env_seed=r["env_seed"],
            costs=tuple(
                _pad_curve([rec["normalized_cost"] for rec in r["records"]], iterations)
            ),
        )
        for r in rows
    ]
    problems: list[str] = []
    aggregate_csv, selection_csv, _ = _aggregate_csvs(spec, summaries, emit_plot_data=False)
    if aggregate_csv != aggregate_text:
        problems.append(f"{AGGREGATE_NAME} does not match recomputation from traces")
    if selection_csv != (out / SELECTION_NAME).read_text():
        problems.append(f"{SELECTION_NAME} does not match recomputation from traces")
    return problems
