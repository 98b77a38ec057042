"""Command-line harness: environment tools, sweeps, tuning, and the service."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import serialize
from .bench import (
    DEFAULT_BETA_GRID,
    SWEEP_PLANNER,
    KernelChoice,
    SweepSpec,
    check_outputs,
    env_seed_for,
    run_sweep,
    tune_beta,
)
from .envgen import GenConfig, generate_environment
from .envs import from_json, to_json
from .planner import PlannerConfig


def parse_kernel(text: str) -> KernelChoice:
    """Parse "identity", "velocity", or "rbf:SIGMA"."""
    name, _, sigma = text.partition(":")
    return KernelChoice(name.strip().lower(), float(sigma) if sigma else None)


@click.group()
def main() -> None:
    """Benchmark and serve correction-based cost learning."""


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True, path_type=Path),
              help="Sweep spec JSON; defaults to the built-in desk-scale sweep.")
@click.option("--out-dir", type=click.Path(path_type=Path), default=Path("sweep-out"),
              show_default=True)
@click.option("--seed", type=int, default=None, help="Override the spec's base seed.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker processes; output bytes do not depend on this.")
@click.option("--emit-plot-data", is_flag=True, help="Also write long-format curve CSV.")
def sweep(spec_path, out_dir, seed, jobs, emit_plot_data) -> None:
    """Run the full simulation sweep and write traces + aggregates."""
    if spec_path is not None:
        spec = SweepSpec.from_json_dict(serialize.loads(spec_path.read_text()))
    else:
        spec = SweepSpec()
    if seed is not None:
        from dataclasses import replace

        spec = replace(spec, base_seed=seed)
    result = run_sweep(spec, out_dir, jobs=jobs, emit_plot_data=emit_plot_data)
    click.echo(f"{len(result.runs)} runs -> {out_dir}")
    if result.failures:
        click.echo(f"{len(result.failures)} cell failures (see failures.csv)", err=True)
        sys.exit(2)


@main.command()
@click.option("--kernel", required=True, help='Kernel, e.g. "velocity" or "rbf:3".')
@click.option("--grid", default=",".join(str(b) for b in DEFAULT_BETA_GRID),
              show_default=True, help="Comma-separated learning rates.")
@click.option("--features", "num_types", type=int, default=2, show_default=True)
@click.option("--instances", type=int, default=1, show_default=True)
@click.option("--envs", type=int, default=25, show_default=True)
@click.option("--iters", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--strategy", type=click.Choice(["largest", "anywhere"]), default="largest",
              show_default=True)
def tune(kernel, grid, num_types, instances, envs, iters, seed, strategy) -> None:
    """Grid-search the learning rate for one kernel on seeded environments."""
    choice = parse_kernel(kernel)
    betas = [float(b) for b in grid.split(",") if b.strip()]
    gen = GenConfig(planner=SWEEP_PLANNER)
    env_set = [
        generate_environment(num_types, instances, env_seed_for(seed, num_types, instances, i), gen)
        for i in range(envs)
    ]
    best = tune_beta(env_set, choice, betas, iters, strategy, gen.planner)
    click.echo(f"best beta for {choice.label}: {serialize.format_float(best)}")


@main.group()
def env() -> None:
    """Generate and inspect environments."""


@env.command("gen")
@click.option("--features", "num_types", type=int, required=True)
@click.option("--instances", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--radius", type=float, default=1.0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write the environment JSON here instead of stdout.")
def env_gen(num_types, instances, seed, radius, out) -> None:
    """Generate a seeded environment and print/write its JSON document."""
    generated = generate_environment(
        num_types, instances, seed, GenConfig(radius=radius, planner=SWEEP_PLANNER)
    )
    text = to_json(generated) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text)
        click.echo(f"wrote {out}")


@env.command("show")
@click.argument("path", type=click.Path(exists=True, path_type=Path))
def env_show(path) -> None:
    """Summarize an environment JSON document."""
    loaded = from_json(path.read_text())
    click.echo(f"dim={loaded.dim} types={loaded.num_types} obstacles={len(loaded.obstacles)}")
    click.echo(f"start={loaded.start.tolist()} goal={loaded.goal.tolist()} seed={loaded.seed}")
    click.echo(f"weights={loaded.ground_truth_w.tolist()}")
    for i, ob in enumerate(loaded.obstacles):
        click.echo(
            f"  obstacle {i}: type={ob.type_id} pos={ob.position.tolist()} radius={ob.radius}"
        )


@main.command()
@click.option("--out-dir", type=click.Path(exists=True, path_type=Path), required=True)
def check(out_dir) -> None:
    """Verify that sweep aggregates match a recomputation from the traces."""
    problems = check_outputs(out_dir)
    if problems:
        for p in problems:
            click.echo(p, err=True)
        sys.exit(1)
    click.echo("aggregates match traces")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8008, show_default=True)
@click.option("--ui-dir", type=click.Path(path_type=Path), default=None,
              help="Static UI bundle to serve at /.")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="JSON file with planner defaults, e.g. {\"T\": 40}.")
def serve(host, port, ui_dir, config_path) -> None:
    """Run the interactive correction service."""
    import uvicorn

    from .service import create_app

    planner_cfg = PlannerConfig()
    if config_path is not None:
        doc = serialize.loads(config_path.read_text())
        planner_cfg = PlannerConfig(**doc.get("planner", {}))
    app = create_app(planner_cfg=planner_cfg, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
