import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from corrlearn.bench import (
    DEFAULT_BETA_GRID,
    SWEEP_PLANNER,
    KernelChoice,
    LearningTrace,
    SweepSpec,
    check_outputs,
    cost_curve,
    env_seed_for,
    run_single,
    run_sweep,
    tune_beta,
)
from corrlearn.cli import main as cli_main
from corrlearn.envgen import generate_environment


SMALL_SPEC = SweepSpec(
    feature_counts=(1, 2),
    instance_counts=(1,),
    envs_per_cell=4,
    kernels=(KernelChoice("identity"), KernelChoice("velocity")),
    betas=((0.1, 0.5), (0.1, 0.5)),
    iterations=4,
    base_seed=7,
)


@pytest.fixture(scope="module")
def small_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    return run_sweep(SMALL_SPEC, out), out


class TestSeeds:
    def test_env_seed_stable_golden_value(self):
        # Frozen so accidental changes to the derivation are caught.
        assert env_seed_for(0, 1, 1, 0) == 3108398236813484367

    def test_env_seed_distinct_across_cells(self):
        seeds = {
            env_seed_for(0, F, M, i) for F in (1, 2, 5) for M in (1, 2) for i in range(5)
        }
        assert len(seeds) == 3 * 2 * 5


class TestCostCurve:
    def test_padding_carries_last_value(self, small_env):
        trace = run_single(small_env, KernelChoice("velocity"), 0.5, 3, "largest", SWEEP_PLANNER, 1)
        curve = cost_curve(trace, 6)
        assert len(curve) == 6
        assert curve[3:] == [curve[2]] * 3

    def test_empty_trace_pads_with_straight_line_cost(self):
        assert cost_curve(LearningTrace(records=[]), 4) == [1.0, 1.0, 1.0, 1.0]


class TestTuneBeta:
    def test_singleton_grid_returned(self, fast_gen):
        envs = [generate_environment(1, 1, 12, fast_gen)]
        assert tune_beta(envs, KernelChoice("velocity"), [0.3], 3) == 0.3

    def test_identical_medians_pick_smallest(self, fast_gen):
        # One iteration always plans with zero weights, so every rate
        # produces the same (straight-line) final cost.
        envs = [generate_environment(1, 1, 12, fast_gen)]
        best = tune_beta(envs, KernelChoice("velocity"), [0.5, 0.1, 1.0], 1)
        assert best == 0.1

    def test_empty_grid_rejected(self, fast_gen):
        with pytest.raises(ValueError, match="grid"):
            tune_beta([], KernelChoice("velocity"), [], 3)


class TestRunSweep:
    def test_shape_of_aggregate(self, small_sweep):
        result, out = small_sweep
        lines = result_aggregate_lines(out)
        # 2 cells x 2 kernels x 4 iterations data rows.
        assert len(lines) == 2 * 2 * 4
        header = (out / "aggregate.csv").read_text().splitlines()[0]
        assert header == "num_types,instances,variant,sigma,beta,iteration,median_cost"

    def test_runs_complete(self, small_sweep):
        result, _ = small_sweep
        assert len(result.runs) == 2 * 2 * 2 * 4  # cells x kernels x betas x envs
        assert result.ok

    def test_byte_identical_re_execution(self, small_sweep, tmp_path):
        _, out = small_sweep
        run_sweep(SMALL_SPEC, tmp_path)
        for name in ("traces.jsonl", "aggregate.csv", "selection.csv", "failures.csv"):
            assert (tmp_path / name).read_bytes() == (out / name).read_bytes(), name

    def test_parallel_execution_identical(self, small_sweep, tmp_path):
        _, out = small_sweep
        run_sweep(SMALL_SPEC, tmp_path, jobs=2)
        for name in ("traces.jsonl", "aggregate.csv", "selection.csv"):
            assert (tmp_path / name).read_bytes() == (out / name).read_bytes(), name

    def test_check_outputs_accepts_fresh_sweep(self, small_sweep):
        _, out = small_sweep
        assert check_outputs(out) == []

    def test_check_outputs_detects_tampering(self, small_sweep, tmp_path):
        _, out = small_sweep
        for f in ("traces.jsonl", "aggregate.csv", "selection.csv"):
            (tmp_path / f).write_text((out / f).read_text())
        text = (tmp_path / "aggregate.csv").read_text().splitlines()
        text[1] = text[1].rsplit(",", 1)[0] + ",0.123"
        (tmp_path / "aggregate.csv").write_text("\n".join(text) + "\n")
        assert check_outputs(tmp_path) != []

    def test_failures_recorded_and_sweep_continues(self, tmp_path):
        spec = SweepSpec(
            feature_counts=(1,),
            instance_counts=(1,),
            envs_per_cell=2,
            kernels=(KernelChoice("velocity"), KernelChoice("rbf", None)),  # rbf needs sigma
            betas=((0.1,), (0.1,)),
            iterations=2,
            base_seed=3,
        )
        result = run_sweep(spec, tmp_path)
        assert len(result.failures) == 2  # both rbf envs fail
        assert len(result.runs) == 2  # velocity runs survive
        failures_text = (tmp_path / "failures.csv").read_text()
        assert "requires sigma" in failures_text
        for failure in result.failures:
            assert failure.env_seed in {env_seed_for(3, 1, 1, 0), env_seed_for(3, 1, 1, 1)}

    def test_plot_data_emitted_on_request(self, tmp_path):
        run_sweep(SMALL_SPEC, tmp_path, emit_plot_data=True)
        lines = (tmp_path / "plot_data.csv").read_text().splitlines()
        assert lines[0] == "panel,num_types,instances,kernel,iteration,median_cost"
        assert lines[1].startswith("F1M1,1,1,")


class TestSpecSerialization:
    def test_round_trip(self):
        doc = SMALL_SPEC.to_json_dict()
        assert SweepSpec.from_json_dict(doc) == SMALL_SPEC

    def test_defaults_fill_missing_fields(self):
        spec = SweepSpec.from_json_dict({})
        assert spec == SweepSpec()

    def test_partial_planner_override(self):
        spec = SweepSpec.from_json_dict({"gen": {"planner": {"T": 12}}})
        assert spec.gen.planner.T == 12
        assert spec.gen.planner.step == SWEEP_PLANNER.step

    def test_custom_kernels_get_full_grid(self):
        spec = SweepSpec.from_json_dict({"kernels": [{"variant": "rbf", "sigma": 3.0}]})
        assert spec.kernels == (KernelChoice("rbf", 3.0),)
        assert spec.betas == (DEFAULT_BETA_GRID,)


def result_aggregate_lines(out_dir: Path) -> list[str]:
    return [l for l in (out_dir / "aggregate.csv").read_text().splitlines()[1:] if l]


class TestCli:
    def test_env_gen_and_show_round_trip(self, tmp_path):
        runner = CliRunner()
        path = tmp_path / "env.json"
        result = runner.invoke(
            cli_main,
            ["env", "gen", "--features", "2", "--instances", "1", "--seed", "5", "--out", str(path)],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(path.read_text())
        assert doc["num_types"] == 2 and len(doc["obstacles"]) == 2

        shown = runner.invoke(cli_main, ["env", "show", str(path)])
        assert shown.exit_code == 0
        assert "types=2" in shown.output

    def test_sweep_command_with_spec_file(self, tmp_path):
        runner = CliRunner()
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(SMALL_SPEC.to_json_dict()))
        out_dir = tmp_path / "out"
        result = runner.invoke(
            cli_main, ["sweep", "--spec", str(spec_path), "--out-dir", str(out_dir)]
        )
        assert result.exit_code == 0, result.output
        assert (out_dir / "aggregate.csv").exists()

        checked = runner.invoke(cli_main, ["check", "--out-dir", str(out_dir)])
        assert checked.exit_code == 0, checked.output

    def test_sweep_partial_failure_exits_2(self, tmp_path):
        spec = SweepSpec(
            feature_counts=(1,),
            instance_counts=(1,),
            envs_per_cell=1,
            kernels=(KernelChoice("velocity"), KernelChoice("rbf", None)),
            betas=((0.1,), (0.1,)),
            iterations=2,
        )
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec.to_json_dict()))
        runner = CliRunner()
        result = runner.invoke(
            cli_main, ["sweep", "--spec", str(spec_path), "--out-dir", str(tmp_path / "o")]
        )
        assert result.exit_code == 2

    def test_tune_command(self):
        runner = CliRunner()
        result = runner.invoke(
            cli_main,
            ["tune", "--kernel", "velocity", "--grid", "0.5", "--features", "1",
             "--instances", "1", "--envs", "2", "--iters", "2"],
        )
        assert result.exit_code == 0, result.output
        assert "best beta for velocity: 0.5" in result.output

    def test_seed_override_changes_output(self, tmp_path):
        runner = CliRunner()
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(SMALL_SPEC.to_json_dict()))
        a, b = tmp_path / "a", tmp_path / "b"
        runner.invoke(cli_main, ["sweep", "--spec", str(spec_path), "--out-dir", str(a)])
        runner.invoke(
            cli_main, ["sweep", "--spec", str(spec_path), "--out-dir", str(b), "--seed", "99"]
        )
        assert (a / "traces.jsonl").read_bytes() != (b / "traces.jsonl").read_bytes()
