"""End-to-end command-line behavior: files written, exit codes, seeds."""

import dataclasses
import json

import pytest
from click.testing import CliRunner

from ctdnet.cli import main
from ctdnet.harness import ExperimentConfig, save_config
from ctdnet.presets import PRESETS


@pytest.fixture
def runner():
    return CliRunner()


def small_config(tmp_path, **overrides):
    base = dict(
        system="square",
        n=3,
        m=3,
        sigma_phi=0.3,
        sigma_psi=0.1,
        chain_depth=2,
        alpha=0.01,
        lam=1.0,
        steps=300,
        runs=2,
        base_seed=11,
        window=100,
        walk_std=0.1,
        noise_std=0.05,
    )
    base.update(overrides)
    path = tmp_path / "config.json"
    save_config(ExperimentConfig(**base), path)
    return path


class TestRunCommand:
    def test_writes_config_and_curve(self, runner, tmp_path):
        cfg = small_config(tmp_path)
        out = tmp_path / "out"
        result = runner.invoke(main, ["run", "--config", str(cfg), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "config.json").exists()
        header = (out / "curve.csv").read_text().splitlines()[0]
        assert header == "window_index,t_end,mean_rmse,se_rmse,runs"
        assert not (out / "per_run.csv").exists()

    def test_per_run_flag(self, runner, tmp_path):
        cfg = small_config(tmp_path)
        out = tmp_path / "out"
        result = runner.invoke(
            main, ["run", "--config", str(cfg), "--out", str(out), "--per-run-csv"]
        )
        assert result.exit_code == 0
        header = (out / "per_run.csv").read_text().splitlines()[0]
        assert header == "run,window_index,rmse"

    def test_missing_config_exits_2(self, runner, tmp_path):
        result = runner.invoke(main, ["run", "--config", str(tmp_path / "absent.json")])
        assert result.exit_code == 2
        assert "config error" in result.stderr

    def test_bad_key_exits_2(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"system": "square", "alfa": 0.01}))
        result = runner.invoke(main, ["run", "--config", str(path)])
        assert result.exit_code == 2

    def test_multi_depth_rejected_by_run(self, runner, tmp_path):
        cfg = small_config(tmp_path)
        result = runner.invoke(
            main, ["run", "--config", str(cfg), "--depth", "1,3", "--out", str(tmp_path)]
        )
        assert result.exit_code == 2
        assert "sweep-depth" in result.stderr

    def test_divergence_exits_3(self, runner, tmp_path):
        cfg = small_config(tmp_path, alpha=50.0, steps=3000, runs=1)
        result = runner.invoke(main, ["run", "--config", str(cfg), "--out", str(tmp_path)])
        assert result.exit_code == 3
        assert "divergence" in result.stderr

    def test_unwritable_output_exits_2(self, runner, tmp_path):
        cfg = small_config(tmp_path)
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        result = runner.invoke(
            main, ["run", "--config", str(cfg), "--out", str(blocker / "sub")]
        )
        assert result.exit_code == 2


class TestSeedResolution:
    def run_with(self, runner, tmp_path, extra_args=(), env=None):
        cfg = small_config(tmp_path, steps=100, runs=1)
        out = tmp_path / "seed_out"
        result = runner.invoke(
            main,
            ["run", "--config", str(cfg), "--out", str(out), *extra_args],
            env=env,
        )
        assert result.exit_code == 0, result.output
        return json.loads((out / "config.json").read_text())["base_seed"]

    def test_config_seed_used_by_default(self, runner, tmp_path):
        assert self.run_with(runner, tmp_path) == 11

    def test_env_seed_overrides_config(self, runner, tmp_path):
        assert self.run_with(runner, tmp_path, env={"CTDNET_SEED": "5"}) == 5

    def test_flag_overrides_env(self, runner, tmp_path):
        seed = self.run_with(
            runner, tmp_path, extra_args=["--seed", "7"], env={"CTDNET_SEED": "5"}
        )
        assert seed == 7

    def test_bad_env_seed_exits_2(self, runner, tmp_path):
        cfg = small_config(tmp_path, steps=100, runs=1)
        result = runner.invoke(
            main,
            ["run", "--config", str(cfg), "--out", str(tmp_path)],
            env={"CTDNET_SEED": "abc"},
        )
        assert result.exit_code == 2


class TestSweepDepth:
    def test_writes_per_depth_and_summary(self, runner, tmp_path):
        cfg = small_config(tmp_path, steps=200, runs=1)
        out = tmp_path / "sweep"
        result = runner.invoke(
            main,
            ["sweep-depth", "--config", str(cfg), "--depth", "2,3", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        for name in ("config.json", "curve_d2.csv", "curve_d3.csv", "curve_sweep.csv"):
            assert (out / name).exists(), name

    def test_bad_depth_spec_exits_2(self, runner, tmp_path):
        cfg = small_config(tmp_path)
        result = runner.invoke(
            main, ["sweep-depth", "--config", str(cfg), "--depth", "1,x"]
        )
        assert result.exit_code == 2


class TestReproduce:
    def test_single_figure_files(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["reproduce", "fig5", "--out", str(tmp_path), "--steps", "300", "--runs", "2"],
        )
        assert result.exit_code == 0, result.output
        for name in ("fig5_config.json", "fig5_curve.csv", "fig5.gnuplot"):
            assert (tmp_path / name).exists(), name
        assert json.loads((tmp_path / "fig5_config.json").read_text())["steps"] == 300

    def test_matches_equivalent_run_invocation(self, runner, tmp_path):
        repro_out = tmp_path / "repro"
        result = runner.invoke(
            main,
            ["reproduce", "fig5", "--out", str(repro_out), "--steps", "300", "--runs", "2"],
        )
        assert result.exit_code == 0

        cfg_path = tmp_path / "fig5_equiv.json"
        save_config(
            dataclasses.replace(PRESETS["fig5"].config, steps=300, runs=2), cfg_path
        )
        run_out = tmp_path / "run"
        result = runner.invoke(
            main, ["run", "--config", str(cfg_path), "--out", str(run_out)]
        )
        assert result.exit_code == 0
        assert (run_out / "curve.csv").read_bytes() == (
            repro_out / "fig5_curve.csv"
        ).read_bytes()

    def test_sweep_figure_files(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["reproduce", "fig6", "--out", str(tmp_path), "--steps", "200", "--runs", "1"],
        )
        assert result.exit_code == 0, result.output
        for depth in range(1, 8):
            assert (tmp_path / f"fig6_d{depth}.csv").exists()
        assert (tmp_path / "fig6_sweep.csv").exists()
        assert (tmp_path / "fig6.gnuplot").exists()

    def test_unknown_figure_rejected(self, runner, tmp_path):
        result = runner.invoke(main, ["reproduce", "fig99", "--out", str(tmp_path)])
        assert result.exit_code == 2


class TestNoiseFloor:
    def test_writes_csv_and_echoes_estimate(self, runner, tmp_path):
        result = runner.invoke(
            main, ["noise-floor", "square", "--samples", "2000", "--out", str(tmp_path)]
        )
        assert result.exit_code == 0, result.output
        assert "floor=" in result.output
        header = (tmp_path / "noise_floor_square.csv").read_text().splitlines()[0]
        assert header == "system,samples,floor,se_floor"

    def test_actionful_system_rejected(self, runner, tmp_path):
        result = runner.invoke(
            main, ["noise-floor", "mcar-po", "--samples", "2000", "--out", str(tmp_path)]
        )
        assert result.exit_code == 2


class TestValidate:
    def test_passing_suite(self, runner):
        result = runner.invoke(main, ["validate", "traces"])
        assert result.exit_code == 0, result.output
        assert "ok" in result.output

    def test_unknown_suite_rejected(self, runner):
        result = runner.invoke(main, ["validate", "nonsense"])
        assert result.exit_code == 2

    def test_failures_exit_4(self, runner, monkeypatch):
        monkeypatch.setattr("ctdnet.cli.run_suite", lambda key: ["synthetic failure"])
        result = runner.invoke(main, ["validate", "oracle"])
        assert result.exit_code == 4
        assert "synthetic failure" in result.stderr
