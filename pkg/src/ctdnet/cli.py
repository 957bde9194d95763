"""Command-line frontend: run, sweep-depth, reproduce, noise-floor, validate.

Exit codes: 0 on success, 2 for configuration problems (bad key, bad
file, unwritable output), 3 when a run diverges, 4 when a validation
suite fails.  ``--seed`` falls back to the ``CTDNET_SEED`` environment
variable, then to the config file's ``base_seed``.
"""

from __future__ import annotations

import dataclasses
import os
import sys
from pathlib import Path

import click
import numpy as np

from .answer import DivergenceError
from .basis import make_grid
from .checks import SUITES, run_suite
from .harness import (
    ConfigError,
    ExperimentConfig,
    atomic_write_text,
    load_config,
    noise_floor,
    run_experiment,
    save_config,
    write_curve_csv,
    write_floor_csv,
    write_per_run_csv,
    write_sweep_csv,
)
from .presets import FIGURE_KEYS, PRESETS
from .systems import SYSTEM_KEYS, make_system


def _fail(code: int, message: str) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def _resolve_seed(explicit: int | None) -> int | None:
    if explicit is not None:
        return explicit
    env = os.environ.get("CTDNET_SEED")
    if not env:
        return None
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"CTDNET_SEED must be an integer, got {env!r}") from None


def _parse_depths(spec: str) -> tuple[int, ...]:
    try:
        depths = tuple(int(part) for part in spec.split(","))
    except ValueError:
        raise ConfigError(f"--depth expects integers like '5' or '1,3,5', got {spec!r}") from None
    if not depths or any(d < 1 for d in depths):
        raise ConfigError(f"depths must be positive, got {spec!r}")
    return depths


def _apply_overrides(
    config: ExperimentConfig,
    steps: int | None,
    runs: int | None,
    seed: int | None,
    depth: int | None,
    no_normalize: bool,
) -> ExperimentConfig:
    changes = {}
    if steps is not None:
        changes["steps"] = steps
    if runs is not None:
        changes["runs"] = runs
    resolved = _resolve_seed(seed)
    if resolved is not None:
        changes["base_seed"] = resolved
    if depth is not None:
        changes["chain_depth"] = depth
    if no_normalize:
        changes["normalize_eval_weights"] = False
    return dataclasses.replace(config, **changes) if changes else config


def _sweep(config: ExperimentConfig, depths: tuple[int, ...], jobs: int,
           out: Path, stem: str, per_run: bool) -> None:
    curves = {}
    for depth in depths:
        cfg = dataclasses.replace(config, chain_depth=depth)
        curve = run_experiment(cfg, jobs)
        curves[depth] = curve
        write_curve_csv(curve, out / f"{stem}d{depth}.csv")
        if per_run:
            write_per_run_csv(curve, out / f"{stem}per_run_d{depth}.csv")
        click.echo(f"depth {depth}: final window mean {curve.mean[-1]:.6g}")
    write_sweep_csv(curves, out / f"{stem}sweep.csv")


def _plot_script(figure: str, label: str, depths: tuple[int, ...] | None) -> str:
    lines = [
        f"# plot script for {figure} ({label}); consumes the CSVs in this directory",
        'set datafile separator ","',
        'set xlabel "time step"',
        'set ylabel "one-step feature RMSE"',
        "set key top right",
        "set terminal svg size 900,540",
        f'set output "{figure}.svg"',
    ]
    if depths is None:
        lines.append(
            f'plot "{figure}_curve.csv" skip 1 using 2:3 with lines lw 2 title "{label}"'
        )
    else:
        parts = [
            f'"{figure}_d{d}.csv" skip 1 using 2:3 with lines title "d={d}"' for d in depths
        ]
        lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"


@click.group()
def main() -> None:
    """Continuous TD(lambda) network experiments."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON config file.")
@click.option("--out", "out_dir", default=".", type=click.Path(), help="Output directory.")
@click.option("--steps", type=int, default=None, help="Override steps per run.")
@click.option("--runs", type=int, default=None, help="Override run count.")
@click.option("--seed", type=int, default=None, help="Override base seed.")
@click.option("--depth", "depth_spec", default=None, help="Override chain depth (single value).")
@click.option("--jobs", type=int, default=1, help="Parallel worker processes.")
@click.option("--per-run-csv", is_flag=True, help="Also write per-run window values.")
@click.option("--no-normalize-eval", is_flag=True, help="Unnormalized evaluation weighting.")
def run(config_path, out_dir, steps, runs, seed, depth_spec, jobs, per_run_csv,
        no_normalize_eval) -> None:
    """Run one experiment from a config file."""
    try:
        config = load_config(config_path)
        depth = None
        if depth_spec is not None:
            depths = _parse_depths(depth_spec)
            if len(depths) != 1:
                raise ConfigError("run takes one depth; use sweep-depth for several")
            depth = depths[0]
        config = _apply_overrides(config, steps, runs, seed, depth, no_normalize_eval)
        curve = run_experiment(config, jobs)
        out = Path(out_dir)
        save_config(config, out / "config.json")
        write_curve_csv(curve, out / "curve.csv")
        if per_run_csv:
            write_per_run_csv(curve, out / "per_run.csv")
        click.echo(
            f"wrote {out / 'curve.csv'}: {curve.mean.shape[0]} windows, "
            f"{curve.runs} runs, final mean {curve.mean[-1]:.6g}"
        )
    except ConfigError as err:
        _fail(2, f"config error: {err}")
    except DivergenceError as err:
        _fail(3, f"divergence: {err}")
    except OSError as err:
        _fail(2, f"output error: {err}")


@main.command("sweep-depth")
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON config file.")
@click.option("--depth", "depth_spec", required=True, help="Comma-separated depths, e.g. 1,3,5,7.")
@click.option("--out", "out_dir", default=".", type=click.Path(), help="Output directory.")
@click.option("--steps", type=int, default=None, help="Override steps per run.")
@click.option("--runs", type=int, default=None, help="Override run count.")
@click.option("--seed", type=int, default=None, help="Override base seed.")
@click.option("--jobs", type=int, default=1, help="Parallel worker processes.")
@click.option("--per-run-csv", is_flag=True, help="Also write per-run window values.")
@click.option("--no-normalize-eval", is_flag=True, help="Unnormalized evaluation weighting.")
def sweep_depth(config_path, depth_spec, out_dir, steps, runs, seed, jobs, per_run_csv,
                no_normalize_eval) -> None:
    """Run one config across several chain depths."""
    try:
        config = load_config(config_path)
        depths = _parse_depths(depth_spec)
        config = _apply_overrides(config, steps, runs, seed, None, no_normalize_eval)
        out = Path(out_dir)
        save_config(config, out / "config.json")
        _sweep(config, depths, jobs, out, "curve_", per_run_csv)
        click.echo(f"wrote {out / 'curve_sweep.csv'} for depths {','.join(map(str, depths))}")
    except ConfigError as err:
        _fail(2, f"config error: {err}")
    except DivergenceError as err:
        _fail(3, f"divergence: {err}")
    except OSError as err:
        _fail(2, f"output error: {err}")


@main.command()
@click.argument("figure", type=click.Choice(FIGURE_KEYS))
@click.option("--out", "out_dir", default=".", type=click.Path(), help="Output directory.")
@click.option("--steps", type=int, default=None, help="Override steps per run.")
@click.option("--runs", type=int, default=None, help="Override run count.")
@click.option("--seed", type=int, default=None, help="Override base seed.")
@click.option("--jobs", type=int, default=1, help="Parallel worker processes.")
@click.option("--per-run-csv", is_flag=True, help="Also write per-run window values.")
def reproduce(figure, out_dir, steps, runs, seed, jobs, per_run_csv) -> None:
    """Rerun a benchmark figure preset, writing CSVs and a plot script."""
    try:
        preset = PRESETS[figure]
        config = _apply_overrides(preset.config, steps, runs, seed, None, False)
        out = Path(out_dir)
        save_config(config, out / f"{figure}_config.json")
        if preset.depths is None:
            curve = run_experiment(config, jobs)
            write_curve_csv(curve, out / f"{figure}_curve.csv")
            if per_run_csv:
                write_per_run_csv(curve, out / f"{figure}_per_run.csv")
            click.echo(f"{figure}: final window mean {curve.mean[-1]:.6g}")
        else:
            _sweep(config, preset.depths, jobs, out, f"{figure}_", per_run_csv)
        script = _plot_script(figure, preset.label, preset.depths)
        atomic_write_text(out / f"{figure}.gnuplot", script)
        click.echo(f"wrote {out / (figure + '.gnuplot')}")
    except ConfigError as err:
        _fail(2, f"config error: {err}")
    except DivergenceError as err:
        _fail(3, f"divergence: {err}")
    except OSError as err:
        _fail(2, f"output error: {err}")


@main.command("noise-floor")
@click.argument("system", type=click.Choice(SYSTEM_KEYS))
@click.option("--samples", type=int, default=1000000, help="Monte-Carlo draws per cycle phase.")
@click.option("--seed", type=int, default=None, help="Monte-Carlo seed (default 0).")
@click.option("--out", "out_dir", default=".", type=click.Path(), help="Output directory.")
@click.option("--n", "n_centers", type=int, default=4, help="Feature grid centers per dimension.")
@click.option("--sigma-phi", type=float, default=0.3, help="Feature kernel width.")
@click.option("--noise-std", type=float, default=0.05, help="Observation noise std.")
def noise_floor_cmd(system, samples, seed, out_dir, n_centers, sigma_phi, noise_std) -> None:
    """Monte-Carlo irreducible one-step RMSE for a wave system."""
    try:
        resolved = _resolve_seed(seed)
        bounds = make_system(system, np.random.default_rng(0)).spec.obs_bounds
        grid = make_grid(bounds, n_centers, sigma_phi)
        estimate = noise_floor(system, grid, noise_std, samples, resolved if resolved is not None else 0)
        path = Path(out_dir) / f"noise_floor_{system}.csv"
        write_floor_csv(system, samples, estimate, path)
        click.echo(f"floor={estimate.floor:.17g} se={estimate.se:.17g}")
    except (ConfigError, ValueError) as err:
        _fail(2, f"config error: {err}")
    except OSError as err:
        _fail(2, f"output error: {err}")


@main.command()
@click.argument("suite", type=click.Choice(tuple(SUITES)))
def validate(suite) -> None:
    """Run a property suite; nonzero exit on any failure."""
    failures = run_suite(suite)
    for message in failures:
        click.echo(f"FAIL {message}", err=True)
    if failures:
        _fail(4, f"suite {suite}: {len(failures)} failure(s)")
    click.echo(f"suite {suite}: ok")


if __name__ == "__main__":
    main()
