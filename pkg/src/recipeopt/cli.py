"""Command-line entry point.

Subcommands: space-validate, simulate, surrogate-fit, optimize, benchmark,
report. Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
All randomness flows from --seed (default 42); nothing is written outside
--out.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from .acquisition import AcquisitionConfig
from .expert import load_benchmark, load_real_dataset, save_dataset
from .harness import (
    ExperimentConfig,
    export_report,
    resolve_benchmark,
    run_experiment,
)
from .optimizer import OptimizationConfig, bo_run, recommend
from .space import SpaceError, load_space
from .svr import SVRModel, grid_search_cv, svr_fit

DEFAULT_SEED = 42


def _fail(stage, message, code):
    click.echo(f"error: {stage}: {message}", err=True)
    sys.exit(code)


def _load_benchmark_from_flags(benchmark, config):
    if config is not None:
        return load_benchmark(config)
    if benchmark is not None:
        return resolve_benchmark(benchmark)
    raise click.UsageError("one of --benchmark or --config is required")


@click.group()
def cli():
    """Recipe optimization toolkit: simulate expert data, fit an SVR
    surrogate and optimize it with mixed-variable Bayesian optimization."""


@cli.command("space-validate")
@click.option("--config", required=True, type=click.Path(exists=True, dir_okay=False))
def space_validate(config):
    """Validate a search-space config file."""
    space = load_space(config)
    click.echo(f"ok: {len(space.variables)} variables, latent_dim={space.latent_dim}")


@cli.command("simulate")
@click.option("--benchmark", type=click.Choice(["hotdog", "cesar"]))
@click.option("--config", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def simulate(benchmark, config, seed, out):
    """Generate the simulated+jury dataset for a benchmark."""
    bench = _load_benchmark_from_flags(benchmark, config)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    dataset = bench.dataset(rng)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(dataset, out / "dataset.csv", bench.space)
    click.echo(f"wrote {len(dataset)} rows to {out / 'dataset.csv'}")


@cli.command("surrogate-fit")
@click.option("--benchmark", type=click.Choice(["hotdog", "cesar"]))
@click.option("--config", type=click.Path(exists=True, dir_okay=False))
@click.option("--data", type=click.Path(exists=True, dir_okay=False),
              help="Real dataset CSV; generated data is used when omitted.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def surrogate_fit(benchmark, config, data, seed, out):
    """Grid-search-CV and fit the SVR surrogate; save the model as JSON."""
    bench = _load_benchmark_from_flags(benchmark, config)
    if data is not None:
        dataset = load_real_dataset(data, bench.space)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
        dataset = bench.dataset(rng)
    X = dataset.latent_matrix(bench.space)
    cv_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    cfg = ExperimentConfig(benchmark=bench, seed=seed)
    hp, cv_rmse = grid_search_cv(X, dataset.y, cfg.C_grid, cfg.gamma_grid,
                                 cfg.cv_folds, cv_rng, epsilon_tube=cfg.epsilon_tube)
    model = svr_fit(X, dataset.y, hp)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    model.save(out / "svr_model.json")
    (out / "svr_summary.json").write_text(json.dumps({
        "C": hp.C, "gamma": hp.gamma, "epsilon_tube": hp.epsilon_tube,
        "cv_rmse": cv_rmse, "cv_mse": cv_rmse**2, "n_rows": len(dataset),
    }, indent=2, sort_keys=True) + "\n")
    click.echo(f"C={hp.C} gamma={hp.gamma} cv_rmse={cv_rmse:.4f}")


@cli.command("optimize")
@click.option("--benchmark", type=click.Choice(["hotdog", "cesar"]))
@click.option("--config", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", type=click.Path(exists=True, dir_okay=False),
              help="Saved SVR model JSON; fitted from generated data when omitted.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--iterations", type=int, default=50, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def optimize(benchmark, config, model, seed, iterations, out):
    """Run one Bayesian-optimization run over the SVR surrogate."""
    bench = _load_benchmark_from_flags(benchmark, config)
    space = bench.space
    if model is not None:
        svr_model = SVRModel.load(model)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
        dataset = bench.dataset(rng)
        X = dataset.latent_matrix(space)
        cv_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
        cfg = ExperimentConfig(benchmark=bench, seed=seed)
        hp, _ = grid_search_cv(X, dataset.y, cfg.C_grid, cfg.gamma_grid,
                               cfg.cv_folds, cv_rng, epsilon_tube=cfg.epsilon_tube)
        svr_model = svr_fit(X, dataset.y, hp)

    def objective(point):
        return float(svr_model.predict(space.to_latent(point)[None, :])[0])

    trace = bo_run(objective, space, OptimizationConfig(
        budget=iterations, seed=seed, acquisition=AcquisitionConfig(),
    ))
    point, value = recommend(trace)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    trace.to_csv(out / "trace.csv", space)
    (out / "recommendation.json").write_text(json.dumps(
        {"point": point, "quality": value}, indent=2, sort_keys=True) + "\n")
    click.echo(f"best quality {value:.4f} at {point}")


@cli.command("benchmark")
@click.option("--benchmark", "benchmark_name", type=click.Choice(["hotdog", "cesar"]))
@click.option("--config", type=click.Path(exists=True, dir_okay=False))
@click.option("--replications", type=int, default=100, show_default=True)
@click.option("--iterations", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def benchmark_cmd(benchmark_name, config, replications, iterations, seed, out):
    """Run the full replicated experiment and export the report."""
    bench = _load_benchmark_from_flags(benchmark_name, config)
    cfg = ExperimentConfig(
        benchmark=bench, replications=replications, iterations=iterations, seed=seed,
    )

    def progress(done, total):
        click.echo(f"replication {done}/{total}", err=True)

    report = run_experiment(cfg, progress=progress)
    export_report(report, out)
    click.echo(
        f"final best (mean): bo={np.mean(report.final_best['bo']):.3f} "
        f"random={np.mean(report.final_best['random']):.3f} "
        f"expert={report.expert_value:.3f}"
    )


@cli.command("report")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", type=click.Path(file_okay=False))
def report_cmd(in_dir, out):
    """Re-render the SVG figures from a previously exported report directory."""
    from types import SimpleNamespace

    from . import plots

    in_dir = Path(in_dir)
    out = Path(out) if out else in_dir
    out.mkdir(parents=True, exist_ok=True)
    summary = json.loads((in_dir / "summary.json").read_text())

    mean_curves, std_curves = {}, {}
    with open(in_dir / "curves.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            m = row["method"]
            mean_curves.setdefault(m, []).append(float(row["mean_quality"]))
            std_curves.setdefault(m, []).append(float(row["std_quality"]))
    histograms = {}
    with open(in_dir / "histograms.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            labels, counts = histograms.setdefault(row["variable"], ([], []))
            labels.append(row["bin_label"])
            counts.append(int(row["count"]))

    stub = SimpleNamespace(
        benchmark_name=summary["benchmark"],
        iterations=summary["iterations"],
        replications=summary["replications"],
        mean_curves={m: np.asarray(v) for m, v in mean_curves.items()},
        std_curves={m: np.asarray(v) for m, v in std_curves.items()},
        histograms={k: (v[0], np.asarray(v[1])) for k, v in histograms.items()},
    )
    written = plots.render_report_figures(stub, out)
    click.echo(f"rendered {len(written)} figures to {out}")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        click.echo(f"error: usage: {exc.format_message()}", err=True)
        ctx = exc.ctx
        click.echo((ctx.get_help() if ctx else cli.get_help(click.Context(cli))), err=True)
        return 1
    except click.Abort:
        return 1
    except (SpaceError, ValueError) as exc:
        click.echo(f"error: validation: {exc}", err=True)
        return 1
    except OSError as exc:
        click.echo(f"error: io: {exc}", err=True)
        return 2
    except Exception as exc:  # anything else is a runtime failure
        click.echo(f"error: runtime: {type(exc).__name__}: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
