"""Experiment protocol: surrogate fit, replicated BO vs random search vs a
fixed expert recipe, and report export (CSV/JSON plus SVG figures)."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acquisition import AcquisitionConfig
from .expert import Benchmark, cesar_benchmark, hotdog_benchmark
from .optimizer import OptimizationConfig, bo_run, random_search_run, recommend
from .space import CategoricalVar
from .svr import grid_search_cv, svr_fit

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "run_experiment",
    "histogram",
    "most_voted_recipe",
    "export_report",
    "resolve_benchmark",
]

DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0)
DEFAULT_GAMMA_GRID = (0.001, 0.01, 0.1, 1.0)
METHODS = ("bo", "random", "expert")


def resolve_benchmark(benchmark):
    if isinstance(benchmark, Benchmark):
        return benchmark
    if benchmark == "hotdog":
        return hotdog_benchmark()
    if benchmark == "cesar":
        return cesar_benchmark()
    raise ValueError(f"unknown benchmark {benchmark!r} (expected 'hotdog' or 'cesar')")


@dataclass(frozen=True)
class ExperimentConfig:
    benchmark: object  # Benchmark or name
    replications: int = 100
    iterations: int = 50
    n_init: int = 3
    seed: int = 42
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    C_grid: tuple = DEFAULT_C_GRID
    gamma_grid: tuple = DEFAULT_GAMMA_GRID
    epsilon_tube: float = 0.5
    cv_folds: int = 10
    bins: int = 10

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.iterations < self.n_init:
            raise ValueError("iterations must be >= n_init")


@dataclass
class ExperimentReport:
    benchmark_name: str
    iterations: int
    replications: int
    bins: int
    mean_curves: dict  # method -> np.ndarray (best-so-far, averaged)
    std_curves: dict
    raw_mean_curves: dict
    recommendations: list  # one Point per replication (from BO)
    histograms: dict  # variable -> (bin_labels, counts)
    most_voted: dict  # variable -> bin label / interval
    final_best: dict  # method -> per-replication final best values
    svr_summary: dict
    seeds: dict
    expert_value: float
    space: object
    wall_time_s: float = 0.0


def histogram(recommendations, variable, bins):
    """Counts of recommended values for one variable.

    Numeric: `bins` equal-width intervals over the variable bounds (upper
    edge closed on the last bin). Categorical: one bin per label.
    Returns (bin_labels, counts).
    """
    if not recommendations:
        raise ValueError("need at least one recommendation")
    values = [p[variable.name] for p in recommendations]
    if isinstance(variable, CategoricalVar):
        counts = [sum(v == lab for v in values) for lab in variable.labels]
        return list(variable.labels), np.asarray(counts)
    edges = np.linspace(variable.lower, variable.upper, bins + 1)
    idx = np.clip(np.searchsorted(edges, values, side="right") - 1, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    labels = [f"[{edges[i]:g},{edges[i + 1]:g})" for i in range(bins)]
    labels[-1] = labels[-1][:-1] + "]"
    return labels, counts


def most_voted_recipe(recommendations, space, bins):
    """Per variable, the modal histogram bin; ties break to the lower index.

    Numeric variables map to (lo, hi) intervals, categoricals to a label.
    """
    recipe = {}
    for v in space.variables:
        labels, counts = histogram(recommendations, v, bins)
        best = int(np.argmax(counts))
        if isinstance(v, CategoricalVar):
            recipe[v.name] = labels[best]
        else:
            edges = np.linspace(v.lower, v.upper, bins + 1)
            recipe[v.name] = (float(edges[best]), float(edges[best + 1]))
    return recipe


def run_experiment(cfg, progress=None):
    """Full protocol: simulate data, tune+fit the SVR surrogate, replicate the
    three methods, aggregate curves, histograms and the most-voted recipe."""
    t0 = time.monotonic()
    bench = resolve_benchmark(cfg.benchmark)
    space = bench.space

    data_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    dataset = bench.dataset(data_rng)
    X = dataset.latent_matrix(space)
    y = dataset.y

    cv_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
    best_hp, cv_rmse = grid_search_cv(
        X, y, cfg.C_grid, cfg.gamma_grid, cfg.cv_folds, cv_rng,
        epsilon_tube=cfg.epsilon_tube,
    )
    model = svr_fit(X, y, best_hp)

    def objective(point):
        return float(model.predict(space.to_latent(point)[None, :])[0])

    expert_value = objective(bench.expert_point)

    seed_state = np.random.SeedSequence(cfg.seed, spawn_key=(2,)).generate_state(
        2 * cfg.replications, dtype=np.uint64
    )
    bo_seeds = [int(s) for s in seed_state[: cfg.replications]]
    rs_seeds = [int(s) for s in seed_state[cfg.replications :]]

    bo_best, rs_best = [], []
    bo_raw, rs_raw = [], []
    recommendations = []
    for r in range(cfg.replications):
        bo_trace = bo_run(objective, space, OptimizationConfig(
            budget=cfg.iterations, n_init=cfg.n_init, seed=bo_seeds[r],
            acquisition=cfg.acquisition,
        ))
        rs_trace = random_search_run(objective, space, OptimizationConfig(
            budget=cfg.iterations, n_init=cfg.n_init, seed=rs_seeds[r],
            acquisition=cfg.acquisition,
        ))
        bo_best.append(bo_trace.best_curve())
        rs_best.append(rs_trace.best_curve())
        bo_raw.append(bo_trace.raw_curve())
        rs_raw.append(rs_trace.raw_curve())
        recommendations.append(recommend(bo_trace)[0])
        if progress is not None:
            progress(r + 1, cfg.replications)

    bo_best = np.asarray(bo_best)
    rs_best = np.asarray(rs_best)
    expert_curve = np.full(cfg.iterations, expert_value)

    histograms, most_voted = {}, {}
    for v in space.variables:
        histograms[v.name] = histogram(recommendations, v, cfg.bins)
    most_voted = most_voted_recipe(recommendations, space, cfg.bins)

    return ExperimentReport(
        benchmark_name=bench.name,
        iterations=cfg.iterations,
        replications=cfg.replications,
        bins=cfg.bins,
        mean_curves={
            "bo": bo_best.mean(axis=0),
            "random": rs_best.mean(axis=0),
            "expert": expert_curve,
        },
        std_curves={
            "bo": bo_best.std(axis=0),
            "random": rs_best.std(axis=0),
            "expert": np.zeros(cfg.iterations),
        },
        raw_mean_curves={
            "bo": np.asarray(bo_raw).mean(axis=0),
            "random": np.asarray(rs_raw).mean(axis=0),
            "expert": expert_curve,
        },
        recommendations=recommendations,
        histograms=histograms,
        most_voted=most_voted,
        final_best={
            "bo": bo_best[:, -1].copy(),
            "random": rs_best[:, -1].copy(),
            "expert": np.full(cfg.replications, expert_value),
        },
        svr_summary={
            "C": best_hp.C,
            "gamma": best_hp.gamma,
            "epsilon_tube": best_hp.epsilon_tube,
            "cv_rmse": cv_rmse,
            "cv_mse": cv_rmse**2,
            "n_rows": len(dataset),
            "converged": model.converged,
        },
        seeds={"master": cfg.seed, "bo": bo_seeds, "random": rs_seeds},
        expert_value=expert_value,
        space=space,
        wall_time_s=time.monotonic() - t0,
    )


def _fmt(x):
    return repr(float(x))


def export_report(report, out_dir, figures=True):
    """Write curves.csv, histograms.csv, recipe.txt, summary.json and SVG
    figures. CSV/JSON bytes depend only on the report contents; wall time
    goes to timing.txt so reruns stay byte-identical."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    lines = ["iteration,method,mean_quality,std_quality"]
    for method in METHODS:
        for i in range(report.iterations):
            lines.append(
                f"{i + 1},{method},{_fmt(report.mean_curves[method][i])},"
                f"{_fmt(report.std_curves[method][i])}"
            )
    (out / "curves.csv").write_text("\n".join(lines) + "\n")
    written.append(out / "curves.csv")

    lines = ["iteration,method,mean_raw_quality"]
    for method in METHODS:
        for i in range(report.iterations):
            lines.append(f"{i + 1},{method},{_fmt(report.raw_mean_curves[method][i])}")
    (out / "raw_curves.csv").write_text("\n".join(lines) + "\n")
    written.append(out / "raw_curves.csv")

    # bin labels contain commas ("[0,20)"), so they need CSV quoting
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variable", "bin_label", "count"])
    for name, (labels, counts) in report.histograms.items():
        for lab, cnt in zip(labels, counts):
            w.writerow([name, lab, int(cnt)])
    (out / "histograms.csv").write_text(buf.getvalue())
    written.append(out / "histograms.csv")

    lines = [f"most voted recipe ({report.benchmark_name}, {report.replications} replications)"]
    for name, val in report.most_voted.items():
        if isinstance(val, tuple):
            lines.append(f"{name}: [{val[0]:g}, {val[1]:g}]")
        else:
            lines.append(f"{name}: {val}")
    (out / "recipe.txt").write_text("\n".join(lines) + "\n")
    written.append(out / "recipe.txt")

    summary = {
        "benchmark": report.benchmark_name,
        "iterations": report.iterations,
        "replications": report.replications,
        "bins": report.bins,
        "surrogate": report.svr_summary,
        "expert_value": report.expert_value,
        "final_best_mean": {m: float(np.mean(v)) for m, v in report.final_best.items()},
        "seeds": report.seeds,
        "most_voted": {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in report.most_voted.items()
        },
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    written.append(out / "summary.json")

    # wall time stays out of summary.json so equal-seed reruns are byte-identical
    (out / "timing.txt").write_text(f"wall_time_s={report.wall_time_s:.3f}\n")
    written.append(out / "timing.txt")

    if figures:
        from . import plots

        written += plots.render_report_figures(report, out)
    return written
