"""Sequential optimization loops: Bayesian optimization and random search.

Both loops share the same seeded generator discipline: with equal seeds the
first ``n_init`` evaluations of a BO run and the prefix of a random-search
run are drawn from the same stream and therefore coincide.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .acquisition import AcquisitionConfig, maximize_acquisition
from .gp import HyperparamBounds, sample_hyperparams

__all__ = [
    "ObjectiveError",
    "OptimizationConfig",
    "Trace",
    "bo_run",
    "random_search_run",
    "recommend",
]


class ObjectiveError(RuntimeError):
    """Objective returned a non-finite value."""


@dataclass(frozen=True)
class OptimizationConfig:
    budget: int
    n_init: int = 3
    seed: int = 42
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)

    def __post_init__(self):
        if not 1 <= self.n_init <= self.budget:
            raise ValueError(f"need 1 <= n_init <= budget, got {self.n_init}/{self.budget}")


class Trace:
    """Per-iteration record of an optimization run (maximization)."""

    def __init__(self):
        self.points = []
        self.ys = []
        self.best = []

    def append(self, point, y):
        self.points.append(point)
        self.ys.append(float(y))
        prev = self.best[-1] if self.best else -np.inf
        self.best.append(max(prev, float(y)))

    def __len__(self):
        return len(self.points)

    def best_curve(self):
        return np.asarray(self.best)

    def raw_curve(self):
        return np.asarray(self.ys)

    def to_csv(self, path, space):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", *space.names, "y", "best_so_far"])
            for i, (p, y, b) in enumerate(zip(self.points, self.ys, self.best), start=1):
                w.writerow([i, *(p[name] for name in space.names), repr(y), repr(b)])


def _evaluate(objective, point):
    y = float(objective(point))
    if not np.isfinite(y):
        raise ObjectiveError(f"objective returned non-finite value {y} at {point}")
    return y


def bo_run(objective, space, cfg):
    """Bayesian optimization: random design, then acquisition-driven suggestions."""
    rng = np.random.default_rng(cfg.seed)
    trace = Trace()

    X = np.empty((0, space.latent_dim))
    y = np.empty(0)
    for point in space.sample_uniform(rng, cfg.n_init):
        val = _evaluate(objective, point)
        trace.append(point, val)
        X = np.vstack([X, space.snap_latent_array(space.to_latent(point)[None, :])])
        y = np.append(y, val)

    last_hp = None
    for it in range(cfg.n_init, cfg.budget):
        bounds = HyperparamBounds.from_targets(y)
        if last_hp is not None and not bounds.contains(last_hp):
            last_hp = None
        # warm-started chain: long burn-in only on the first model fit
        burn = 15 if last_hp is None else 3
        hp_samples = sample_hyperparams(
            X, y, cfg.acquisition.n_gp_samples, rng,
            burn_in=burn, init=last_hp, bounds=bounds,
        )
        last_hp = hp_samples[-1]
        latent = maximize_acquisition(space, X, y, hp_samples, cfg.acquisition, rng)
        point = space.from_latent(latent)
        val = _evaluate(objective, point)
        trace.append(point, val)
        X = np.vstack([X, space.snap_latent_array(latent[None, :])])
        y = np.append(y, val)
    return trace


def random_search_run(objective, space, cfg):
    """Uniform random evaluations under the same Trace contract as bo_run."""
    rng = np.random.default_rng(cfg.seed)
    trace = Trace()
    for point in space.sample_uniform(rng, cfg.budget):
        trace.append(point, _evaluate(objective, point))
    return trace


def recommend(trace):
    """Best observed (point, quality); earliest iteration wins ties."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    idx = int(np.argmax(trace.ys))  # argmax returns the first maximal index
    return trace.points[idx], trace.ys[idx]
