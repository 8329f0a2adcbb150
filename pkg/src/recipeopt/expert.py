"""Expert knowledge encoded as conditional quality distributions.

A quality model is a set of rules. Each rule has a conjunctive predicate
over the search-space variables (numeric intervals, label sets) and a
distribution over the quality contribution (Gaussian for "this range tastes
good/okay", Gamma for confidently-bad regions such as overcooking). A
sampled quality is the weighted mean of one draw per firing rule, clipped
to [0, 10]; a fallback distribution covers points where nothing fires.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .space import CategoricalVar, SearchSpace, SpaceError, space_from_dict

__all__ = [
    "QualityDistribution",
    "ExpertRule",
    "QualityModel",
    "Dataset",
    "Benchmark",
    "sample_quality",
    "jury_mean",
    "generate_dataset",
    "load_real_dataset",
    "save_dataset",
    "load_benchmark",
    "benchmark_from_dict",
    "hotdog_benchmark",
    "cesar_benchmark",
]

QUALITY_RANGE = (0.0, 10.0)


@dataclass(frozen=True)
class QualityDistribution:
    family: str  # "normal" or "gamma"
    params: tuple

    def __post_init__(self):
        if self.family == "normal":
            mu, sigma = self.params
            if sigma <= 0:
                raise ValueError(f"normal sigma must be > 0, got {sigma}")
        elif self.family == "gamma":
            shape, scale = self.params
            if shape <= 0 or scale <= 0:
                raise ValueError(f"gamma shape/scale must be > 0, got {self.params}")
        else:
            raise ValueError(f"unknown distribution family {self.family!r}")

    def sample(self, rng):
        if self.family == "normal":
            mu, sigma = self.params
            return rng.normal(mu, sigma)
        shape, scale = self.params
        return rng.gamma(shape, scale)

    def mean(self):
        if self.family == "normal":
            return self.params[0]
        return self.params[0] * self.params[1]


@dataclass(frozen=True)
class ExpertRule:
    """Conjunctive predicate -> quality-contribution distribution."""

    conditions: tuple  # ((var_name, spec), ...); spec = (lo, hi) or label tuple
    distribution: QualityDistribution
    weight: float = 1.0

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("rule weight must be > 0")

    def fires(self, point):
        for name, spec in self.conditions:
            x = point[name]
            if isinstance(spec, tuple) and len(spec) == 2 and all(
                isinstance(s, (int, float)) for s in spec
            ):
                if not (spec[0] <= x <= spec[1]):
                    return False
            elif x not in spec:
                return False
        return True

    def check_against(self, space):
        for name, _ in self.conditions:
            if name not in space.names:
                raise SpaceError(f"rule references unknown variable {name!r}")


@dataclass(frozen=True)
class QualityModel:
    rules: tuple
    default: QualityDistribution

    def firing(self, point):
        return [r for r in self.rules if r.fires(point)]


def sample_quality(model, point, rng):
    """One noisy quality draw at a point: weighted mean of firing-rule draws,
    clipped to [0, 10]."""
    firing = model.firing(point)
    if not firing:
        y = model.default.sample(rng)
    else:
        draws = np.array([r.distribution.sample(rng) for r in firing])
        weights = np.array([r.weight for r in firing])
        y = float(np.dot(weights, draws) / np.sum(weights))
    return float(np.clip(y, *QUALITY_RANGE))


def expected_quality(model, point):
    """Pre-clip expected value of the weighted mean; handy for calibration."""
    firing = model.firing(point)
    if not firing:
        return model.default.mean()
    weights = np.array([r.weight for r in firing])
    means = np.array([r.distribution.mean() for r in firing])
    return float(np.dot(weights, means) / np.sum(weights))


def jury_mean(evaluations):
    evaluations = list(evaluations)
    if not evaluations:
        raise ValueError("jury_mean needs at least one evaluation")
    return float(np.mean(evaluations))


@dataclass
class Dataset:
    points: list
    y: np.ndarray
    provenance: list  # "real" | "simulated" per row

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if not (len(self.points) == len(self.y) == len(self.provenance)):
            raise ValueError("dataset columns must have equal length")

    def __len__(self):
        return len(self.points)

    def latent_matrix(self, space):
        if not self.points:
            return np.empty((0, space.latent_dim))
        return np.stack([space.to_latent(p) for p in self.points])


def generate_dataset(model, space, grid_resolution, n_sim, jury_size, rng,
                     n_real=None):
    """Real-tagged jury evaluations on a uniform grid plus single-draw
    simulated rows at uniform random points.

    ``n_real`` optionally subsamples the grid (without replacement) so the
    real portion matches a target cook count even when the Cartesian grid
    cannot hit it exactly.
    """
    grid = space.uniform_grid(grid_resolution)
    if n_real is not None and n_real < len(grid):
        keep = rng.choice(len(grid), size=n_real, replace=False)
        grid = [grid[i] for i in np.sort(keep)]
    points, ys, prov = [], [], []
    for p in grid:
        scores = [sample_quality(model, p, rng) for _ in range(jury_size)]
        points.append(p)
        ys.append(jury_mean(scores))
        prov.append("real")
    for p in space.sample_uniform(rng, n_sim):
        points.append(p)
        ys.append(sample_quality(model, p, rng))
        prov.append("simulated")
    return Dataset(points, np.asarray(ys), prov)


def save_dataset(dataset, path, space):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*space.names, "quality", "provenance"])
        for p, y, tag in zip(dataset.points, dataset.y, dataset.provenance):
            w.writerow([*(p[name] for name in space.names), repr(float(y)), tag])


def load_real_dataset(path, space):
    """Read a CSV of cooked-meal rows (one column per variable + `quality`)."""
    points, ys = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = set(reader.fieldnames or [])
        unknown = header - set(space.names) - {"quality", "provenance"}
        if unknown:
            raise SpaceError(f"unknown columns: {sorted(unknown)}")
        if "quality" not in header:
            raise SpaceError("missing 'quality' column")
        missing = set(space.names) - header
        if missing:
            raise SpaceError(f"missing variable columns: {sorted(missing)}")
        for i, row in enumerate(reader, start=1):
            point = {}
            for v in space.variables:
                raw = row[v.name]
                if isinstance(v, CategoricalVar):
                    point[v.name] = raw
                else:
                    try:
                        x = float(raw)
                    except ValueError:
                        raise SpaceError(f"row {i}: malformed number {raw!r} for {v.name!r}")
                    point[v.name] = int(x) if x == int(x) else x
            try:
                space.validate_point(point)
            except SpaceError as exc:
                raise SpaceError(f"row {i}: {exc}")
            try:
                y = float(row["quality"])
            except ValueError:
                raise SpaceError(f"row {i}: malformed quality {row['quality']!r}")
            if not QUALITY_RANGE[0] <= y <= QUALITY_RANGE[1]:
                raise SpaceError(f"row {i}: quality {y} outside {QUALITY_RANGE}")
            points.append(point)
            ys.append(y)
    return Dataset(points, np.asarray(ys), ["real"] * len(points))


# --- benchmarks ---------------------------------------------------------


@dataclass(frozen=True)
class Benchmark:
    name: str
    space: SearchSpace
    quality_model: QualityModel
    expert_point: dict
    grid_resolution: dict
    n_real: int = 45
    n_sim: int = 500
    jury_size: int = 3

    def __post_init__(self):
        self.space.validate_point(self.expert_point)
        for rule in self.quality_model.rules:
            rule.check_against(self.space)

    def dataset(self, rng):
        return generate_dataset(
            self.quality_model, self.space, self.grid_resolution,
            self.n_sim, self.jury_size, rng, n_real=self.n_real,
        )


def _distribution_from_dict(d):
    if d["family"] == "normal":
        return QualityDistribution("normal", (float(d["mu"]), float(d["sigma"])))
    if d["family"] == "gamma":
        return QualityDistribution("gamma", (float(d["shape"]), float(d["scale"])))
    raise ValueError(f"unknown distribution family {d.get('family')!r}")


def benchmark_from_dict(cfg):
    space = space_from_dict(cfg)
    rules = []
    for rd in cfg["rules"]:
        conditions = []
        for name, spec in rd["when"].items():
            if isinstance(spec, list) and len(spec) == 2 and all(
                isinstance(s, (int, float)) for s in spec
            ):
                conditions.append((name, (float(spec[0]), float(spec[1]))))
            else:
                conditions.append((name, tuple(spec)))
        rules.append(ExpertRule(
            conditions=tuple(conditions),
            distribution=_distribution_from_dict(rd["distribution"]),
            weight=float(rd.get("weight", 1.0)),
        ))
    defaults = cfg.get("dataset", {})
    expert_point = dict(cfg["expert_point"])
    for v in space.variables:
        if not isinstance(v, CategoricalVar) and v.name in expert_point:
            x = expert_point[v.name]
            expert_point[v.name] = int(x) if float(x) == int(x) else float(x)
    return Benchmark(
        name=cfg["name"],
        space=space,
        quality_model=QualityModel(tuple(rules), _distribution_from_dict(cfg["default"])),
        expert_point=expert_point,
        grid_resolution=dict(cfg["grid_resolution"]),
        n_real=int(defaults.get("n_real", 45)),
        n_sim=int(defaults.get("n_sim", 500)),
        jury_size=int(defaults.get("jury_size", 3)),
    )


def load_benchmark(path):
    return benchmark_from_dict(json.loads(Path(path).read_text()))


def _packaged_benchmark(name):
    path = Path(__file__).parent / "configs" / f"{name}.json"
    return load_benchmark(path)


def hotdog_benchmark():
    return _packaged_benchmark("hotdog")


def cesar_benchmark():
    return _packaged_benchmark("cesar")
