"""Bounded mixed-type parameter spaces and their unit-cube latent encoding.

A space mixes real, integer and categorical variables. Models (GP, SVR)
operate on a real-valued latent vector in [0, 1]^latent_dim: real and
integer variables are affinely rescaled, categoricals are one-hot encoded.
Integer and categorical coordinates are snapped back to their grid before
any kernel evaluation, so the models are constant inside discrete cells.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "SpaceError",
    "RealVar",
    "IntegerVar",
    "CategoricalVar",
    "SearchSpace",
    "load_space",
    "space_from_dict",
    "space_to_dict",
]


class SpaceError(ValueError):
    """Invalid space definition or point."""


@dataclass(frozen=True)
class RealVar:
    name: str
    lower: float
    upper: float

    @property
    def latent_size(self):
        return 1


@dataclass(frozen=True)
class IntegerVar:
    name: str
    lower: int
    upper: int

    @property
    def latent_size(self):
        return 1


@dataclass(frozen=True)
class CategoricalVar:
    name: str
    labels: tuple[str, ...]

    @property
    def latent_size(self):
        return len(self.labels)


def _round_half_up(x):
    return np.floor(np.asarray(x, dtype=float) + 0.5)


class SearchSpace:
    """Ordered collection of variables with latent-space codecs.

    Immutable after construction; safe to share across workers.
    """

    def __init__(self, variables):
        self.variables = tuple(variables)
        self.validate()
        self._names = tuple(v.name for v in self.variables)
        offsets = np.cumsum([0] + [v.latent_size for v in self.variables])
        self._offsets = offsets
        self.latent_dim = int(offsets[-1])

    @property
    def names(self):
        return self._names

    def validate(self):
        """Raise SpaceError naming the offending variable if any invariant fails."""
        seen = set()
        for v in self.variables:
            if v.name in seen:
                raise SpaceError(f"duplicate variable name: {v.name!r}")
            seen.add(v.name)
            if isinstance(v, (RealVar, IntegerVar)):
                if not (np.isfinite(v.lower) and np.isfinite(v.upper)):
                    raise SpaceError(f"non-finite bounds on {v.name!r}")
                if not v.lower < v.upper:
                    raise SpaceError(
                        f"inverted bounds on {v.name!r}: [{v.lower}, {v.upper}]"
                    )
                if isinstance(v, IntegerVar) and (
                    int(v.lower) != v.lower or int(v.upper) != v.upper
                ):
                    raise SpaceError(f"non-integer bounds on {v.name!r}")
            elif isinstance(v, CategoricalVar):
                if len(set(v.labels)) != len(v.labels):
                    raise SpaceError(f"repeated labels on {v.name!r}")
                if len(v.labels) < 2:
                    raise SpaceError(f"categorical {v.name!r} needs >= 2 labels")
            else:
                raise SpaceError(f"unknown variable kind: {type(v).__name__}")

    def __getitem__(self, name):
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def validate_point(self, point):
        """Raise SpaceError if `point` (mapping name -> value) is invalid."""
        missing = set(self._names) - set(point)
        if missing:
            raise SpaceError(f"point missing variables: {sorted(missing)}")
        for v in self.variables:
            x = point[v.name]
            if isinstance(v, RealVar):
                if not np.isfinite(x) or not (v.lower <= x <= v.upper):
                    raise SpaceError(f"{v.name!r}={x} outside [{v.lower}, {v.upper}]")
            elif isinstance(v, IntegerVar):
                if x != int(x) or not (v.lower <= x <= v.upper):
                    raise SpaceError(
                        f"{v.name!r}={x} not a whole value in [{v.lower}, {v.upper}]"
                    )
            else:
                if x not in v.labels:
                    raise SpaceError(f"{v.name!r}: unknown label {x!r}")

    # --- codecs ------------------------------------------------------

    def to_latent(self, point):
        self.validate_point(point)
        out = np.empty(self.latent_dim)
        for v, lo in zip(self.variables, self._offsets):
            x = point[v.name]
            if isinstance(v, (RealVar, IntegerVar)):
                out[lo] = (x - v.lower) / (v.upper - v.lower)
            else:
                block = np.zeros(len(v.labels))
                block[v.labels.index(x)] = 1.0
                out[lo : lo + len(v.labels)] = block
        return out

    def from_latent(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.latent_dim,):
            raise SpaceError(
                f"latent vector has length {v.shape}, expected ({self.latent_dim},)"
            )
        point = {}
        for var, lo in zip(self.variables, self._offsets):
            if isinstance(var, RealVar):
                point[var.name] = var.lower + v[lo] * (var.upper - var.lower)
            elif isinstance(var, IntegerVar):
                raw = var.lower + v[lo] * (var.upper - var.lower)
                point[var.name] = int(
                    np.clip(_round_half_up(raw), var.lower, var.upper)
                )
            else:
                block = v[lo : lo + len(var.labels)]
                point[var.name] = var.labels[int(np.argmax(block))]
        return point

    def snap_latent(self, v):
        """Project a latent vector onto the decoded grid: to_latent(from_latent(v))."""
        return self.to_latent(self.from_latent(v))

    def snap_latent_array(self, V):
        """Vectorized snap over an (m, latent_dim) array of latent vectors."""
        V = np.asarray(V, dtype=float)
        out = V.copy()
        for var, lo in zip(self.variables, self._offsets):
            if isinstance(var, IntegerVar):
                span = var.upper - var.lower
                raw = var.lower + V[..., lo] * span
                snapped = np.clip(_round_half_up(raw), var.lower, var.upper)
                out[..., lo] = (snapped - var.lower) / span
            elif isinstance(var, CategoricalVar):
                k = len(var.labels)
                block = V[..., lo : lo + k]
                idx = np.argmax(block, axis=-1)
                out[..., lo : lo + k] = np.eye(k)[idx]
        return out

    # --- sampling ----------------------------------------------------

    def sample_uniform(self, rng, n):
        """Draw `n` independent uniform points. Point-by-point, so two runs
        sharing a generator agree on their common prefix."""
        pts = []
        for _ in range(n):
            point = {}
            for v in self.variables:
                if isinstance(v, RealVar):
                    point[v.name] = float(rng.uniform(v.lower, v.upper))
                elif isinstance(v, IntegerVar):
                    point[v.name] = int(rng.integers(v.lower, v.upper + 1))
                else:
                    point[v.name] = v.labels[int(rng.integers(len(v.labels)))]
            pts.append(point)
        return pts

    def uniform_grid(self, resolution):
        """Cartesian product of per-variable equispaced values.

        `resolution` maps variable name to count (categoricals must use their
        label count).
        """
        axes = []
        for v in self.variables:
            res = resolution[v.name]
            if res < 1:
                raise SpaceError(f"resolution for {v.name!r} must be >= 1")
            if isinstance(v, RealVar):
                axes.append([float(x) for x in np.linspace(v.lower, v.upper, res)])
            elif isinstance(v, IntegerVar):
                vals = _round_half_up(np.linspace(v.lower, v.upper, res))
                axes.append([int(x) for x in vals])
            else:
                if res != len(v.labels):
                    raise SpaceError(
                        f"resolution for categorical {v.name!r} must equal "
                        f"label count {len(v.labels)}"
                    )
                axes.append(list(v.labels))
        return [dict(zip(self._names, combo)) for combo in itertools.product(*axes)]


# --- config files -----------------------------------------------------

_KIND_KEYS = {"real", "integer", "categorical"}


def space_from_dict(cfg):
    if "variables" not in cfg:
        raise SpaceError("config missing 'variables'")
    variables = []
    for entry in cfg["variables"]:
        kind = entry.get("kind")
        if kind == "real":
            variables.append(RealVar(entry["name"], float(entry["lower"]), float(entry["upper"])))
        elif kind == "integer":
            variables.append(IntegerVar(entry["name"], int(entry["lower"]), int(entry["upper"])))
        elif kind == "categorical":
            variables.append(CategoricalVar(entry["name"], tuple(entry["labels"])))
        else:
            raise SpaceError(f"unknown variable kind {kind!r} (expected {_KIND_KEYS})")
    return SearchSpace(variables)


def space_to_dict(space):
    out = []
    for v in space.variables:
        if isinstance(v, RealVar):
            out.append({"name": v.name, "kind": "real", "lower": v.lower, "upper": v.upper})
        elif isinstance(v, IntegerVar):
            out.append({"name": v.name, "kind": "integer", "lower": v.lower, "upper": v.upper})
        else:
            out.append({"name": v.name, "kind": "categorical", "labels": list(v.labels)})
    return {"variables": out}


def load_space(path):
    with open(Path(path)) as fh:
        return space_from_dict(json.load(fh))
