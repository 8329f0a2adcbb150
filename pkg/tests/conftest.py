"""Shared fixtures and hypothesis configuration for the test suite."""

import json

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from recipeopt.expert import benchmark_from_dict
from recipeopt.space import CategoricalVar, IntegerVar, RealVar, SearchSpace

# Property suites run at >= 1000 cases each; deadlines are disabled because
# several properties construct numpy arrays whose first call pays JIT-like
# warm-up costs inside BLAS.
settings.register_profile(
    "bulk",
    max_examples=1000,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("bulk")


@pytest.fixture
def mixed_space():
    return SearchSpace([
        RealVar("time", 5.0, 15.0),
        IntegerVar("count", 1, 9),
        CategoricalVar("mode", ("pan", "microwave")),
    ])


@pytest.fixture
def real_space_1d():
    return SearchSpace([RealVar("x", 0.0, 1.0)])


def tiny_benchmark_dict():
    """A small two-variable benchmark that keeps harness/CLI tests fast."""
    return {
        "name": "tiny",
        "variables": [
            {"name": "t", "kind": "real", "lower": 0.0, "upper": 10.0},
            {"name": "mode", "kind": "categorical", "labels": ["a", "b"]},
        ],
        "rules": [
            {"when": {"t": [4.0, 6.0]},
             "distribution": {"family": "normal", "mu": 9.0, "sigma": 1.0},
             "weight": 2.0},
            {"when": {"t": [0.0, 2.0]},
             "distribution": {"family": "gamma", "shape": 2.0, "scale": 1.0},
             "weight": 1.0},
            {"when": {"mode": ["a"]},
             "distribution": {"family": "normal", "mu": 8.0, "sigma": 1.0},
             "weight": 1.0},
            {"when": {"mode": ["b"]},
             "distribution": {"family": "normal", "mu": 3.0, "sigma": 1.0},
             "weight": 1.0},
        ],
        "default": {"family": "normal", "mu": 5.0, "sigma": 1.0},
        "expert_point": {"t": 8.0, "mode": "b"},
        "grid_resolution": {"t": 4, "mode": 2},
        "dataset": {"n_real": 8, "n_sim": 40, "jury_size": 2},
    }


@pytest.fixture
def tiny_benchmark():
    return benchmark_from_dict(tiny_benchmark_dict())


@pytest.fixture
def tiny_benchmark_file(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(tiny_benchmark_dict()))
    return path


def random_hp(rng, d):
    """A well-conditioned random kernel hyperparameter set."""
    from recipeopt.gp import KernelHyperparams

    return KernelHyperparams(
        amplitude_sq=float(rng.uniform(0.5, 2.0)),
        lengthscales=tuple(rng.uniform(0.3, 2.0, size=d)),
        noise_var=float(rng.uniform(0.05, 0.5)),
    )


def dense_gp_oracle(X, y, hp, Xq):
    """Direct dense-inverse GP posterior: mean/variance via explicit inversion.

    Targets are centered by their mean, mirroring the documented fitting
    convention, and de-centered in the returned mean.
    """
    from recipeopt.gp import matern52_matrix

    X = np.atleast_2d(np.asarray(X, float))
    Xq = np.atleast_2d(np.asarray(Xq, float))
    y = np.asarray(y, float)
    n = len(y)
    ybar = float(np.mean(y)) if n else 0.0
    K = matern52_matrix(X, X, hp)
    A = K + hp.noise_var * np.eye(n)
    Ainv = np.linalg.inv(A)
    ks = matern52_matrix(X, Xq, hp)
    mean = ybar + ks.T @ Ainv @ (y - ybar)
    var = hp.amplitude_sq - np.einsum("nq,nm,mq->q", ks, Ainv, ks)
    return mean, var
