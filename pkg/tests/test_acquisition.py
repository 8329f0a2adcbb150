"""Expected improvement, hyperparameter averaging and acquisition search."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from recipeopt.acquisition import (
    AcquisitionConfig,
    AveragedAcquisition,
    averaged_acquisition,
    expected_improvement,
    maximize_acquisition,
)
from recipeopt.gp import GPPosterior, KernelHyperparams
from recipeopt.space import CategoricalVar, IntegerVar, SearchSpace

from .conftest import random_hp


def _hp(amp2=1.0, ls=(0.3,), noise=1e-6):
    return KernelHyperparams(amp2, ls, noise)


# --- expected improvement -------------------------------------------------


def test_ei_at_incumbent_unit_sigma():
    # E[max(N(0,1), 0)] = 1/sqrt(2 pi)
    assert expected_improvement(5.0, 1.0, 5.0) == pytest.approx(0.39894, abs=1e-4)


def test_ei_zero_sigma_below_incumbent():
    assert expected_improvement(3.0, 0.0, 5.0) == 0.0


def test_ei_zero_sigma_at_incumbent():
    assert expected_improvement(5.0, 0.0, 5.0) == 0.0


def test_ei_zero_sigma_above_incumbent():
    assert expected_improvement(7.0, 0.0, 5.0) == pytest.approx(2.0)


def test_ei_vectorized_matches_scalar():
    means = np.array([-1.0, 0.0, 2.0])
    variances = np.array([0.5, 0.0, 2.0])
    out = expected_improvement(means, variances, 0.3)
    for i in range(3):
        assert out[i] == pytest.approx(
            expected_improvement(means[i], variances[i], 0.3))


def test_ei_monotone_in_mean():
    means = np.linspace(-3, 3, 50)
    vals = expected_improvement(means, 1.0, 0.0)
    assert np.all(np.diff(vals) > 0)


def test_ei_monotone_in_sigma_when_mean_below_incumbent():
    sigmas = np.linspace(0.01, 3, 50)
    vals = expected_improvement(-0.5, sigmas**2, 0.0)
    assert np.all(np.diff(vals) > 0)


@given(
    st.floats(-50, 50),
    st.floats(0, 100),
    st.floats(-50, 50),
)
def test_prop_ei_nonnegative_and_dominates_mean_gap(mean, variance, incumbent):
    ei = expected_improvement(mean, variance, incumbent)
    assert ei >= 0.0
    assert ei >= (mean - incumbent) - 1e-12


# --- averaged acquisition ---------------------------------------------------


def _toy_data(seed=0, n=6, d=2):
    rng = np.random.default_rng(seed)
    return rng.random((n, d)), rng.normal(size=n)


def _plain_ei(X, y, hp, x):
    post = GPPosterior(X, y, hp)
    mean, var = post.predict(np.atleast_2d(x))
    return expected_improvement(mean[0], var[0], float(np.max(y)))


def test_single_sample_equals_plain_ei():
    X, y = _toy_data()
    hp = random_hp(np.random.default_rng(1), 2)
    x = np.array([0.2, 0.9])
    assert averaged_acquisition(X, y, [hp], x) == pytest.approx(
        _plain_ei(X, y, hp, x), abs=1e-10)


def test_duplicated_samples_equal_single():
    X, y = _toy_data()
    hp = random_hp(np.random.default_rng(2), 2)
    x = np.array([0.4, 0.1])
    single = averaged_acquisition(X, y, [hp], x)
    tripled = averaged_acquisition(X, y, [hp, hp, hp], x)
    assert tripled == pytest.approx(single, abs=1e-12)


def test_three_samples_equal_mean_of_individuals():
    X, y = _toy_data(seed=3)
    rng = np.random.default_rng(4)
    hps = [random_hp(rng, 2) for _ in range(3)]
    x = np.array([0.7, 0.3])
    individual = [averaged_acquisition(X, y, [hp], x) for hp in hps]
    assert averaged_acquisition(X, y, hps, x) == pytest.approx(
        np.mean(individual), abs=1e-12)


def test_sample_order_invariance():
    X, y = _toy_data(seed=5)
    rng = np.random.default_rng(6)
    hps = [random_hp(rng, 2) for _ in range(4)]
    x = np.array([0.5, 0.5])
    assert averaged_acquisition(X, y, hps, x) == pytest.approx(
        averaged_acquisition(X, y, list(reversed(hps)), x), abs=1e-12)


def test_averaged_acquisition_requires_samples():
    X, y = _toy_data()
    with pytest.raises(ValueError, match="sample"):
        AveragedAcquisition(X, y, [])


def test_acquisition_config_validation():
    with pytest.raises(ValueError):
        AcquisitionConfig(grid_size=0)
    with pytest.raises(ValueError):
        AcquisitionConfig(n_gp_samples=0)


# --- maximization -------------------------------------------------------------


def test_maximizer_returns_valid_snapped_point(mixed_space):
    rng = np.random.default_rng(0)
    X = mixed_space.snap_latent_array(rng.random((5, mixed_space.latent_dim)))
    y = rng.normal(size=5)
    hp = random_hp(rng, mixed_space.latent_dim)
    cfg = AcquisitionConfig(grid_size=200)
    x = maximize_acquisition(mixed_space, X, y, [hp], cfg, np.random.default_rng(1))
    assert x.shape == (mixed_space.latent_dim,)
    assert np.all((x >= 0) & (x <= 1))
    assert np.allclose(mixed_space.snap_latent(x), x, atol=1e-12)


def test_maximizer_near_constant_acquisition_still_valid():
    space = SearchSpace([IntegerVar("n", 0, 3), CategoricalVar("c", ("a", "b"))])
    rng = np.random.default_rng(2)
    X = space.snap_latent_array(rng.random((4, space.latent_dim)))
    y = np.zeros(4)
    hp = KernelHyperparams(1.0, (1e3,) * space.latent_dim, 1e-3)
    cfg = AcquisitionConfig(grid_size=100)
    x = maximize_acquisition(space, X, y, [hp], cfg, np.random.default_rng(3))
    space.validate_point(space.from_latent(x))
    assert np.allclose(space.snap_latent(x), x, atol=1e-12)


def test_maximizer_finds_quadratic_peak(real_space_1d):
    # posterior mean peaks at x = 0.5; the search must land within 0.01
    X = np.array([[0.0], [0.2], [0.35], [0.65], [0.8], [1.0]])
    y = -((X[:, 0] - 0.5) ** 2)
    hp = _hp(amp2=1.0, ls=(0.4,), noise=1e-8)
    cfg = AcquisitionConfig(grid_size=1000)
    x = maximize_acquisition(real_space_1d, X, y, [hp], cfg,
                             np.random.default_rng(0))
    assert abs(x[0] - 0.5) <= 0.01


def test_refinement_never_loses_to_grid_seed(real_space_1d):
    X = np.array([[0.1], [0.4], [0.9]])
    y = np.array([0.2, 0.9, 0.1])
    hp = _hp(amp2=1.0, ls=(0.3,), noise=1e-4)
    acq = AveragedAcquisition(X, y, [hp], space=real_space_1d)
    seed_only = maximize_acquisition(
        real_space_1d, X, y, [hp], AcquisitionConfig(grid_size=50, local_steps=0),
        np.random.default_rng(5))
    refined = maximize_acquisition(
        real_space_1d, X, y, [hp], AcquisitionConfig(grid_size=50, local_steps=50),
        np.random.default_rng(5))
    assert acq(refined[None, :])[0] >= acq(seed_only[None, :])[0] - 1e-12
