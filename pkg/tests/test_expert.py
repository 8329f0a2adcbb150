"""Expert quality models, simulated datasets and packaged benchmarks."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from recipeopt.expert import (
    Benchmark,
    ExpertRule,
    QualityDistribution,
    QualityModel,
    cesar_benchmark,
    expected_quality,
    generate_dataset,
    hotdog_benchmark,
    jury_mean,
    load_real_dataset,
    sample_quality,
    save_dataset,
)
from recipeopt.space import IntegerVar, RealVar, SearchSpace, SpaceError


def _rule(name, lo, hi, mu, sigma=1.0, weight=1.0):
    return ExpertRule(
        conditions=((name, (lo, hi)),),
        distribution=QualityDistribution("normal", (mu, sigma)),
        weight=weight,
    )


def _model(*rules, default_mu=5.0):
    return QualityModel(tuple(rules),
                        QualityDistribution("normal", (default_mu, 1.0)))


# --- distributions ----------------------------------------------------------


def test_distribution_validation():
    with pytest.raises(ValueError):
        QualityDistribution("normal", (5.0, 0.0))
    with pytest.raises(ValueError):
        QualityDistribution("gamma", (-1.0, 1.0))
    with pytest.raises(ValueError):
        QualityDistribution("uniform", (0.0, 1.0))


def test_distribution_means():
    assert QualityDistribution("normal", (7.0, 2.0)).mean() == 7.0
    assert QualityDistribution("gamma", (2.0, 1.25)).mean() == 2.5


def test_rule_weight_positive():
    with pytest.raises(ValueError, match="weight"):
        ExpertRule(conditions=(), weight=0.0,
                   distribution=QualityDistribution("normal", (5.0, 1.0)))


# --- sampling ----------------------------------------------------------------


def test_single_gaussian_rule_mean():
    model = _model(_rule("t", 0, 10, mu=8.0, sigma=0.5))
    rng = np.random.default_rng(0)
    draws = [sample_quality(model, {"t": 5.0}, rng) for _ in range(10_000)]
    assert 7.97 <= np.mean(draws) <= 8.03


def test_gaussian_above_range_clips_to_ten():
    model = _model(_rule("t", 0, 10, mu=11.0, sigma=0.1))
    rng = np.random.default_rng(1)
    draws = [sample_quality(model, {"t": 5.0}, rng) for _ in range(1000)]
    assert all(d == 10.0 for d in draws)


def test_weighted_mean_of_two_rules():
    model = _model(
        _rule("t", 0, 10, mu=4.0, sigma=1e-9, weight=1.0),
        _rule("t", 0, 10, mu=8.0, sigma=1e-9, weight=3.0),
    )
    y = sample_quality(model, {"t": 5.0}, np.random.default_rng(2))
    assert y == pytest.approx(7.0, abs=1e-6)


def test_default_distribution_when_nothing_fires():
    model = _model(_rule("t", 0, 1, mu=9.0), default_mu=3.0)
    rng = np.random.default_rng(3)
    draws = [sample_quality(model, {"t": 5.0}, rng) for _ in range(2000)]
    assert np.mean(draws) == pytest.approx(3.0, abs=0.1)


def test_label_condition_fires_on_membership():
    rule = ExpertRule(conditions=(("mode", ("a", "b")),),
                      distribution=QualityDistribution("normal", (8.0, 1.0)))
    assert rule.fires({"mode": "a"})
    assert not rule.fires({"mode": "c"})


def test_sample_mean_matches_expected_quality():
    # means kept mid-range so the [0, 10] clip is inactive
    model = _model(
        _rule("t", 0, 10, mu=6.0, sigma=0.5, weight=2.0),
        _rule("t", 2, 8, mu=4.0, sigma=0.5, weight=1.0),
    )
    point = {"t": 5.0}
    rng = np.random.default_rng(4)
    draws = np.array([sample_quality(model, point, rng) for _ in range(100_000)])
    se = draws.std() / np.sqrt(len(draws))
    assert abs(draws.mean() - expected_quality(model, point)) <= 5 * se


@given(st.floats(0.0, 10.0), st.integers(0, 2**32 - 1))
def test_prop_sample_quality_clipped(t, seed):
    model = _model(
        _rule("t", 0.0, 4.0, mu=-20.0, sigma=30.0),
        _rule("t", 3.0, 10.0, mu=25.0, sigma=30.0),
    )
    y = sample_quality(model, {"t": t}, np.random.default_rng(seed))
    assert 0.0 <= y <= 10.0


# --- jury --------------------------------------------------------------------


def test_jury_mean_basic():
    assert jury_mean([7, 8, 9]) == 8.0
    assert jury_mean([4.2]) == 4.2


def test_jury_mean_empty():
    with pytest.raises(ValueError):
        jury_mean([])


# --- dataset generation ---------------------------------------------------------


_DS_SPACE = SearchSpace([RealVar("t", 0.0, 10.0), IntegerVar("n", 0, 4)])


def test_generate_no_simulated_rows():
    model = _model(_rule("t", 0, 10, mu=6.0))
    ds = generate_dataset(model, _DS_SPACE, {"t": 3, "n": 5}, n_sim=0,
                          jury_size=2, rng=np.random.default_rng(0))
    assert len(ds) == 15
    assert all(tag == "real" for tag in ds.provenance)


def test_generate_45_grid_rows_plus_sim():
    space = SearchSpace([RealVar("t", 0.0, 10.0), IntegerVar("n", 0, 4)])
    model = _model(_rule("t", 0, 10, mu=6.0))
    ds = generate_dataset(model, space, {"t": 9, "n": 5}, n_sim=20,
                          jury_size=3, rng=np.random.default_rng(1))
    assert ds.provenance.count("real") == 45
    assert ds.provenance.count("simulated") == 20


def test_generate_subsamples_grid_to_n_real():
    model = _model(_rule("t", 0, 10, mu=6.0))
    ds = generate_dataset(model, _DS_SPACE, {"t": 10, "n": 5}, n_sim=0,
                          jury_size=1, rng=np.random.default_rng(2), n_real=12)
    assert len(ds) == 12


def test_generated_quality_in_range():
    model = _model(_rule("t", 0, 10, mu=9.0, sigma=6.0))
    ds = generate_dataset(model, _DS_SPACE, {"t": 5, "n": 5}, n_sim=300,
                          jury_size=2, rng=np.random.default_rng(3))
    assert np.all((ds.y >= 0.0) & (ds.y <= 10.0))
    for p in ds.points:
        _DS_SPACE.validate_point(p)


def test_dataset_generation_byte_identical(tmp_path):
    model = _model(_rule("t", 0, 10, mu=6.0))
    paths = []
    for i in range(2):
        ds = generate_dataset(model, _DS_SPACE, {"t": 4, "n": 5}, n_sim=30,
                              jury_size=2, rng=np.random.default_rng(42))
        path = tmp_path / f"ds{i}.csv"
        save_dataset(ds, path, _DS_SPACE)
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_latent_matrix_matches_encoder():
    model = _model(_rule("t", 0, 10, mu=6.0))
    ds = generate_dataset(model, _DS_SPACE, {"t": 3, "n": 5}, n_sim=5,
                          jury_size=1, rng=np.random.default_rng(4))
    X = ds.latent_matrix(_DS_SPACE)
    for i, p in enumerate(ds.points):
        assert np.array_equal(X[i], _DS_SPACE.to_latent(p))


# --- real-dataset ingestion -------------------------------------------------------


def _write_csv(path, rows):
    path.write_text("\n".join(rows) + "\n")


def test_load_real_dataset_two_rows(tmp_path):
    path = tmp_path / "real.csv"
    _write_csv(path, ["t,n,quality", "1.5,2,7.0", "9.0,0,3.5"])
    ds = load_real_dataset(path, _DS_SPACE)
    assert len(ds) == 2
    assert ds.points[0] == {"t": 1.5, "n": 2}
    assert list(ds.y) == [7.0, 3.5]
    assert ds.provenance == ["real", "real"]


def test_load_real_dataset_quality_out_of_range(tmp_path):
    path = tmp_path / "real.csv"
    _write_csv(path, ["t,n,quality", "1.0,1,12"])
    with pytest.raises(SpaceError, match="row 1"):
        load_real_dataset(path, _DS_SPACE)


def test_load_real_dataset_unknown_label(tmp_path):
    from recipeopt.space import CategoricalVar

    space = SearchSpace([CategoricalVar("mode", ("a", "b"))])
    path = tmp_path / "real.csv"
    _write_csv(path, ["mode,quality", "zzz,5.0"])
    with pytest.raises(SpaceError, match="zzz"):
        load_real_dataset(path, space)


def test_load_real_dataset_missing_quality_column(tmp_path):
    path = tmp_path / "real.csv"
    _write_csv(path, ["t,n", "1.0,1"])
    with pytest.raises(SpaceError, match="quality"):
        load_real_dataset(path, _DS_SPACE)


# --- packaged benchmarks ------------------------------------------------------------


def test_cesar_latent_dim():
    assert cesar_benchmark().space.latent_dim == 7


def test_hotdog_latent_dim():
    assert hotdog_benchmark().space.latent_dim == 10


def test_benchmark_spaces_validate():
    for bench in (cesar_benchmark(), hotdog_benchmark()):
        bench.space.validate()
        bench.space.validate_point(bench.expert_point)


def test_benchmark_rejects_rule_on_unknown_variable():
    space = SearchSpace([RealVar("t", 0, 1)])
    model = QualityModel(
        (_rule("missing", 0, 1, mu=5.0),),
        QualityDistribution("normal", (5.0, 1.0)),
    )
    with pytest.raises(SpaceError, match="unknown variable"):
        Benchmark(name="bad", space=space, quality_model=model,
                  expert_point={"t": 0.5}, grid_resolution={"t": 2})


_OPTIMA = {
    "cesar": {"sausage_time_s": 50.0, "bread_time_s": 105.0,
              "cooking_place": "pan", "bbq_teaspoons": 0,
              "mayonnaise_teaspoons": 0, "mustard_teaspoons": 0},
    "hotdog": {"bread_ceramic_intensity": 9, "bread_time_s": 13.0,
               "chicken_ceramic_intensity": 8, "chicken_time_s": 85.0,
               "cesar_brand": "X", "lettuce_brand": "Y"},
}


@pytest.mark.parametrize("factory,name", [
    (cesar_benchmark, "cesar"), (hotdog_benchmark, "hotdog")])
def test_planted_optimum_beats_expert_point(factory, name):
    bench = factory()
    rng = np.random.default_rng(0)
    opt = np.mean([sample_quality(bench.quality_model, _OPTIMA[name], rng)
                   for _ in range(1000)])
    exp = np.mean([sample_quality(bench.quality_model, bench.expert_point, rng)
                   for _ in range(1000)])
    assert opt > exp


@pytest.mark.parametrize("factory,name", [
    (cesar_benchmark, "cesar"), (hotdog_benchmark, "hotdog")])
def test_planted_optimum_beats_space_average(factory, name):
    bench = factory()
    rng = np.random.default_rng(1)
    opt = np.mean([sample_quality(bench.quality_model, _OPTIMA[name], rng)
                   for _ in range(1000)])
    avg = np.mean([sample_quality(bench.quality_model, p, rng)
                   for p in bench.space.sample_uniform(rng, 1000)])
    assert opt - avg >= 1.5
