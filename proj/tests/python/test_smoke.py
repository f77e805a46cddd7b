import math

import pytest

import phmc

TPS = {
    "model": "tps",
    "tau": 2.0,
    "d": 1,
    "m": 8,
    "potential": {"name": "normal_mixture", "params": {"means": [[-1.0], [1.0]], "quadratic_shift": 1.0}},
}


def test_version_is_a_string():
    assert isinstance(phmc.__version__, str) and phmc.__version__


def test_tps_covariance_matches_closed_form():
    model = phmc.Model({"model": "tps", "tau": 1.0, "m": 5, "potential": "zero"})
    h = 1.0 / 6.0
    expected = [h * h / (4.0 * math.sin(k * math.pi / 12.0) ** 2) for k in range(1, 6)]
    assert model.kind == "tps"
    assert model.dimension == 5
    assert model.weight == pytest.approx(h)
    assert model.covariance == pytest.approx(expected, rel=1e-12)


def test_pimd_covariance_constant_mode():
    model = phmc.Model({"model": "pimd", "beta": 1.0, "a": 0.5, "m": 6, "potential": "zero"})
    assert max(model.covariance) == pytest.approx(2.0, rel=1e-12)


def test_grid_eigen_round_trip():
    model = phmc.Model(TPS)
    grid = [0.3, -1.2, 0.5, 2.0, 0.0, -0.7, 1.1, 0.4]
    assert model.to_grid(model.to_eigen(grid)) == pytest.approx(grid, abs=1e-12)


def test_force_zero_potential_is_zero():
    model = phmc.Model({"model": "tps", "tau": 1.0, "m": 4, "potential": "zero"})
    U, f = model.force([0.1, 0.2, 0.3, 0.4])
    assert U == 0.0
    assert f == [0.0, 0.0, 0.0, 0.0]


def test_sample_reproducible_and_shaped():
    model = phmc.Model(TPS)
    x0 = model.initial_state("zero")
    a = phmc.sample(model, x0, 1.0, 0.1, 200, seed=3)
    b = phmc.sample(model, x0, 1.0, 0.1, 200, seed=3)
    assert a == b
    assert a["steps"] == 200
    assert 0.0 < a["acceptance_rate"] <= 1.0
    assert len(a["final_state"]) == model.dimension


def test_dimension_error():
    model = phmc.Model(TPS)
    with pytest.raises(phmc.DimensionError):
        model.force([0.0, 1.0])


def test_config_error_is_an_error():
    with pytest.raises(phmc.ConfigError):
        phmc.Model({"model": "tps", "tau": -1.0, "m": 4, "potential": "zero"})
    assert issubclass(phmc.ConfigError, phmc.Error)


def test_tps_constants_keys():
    c = phmc.tps_constants(2.0, 1, 1.0, 1.0, 1e-3)
    assert c["model"] == "tps"
    assert c["n"] >= 1
    assert c["R"] > 0.0
    assert "model_condition" in c


def test_contraction_constants_reject_large_T():
    with pytest.raises(phmc.ConditionError):
        phmc.contraction_constants(1.0, 1.0, 1.0, 1, 1.0, 2.0, 1.0, 10.0)


def test_failure_probability_matches_exact_tv():
    r = phmc.failure_probability([0.3, 0.1], 1.0, [1.0, 0.5], 20000, 9)
    assert abs(r["empirical"] - r["tv_exact"]) <= 4.0 * r["se"] + 1e-12
    assert r["tv_exact"] <= r["bound"] + 1e-12


def test_eigenvalue_lemma_check():
    r = phmc.eigenvalue_lemma_check("tps", {"tau": 1.0}, 64)
    assert r["ok"] and r["checked"] == 64


def test_coupling_times():
    model = phmc.Model(TPS)
    x0 = [1.0] * 8
    y0 = [-1.0] * 8
    r = phmc.coupling_times(model, x0, y0, [0.5], ["zero", "1/T"], 0.05, n=2, replicas=4,
                            max_steps=3000, threshold=1e-8, seed=2)
    assert len(r["rows"]) == 8
    assert len(r["summary"]) == 2


def test_parse_toml():
    assert phmc.parse_toml("seed = 4\n[model]\nm = 3\n") == {"seed": 4, "model": {"m": 3}}


def test_run_experiment_exit_codes(tmp_path):
    code, _ = phmc.run_experiment({"command": "sample"}, tmp_path / "bad")
    assert code == 2
    cfg = {
        "command": "sample",
        "seed": 1,
        "model": TPS,
        "kernel": {"T": 1.0, "dt": 0.1},
        "steps": 20,
    }
    code, log = phmc.run_experiment(cfg, tmp_path / "ok")
    assert code == 0, log
    assert (tmp_path / "ok" / "manifest.json").exists()
