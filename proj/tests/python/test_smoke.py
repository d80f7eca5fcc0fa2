import math

import pytest

import collabest as cb


def two_sensor(rho, s1=1.0, s2=1.0):
    return cb.Model([1.0, 1.0], [s1, s2], [[1.0, rho], [rho, 1.0]])


def test_threshold():
    assert cb.bivariate_threshold(2.0) == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-12)
    assert cb.bivariate_threshold(0.0) == 0.0


def test_model_and_information():
    m = two_sensor(0.5)
    assert m.dim == 2
    assert m.rho(0, 1) == 0.5
    assert cb.fi_subset(m, [0, 1]) == pytest.approx(4.0 / 3.0)
    assert cb.fi_subset(m, [0]) == 1.0


def test_invalid_model_raises():
    with pytest.raises(cb.CollabError):
        cb.Model([0.0, 0.0], [1.0, 1.0], [[1.0, 1.5], [1.5, 1.0]])
    with pytest.raises(ValueError):
        cb.Model([0.0, 0.0], [1.0, -1.0], [[1.0, 0.0], [0.0, 1.0]])


def test_policy_table_and_lp():
    assert cb.table3_policy(2.0, 2.0, 0.5) == pytest.approx({"1": 0.5, "1,2": 0.5})
    sol = cb.solve_scenario1_lp(two_sensor(0.9), 2.0, 3.0)
    assert sol["policy"] == pytest.approx({"1,2": 1.0})
    assert sol["crb"] == pytest.approx(1.0 - 0.81)


def test_trivariate_and_regions():
    assert cb.best_trivariate_sample_type(0.0, 0.0, 0.5, 2.0) == "univariate"
    assert cb.best_trivariate_sample_type(0.8, 0.0, 0.5, 2.0) == "trivariate"
    cells = cb.region_grid(2.0, 0.5, 10)
    assert len(cells) == 100
    assert cells[0] == (0.0, 0.0, "univariate")


def test_scenario2_and_weights():
    assert cb.wilks_variance(3, 0, 5, 0.6, 1.0) == pytest.approx(1.0 / 8.0)
    assert cb.crb_scenario2_bivariate(2.0 / 3.0, 0.0, 1.0 / 3.0, two_sensor(0.5)) == pytest.approx(1.0)
    g = cb.optimal_weights_bivariate(4, 6, 0.5)
    assert sum(g) == pytest.approx(1.0)
    curve = cb.crb_curve(1, 2.0, 2.0, 0.5, 11)
    best = min(curve, key=lambda p: p[2])
    assert best[0] == pytest.approx(0.5)


def test_bandit_helpers():
    assert cb.make_schedule(2.0, 0.6, 5000) == (5, 3, 1000)
    assert cb.arm_one_z(2.0) == pytest.approx(math.atanh(math.sqrt(2.0 / 3.0)))
    assert math.isinf(cb.ci_width(4.0, 0.1, 0))
    assert cb.oracle_static_arm(two_sensor(0.95), 2.0, 0.6) == 1


def test_run_fig6_small_and_deterministic():
    a = cb.run_fig6("c", runs=3, seed=5, horizon=200, step=50, threads=1)
    b = cb.run_fig6("c", runs=3, seed=5, horizon=200, step=50, threads=2)
    assert set(a) == {"DOUBLE-F", "DOUBLE-Z", "UCB-F", "UCB-Z", "ETC", "ARM-1", "ARM-2", "ARM-3", "ARM-4", "ARM-5"}
    for name, run in a.items():
        assert run["slots"] == [50, 100, 150, 200]
        assert run["ledger_ok"]
        assert run["mse"] == b[name]["mse"]
