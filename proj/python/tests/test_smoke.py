import math

import pytest

import altbm

MAP = dict(b=[1.0, 0.0], C=[[-2.0, 1.0], [0.5, -1.0]], D=[[0.5, 0.5], [0.0, 0.5]])


def test_standard_generator():
    g = altbm.standard_generator(10.0)
    assert g["states"] == ["1", "-1"]
    assert g["matrix"] == [[-10.0, 10.0], [10.0, -10.0]]


def test_generators_have_zero_row_sums():
    for g in (altbm.exp_alt_generator(10.0, 1.0, 2.0), altbm.map_alt_generator(10.0, **MAP)):
        for row in g["matrix"]:
            assert abs(sum(row)) < 1e-12


def test_exponential_correlation_closed_form():
    # alpha = beta = 1: E[B B*] / t = (1 - e^{-2t}) / (2t).
    for t in (0.1, 1.0, 3.0):
        assert altbm.corr_exp(1.0, 1.0, t) == pytest.approx(-math.expm1(-2 * t) / (2 * t), rel=1e-12)


def test_map_transform_matches_exponential_case():
    b, c, d = [1.0, 0.0], [[-1.0, 0.0], [0.0, -3.0]], [[0.0, 1.0], [3.0, 0.0]]
    g = 4.0
    for q in (0.5, 1.0, 2.0):
        expected = ((3.0 - 1.0) / (g * q) + 2.0 / (g * (g + q))) / q
        assert altbm.cov_laplace(b, c, d, q) == pytest.approx(expected, rel=1e-12)
    assert altbm.corr_map(b, c, d, 1.0) == pytest.approx(altbm.corr_exp(1.0, 3.0, 1.0), abs=1e-6)


def test_simulation_is_reproducible_and_consistent():
    a = altbm.simulate_exp_alternating(1.0, 1.0, [50.0], 2.0, seed=4)
    b = altbm.simulate_exp_alternating(1.0, 1.0, [50.0], 2.0, seed=4)
    assert a["F1"] == b["F1"] and a["F2"] == b["F2"]
    assert a["value_residual"] < 1e-12
    m = altbm.simulate_map_alternating(lambdas=[50.0], horizon=2.0, seed=4, **MAP)
    assert len(m["t"]) == len(m["F1"]) == len(m["F2"])


def test_monte_carlo_agrees_with_analytic():
    e = altbm.mc_correlation_exp(1.0, 2.0, 1.0, replications=4000, seed=9)
    assert abs(e["mean"] - altbm.corr_exp(1.0, 2.0, 1.0)) < 4 * e["stderr"]


def test_sweep_misalignment_shrinks():
    r = altbm.convergence_sweep([10.0, 1000.0], replications=30, seed=2)
    med = [row["median_misalignment"] for row in r["rows"]]
    assert med[1] < med[0]


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        altbm.exp_alt_generator(1.0, 1.0, 2.0)
    with pytest.raises(altbm.InvalidArgument):
        altbm.cov_laplace([1.0], [[-1.0]], [[2.0]], 1.0)
    with pytest.raises(ValueError):
        altbm.mc_correlation_exp(1.0, 1.0, 1.0, replications=10)
