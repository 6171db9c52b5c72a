import logging

import numpy as np
import pytest

from dataobjects import DomainError
from grid import MonotoneStepFunction, make_uniform
from luxemburg_fit import LuxemburgResult, fit_luxemburg, landers_rogge_check, scaled_min_modular
from orlicz import log_shifted, luxemburg_norm, power
from tests.conftest import random_instance


@pytest.fixture
def pair():
    grid = make_uniform(0.0, 2.0, 2)
    return grid, grid.step([2.0, 1.0])


def test_scaled_min_modular_pair(pair):
    grid, f = pair
    value, h = scaled_min_modular(power(2.0), grid, f, 1.0)
    assert value == 0.25
    assert h.values.tolist() == [1.5, 1.5]


def test_scaled_min_modular_is_zero_on_the_cone(spec):
    grid = make_uniform(0.0, 1.0, 3)
    f = grid.step([0.0, 1.0, 2.0])
    for lam in (0.1, 1.0, 10.0):
        assert scaled_min_modular(spec, grid, f, lam)[0] == 0.0
    with pytest.raises(DomainError):
        scaled_min_modular(spec, grid, f, 0.0)


def test_scaled_min_modular_is_non_increasing(spec):
    rng = np.random.default_rng(51)
    grid, f = random_instance(rng)
    lams = np.logspace(-2, 2, 25)
    values = [scaled_min_modular(spec, grid, f, lam)[0] for lam in lams]
    assert all(b <= a + 1e-12 * (1.0 + a) for a, b in zip(values, values[1:]))
    assert values[-1] < values[0] or values[0] == 0.0


def test_fit_luxemburg_monotone_input(spec):
    grid = make_uniform(0.0, 1.0, 3)
    f = grid.step([0.0, 1.0, 2.0])
    result = fit_luxemburg(spec, grid, f)
    assert result.delta == 0.0
    assert result.h_star.values.tolist() == f.values.tolist()
    assert landers_rogge_check(spec, grid, f, result).residual == 0.0


def test_fit_luxemburg_pair(pair):
    grid, f = pair
    result = fit_luxemburg(power(2.0), grid, f)
    assert result.delta == pytest.approx(0.5, abs=1e-8)
    assert result.h_star.values == pytest.approx([1.5, 1.5], abs=1e-12)
    assert result.relation_in_scope
    assert luxemburg_norm(power(2.0), grid, f - result.h_star) == pytest.approx(result.delta, abs=1e-8)


def test_fit_luxemburg_rejects_bad_tol(pair):
    grid, f = pair
    with pytest.raises(DomainError):
        fit_luxemburg(power(2.0), grid, f, tol=0.0)


def test_n_infinity_family_is_flagged(pair, caplog):
    grid, f = pair
    with caplog.at_level(logging.WARNING, logger="luxemburg_fit"):
        result = fit_luxemburg(log_shifted(), grid, f)
    assert not result.relation_in_scope
    assert "outside its stated hypothesis" in caplog.text


def test_norm_agrees_with_delta(spec):
    rng = np.random.default_rng(52)
    for _ in range(5):
        grid, f = random_instance(rng, n_max=10)
        result = fit_luxemburg(spec, grid, f)
        assert luxemburg_norm(spec, grid, f - result.h_star) == pytest.approx(result.delta, abs=1e-8)


def test_delta_is_homogeneous(spec):
    rng = np.random.default_rng(53)
    grid, f = random_instance(rng, n_max=10)
    base = fit_luxemburg(spec, grid, f).delta
    for c in (0.5, 3.0):
        assert fit_luxemburg(spec, grid, f * c).delta == pytest.approx(c * base, rel=1e-8)


def test_delta_bounds_random_candidates(spec):
    rng = np.random.default_rng(54)
    grid, f = random_instance(rng, n_max=10)
    delta = fit_luxemburg(spec, grid, f).delta
    for _ in range(20):
        g = MonotoneStepFunction(grid, np.sort(rng.uniform(-5, 5, grid.n_cells)))
        assert delta <= luxemburg_norm(spec, grid, f - g) + 1e-8


def test_jumps_follow_the_inner_fit(spec):
    rng = np.random.default_rng(55)
    grid, f = random_instance(rng, n_max=10)
    result = fit_luxemburg(spec, grid, f)
    inner = np.diff(result.inner_fit.g_star.values) > 0
    outer = np.diff(result.h_star.values) > 0
    assert np.array_equal(inner, outer)


def test_landers_rogge_consistent(spec):
    rng = np.random.default_rng(56)
    for _ in range(5):
        grid, f = random_instance(rng, n_max=10)
        result = fit_luxemburg(spec, grid, f)
        check = landers_rogge_check(spec, grid, f, result)
        assert check.consistent
        assert check.inner_certified
        assert check.residual <= 1e-6


def test_landers_rogge_detects_corruption(pair):
    grid, f = pair
    result = fit_luxemburg(power(2.0), grid, f)
    bad = LuxemburgResult(
        result.delta,
        MonotoneStepFunction(grid, result.h_star.values + 0.1),
        result.inner_fit,
        result.outer_iterations,
        result.relation_in_scope,
    )
    check = landers_rogge_check(power(2.0), grid, f, bad)
    assert not check.consistent
    assert check.residual == pytest.approx(0.1, abs=1e-9)


def test_result_serializes(pair):
    grid, f = pair
    out = fit_luxemburg(power(2.0), grid, f).to_dict()
    assert set(out) == {"delta", "h_star", "outer_iterations", "relation_in_scope"}
