import numpy as np
import pytest

from grid import CellGrid, make_uniform
from orlicz import arctan_primitive, exp_saturating, exponential, log_shifted, piecewise_phi, power

# strictly increasing φ with a positive final slope, so +0.1 perturbations are always detectable
PIECEWISE_KNOTS = [[0.0, 0.0], [1.0, 0.8], [3.0, 1.5]]


def admissible_specs():
    return [
        power(2.0),
        power(1.5),
        power(3.0),
        log_shifted(),
        arctan_primitive(),
        exp_saturating(),
        piecewise_phi(PIECEWISE_KNOTS),
    ]


def all_specs():
    return admissible_specs() + [exponential()]


def random_instance(rng: np.random.Generator, n_max: int = 16, uniform: bool = False):
    """A random problem on [0, 1]: n in [2, n_max], values in [-5, 5]."""
    n = int(rng.integers(2, n_max + 1))
    if uniform:
        grid = make_uniform(0.0, 1.0, n)
    else:
        inner = np.sort(rng.uniform(0.0, 1.0, n - 1))
        grid = CellGrid(np.concatenate(([0.0], inner, [1.0])))
    return grid, grid.step(rng.uniform(-5.0, 5.0, n))


@pytest.fixture(params=admissible_specs(), ids=str)
def spec(request):
    return request.param


@pytest.fixture(params=all_specs(), ids=str)
def any_spec(request):
    return request.param
