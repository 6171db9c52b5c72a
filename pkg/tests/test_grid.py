import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from dataobjects import DomainError, StructuralError
from grid import (
    CellGrid,
    MonotoneStepFunction,
    StepFunction,
    integrate,
    make_graded,
    make_uniform,
    refine,
    sample_midpoints,
)


def test_make_uniform():
    g = make_uniform(0.0, 1.0, 4)
    assert g.breakpoints.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    single = make_uniform(0.0, 1.0, 1)
    assert single.n_cells == 1
    assert single.weights.tolist() == [1.0]
    assert np.allclose(make_uniform(-2.0, 3.0, 5).weights, 1.0, rtol=0, atol=1e-15)


@pytest.mark.parametrize("a,b,n", [(1.0, 1.0, 3), (2.0, 1.0, 3), (0.0, 1.0, 0)])
def test_make_uniform_rejects(a, b, n):
    with pytest.raises(DomainError):
        make_uniform(a, b, n)


def test_make_graded_clusters_at_left_end():
    g = make_graded(0.0, 1.0, 4)
    assert g.breakpoints.tolist() == [0.0, 0.0625, 0.25, 0.5625, 1.0]
    assert np.all(np.diff(g.weights) > 0)


def test_breakpoints_must_increase():
    with pytest.raises(StructuralError) as err:
        CellGrid([0.0, 0.5, 0.5, 1.0])
    assert err.value.errors["index"] == 2
    with pytest.raises(StructuralError):
        CellGrid([0.0])
    with pytest.raises(StructuralError):
        CellGrid([0.0, np.inf])


def test_value_count_must_match():
    g = make_uniform(0.0, 1.0, 3)
    with pytest.raises(StructuralError):
        g.step([1.0, 2.0])


def test_mixing_grids_is_refused():
    g1 = make_uniform(0.0, 1.0, 2)
    g2 = make_uniform(0.0, 2.0, 2)
    with pytest.raises(StructuralError):
        g1.step([1, 2]) + g2.step([1, 2])
    with pytest.raises(StructuralError):
        integrate(g1, g2.step([1, 2]))


def test_equal_breakpoints_count_as_same_grid():
    g1 = make_uniform(0.0, 1.0, 2)
    g2 = CellGrid([0.0, 0.5, 1.0])
    assert integrate(g1, g2.step([1.0, 3.0])) == 2.0


def test_cell_of_assigns_breakpoints_to_the_right():
    g = make_uniform(0.0, 1.0, 4)
    assert g.cell_of(0.0) == 0
    assert g.cell_of(0.25) == 1
    assert g.cell_of(0.3) == 1
    assert g.cell_of(1.0) == 3
    with pytest.raises(DomainError):
        g.cell_of(1.5)


def test_integrate_examples():
    one = make_uniform(0.0, 1.0, 1)
    assert integrate(one, one.step([1.0])) == 1.0
    assert integrate(one, one.step([0.0])) == 0.0
    two = make_uniform(0.0, 2.0, 2)
    assert integrate(two, two.step([1.0, -1.0])) == 0.0


def test_refine_examples():
    one = make_uniform(0.0, 1.0, 1)
    s = one.step([2.0])
    same_grid, same = refine(one, s, 1)
    assert same_grid is one and same is s
    fine, fs = refine(one, s, 2)
    assert fine.breakpoints.tolist() == [0.0, 0.5, 1.0]
    assert fs.values.tolist() == [2.0, 2.0]
    with pytest.raises(DomainError):
        refine(one, s, 0)


def test_refine_keeps_monotone_type():
    g = make_uniform(0.0, 1.0, 2)
    fine, m = refine(g, MonotoneStepFunction(g, [1.0, 2.0]), 3)
    assert isinstance(m, MonotoneStepFunction)
    assert m.values.tolist() == [1.0, 1.0, 1.0, 2.0, 2.0, 2.0]
    assert fine.n_cells == 6


@seed(7)
@settings(max_examples=60)
@given(
    vals=st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=12),
    factor=st.integers(1, 6),
)
def test_refinement_preserves_integral(vals, factor):
    grid = CellGrid(np.cumsum(np.concatenate(([0.0], np.linspace(0.5, 1.5, len(vals))))))
    s = grid.step(vals)
    fine, fs = refine(grid, s, factor)
    assert integrate(fine, fs) == pytest.approx(integrate(grid, s), rel=1e-12, abs=1e-10)


@seed(8)
@given(
    u=st.lists(st.floats(-50, 50, allow_nan=False), min_size=5, max_size=5),
    v=st.lists(st.floats(-50, 50, allow_nan=False), min_size=5, max_size=5),
    c=st.floats(-10, 10, allow_nan=False),
)
def test_integral_is_linear(u, v, c):
    grid = make_graded(1.0, 3.0, 5, power=1.5)
    s, t = grid.step(u), grid.step(v)
    assert integrate(grid, s * c + t) == pytest.approx(c * integrate(grid, s) + integrate(grid, t), abs=1e-9)


def test_monotone_step_function():
    g = make_uniform(0.0, 1.0, 3)
    with pytest.raises(StructuralError) as err:
        MonotoneStepFunction(g, [0.0, 2.0, 1.0])
    assert err.value.errors["index"] == 1
    m = MonotoneStepFunction(g, [0.0, 1.0, 1.0])
    assert isinstance(m * 2.0, MonotoneStepFunction)
    assert not isinstance(m * -1.0, MonotoneStepFunction)
    assert not (m * -1.0).is_monotone()
    assert MonotoneStepFunction.from_step(g.step([1, 1, 1])).values.tolist() == [1.0, 1.0, 1.0]


def test_values_are_read_only():
    g = make_uniform(0.0, 1.0, 2)
    s = StepFunction(g, [1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0


def test_sample_midpoints():
    g = make_uniform(0.0, 1.0, 4)
    s = sample_midpoints(g, lambda x: 2 * x)
    assert s.values.tolist() == [0.25, 0.75, 1.25, 1.75]
