"""Cell partitions of [a, b] and piecewise-constant functions on them.

Every function lives on a CellGrid as one value per cell, so integrals against
Lebesgue measure reduce to finite weighted sums.
"""
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from dataobjects import DomainError, StructuralError


@dataclass(frozen=True, eq=False)
class CellGrid:
    breakpoints: np.ndarray
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.array(self.breakpoints, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise StructuralError("a grid needs at least two breakpoints")
        if not np.all(np.isfinite(x)):
            raise StructuralError("breakpoints must be finite")
        w = np.diff(x)
        if np.any(w <= 0):
            bad = int(np.argmin(w))
            raise StructuralError(
                "breakpoints must be strictly increasing",
                errors={"index": bad + 1, "left": float(x[bad]), "right": float(x[bad + 1])},
            )
        x.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "breakpoints", x)
        object.__setattr__(self, "weights", w)

    @property
    def a(self) -> float:
        return float(self.breakpoints[0])

    @property
    def b(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def n_cells(self) -> int:
        return self.weights.size

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.breakpoints[:-1] + self.breakpoints[1:])

    def same_as(self, other: "CellGrid") -> bool:
        return self is other or (
            self.breakpoints.shape == other.breakpoints.shape
            and bool(np.array_equal(self.breakpoints, other.breakpoints))
        )

    def check_owns(self, s: "StepFunction") -> None:
        if s.values.size != self.n_cells:
            raise StructuralError(
                "step function does not match grid",
                errors={"cells": self.n_cells, "values": int(s.values.size)},
            )
        if not self.same_as(s.grid):
            raise StructuralError("step function lives on a different grid")

    def cell_of(self, x: float) -> int:
        """Index of the cell containing x; a breakpoint belongs to the cell on its right."""
        if not self.a <= x <= self.b:
            raise DomainError(f"{x} lies outside [{self.a}, {self.b}]")
        return int(min(np.searchsorted(self.breakpoints, x, side="right") - 1, self.n_cells - 1))

    def step(self, values) -> "StepFunction":
        return StepFunction(self, values)


@dataclass(frozen=True, eq=False)
class StepFunction:
    grid: CellGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size != self.grid.n_cells:
            raise StructuralError(
                "value count must equal cell count",
                errors={"cells": self.grid.n_cells, "values": int(v.size)},
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def _other(self, other) -> np.ndarray:
        if isinstance(other, StepFunction):
            if not self.grid.same_as(other.grid):
                raise StructuralError("step functions live on different grids")
            return other.values
        return np.asarray(other, dtype=float)

    def __add__(self, other) -> "StepFunction":
        return StepFunction(self.grid, self.values + self._other(other))

    def __sub__(self, other) -> "StepFunction":
        return StepFunction(self.grid, self.values - self._other(other))

    def __mul__(self, c: float) -> "StepFunction":
        return StepFunction(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "StepFunction":
        return StepFunction(self.grid, self.values / float(c))

    def __neg__(self) -> "StepFunction":
        return StepFunction(self.grid, -self.values)

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0))


class MonotoneStepFunction(StepFunction):
    """A StepFunction with non-decreasing values, i.e. a member of the monotone cone."""

    def __post_init__(self):
        super().__post_init__()
        d = np.diff(self.values)
        if np.any(d < 0):
            i = int(np.argmin(d))
            raise StructuralError(
                "values must be non-decreasing",
                errors={"index": i, "left": float(self.values[i]), "right": float(self.values[i + 1])},
            )

    @classmethod
    def from_step(cls, s: StepFunction) -> "MonotoneStepFunction":
        return cls(s.grid, s.values)

    def __mul__(self, c: float) -> StepFunction:
        out = self.values * float(c)
        return MonotoneStepFunction(self.grid, out) if c >= 0 else StepFunction(self.grid, out)

    __rmul__ = __mul__


def make_uniform(a: float, b: float, n: int) -> CellGrid:
    if not a < b:
        raise DomainError("make_uniform needs a < b", errors={"a": a, "b": b})
    if n < 1:
        raise DomainError("make_uniform needs n >= 1", errors={"n": n})
    x = a + (b - a) * (np.arange(n + 1) / n)
    x[-1] = b
    return CellGrid(x)


def make_graded(a: float, b: float, n: int, power: float = 2.0) -> CellGrid:
    """Cells clustered at a: xₖ = a + (b − a)(k/n)^power."""
    if not a < b or n < 1 or power < 1:
        raise DomainError("make_graded needs a < b, n >= 1, power >= 1")
    x = a + (b - a) * (np.arange(n + 1) / n) ** power
    x[-1] = b
    return CellGrid(x)


def integrate(grid: CellGrid, s: StepFunction) -> float:
    grid.check_owns(s)
    return float(np.dot(grid.weights, s.values))


def refine(grid: CellGrid, s: StepFunction, factor: int) -> tuple[CellGrid, StepFunction]:
    """Split every cell into `factor` equal subcells, replicating values."""
    if factor < 1:
        raise DomainError("refine needs factor >= 1", errors={"factor": factor})
    grid.check_owns(s)
    if factor == 1:
        return grid, s
    left = grid.breakpoints[:-1]
    frac = np.arange(factor) / factor
    x = np.append((left[:, None] + grid.weights[:, None] * frac[None, :]).reshape(-1), grid.b)
    fine = CellGrid(x)
    cls = type(s) if isinstance(s, MonotoneStepFunction) else StepFunction
    return fine, cls(fine, np.repeat(s.values, factor))


def sample_midpoints(grid: CellGrid, func: Callable[[np.ndarray], np.ndarray]) -> StepFunction:
    return StepFunction(grid, func(grid.midpoints))
