"""Best non-decreasing approximation under the modular ∫Φ(|f − g|)dμ.

Generalized pool-adjacent-violators: cells are pushed left to right as
singleton blocks; whenever the newest block's level does not exceed its left
neighbour's, the two are pooled and the pooled block is re-solved. A block's
level is a zero of H(c) = Σ wᵢ ψ(c − fᵢ), which is continuous and
non-decreasing, so bisection on a sign-changing bracket finds it.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from dataobjects import NumericalError, StructuralError
from grid import CellGrid, MonotoneStepFunction, StepFunction
from orlicz import Family, OrliczSpec, modular, score

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 1024


class TieBreak(str, Enum):
    MIDPOINT = "midpoint"
    LEFTMOST = "leftmost"
    RIGHTMOST = "rightmost"


@dataclass(frozen=True)
class SolverOptions:
    block_tol: Optional[float] = None  # None: 1e-12 × value scale of the problem
    tie_break: TieBreak = TieBreak.MIDPOINT
    max_bisection_iters: int = 200
    # called with the cell index every PROGRESS_EVERY cells pushed
    progress: Optional[Callable[[int], None]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "tie_break", TieBreak(self.tie_break))
        if self.block_tol is not None and not self.block_tol > 0:
            raise StructuralError("block_tol must be positive", errors={"block_tol": self.block_tol})

    def resolved_tol(self, values: np.ndarray) -> float:
        if self.block_tol is not None:
            return self.block_tol
        return 1e-12 * max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)


@dataclass(frozen=True)
class Block:
    start_cell: int
    end_cell: int  # inclusive
    level: float
    level_interval: tuple[float, float]

    @property
    def size(self) -> int:
        return self.end_cell - self.start_cell + 1

    def to_dict(self) -> dict:
        return {
            "start_cell": self.start_cell,
            "end_cell": self.end_cell,
            "level": self.level,
            "level_interval": list(self.level_interval),
        }


@dataclass(frozen=True, eq=False)
class MonotoneFit:
    blocks: list[Block]
    g_star: MonotoneStepFunction
    modular_value: float
    merges: int = 0
    block_solves: int = 0
    spec: Optional[OrliczSpec] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "g_star": self.g_star.values.tolist(),
            "blocks": [b.to_dict() for b in self.blocks],
            "modular_value": self.modular_value,
            "merges": self.merges,
            "block_solves": self.block_solves,
        }


def _tie(c_lo: float, c_hi: float, tie_break: TieBreak) -> float:
    if tie_break is TieBreak.LEFTMOST:
        return c_lo
    if tie_break is TieBreak.RIGHTMOST:
        return c_hi
    return 0.5 * (c_lo + c_hi)


def block_minimize(
    spec: OrliczSpec,
    values,
    weights,
    opts: SolverOptions = SolverOptions(),
    bracket: Optional[tuple[float, float]] = None,
    tol: Optional[float] = None,
) -> tuple[float, float, float]:
    """Minimizer interval [c_lo, c_hi] of Σ wᵢ Φ(|fᵢ − c|) and the tie-broken representative.

    `bracket` narrows the search when the caller knows H changes sign inside it;
    the default is the value hull [min f, max f].
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.size == 0:
        raise StructuralError("cannot minimize over an empty block")
    if w.shape != v.shape or np.any(w <= 0):
        raise StructuralError("block weights must be positive and match the values")
    lo, hi = (float(v.min()), float(v.max())) if bracket is None else bracket
    if lo == hi:
        return lo, hi, lo
    if spec.family is Family.POWER and spec.p == 2.0:
        # ψ is the identity: the weighted mean is the unique root
        c = float(np.dot(w, v) / w.sum())
        return c, c, c
    tol = opts.resolved_tol(v) if tol is None else tol

    def H(c: float) -> float:
        return float(np.dot(w, score(spec, c - v)))

    def bisect(a: float, b: float, go_left) -> tuple[float, float]:
        for _ in range(opts.max_bisection_iters):
            if b - a <= tol:
                return a, b
            mid = 0.5 * (a + b)
            if mid in (a, b):
                return a, b
            h = H(mid)
            if not math.isfinite(h):
                # ψ overflowed on one side of the block
                raise NumericalError(
                    "block score is not finite inside the bracket",
                    errors={"bracket": [a, b], "c": mid, "H": h},
                )
            if go_left(h):
                b = mid
            else:
                a = mid
        raise NumericalError(
            "block bisection did not converge",
            errors={"bracket": [a, b], "iterations": opts.max_bisection_iters},
        )

    # leftmost zero: boundary of {H >= 0}
    a1, b1 = bisect(lo, hi, lambda h: h >= 0)
    c_lo = 0.5 * (a1 + b1)
    if H(b1) > 0:
        c_hi = c_lo
    else:
        # H vanishes on a whole interval starting near c_lo: find where it turns positive
        a2, b2 = bisect(b1, hi, lambda h: h > 0)
        c_hi = 0.5 * (a2 + b2)
    return c_lo, c_hi, _tie(c_lo, c_hi, opts.tie_break)


@dataclass
class _Open:
    start: int
    end: int
    c_lo: float
    c_hi: float
    level: float


def fit_isotone(
    spec: OrliczSpec,
    grid: CellGrid,
    f: StepFunction,
    opts: SolverOptions = SolverOptions(),
) -> MonotoneFit:
    spec.validate_admissible()
    grid.check_owns(f)
    v = f.values
    w = grid.weights
    tol = opts.resolved_tol(v)
    stack: list[_Open] = []
    merges = solves = 0

    for i in range(v.size):
        if opts.progress is not None and i % PROGRESS_EVERY == 0:
            opts.progress(i)
        stack.append(_Open(i, i, float(v[i]), float(v[i]), float(v[i])))
        while len(stack) > 1 and stack[-1].level <= stack[-2].level + tol:
            top = stack.pop()
            prev = stack[-1]
            # the pooled root lies between the smallest c_lo and the largest c_hi
            lo = min(prev.c_lo, top.c_lo)
            hi = max(prev.c_hi, top.c_hi)
            sl = slice(prev.start, top.end + 1)
            c_lo, c_hi, c = block_minimize(spec, v[sl], w[sl], opts, bracket=(lo, hi), tol=tol)
            stack[-1] = _Open(prev.start, top.end, c_lo, c_hi, c)
            merges += 1
            solves += 1
            logger.debug("pooled cells %d..%d at level %.17g", prev.start, top.end, c)

    blocks = [Block(b.start, b.end, b.level, (b.c_lo, b.c_hi)) for b in stack]
    g = np.empty_like(v)
    for b in blocks:
        g[b.start_cell:b.end_cell + 1] = b.level
    g_star = MonotoneStepFunction(grid, g)
    value = modular(spec, grid, f - g_star)
    logger.debug("fit %s: %d cells, %d blocks, %d merges, modular %.6g", spec, v.size, len(blocks), merges, value)
    return MonotoneFit(blocks, g_star, value, merges, solves, spec)


def fit_from_levels(spec: OrliczSpec, grid: CellGrid, f: StepFunction, g: StepFunction) -> MonotoneFit:
    """Wrap a candidate monotone g as a MonotoneFit, one block per run of equal levels."""
    grid.check_owns(f)
    grid.check_owns(g)
    g_star = MonotoneStepFunction.from_step(g)
    vals = g_star.values
    starts = np.concatenate(([0], np.nonzero(np.diff(vals) != 0)[0] + 1))
    ends = np.append(starts[1:] - 1, vals.size - 1)
    blocks = [Block(int(s), int(e), float(vals[s]), (float(vals[s]), float(vals[s]))) for s, e in zip(starts, ends)]
    return MonotoneFit(blocks, g_star, modular(spec, grid, f - g_star), 0, 0, spec)
