"""Brute-force oracles, independent of the pooling solver.

Slow and simple on purpose. The level-grid DP also admits Power(1), which the
solver refuses, so L¹ fits can be set against admissible families.
"""
from dataclasses import dataclass

import numpy as np

from dataobjects import DomainError, StructuralError
from grid import CellGrid, MonotoneStepFunction, StepFunction
from orlicz import OrliczSpec, big_phi


@dataclass(frozen=True, eq=False)
class LevelGrid:
    levels: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        if lv.size == 0:
            raise StructuralError("level grid is empty")
        if np.any(np.diff(lv) <= 0):
            raise StructuralError("levels must be strictly increasing")
        object.__setattr__(self, "levels", lv)

    def __len__(self) -> int:
        return self.levels.size


def build_level_grid(values, target_count: int = 2001) -> LevelGrid:
    """Data values, midpoints between consecutive sorted values, and a uniform fill."""
    v = np.unique(np.asarray(values, dtype=float))
    parts = [v, 0.5 * (v[:-1] + v[1:])]
    if v.size > 1 and target_count > 1:
        parts.append(np.linspace(v[0], v[-1], target_count))
    return LevelGrid(np.unique(np.concatenate(parts)))


def brute_force_fit(
    spec: OrliczSpec,
    grid: CellGrid,
    f: StepFunction,
    levels: LevelGrid,
) -> tuple[MonotoneStepFunction, float]:
    """Exact DP over cells × levels: D(i, j) = wᵢΦ(|fᵢ − Lⱼ|) + min_{j′≤j} D(i−1, j′)."""
    grid.check_owns(f)
    L = levels.levels
    w = grid.weights
    idx = np.arange(L.size)
    back = []
    D = w[0] * np.asarray(big_phi(spec, np.abs(f.values[0] - L)))
    for i in range(1, f.values.size):
        pm = np.minimum.accumulate(D)
        # last index attaining the running minimum
        back.append(np.maximum.accumulate(np.where(D == pm, idx, 0)))
        D = w[i] * np.asarray(big_phi(spec, np.abs(f.values[i] - L))) + pm

    j = int(np.argmin(D))
    value = float(D[j])
    choice = [j]
    for arg in reversed(back):
        j = int(arg[j])
        choice.append(j)
    g = L[np.array(choice[::-1])]
    return MonotoneStepFunction(grid, g), value


def scalar_scan_minimize(spec: OrliczSpec, values, weights, lo: float, hi: float, step: float) -> tuple[float, float]:
    """Exhaustive scan of Σ wᵢΦ(|vᵢ − c|) over c ∈ {lo, lo + step, …} ∩ [lo, hi]."""
    if not lo < hi or not step > 0:
        raise DomainError("scalar_scan_minimize needs lo < hi and step > 0")
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    cs = lo + step * np.arange(int(np.floor((hi - lo) / step + 1e-9)) + 1)
    best_c, best = lo, np.inf
    for chunk in np.array_split(cs, max(1, cs.size // 65536)):
        obj = np.asarray(big_phi(spec, np.abs(chunk[:, None] - v[None, :]))) @ w
        k = int(np.argmin(obj))
        if obj[k] < best:
            best_c, best = float(chunk[k]), float(obj[k])
    return best_c, best


def classical_pava(values, weights) -> np.ndarray:
    """Weighted least-squares isotonic regression by pooled running means."""
    sums: list[float] = []
    wts: list[float] = []
    counts: list[int] = []
    for y, w in zip(np.asarray(values, dtype=float), np.asarray(weights, dtype=float)):
        sums.append(w * y)
        wts.append(w)
        counts.append(1)
        while len(sums) > 1 and sums[-1] / wts[-1] <= sums[-2] / wts[-2]:
            s, ww, c = sums.pop(), wts.pop(), counts.pop()
            sums[-1] += s
            wts[-1] += ww
            counts[-1] += c
    return np.repeat([s / w for s, w in zip(sums, wts)], counts)
