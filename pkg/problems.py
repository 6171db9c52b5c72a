"""Problem files (CSV / JSON), plot-data export and the built-in analytic fixtures."""
import csv
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from dataobjects import ProblemFormatError
from grid import CellGrid, StepFunction, make_graded, make_uniform, sample_midpoints


def load_problem(path: str, a: Optional[float] = None, b: Optional[float] = None) -> tuple[CellGrid, StepFunction]:
    suffix = Path(path).suffix.lower()
    try:
        if suffix == ".json":
            with open(path, "r", encoding="utf-8") as fh:
                return problem_from_dict(json.load(fh))
        with open(path, "r", newline="", encoding="utf-8") as fh:
            return problem_from_csv(fh.read(), a=a, b=b)
    except OSError as e:
        raise ProblemFormatError(f"cannot read problem file {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise ProblemFormatError(f"problem file {path} is not UTF-8 text: {e}") from e
    except json.JSONDecodeError as e:
        raise ProblemFormatError(f"malformed JSON in {path}: {e}") from e


def problem_from_dict(data: dict) -> tuple[CellGrid, StepFunction]:
    try:
        values = [float(v) for v in data["values"]]
        if data.get("breakpoints") is not None:
            x = [float(v) for v in data["breakpoints"]]
            if "a" in data and float(data["a"]) != x[0] or "b" in data and float(data["b"]) != x[-1]:
                raise ProblemFormatError("breakpoints must start at a and end at b")
            grid = CellGrid(x)
        else:
            grid = make_uniform(float(data["a"]), float(data["b"]), len(values))
    except (KeyError, TypeError, ValueError) as e:
        raise ProblemFormatError(f"malformed JSON problem: {e}") from e
    return grid, _finite_step(grid, values)


def problem_from_csv(text: str, a: Optional[float] = None, b: Optional[float] = None) -> tuple[CellGrid, StepFunction]:
    rows = list(csv.reader(line for line in text.splitlines() if line.strip()))
    if not rows:
        raise ProblemFormatError("empty CSV problem")
    header = [h.strip().lower() for h in rows[0]]
    body = rows[1:]
    try:
        cols = [[float(r[i]) for r in body] for i in range(len(header))]
    except (IndexError, ValueError) as e:
        raise ProblemFormatError(f"malformed CSV row: {e}") from e
    if not body:
        raise ProblemFormatError("CSV problem has no rows")

    if header == ["x_left", "x_right", "f"]:
        left, right, values = cols
        if any(right[i] != left[i + 1] for i in range(len(left) - 1)):
            raise ProblemFormatError("cells must be contiguous: x_right[i] == x_left[i+1]")
        grid = CellGrid(left + [right[-1]])
    elif header == ["x", "f"]:
        xs, values = cols
        if a is None or b is None:
            raise ProblemFormatError("x,f samples need --a and --b")
        grid = make_uniform(a, b, len(values))
        if np.any(np.diff(xs) <= 0) or xs[0] < a or xs[-1] > b:
            raise ProblemFormatError("sample abscissae must increase strictly inside [a, b]")
    else:
        raise ProblemFormatError(f"unknown CSV header {rows[0]}; expected x_left,x_right,f or x,f")
    return grid, _finite_step(grid, values)


def _finite_step(grid: CellGrid, values) -> StepFunction:
    if not all(math.isfinite(v) for v in values):
        raise ProblemFormatError("function values must be finite")
    return StepFunction(grid, values)


def atomic_write(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def dumps_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def plot_rows(grid: CellGrid, f: StepFunction, g: StepFunction) -> list[list[float]]:
    return [[float(x), float(fv), float(gv)] for x, fv, gv in zip(grid.midpoints, f.values, g.values)]


# Analytic fixtures for refinement studies: name -> (grid builder, f)
FIXTURES: dict[str, tuple[Callable[[int], CellGrid], Callable[[np.ndarray], np.ndarray]]] = {
    "sin": (lambda n: make_uniform(0.0, 3.0, n), lambda x: np.sin(3.0 * x)),
    "inv_sqrt": (lambda n: make_graded(0.0, 1.0, n, 2.0), lambda x: x ** -0.5),
    "step": (lambda n: make_uniform(0.0, 1.0, n), lambda x: np.where(x < 0.5, 0.0, 1.0)),
}

FIXTURE_JUMPS = {"sin": 0.0, "inv_sqrt": 0.0, "step": 1.0}


def fixture_problem(name: str, n: int) -> tuple[CellGrid, StepFunction]:
    try:
        build, func = FIXTURES[name]
    except KeyError:
        raise ProblemFormatError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
    grid = build(n)
    return grid, sample_midpoints(grid, func)
