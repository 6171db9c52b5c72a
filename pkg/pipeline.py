"""Solve-and-certify steps shared by the CLI and the Temporal activities."""
import logging
from typing import Optional

from certificate import CertificateReport, certify, default_jump_tol, max_jump
from dataobjects import RefineLevelRow
from grid import CellGrid, StepFunction, refine
from isotone import MonotoneFit, SolverOptions, fit_isotone
from orlicz import OrliczSpec
from problems import fixture_problem, plot_rows

logger = logging.getLogger(__name__)


def solve_and_certify(
    spec: OrliczSpec,
    grid: CellGrid,
    f: StepFunction,
    opts: SolverOptions = SolverOptions(),
    probes: int = 100,
    seed: int = 0,
    tol: Optional[float] = None,
    jump_tol: Optional[float] = None,
) -> tuple[MonotoneFit, CertificateReport, dict]:
    fit = fit_isotone(spec, grid, f, opts)
    report = certify(spec, grid, f, fit, n_probes=probes, seed=seed, tol=tol, jump_tol=jump_tol)
    result = fit.to_dict()
    result["spec"] = spec.to_dict()
    result["certificate"] = report.to_dict()
    return fit, report, result


def fit_plot_rows(grid: CellGrid, f: StepFunction, fit: MonotoneFit) -> list[list[float]]:
    return plot_rows(grid, f, fit.g_star)


def level_problem(
    fixture: Optional[str],
    base: Optional[tuple[CellGrid, StepFunction]],
    base_cells: int,
    level: int,
) -> tuple[CellGrid, StepFunction]:
    """Problem at refinement level k: n·2^k cells of a fixture, or a user problem refined 2^k times."""
    if fixture is not None:
        return fixture_problem(fixture, base_cells * 2 ** level)
    grid, f = base
    return refine(grid, f, 2 ** level)


def refine_level(
    spec: OrliczSpec,
    grid: CellGrid,
    f: StepFunction,
    opts: SolverOptions = SolverOptions(),
    probes: int = 20,
    seed: int = 0,
) -> RefineLevelRow:
    fit, report, _ = solve_and_certify(spec, grid, f, opts, probes=probes, seed=seed)
    jump = max_jump(fit, default_jump_tol(f))
    logger.info("level n=%d: max jump %.6g, modular %.6g, certified %s", grid.n_cells, jump, fit.modular_value, report.passed)
    return RefineLevelRow(grid.n_cells, jump, fit.modular_value, report.passed)
