import os
from pathlib import Path

from temporalio import activity
from temporalio.exceptions import ApplicationError

from dataobjects import (
    IDEMPOTENT_FILE,
    FitPayload,
    IsotoneError,
    PipelineParams,
    ProblemPayload,
    RefineLevelRow,
    RefineStudyParams,
)
from grid import CellGrid, StepFunction
from isotone import SolverOptions
from orlicz import OrliczSpec
from pipeline import fit_plot_rows, level_problem, refine_level, solve_and_certify
from problems import atomic_write, csv_text, dumps_json, load_problem


def _fail(step: str, err: IsotoneError) -> ApplicationError:
    # solver inputs are deterministic: retrying cannot help
    details = [err.errors] if err.errors else []
    return ApplicationError(f"{step} failed! {err}", *details, type=type(err).__name__, non_retryable=True)


@activity.defn
def validate(input: PipelineParams) -> bool:
    try:
        OrliczSpec.from_dict(input.spec).validate_admissible()
        load_problem(input.input_path, a=input.a, b=input.b)
    except IsotoneError as e:
        activity.logger.info(f"Validation rejected {input.input_path}: {e}")
        return False
    return True


@activity.defn
def extract(input: PipelineParams) -> ProblemPayload:
    try:
        grid, f = load_problem(input.input_path, a=input.a, b=input.b)
    except IsotoneError as e:
        raise _fail("Extract", e)
    return ProblemPayload(grid.breakpoints.tolist(), f.values.tolist())


@activity.defn
def transform(input: PipelineParams, problem: ProblemPayload) -> FitPayload:
    try:
        spec = OrliczSpec.from_dict(input.spec)
        grid = CellGrid(problem.breakpoints)
        f = StepFunction(grid, problem.values)
        fit, report, result = solve_and_certify(
            spec, grid, f, SolverOptions(tie_break=input.tie_break, progress=lambda i: activity.heartbeat(input.key, i)),
            probes=input.probes, seed=input.seed,
        )
    except IsotoneError as e:
        raise _fail("Transform", e)
    activity.heartbeat(input.key)
    return FitPayload(result, fit_plot_rows(grid, f, fit), report.passed)


@activity.defn
def load(input: PipelineParams, payload: FitPayload) -> str:
    keyExists, err = is_idempotent(input.key)
    if err:
        raise ApplicationError("Failed to read idempotency key! " + err, non_retryable=True)
    elif keyExists:
        return "idempotency key " + input.key + " found, skipping... "

    stem = Path(input.input_path).stem
    out = Path(input.foldername) / "output"
    try:
        atomic_write(str(out / f"{stem}-{input.key}.json"), dumps_json(payload.result))
        atomic_write(str(out / f"{stem}-{input.key}.csv"), csv_text(["x", "f", "g_star"], payload.plot_rows))
    except OSError as e:
        raise ApplicationError("Writing results failed! " + str(e), non_retryable=True)

    if err := write_idempotent_key(input.key):
        raise ApplicationError("Failed to create idempotency key! " + err, non_retryable=True)

    return "certified" if payload.certified else "uncertified"


@activity.defn
def refine_study_level(input: RefineStudyParams, level: int) -> RefineLevelRow:
    try:
        spec = OrliczSpec.from_dict(input.spec)
        spec.validate_admissible()
        grid, f = level_problem(input.fixture, None, input.base_cells, level)
        opts = SolverOptions(tie_break=input.tie_break, progress=lambda i: activity.heartbeat(level, i))
        row = refine_level(spec, grid, f, opts)
    except IsotoneError as e:
        raise _fail(f"Refinement level {level}", e)
    activity.heartbeat(level)
    return row


@activity.defn
def load_study(input: RefineStudyParams, rows: list[RefineLevelRow]) -> str:
    target = Path(input.foldername) / "output" / f"refine-{input.fixture}-{input.key}.csv"
    try:
        atomic_write(str(target), csv_text(
            ["n", "max_jump", "modular", "certified"],
            [[r.n, r.max_jump, r.modular, r.certified] for r in rows],
        ))
    except OSError as e:
        raise ApplicationError("Writing study failed! " + str(e), non_retryable=True)
    return str(target)


def is_idempotent(key):
    try:
        if not os.path.exists(IDEMPOTENT_FILE):
            return False, None
        with open(IDEMPOTENT_FILE, "r") as file:
            keys = file.read().splitlines()
            return key in keys, None
    except OSError as e:
        return False, str(e)


def write_idempotent_key(key):
    try:
        with open(IDEMPOTENT_FILE, "a") as file:
            file.write(f"{key}\n")
    except OSError as e:
        return str(e)
