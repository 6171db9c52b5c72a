"""Command-line front end.

Exit codes: 0 computed and certified, 1 computed but not certified,
2 input error, 3 numerical failure.
"""
import asyncio
import functools
import json
import logging
import math
import sys
import uuid
from pathlib import Path
from typing import Optional

import click
import numpy as np

from certificate import certify, default_jump_tol
from dataobjects import (
    DEFAULT_LUX_TOL,
    DEFAULT_NORM_TOL,
    DEFAULT_PROBES,
    SEED_ENV_VAR,
    IsotoneError,
    NumericalError,
    PipelineParams,
    ProblemFormatError,
    RefineStudyParams,
    RunConfig,
)
from grid import StepFunction, make_uniform
from isotone import SolverOptions, TieBreak, fit_from_levels, fit_isotone
from luxemburg_fit import fit_luxemburg, landers_rogge_check
from orlicz import (
    Family,
    OrliczSpec,
    delta2_estimate,
    exponential,
    log_shifted,
    luxemburg_norm,
    power,
)
from pipeline import fit_plot_rows, level_problem, refine_level, solve_and_certify
from problems import FIXTURES, atomic_write, csv_text, dumps_json, load_problem
from reference import build_level_grid, brute_force_fit

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_UNCERTIFIED, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


def _spec_of(config: RunConfig) -> OrliczSpec:
    data = dict(config.spec)
    data["allow_l1"] = config.allow_l1_oracle
    return OrliczSpec.from_dict(data)


def _opts_of(config: RunConfig) -> SolverOptions:
    return SolverOptions(tie_break=TieBreak(config.tie_break))


def _emit(config: RunConfig, result: dict) -> None:
    text = dumps_json(result)
    if config.output_path:
        atomic_write(config.output_path, text)
    else:
        click.echo(text, nl=False)


def _plot_path(config: RunConfig) -> Optional[str]:
    if config.plot_path:
        return config.plot_path
    if config.output_path:
        return str(Path(config.output_path).with_suffix(".csv"))
    return None


def cmd_fit(config: RunConfig) -> int:
    spec = _spec_of(config)
    grid, f = load_problem(config.input_path, a=config.a, b=config.b)
    plot = _plot_path(config)
    if spec.is_l1:
        g, value = brute_force_fit(spec, grid, f, build_level_grid(f.values))
        _emit(config, {
            "oracle": "level-grid dynamic program",
            "note": "power(p=1) lies outside the validated class; no certificate is issued",
            "g_star": g.values.tolist(),
            "modular_value": value,
            "spec": spec.to_dict(),
        })
        if plot:
            atomic_write(plot, csv_text(["x", "f", "g_star"], [[x, fv, gv] for x, fv, gv in zip(grid.midpoints, f.values, g.values)]))
        return EXIT_UNCERTIFIED

    fit, report, result = solve_and_certify(
        spec, grid, f, _opts_of(config), probes=config.probes, seed=config.seed,
        tol=config.tol, jump_tol=config.jump_tol,
    )
    _emit(config, result)
    if plot:
        atomic_write(plot, csv_text(["x", "f", "g_star"], fit_plot_rows(grid, f, fit)))
    return EXIT_OK if report.passed else EXIT_UNCERTIFIED


def load_candidate(path: str, grid) -> StepFunction:
    """A candidate g: JSON {"values": [...]} or a one-column CSV headed `g`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ProblemFormatError(f"cannot read candidate {path}: {e}") from e
    try:
        if path.lower().endswith(".json"):
            values = [float(v) for v in json.loads(text)["values"]]
        else:
            lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
            if not lines or lines[0].lower() != "g":
                raise ProblemFormatError("candidate CSV needs a single column headed g")
            values = [float(v) for v in lines[1:]]
    except (KeyError, TypeError, ValueError) as e:
        raise ProblemFormatError(f"malformed candidate {path}: {e}") from e
    return StepFunction(grid, values)


def cmd_certify(config: RunConfig) -> int:
    spec = _spec_of(config)
    spec.validate_admissible()
    grid, f = load_problem(config.input_path, a=config.a, b=config.b)
    g = load_candidate(config.candidate_path, grid)
    fit = fit_from_levels(spec, grid, f, g)
    report = certify(spec, grid, f, fit, n_probes=config.probes, seed=config.seed, tol=config.tol, jump_tol=config.jump_tol)
    result = fit.to_dict()
    result["spec"] = spec.to_dict()
    result["certificate"] = report.to_dict()
    _emit(config, result)
    return EXIT_OK if report.passed else EXIT_UNCERTIFIED


def cmd_norm(config: RunConfig) -> int:
    spec = _spec_of(config)
    grid, f = load_problem(config.input_path, a=config.a, b=config.b)
    value = luxemburg_norm(spec, grid, f, tol=config.tol or DEFAULT_NORM_TOL)
    if config.output_path:
        atomic_write(config.output_path, dumps_json({"luxemburg_norm": value, "spec": spec.to_dict()}))
    click.echo(repr(round(value, 12)))
    return EXIT_OK


def cmd_lux_fit(config: RunConfig) -> int:
    spec = _spec_of(config)
    spec.validate_admissible()
    grid, f = load_problem(config.input_path, a=config.a, b=config.b)
    opts = _opts_of(config)
    tol = config.tol or DEFAULT_LUX_TOL
    result = fit_luxemburg(spec, grid, f, opts, tol=tol)
    if result.delta > 0:
        scaled = f / result.delta
        inner = certify(spec, grid, scaled, result.inner_fit, n_probes=config.probes, seed=config.seed)
    else:
        inner = certify(spec, grid, f, result.inner_fit, n_probes=config.probes, seed=config.seed)
    check = landers_rogge_check(spec, grid, f, result, opts=opts, n_probes=config.probes, seed=config.seed)
    out = result.to_dict(inner)
    out["landers_rogge"] = {"consistent": check.consistent, "residual": check.residual}
    out["spec"] = spec.to_dict()
    _emit(config, out)
    plot = _plot_path(config)
    if plot:
        atomic_write(plot, csv_text(["x", "f", "h_star"], [[x, fv, hv] for x, fv, hv in zip(grid.midpoints, f.values, result.h_star.values)]))
    return EXIT_OK if inner.passed and check.consistent else EXIT_UNCERTIFIED


def cmd_refine_study(config: RunConfig) -> int:
    spec = _spec_of(config)
    spec.validate_admissible()
    base = None
    if config.fixture is None:
        if config.input_path is None:
            raise ProblemFormatError("refine-study needs --fixture or an input file")
        base = load_problem(config.input_path, a=config.a, b=config.b)
    rows = []
    for level in range(config.refine_levels + 1):
        grid, f = level_problem(config.fixture, base, config.base_cells, level)
        rows.append(refine_level(spec, grid, f, _opts_of(config), probes=min(config.probes, 20), seed=config.seed))
    text = csv_text(["n", "max_jump", "modular", "certified"], [[r.n, r.max_jump, r.modular, r.certified] for r in rows])
    target = _plot_path(config)
    if target:
        atomic_write(target, text)
    else:
        click.echo(text, nl=False)
    return EXIT_OK if all(r.certified for r in rows) else EXIT_UNCERTIFIED


def cmd_demo(config: RunConfig) -> int:
    echo = click.echo
    grid = make_uniform(0.0, 2.0, 2)
    f = grid.step([2.0, 1.0])
    echo("Two cells of [0, 2], f = (2, 1), Φ(x) = x²/2")
    fit, report, _ = solve_and_certify(power(2.0), grid, f, probes=config.probes, seed=config.seed)
    echo(f"  g* = {fit.g_star.values.tolist()}  modular = {fit.modular_value:.6g}  certified = {report.passed}")

    grid3 = make_uniform(0.0, 3.0, 3)
    f3 = grid3.step([3.0, 1.0, 2.0])
    echo("Three cells of [0, 3], f = (3, 1, 2), Φ(x) = x − ln(1 + x)")
    fit3, report3, _ = solve_and_certify(log_shifted(), grid3, f3, probes=config.probes, seed=config.seed)
    echo(f"  g* = {np.round(fit3.g_star.values, 9).tolist()}  certified = {report3.passed}")

    lux = fit_luxemburg(power(2.0), grid, f)
    echo(f"Luxemburg distance of (2, 1) from the monotone cone: δ = {lux.delta:.10f}, h* = {lux.h_star.values.tolist()}")

    for spec, x_max in ((power(2.0), 1e8), (log_shifted(), 1e8), (exponential(), 50.0)):
        est = delta2_estimate(spec, 1e-3 if spec.family is Family.EXPONENTIAL else 1e-8, x_max, 1000)
        echo(f"Δ2 ratio sup for {spec}: {est.sup_ratio:.6g} (satisfied: {est.satisfied})")

    try:
        fit_isotone(OrliczSpec(Family.POWER, p=1.0, allow_l1=True), grid, f)
    except IsotoneError as e:
        echo(f"power(p=1) refused: {e}")
    if config.allow_l1_oracle:
        l1 = OrliczSpec(Family.POWER, p=1.0, allow_l1=True)
        g, value = brute_force_fit(l1, grid3, f3, build_level_grid(f3.values))
        echo(f"  L¹ oracle (outside the validated class) on (3, 1, 2): {g.values.tolist()}  modular = {value:.6g}")
    ok = report.passed and report3.passed
    return EXIT_OK if ok else EXIT_UNCERTIFIED


COMMANDS = {
    "fit": cmd_fit,
    "certify": cmd_certify,
    "norm": cmd_norm,
    "lux-fit": cmd_lux_fit,
    "refine-study": cmd_refine_study,
    "demo": cmd_demo,
}


def run(config: RunConfig) -> int:
    try:
        return COMMANDS[config.command](config)
    except NumericalError as e:
        click.echo(f"numerical failure: {e} {e.errors or ''}", err=True)
        return EXIT_NUMERICAL
    except IsotoneError as e:
        click.echo(f"input error: {e} {e.errors or ''}", err=True)
        return EXIT_INPUT


def spec_options(fn):
    @click.option("--family", type=click.Choice([f.value for f in Family]), default=Family.LOG_SHIFTED.value, show_default=True)
    @click.option("--p", "p", type=float, default=None, help="Exponent for the power family.")
    @click.option("--knots", default=None, help='JSON knot list for piecewise_phi, e.g. "[[0,0],[1,0.5]]".')
    @click.option("--spec", "spec_json", default=None, help="Full JSON spec; overrides --family/--p/--knots.")
    @functools.wraps(fn)
    def wrapper(*args, family, p, knots, spec_json, **kwargs):
        try:
            if spec_json:
                spec = json.loads(Path(spec_json).read_text() if Path(spec_json).is_file() else spec_json)
            else:
                spec = {"family": family}
                if p is not None:
                    spec["p"] = p
                if knots is not None:
                    spec["knots"] = json.loads(knots)
        except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
            raise click.BadParameter(f"cannot parse Orlicz spec: {e}")
        if spec.get("family") == Family.POWER.value and "p" not in spec:
            spec["p"] = 2.0
        return fn(*args, spec=spec, **kwargs)
    return wrapper


def common_options(fn):
    for opt in reversed([
        click.option("--a", type=float, default=None, help="Left end for x,f sample files."),
        click.option("--b", type=float, default=None, help="Right end for x,f sample files."),
        click.option("--output", "-o", "output_path", type=click.Path(dir_okay=False), default=None),
        click.option("--plot-csv", "plot_path", type=click.Path(dir_okay=False), default=None),
        click.option("--tol", type=float, default=None),
        click.option("--jump-tol", type=float, default=None),
        click.option("--tie-break", type=click.Choice([t.value for t in TieBreak]), default=TieBreak.MIDPOINT.value, show_default=True),
        click.option("--seed", type=int, default=0, envvar=SEED_ENV_VAR, show_default=True),
        click.option("--probes", type=click.IntRange(min=1), default=DEFAULT_PROBES, show_default=True),
        click.option("--allow-l1-oracle", is_flag=True, default=False, help="Admit power(p=1) for the brute-force oracle."),
    ]):
        fn = opt(fn)
    return fn


@click.group()
@click.option("-v", "--verbose", count=True)
def cli(verbose: int):
    """Best non-decreasing approximation in Orlicz spaces, with optimality certificates."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _positive(tol: Optional[float]) -> None:
    if tol is not None and not (tol > 0 and math.isfinite(tol)):
        raise click.BadParameter("tolerances must be positive", param_hint="--tol/--jump-tol")


def _invoke(ctx: click.Context, command: str, **fields) -> None:
    _positive(fields.get("tol"))
    _positive(fields.get("jump_tol"))
    ctx.exit(run(RunConfig(command=command, **fields)))


@cli.command("fit")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@spec_options
@common_options
@click.pass_context
def fit_command(ctx, **kwargs):
    """Fit the best non-decreasing approximation and certify it."""
    _invoke(ctx, "fit", **kwargs)


@cli.command("certify")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("candidate_path", type=click.Path(exists=True, dir_okay=False))
@spec_options
@common_options
@click.pass_context
def certify_command(ctx, **kwargs):
    """Check whether a user-supplied monotone candidate is optimal."""
    _invoke(ctx, "certify", **kwargs)


@cli.command("norm")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@spec_options
@common_options
@click.pass_context
def norm_command(ctx, **kwargs):
    """Print the Luxemburg norm of the input."""
    _invoke(ctx, "norm", **kwargs)


@cli.command("lux-fit")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@spec_options
@common_options
@click.pass_context
def lux_fit_command(ctx, **kwargs):
    """Best non-decreasing approximation in the Luxemburg norm."""
    _invoke(ctx, "lux-fit", **kwargs)


@cli.command("refine-study")
@click.argument("input_path", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--fixture", type=click.Choice(sorted(FIXTURES)), default=None)
@click.option("--base-cells", type=click.IntRange(min=1), default=64, show_default=True)
@click.option("--refine-levels", type=click.IntRange(min=0), default=6, show_default=True)
@spec_options
@common_options
@click.pass_context
def refine_study_command(ctx, **kwargs):
    """Fit under successive halvings of the cells and track the largest jump."""
    _invoke(ctx, "refine-study", **kwargs)


@cli.command("demo")
@spec_options
@common_options
@click.pass_context
def demo_command(ctx, **kwargs):
    """Guided walkthrough on small fixtures."""
    _invoke(ctx, "demo", **kwargs)


@cli.command("submit")
@click.argument("input_path", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--workflow", type=click.Choice(["pipeline", "refine-study"]), default="pipeline", show_default=True)
@click.option("--foldername", default="./demodata", show_default=True, help="Folder receiving output/ files.")
@click.option("--fixture", type=click.Choice(sorted(FIXTURES)), default="sin", show_default=True)
@click.option("--base-cells", type=click.IntRange(min=1), default=64, show_default=True)
@click.option("--refine-levels", type=click.IntRange(min=0), default=6, show_default=True)
@click.option("--key", default=None, help="Job key; also the idempotency key.")
@spec_options
@common_options
def submit_command(input_path, workflow, foldername, fixture, base_cells, refine_levels, key, spec, **kwargs):
    """Run the pipeline on a Temporal cluster and wait for the result."""
    from client import get_client, task_queue

    key = key or str(uuid.uuid4().int)[:6]

    async def go():
        client = await get_client()
        if workflow == "pipeline":
            if input_path is None:
                raise click.BadParameter("the pipeline workflow needs an input file")
            params = PipelineParams(
                input_path=input_path, foldername=foldername, spec=spec, key=key,
                a=kwargs["a"], b=kwargs["b"], tie_break=kwargs["tie_break"],
                seed=kwargs["seed"], probes=kwargs["probes"],
            )
            return await client.execute_workflow("IsotonePipelineWorkflow", params, id=f"fit-{key}", task_queue=task_queue())
        params = RefineStudyParams(
            fixture=fixture, spec=spec, foldername=foldername, key=key,
            base_cells=base_cells, refine_levels=refine_levels, tie_break=kwargs["tie_break"],
        )
        return await client.execute_workflow("RefineStudyWorkflow", params, id=f"refine-{key}", task_queue=task_queue())

    click.echo(asyncio.run(go()))


if __name__ == "__main__":
    sys.exit(cli())
