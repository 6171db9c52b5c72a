"""Best non-decreasing approximation in the Luxemburg norm.

With δ the optimal norm distance, the norm-best approximant is δ times the
modular-best approximant of f/δ (the monotone cone is invariant under
positive scaling). δ is the root of M(λ) = 1, where M(λ) is the minimal
modular distance of f/λ from the cone; M is non-increasing, so the root is
bracketed and bisected.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from certificate import CertificateReport, certify
from dataobjects import DomainError, NumericalError
from grid import CellGrid, MonotoneStepFunction, StepFunction
from isotone import MonotoneFit, SolverOptions, fit_isotone
from orlicz import Kind, OrliczSpec, luxemburg_norm

logger = logging.getLogger(__name__)

MAX_BRACKET_STEPS = 60
MAX_OUTER_ITERS = 200


@dataclass(frozen=True, eq=False)
class LuxemburgResult:
    delta: float
    h_star: MonotoneStepFunction
    inner_fit: MonotoneFit
    outer_iterations: int
    relation_in_scope: bool

    def to_dict(self, certificate: Optional[CertificateReport] = None) -> dict:
        out = {
            "delta": self.delta,
            "h_star": self.h_star.values.tolist(),
            "outer_iterations": self.outer_iterations,
            "relation_in_scope": self.relation_in_scope,
        }
        if certificate is not None:
            out["inner_certificate"] = certificate.to_dict()
        return out


def scaled_min_modular(
    spec: OrliczSpec,
    grid: CellGrid,
    f: StepFunction,
    lam: float,
    opts: SolverOptions = SolverOptions(),
) -> tuple[float, MonotoneStepFunction]:
    """M(λ) = min over monotone h of ∫Φ(|f − h|/λ)dμ, and its minimizer h = λ·g*(f/λ)."""
    if not lam > 0:
        raise DomainError("lambda must be positive", errors={"lambda": lam})
    fit = fit_isotone(spec, grid, f / lam, opts)
    return fit.modular_value, fit.g_star * lam


def fit_luxemburg(
    spec: OrliczSpec,
    grid: CellGrid,
    f: StepFunction,
    opts: SolverOptions = SolverOptions(),
    tol: float = 1e-10,
) -> LuxemburgResult:
    if not tol > 0:
        raise DomainError("fit_luxemburg needs tol > 0", errors={"tol": tol})
    in_scope = spec.kind is Kind.N_FUNCTION
    if not in_scope:
        logger.warning("%s is an N∞ family: the norm/modular scaling relation is applied outside its stated hypothesis", spec)

    base = fit_isotone(spec, grid, f, opts)
    if base.modular_value == 0.0:
        return LuxemburgResult(0.0, MonotoneStepFunction(grid, f.values), base, 0, in_scope)

    def M(lam: float) -> tuple[float, MonotoneFit]:
        fit = fit_isotone(spec, grid, f / lam, opts)
        return fit.modular_value, fit

    seed = luxemburg_norm(spec, grid, f - base.g_star, tol=min(tol, 1e-12))
    iters = 0
    hi = seed
    m_hi, fit_hi = M(hi)
    steps = 0
    while m_hi > 1.0:
        hi *= 2.0
        m_hi, fit_hi = M(hi)
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            raise NumericalError("could not bracket delta from above", errors={"bracket": [seed, hi]})
    lo = hi / 2.0
    m_lo, _ = M(lo)
    steps = 0
    while m_lo < 1.0:
        hi, m_hi = lo, m_lo
        lo /= 2.0
        m_lo, _ = M(lo)
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            raise NumericalError("could not bracket delta from below", errors={"bracket": [lo, hi]})
    logger.debug("delta bracket [%.17g, %.17g] from seed %.17g", lo, hi, seed)

    delta, fit = hi, None
    for iters in range(1, MAX_OUTER_ITERS + 1):
        mid = 0.5 * (lo + hi)
        m_mid, fit_mid = M(mid)
        if abs(m_mid - 1.0) <= tol or mid in (lo, hi):
            delta, fit = mid, fit_mid
            break
        if m_mid > 1.0:
            lo = mid
        else:
            hi = mid
    else:
        raise NumericalError("outer bisection on delta did not converge", errors={"bracket": [lo, hi]})

    h_star = fit.g_star * delta
    return LuxemburgResult(float(delta), h_star, fit, iters, in_scope)


@dataclass(frozen=True)
class LandersRoggeCheck:
    consistent: bool
    residual: float
    inner_certified: bool


def landers_rogge_check(
    spec: OrliczSpec,
    grid: CellGrid,
    f: StepFunction,
    result: LuxemburgResult,
    tol: float = 1e-6,
    opts: SolverOptions = SolverOptions(),
    n_probes: int = 100,
    seed: int = 0,
) -> LandersRoggeCheck:
    """Re-solve the modular problem for f/δ from scratch and compare δ·g* with h*."""
    if result.delta == 0.0:
        residual = float(np.max(np.abs(result.h_star.values - f.values)))
        return LandersRoggeCheck(residual <= tol, residual, True)
    scaled = f / result.delta
    fit = fit_isotone(spec, grid, scaled, opts)
    report = certify(spec, grid, scaled, fit, n_probes=n_probes, seed=seed)
    residual = float(np.max(np.abs(fit.g_star.values * result.delta - result.h_star.values)))
    return LandersRoggeCheck(bool(residual <= tol and report.passed), residual, report.passed)
