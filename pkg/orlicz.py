"""Admissible convex functions Φ(x) = ∫₀ˣ φ(t) dt and the functionals built on them.

Every family is given by its derivative φ together with a closed-form
primitive, so no quadrature runs in the solver's hot path. All evaluators
accept scalars or numpy arrays.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from dataobjects import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Below this argument the primitives that cancel (x - log1p(x), ...) are summed as series.
_SERIES_CUTOFF = 0.25
_SERIES_TERMS = 32

L1_REMARK = (
    "Power(p) needs p > 1: Φ(t) = |t| has derivative φ(t) = 1 for t > 0, "
    "which does not satisfy φ(0⁺) = 0, so L¹ is not an Orlicz space of this class"
)


class Family(str, Enum):
    POWER = "power"
    LOG_SHIFTED = "log_shifted"
    ARCTAN = "arctan"
    EXP_SATURATING = "exp_saturating"
    EXPONENTIAL = "exponential"
    PIECEWISE_PHI = "piecewise_phi"


class Kind(str, Enum):
    N_FUNCTION = "N"
    N_INFINITY_FUNCTION = "N_infinity"


@dataclass(frozen=True)
class OrliczSpec:
    family: Family
    p: Optional[float] = None
    knots: Optional[tuple[tuple[float, float], ...]] = None
    delta2_override: Optional[float] = None
    # Admits Power(1) for the brute-force oracle only; the solver still refuses it.
    allow_l1: bool = False

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        if family is Family.POWER:
            if self.p is None:
                raise DomainError("power family needs an exponent p")
            p = float(self.p)
            if not math.isfinite(p) or p < 1.0 or (p == 1.0 and not self.allow_l1):
                raise DomainError(L1_REMARK, errors={"p": p})
            object.__setattr__(self, "p", p)
        elif family is Family.PIECEWISE_PHI:
            object.__setattr__(self, "knots", _check_knots(self.knots))
        if self.delta2_override is not None and not self.delta2_override > 0:
            raise DomainError("delta2 constant must be positive")

    @property
    def kind(self) -> Kind:
        if self.family in (Family.POWER, Family.EXPONENTIAL):
            return Kind.N_FUNCTION
        if self.family is Family.PIECEWISE_PHI:
            return Kind.N_INFINITY_FUNCTION if self.final_slope == 0.0 else Kind.N_FUNCTION
        return Kind.N_INFINITY_FUNCTION

    @property
    def delta2_constant(self) -> Optional[float]:
        if self.delta2_override is not None:
            return self.delta2_override
        if self.family is Family.POWER:
            return 2.0 ** self.p
        if self.family is Family.LOG_SHIFTED:
            return 4.0
        return None

    @property
    def is_l1(self) -> bool:
        return self.family is Family.POWER and self.p == 1.0

    @property
    def final_slope(self) -> float:
        (t0, v0), (t1, v1) = self.knots[-2], self.knots[-1]
        return (v1 - v0) / (t1 - t0)

    @property
    def phi_bound(self) -> Optional[float]:
        """sup φ for N∞ families, None when φ is unbounded."""
        if self.kind is Kind.N_FUNCTION:
            return None
        if self.family is Family.ARCTAN:
            return math.pi / 2
        if self.family is Family.PIECEWISE_PHI:
            return self.knots[-1][1]
        return 1.0

    def validate_admissible(self) -> None:
        if self.is_l1:
            raise DomainError(L1_REMARK, errors={"p": self.p})

    @classmethod
    def from_dict(cls, data: dict) -> "OrliczSpec":
        try:
            family = Family(data["family"])
        except (KeyError, ValueError) as e:
            raise DomainError(f"unknown Orlicz family in {data!r}") from e
        knots = data.get("knots")
        return cls(
            family=family,
            p=data.get("p"),
            knots=tuple(tuple(k) for k in knots) if knots is not None else None,
            delta2_override=data.get("delta2_constant"),
            allow_l1=bool(data.get("allow_l1", False)),
        )

    def to_dict(self) -> dict:
        out: dict = {"family": self.family.value}
        if self.family is Family.POWER:
            out["p"] = self.p
        if self.family is Family.PIECEWISE_PHI:
            out["knots"] = [list(k) for k in self.knots]
        if self.delta2_override is not None:
            out["delta2_constant"] = self.delta2_override
        return out

    def __str__(self) -> str:
        if self.family is Family.POWER:
            return f"power(p={self.p:g})"
        return self.family.value


def power(p: float) -> OrliczSpec:
    return OrliczSpec(Family.POWER, p=p)


def log_shifted() -> OrliczSpec:
    return OrliczSpec(Family.LOG_SHIFTED)


def arctan_primitive() -> OrliczSpec:
    return OrliczSpec(Family.ARCTAN)


def exp_saturating() -> OrliczSpec:
    return OrliczSpec(Family.EXP_SATURATING)


def exponential() -> OrliczSpec:
    return OrliczSpec(Family.EXPONENTIAL)


def piecewise_phi(knots) -> OrliczSpec:
    return OrliczSpec(Family.PIECEWISE_PHI, knots=tuple(tuple(k) for k in knots))


def _check_knots(knots) -> tuple[tuple[float, float], ...]:
    if knots is None or len(knots) < 2:
        raise DomainError("piecewise_phi needs at least two knots")
    pts = tuple((float(t), float(v)) for t, v in knots)
    ts = np.array([t for t, _ in pts])
    vs = np.array([v for _, v in pts])
    if ts[0] != 0.0 or vs[0] != 0.0:
        raise DomainError("first knot must be (0, 0)", errors={"knots": pts})
    if np.any(np.diff(ts) <= 0):
        raise DomainError("knot abscissae must be strictly increasing", errors={"knots": pts})
    if np.any(np.diff(vs) < 0) or np.any(vs < 0):
        raise DomainError("knot ordinates must be non-negative and non-decreasing", errors={"knots": pts})
    if vs[1] <= 0:
        # φ must be positive for every t > 0
        raise DomainError("φ must be positive right of 0; second ordinate is 0", errors={"knots": pts})
    return pts


def _nonnegative(x: ArrayLike, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"{what} requires a non-negative argument", errors={"argument": np.min(arr).item()})
    return arr


def _out(arr: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(arr) if np.ndim(like) == 0 else arr


def _series(x: np.ndarray, coeff) -> np.ndarray:
    """Σ_{k=2..K} coeff(k) x^k, Horner-evaluated."""
    acc = np.zeros_like(x)
    for k in range(_SERIES_TERMS, 1, -1):
        acc = acc * x + coeff(k)
    return acc * x * x


def _blend(u: np.ndarray, closed, coeff) -> np.ndarray:
    val = np.atleast_1d(np.asarray(closed(u), dtype=float)).copy()
    flat = np.atleast_1d(u)
    small = flat < _SERIES_CUTOFF
    if np.any(small):
        val[small] = _series(flat[small], coeff)
    return val.reshape(u.shape)


def _piecewise_parts(spec: OrliczSpec):
    ts = np.array([t for t, _ in spec.knots])
    vs = np.array([v for _, v in spec.knots])
    slopes = np.diff(vs) / np.diff(ts)
    areas = np.concatenate(([0.0], np.cumsum(0.5 * (vs[:-1] + vs[1:]) * np.diff(ts))))
    return ts, vs, slopes, areas


def phi(spec: OrliczSpec, t: ArrayLike) -> ArrayLike:
    x = _nonnegative(t, "phi")
    fam = spec.family
    if fam is Family.POWER:
        val = np.where(x > 0, x ** (spec.p - 1.0), 0.0) if spec.p > 1 else np.where(x > 0, 1.0, 0.0)
    elif fam is Family.LOG_SHIFTED:
        val = x / (1.0 + x)
    elif fam is Family.ARCTAN:
        val = np.arctan(x)
    elif fam is Family.EXP_SATURATING:
        val = -np.expm1(-x)
    elif fam is Family.EXPONENTIAL:
        val = np.expm1(x)
    else:
        ts, vs, slopes, _ = _piecewise_parts(spec)
        seg = np.clip(np.searchsorted(ts, x, side="right") - 1, 0, len(slopes) - 1)
        val = vs[seg] + slopes[seg] * (x - ts[seg])
    return _out(np.asarray(val, dtype=float), t)


def big_phi(spec: OrliczSpec, x: ArrayLike) -> ArrayLike:
    u = _nonnegative(x, "big_phi")
    fam = spec.family
    with np.errstate(over="ignore", invalid="ignore"):
        if fam is Family.POWER:
            val = u ** spec.p / spec.p
        elif fam is Family.LOG_SHIFTED:
            val = _blend(u, lambda v: v - np.log1p(v), lambda k: (-1.0) ** k / k)
        elif fam is Family.ARCTAN:
            val = u * np.arctan(u) - 0.5 * np.log1p(u * u)
        elif fam is Family.EXP_SATURATING:
            val = _blend(u, lambda v: v + np.expm1(-v), lambda k: (-1.0) ** k / math.factorial(k))
        elif fam is Family.EXPONENTIAL:
            val = _blend(u, lambda v: np.expm1(v) - v, lambda k: 1.0 / math.factorial(k))
        else:
            ts, vs, slopes, areas = _piecewise_parts(spec)
            seg = np.clip(np.searchsorted(ts, u, side="right") - 1, 0, len(slopes) - 1)
            d = u - ts[seg]
            val = areas[seg] + vs[seg] * d + 0.5 * slopes[seg] * d * d
    return _out(np.asarray(val, dtype=float), x)


def score(spec: OrliczSpec, u: ArrayLike) -> ArrayLike:
    """ψ(u) = sgn(u)·φ(|u|), with sgn(0) = 0."""
    arr = np.asarray(u, dtype=float)
    val = np.sign(arr) * np.asarray(phi(spec, np.abs(arr)))
    return _out(val, u)


@dataclass(frozen=True)
class Delta2Estimate:
    sup_ratio: float
    violating_x: Optional[float]
    satisfied: Optional[bool]
    bound: Optional[float]


def delta2_estimate(
    spec: OrliczSpec,
    x_min: float,
    x_max: float,
    n_points: int,
    threshold: Optional[float] = None,
) -> Delta2Estimate:
    """Evaluate Φ(2x)/Φ(x) on a log-spaced grid and compare against K₂.

    The comparison bound is `threshold` when given, otherwise the family's
    stored constant; with neither, `satisfied` is None and only the observed
    supremum is reported.
    """
    if not (x_min > 0 and x_max > 0):
        raise DomainError("delta2_estimate needs positive bounds", errors={"x_min": x_min, "x_max": x_max})
    if not x_min < x_max or n_points < 2:
        raise DomainError("delta2_estimate needs x_min < x_max and n_points >= 2")
    xs = np.logspace(math.log10(x_min), math.log10(x_max), n_points)
    with np.errstate(over="ignore", invalid="ignore"):
        ratios = np.asarray(big_phi(spec, 2.0 * xs)) / np.asarray(big_phi(spec, xs))
    sup_ratio = float(np.max(ratios))
    bound = threshold if threshold is not None else spec.delta2_constant
    if bound is None:
        logger.warning("no Δ2 constant known for %s; reporting sup ratio %.6g only", spec, sup_ratio)
        return Delta2Estimate(sup_ratio, None, None, None)
    over = np.nonzero(ratios > bound * (1.0 + 1e-12))[0]
    violating_x = float(xs[over[0]]) if over.size else None
    if violating_x is not None:
        logger.warning("Δ2 bound %.6g exceeded for %s at x=%.6g", bound, spec, violating_x)
    return Delta2Estimate(sup_ratio, violating_x, violating_x is None, bound)


def modular(spec: OrliczSpec, grid, residuals) -> float:
    """Σ wᵢ Φ(|rᵢ|); exact for piecewise-constant residuals."""
    grid.check_owns(residuals)
    return float(np.dot(grid.weights, big_phi(spec, np.abs(residuals.values))))


def luxemburg_norm(spec: OrliczSpec, grid, values, tol: float = 1e-12, max_iters: int = 2200) -> float:
    """inf{λ > 0 : ∫ Φ(|f|/λ) dμ ≤ 1}, by doubling/halving from 1 then bisection."""
    if not tol > 0:
        raise DomainError("luxemburg_norm needs tol > 0", errors={"tol": tol})
    grid.check_owns(values)
    mags = np.abs(values.values)
    if not np.any(mags > 0):
        return 0.0
    w = grid.weights

    def mod_at(lam: float) -> float:
        with np.errstate(over="ignore"):
            return float(np.dot(w, big_phi(spec, mags / lam)))

    lo = hi = 1.0
    m = mod_at(1.0)
    if m > 1.0:
        while m > 1.0:
            lo, hi = hi, hi * 2.0
            m = mod_at(hi)
    else:
        while m < 1.0:
            hi, lo = lo, lo / 2.0
            m = mod_at(lo)
    for _ in range(max_iters):
        mid = 0.5 * (lo + hi)
        m = mod_at(mid)
        if abs(m - 1.0) <= tol or mid in (lo, hi):
            return mid
        if m > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
