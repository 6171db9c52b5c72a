from dataclasses import dataclass, field
from typing import Any, Optional

IDEMPOTENT_FILE = "idempotent_keys.txt"
DEFAULT_TASK_QUEUE = "orlicz-isotone"
SEED_ENV_VAR = "ORLICZ_ISOTONE_SEED"

DEFAULT_NORM_TOL = 1e-12
DEFAULT_LUX_TOL = 1e-10
DEFAULT_PROBES = 100


class IsotoneError(Exception):
    """Root error; `errors` carries structured detail (bracket, offending index, ...)."""
    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors


class DomainError(IsotoneError, ValueError):
    pass


class StructuralError(IsotoneError):
    pass


class ProblemFormatError(StructuralError):
    pass


class NumericalError(IsotoneError):
    pass


@dataclass
class RunConfig:
    command: str
    spec: dict
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    plot_path: Optional[str] = None
    a: Optional[float] = None
    b: Optional[float] = None
    tol: Optional[float] = None
    jump_tol: Optional[float] = None
    tie_break: str = "midpoint"
    seed: int = 0
    probes: int = DEFAULT_PROBES
    refine_levels: int = 6
    base_cells: int = 64
    fixture: Optional[str] = None
    candidate_path: Optional[str] = None
    allow_l1_oracle: bool = False


@dataclass
class PipelineParams:
    input_path: str
    foldername: str  # output folder; a network share in a real deployment
    spec: dict
    key: str
    a: Optional[float] = None
    b: Optional[float] = None
    tie_break: str = "midpoint"
    seed: int = 0
    probes: int = DEFAULT_PROBES


@dataclass
class RefineStudyParams:
    fixture: str
    spec: dict
    foldername: str
    key: str
    base_cells: int = 64
    refine_levels: int = 6
    tie_break: str = "midpoint"


@dataclass
class ProblemPayload:
    breakpoints: list[float]
    values: list[float]


@dataclass
class FitPayload:
    result: dict[str, Any]
    plot_rows: list[list[float]] = field(default_factory=list)
    certified: bool = False


@dataclass
class RefineLevelRow:
    n: int
    max_jump: float
    modular: float
    certified: bool
