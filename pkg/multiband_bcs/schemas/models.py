import datetime
from enum import Enum
from pathlib import Path
from typing import Literal

from pydantic import ConfigDict, Field, RootModel, field_validator

from multiband_bcs.schemas.base import Base


class PotentialFamily(str, Enum):
    GAUSSIAN: str = "gaussian"
    EXPONENTIAL: str = "exponential"


class BandConfig(Base):
    mass: float
    mu: float


class InteractionConfig(Base):
    pair: tuple[int, int]
    family: str = PotentialFamily.GAUSSIAN.value
    strength: float
    range: float = 1.0

    @field_validator('pair')
    @classmethod
    def check_pair(cls, value):
        if min(value) < 1:
            raise ValueError("Номера зон начинаются с 1")
        return value


class ModelConfig(Base):
    """Declarative model description, as read from a TOML file"""

    name: str | None = None
    dimension: int
    bands: list[BandConfig]
    interactions: list[InteractionConfig] = []


class _Record(Base):
    model_config = ConfigDict(from_attributes=True, populate_by_name=True)


class TcResult(_Record):
    lambda_: float = Field(alias="lambda")
    kappa: float
    tc: float | None
    found: bool
    bracket: tuple[float, float]
    min_eig_trajectory: list[tuple[float, float]] = []
    channel: int | None = None
    min_eig_at_tc: float | None = None
    iterations: int = 0
    grid_points: int = 0


TcResultList = RootModel[list[TcResult]]


class ThresholdStatus(str, Enum):
    REFERENCE: str = "reference"  # measured from T_c(lambda, 0)
    ONSET: str = "onset"  # T_c(lambda, 0) not found, measured at the floor temperature


class KappaThresholds(_Record):
    lambda_: float = Field(alias="lambda")
    kappa_minus: float | None
    kappa_plus: float | None
    status: ThresholdStatus
    temperature: float
    tc_ref: float | None = None


class PerturbationConstants(Base):
    e_hat: float
    minimizing_bands: list[int]
    ground_channels: dict[int, int]
    degenerate: bool
    U1_plus: float
    U1_minus: float
    U2: float | None = None
    A1_plus: float
    A1_minus: float
    A2: float | None = None
    A2_closed_form: float | None = None


class SweepRecord(_Record):
    run_id: str
    dimension: int
    n_bands: int
    lambda_: float = Field(alias="lambda")
    kappa: float
    tc: float | None
    tc_found: bool
    tc_ref: float | None = None
    min_eig_at_tc: float | None = None
    channel: int | None = None
    grid_points: int = 0
    iterations: int = 0
    log_ratio: float | None = None
    error: str | None = None


class FitBranch(str, Enum):
    LINEAR_PLUS: str = "linear_plus"
    LINEAR_MINUS: str = "linear_minus"
    QUADRATIC: str = "quadratic"


class EnhancementFit(Base):
    branch: FitBranch
    side: Literal[-1, 0, 1]
    lambda_: float = Field(alias="lambda")
    slope: float
    fit_window: tuple[float, float]
    residual_norm: float
    slope_error: float = 0.0
    n_records: int
    prediction: float | None = None
    agreement: float | None = None

    model_config = ConfigDict(from_attributes=True, populate_by_name=True)


class VerdictStatus(str, Enum):
    PASS: str = "pass"
    FAIL: str = "fail"
    FLAGGED: str = "flagged"
    SKIPPED: str = "skipped"


class Verdict(Base):
    claim: str
    status: VerdictStatus
    detail: str = ""


class TwoBandPoint(_Record):
    lambda_: float = Field(alias="lambda")
    kappa: float
    tc: float | None
    tc_predicted: float | None
    relative_error: float | None


class AsymptoticReport(Base):
    run_id: str
    constants: PerturbationConstants | None = None
    thresholds: list[KappaThresholds] = []
    fits: list[EnhancementFit] = []
    two_band: list[TwoBandPoint] = []
    verdicts: list[Verdict] = []
    gaps: list[str] = []


class Event(Base):
    run_id: str
    action_type: str
    details: dict
    create_ts: datetime.datetime


class CheckResult(Base):
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""


class RunSummary(Base):
    """Machine-readable summary, one per run; the key set is fixed"""

    run_id: str
    command: str
    status: Literal["ok", "partial", "error"]
    exit_code: int
    model: ModelConfig | None = None
    n_records: int = 0
    n_failed: int = 0
    artifacts: list[str] = []
    verdicts: list[Verdict] = []
    checks: list[CheckResult] = []


class BandMinimum(Base):
    band: int
    e: float
    channel: int


class ConstantsReport(Base):
    run_id: str
    constants: PerturbationConstants | None = None
    band_minima: list[BandMinimum] = []
    v_matrix: list[list[float]] = []
    thresholds: list[KappaThresholds] = []


class GapSummary(_Record):
    lambda_: float = Field(alias="lambda")
    kappa: float
    T: float
    tc: float | None = None
    converged: bool
    trivial: bool
    residual: float
    iterations: int
    restarts: int
    grid_points: int
    max_delta: list[float]
    free_energy: float
    euler_lagrange_residual: float


class RunConfig(Base):
    """Validated command line"""

    model_path: Path
    command: Literal["tc", "sweep", "gap", "constants", "report", "check"]
    lambdas: list[float] = []
    kappas: list[float] = []
    temperature: float | None = None
    t_fraction: float = 0.5
    overrides: dict[str, str] = {}
    out: Path
    workers: int | None = None
    verbose: bool = False

    @field_validator('lambdas')
    @classmethod
    def check_lambdas(cls, value):
        if any(not lam > 0 for lam in value):
            raise ValueError("Константа связи lambda должна быть положительной")
        return value

    @field_validator('workers')
    @classmethod
    def check_workers(cls, value):
        if value is not None and value < 1:
            raise ValueError("Число процессов должно быть положительным")
        return value
