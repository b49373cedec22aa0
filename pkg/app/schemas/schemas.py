from enum import Enum
from typing import Optional
from pydantic import BaseModel, Field, field_validator, model_validator


# ---------------------------------------------------------------------------
# Enums
# ---------------------------------------------------------------------------

class GroupEnum(str, Enum):
    udd = "udd"
    a3 = "a3"
    s3 = "s3"
    qdd3 = "qdd3"
    custom = "custom"


class PulseEnum(str, Enum):
    P = "P"
    Pinv = "Pinv"
    P12 = "P12"
    P23 = "P23"
    none = "none"


class BathKindEnum(str, Enum):
    classical = "classical"
    quantum = "quantum"


class SpectrumEnum(str, Enum):
    gaussian = "gaussian"
    lorentzian = "lorentzian"
    ohmic = "ohmic"
    one_over_f = "one-over-f"


# ---------------------------------------------------------------------------
# Sequence file format
# ---------------------------------------------------------------------------

def _check_labels(v: list[int]) -> list[int]:
    bad = [h for h in v if h not in range(1, 7)]
    if bad:
        raise ValueError(f"Hamiltonian labels must be 1..6, got {bad}")
    return v


class SequenceDocument(BaseModel):
    """Wire format of a pulse sequence; times are 16-significant-digit strings."""
    group: GroupEnum
    order: int = Field(..., ge=0)
    hamiltonians: list[int] = Field(..., min_length=1)
    times: list[str]
    pulses: list[PulseEnum]

    @field_validator("hamiltonians")
    @classmethod
    def labels_in_range(cls, v: list[int]) -> list[int]:
        return _check_labels(v)

    @field_validator("times")
    @classmethod
    def times_are_decimal(cls, v: list[str]) -> list[str]:
        for t in v:
            float(t)  # raises ValueError for malformed entries
        return v

    @model_validator(mode="after")
    def lengths_agree(self) -> "SequenceDocument":
        if len(self.times) != len(self.hamiltonians) - 1:
            raise ValueError("need exactly one switching time between consecutive intervals")
        if len(self.pulses) != len(self.hamiltonians):
            raise ValueError("need exactly one pulse after every interval")
        return self


# ---------------------------------------------------------------------------
# Verification reports
# ---------------------------------------------------------------------------

class MomentReport(BaseModel):
    group: GroupEnum
    order: int
    families: list[str]
    residuals: list[list[float]]   # families x moment orders
    max_residual: float
    tolerance: float
    passed: bool


class GlobalizationDocument(BaseModel):
    order: int
    verdict: int
    tolerance: float
    # str(order) -> orbit label -> max relative spread
    spreads: dict[str, dict[str, float]]
    passed: bool


class FilterDocument(BaseModel):
    group: GroupEnum
    order: int
    functions: list[str]
    omega_t: list[float]
    values: dict[str, list[float]]
    low_frequency_slopes: dict[str, Optional[float]]


class ChiRecord(BaseModel):
    T: float
    chi: float
    W: float


class FitSummaryDocument(BaseModel):
    kind: BathKindEnum
    order: int
    exponent: Optional[float] = None
    expected_exponent: int
    r2: Optional[float] = None
    ci95: Optional[float] = None
    points: int = 0
    window: tuple[float, float]
    window_empty: bool = False


class SearchHitDocument(BaseModel):
    hamiltonians: list[int]
    intervals: list[float]
    pulses: list[PulseEnum]
    residual: float
    ratio: float


# ---------------------------------------------------------------------------
# HTTP request bodies
# ---------------------------------------------------------------------------

class SolveRequest(BaseModel):
    hamiltonians: list[int] = Field(..., min_length=1)
    order: int = Field(..., ge=0, le=64)
    guess: Optional[list[float]] = None
    normalize: bool = True

    @field_validator("hamiltonians")
    @classmethod
    def labels_in_range(cls, v: list[int]) -> list[int]:
        return _check_labels(v)


class VerifyRequest(BaseModel):
    sequence: SequenceDocument
    order: int = Field(..., ge=0, le=4)


# ---------------------------------------------------------------------------
# Run configuration (CLI)
# ---------------------------------------------------------------------------

class RunConfig(BaseModel):
    """Everything needed to re-execute a CLI command bit-for-bit."""
    command: str
    group: GroupEnum = GroupEnum.a3
    order: int = Field(1, ge=0)
    orders: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    kind: BathKindEnum = BathKindEnum.classical
    mode: BathKindEnum = BathKindEnum.classical
    sequence_path: Optional[str] = None
    solve: bool = False

    # T grid, microseconds, log spaced
    T_start: float = Field(1e-6, gt=0)
    T_stop: float = Field(1e-3, gt=0)
    T_points: int = Field(20, ge=1)

    # trials
    trials: Optional[int] = Field(None, ge=1)      # None: settings default for the bath kind
    states: int = Field(20, ge=1)
    seed: int = 20240601
    n_jobs: int = 1

    # physical scales
    J_mhz: float = 100.0
    beta_khz: float = 10.0
    bath_rms_mhz: float = 100.0
    bath_bandwidth_mhz: float = 100.0
    bath_modes: int = 10

    # filter / chi
    omega_t_min: float = 1e-2
    omega_t_max: float = 1e3
    omega_t_points: int = 400
    spectrum: SpectrumEnum = SpectrumEnum.gaussian
    spectrum_params: dict[str, float] = Field(default_factory=dict)

    # search
    max_intervals: int = Field(5, ge=1)
    pool: list[int] = Field(default_factory=lambda: [1, 2, 3])

    fit_window: tuple[float, float] = (1e-11, 1e-2)
    tolerances: dict[str, float] = Field(default_factory=dict)
    out: str = "out"

    @model_validator(mode="after")
    def grid_ascending(self) -> "RunConfig":
        if self.T_stop < self.T_start:
            raise ValueError("T_stop must not be below T_start")
        if self.fit_window[0] >= self.fit_window[1]:
            raise ValueError("fit window must be (low, high) with low < high")
        return self
