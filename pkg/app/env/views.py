from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.env.constants import (
    DEFAULT_RUNS,
    DEFAULT_TIMEOUT_MULTIPLIER,
    DEFAULT_WARMUPS,
    ELEM_WIDTHS,
)


class CompileStatus(str, Enum):
    OK = "ok"
    TIMEOUT = "timeout"
    ERROR = "error"


class SimLoopFeatures(BaseModel):
    """Static loop description consumed by the simulated backend."""
    trip_count: int = Field(..., ge=1, description="Total innermost iterations N")
    ops_per_iter: int = Field(..., ge=1, description="Operations per innermost iteration c")
    stride: int = Field(..., ge=1, description="Dominant access stride s")
    has_reduction: bool = False
    has_predicate: bool = False
    elem_bits: int = Field(32, description="Element width w in bits")

    @field_validator("elem_bits")
    @classmethod
    def _check_width(cls, value: int) -> int:
        if value not in ELEM_WIDTHS:
            raise ValueError(f"elem_bits must be one of {sorted(ELEM_WIDTHS)}")
        return value


class Measurement(BaseModel):
    t_baseline: float = Field(..., gt=0, description="Baseline execution time in seconds")
    t_candidate: float = Field(..., gt=0, description="Candidate execution time in seconds")
    compile_status: CompileStatus
    reward: float
    compile_time: Optional[float] = None


class MeasurementRecord(Measurement):
    """Cache line persisted as JSON."""
    nest_id: str
    source_digest: str
    vf: int
    if_: int = Field(..., alias="if")

    model_config = {"populate_by_name": True}


class BackendResult(BaseModel):
    status: CompileStatus
    compile_time: float = Field(..., ge=0)
    exec_time: Optional[float] = None

    @model_validator(mode="after")
    def _ok_has_time(self):
        if self.status == CompileStatus.OK and (self.exec_time is None or self.exec_time <= 0):
            raise ValueError("ok results need a positive exec_time")
        return self


class TimeoutPolicy(BaseModel):
    """Budgets relative to the baseline: compile and run capped at multiplier x baseline."""
    multiplier: float = Field(DEFAULT_TIMEOUT_MULTIPLIER, gt=1)
    limit_runtime: bool = True


class EnvConfig(BaseModel):
    backend: str = Field("sim", pattern="^(sim|clang)$")
    compiler: Optional[str] = None
    flags: Optional[list] = None
    runs: int = Field(DEFAULT_RUNS, ge=1)
    warmups: int = Field(DEFAULT_WARMUPS, ge=0)
    workers: int = Field(1, ge=1)
    timeout_multiplier: float = Field(DEFAULT_TIMEOUT_MULTIPLIER, gt=1)
    cache_path: Optional[str] = None
    sim_compile_model: bool = True
