from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from app.report.constants import (
    DEFAULT_BEST_OF,
    DEFAULT_CURVE_BUDGETS,
    DEFAULT_METHODS,
)


class BenchConfig(BaseModel):
    methods: List[str] = Field(default_factory=lambda: list(DEFAULT_METHODS))
    best_of: int = Field(DEFAULT_BEST_OF, ge=1, description="Candidates measured per RL inference; 1 is greedy only")
    curve_budgets: List[int] = Field(default_factory=lambda: list(DEFAULT_CURVE_BUDGETS))


class TrainingLogRow(BaseModel):
    batch: int
    steps: int
    reward_mean: float
    policy_loss: float
    value_loss: float
    entropy: float
    clip_frac: float
    loss: float
    ratio_mean: float


class ProgramResult(BaseModel):
    program_id: str
    # method -> candidate time / baseline time
    normalized: Dict[str, float]


class CurvePoint(BaseModel):
    method: str
    budget: int
    compilations: int
    geomean: float


class BenchReport(BaseModel):
    methods: List[str]
    programs: List[ProgramResult]
    geomean: Dict[str, float]
    curve: List[CurvePoint] = Field(default_factory=list)


class MethodSummary(BaseModel):
    method: str
    geomean: float
    speedup: float
    gap_to_oracle: Optional[float] = None
    programs: int


class RunSummary(BaseModel):
    """Machine-readable run.json written by every command."""
    command: str
    config: Dict[str, object] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(default_factory=dict)
    stats: Dict[str, object] = Field(default_factory=dict)


class RunLedger(BaseModel):
    """run.json: the latest summary of every command run against a directory."""
    commands: Dict[str, RunSummary] = Field(default_factory=dict)
