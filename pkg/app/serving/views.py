from datetime import datetime
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator


def _power_of_two(value: int) -> int:
    if value < 1 or value & (value - 1):
        raise ValueError(f"must be a power of two, got {value}")
    return value


class SourceRequest(BaseModel):
    source: str = Field(
        ...,
        title="Source",
        description="C source text",
        min_length=1,
        examples=["void dot(int *a, int *b, int n) {\n  int s = 0;\n  for (int i = 0; i < n; i++)\n    s += a[i] * b[i];\n}\n"],
    )
    file: str = Field(
        "<input>",
        title="File name",
        description="Name recorded in nest ids",
    )


class NestInfo(BaseModel):
    nest_id: str
    file: str
    line: int
    depth: int
    embed_snippet: str


class ExtractResponse(BaseModel):
    nests: List[NestInfo] = Field(..., description="Loop nests in source order")


class PredictRequest(SourceRequest):
    rewrite: bool = Field(
        False,
        title="Rewrite",
        description="Also return the source with the predicted pragmas injected",
    )


class NestPrediction(BaseModel):
    nest_id: str
    line: int
    vf: int
    if_: int = Field(..., alias="if")

    model_config = {"populate_by_name": True}


class PredictResponse(BaseModel):
    predictions: List[NestPrediction]
    source: Optional[str] = Field(None, description="Rewritten source when requested")
    execution_time_ms: float
    timestamp: datetime


class InjectRequest(SourceRequest):
    vf: int = Field(..., description="Vectorization factor")
    if_: int = Field(..., alias="if", description="Interleave factor")
    nest: Optional[str] = Field(None, description="Nest index or id; every nest when omitted")

    model_config = {"populate_by_name": True}

    @field_validator("vf", "if_")
    @classmethod
    def _check_factor(cls, value: int) -> int:
        return _power_of_two(value)


class InjectResponse(BaseModel):
    source: str
    nests: List[str] = Field(..., description="Ids of the nests that received a pragma")
