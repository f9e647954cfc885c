from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from app.env.views import SimLoopFeatures
from app.loop_ir.features import sim_features
from app.loop_ir.views import LoopNest


@dataclass
class KernelSpec:
    """The pieces of one instantiated program: macros, globals and kernel body lines."""
    defines: Dict[str, int]
    globals: List[str]
    body: List[str]
    # Free-form parameter record kept in the manifest
    params: Dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class LoopTemplate:
    """
    A loop family with typed holes.

    `build` fills the holes (identifiers, trip counts, stride, element type,
    operators, nest depth) from the generator it is given.
    """
    template_id: str
    description: str
    build: Callable[[np.random.Generator], KernelSpec]

    def features(self, nest: LoopNest) -> SimLoopFeatures:
        return sim_features(nest)


class ProgramRecord(BaseModel):
    program_id: str
    template_id: str
    path: str
    split: str
    features: SimLoopFeatures
    nest_count: int = Field(ge=1)
    normalized_digest: str
    duplicate_of: Optional[str] = None
    params: Dict[str, object] = Field(default_factory=dict)


class DatasetManifest(BaseModel):
    seed: int
    count: int = Field(ge=1)
    train_fraction: float = Field(gt=0.0, le=1.0)
    test_fraction: float = Field(ge=0.0, lt=1.0)
    templates: List[str]
    records: List[ProgramRecord]

    def by_id(self) -> Dict[str, ProgramRecord]:
        return {record.program_id: record for record in self.records}

    def split_ids(self, split: str) -> List[str]:
        return [record.program_id for record in self.records if record.split == split]


class HistogramCell(BaseModel):
    vf: int
    if_: int = Field(alias="if")
    count: int
    percent: float

    model_config = {"populate_by_name": True}


class OptimumHistogram(BaseModel):
    total: int
    cells: List[HistogramCell]
    mode_vf: int
    mode_if: int
