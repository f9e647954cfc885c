import math
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from app.agent.actions import ActionSpace
from app.agent.constants import DEFAULT_HIDDEN
from app.agent.views import Action
from app.baselines.constants import (
    DEFAULT_EPOCHS,
    DEFAULT_K,
    DEFAULT_MINIBATCH,
    DEFAULT_RANDOM_TRIALS,
    DEFAULT_SUPERVISED_LR,
    DEFAULT_TREE_MAX_DEPTH,
    DEFAULT_TREE_MIN_LEAF,
    DEFAULT_VALIDATION_FRACTION,
)


def grid_key(vf: int, if_: int) -> str:
    return f"{vf}x{if_}"


def parse_grid_key(key: str) -> Tuple[int, int]:
    vf, if_ = key.split("x")
    return int(vf), int(if_)


class OracleLabel(BaseModel):
    """
    Brute-force result for one program.

    full_grid maps "VFxIF" to the measured time; cells that failed to compile
    or timed out are stored as null and rank as +inf.
    """
    program_id: str
    nest_id: str = ""
    vf: int
    if_: int = Field(alias="if")
    time: float
    baseline_time: Optional[float] = None
    full_grid: Dict[str, Optional[float]]

    model_config = {"populate_by_name": True}

    @property
    def best_time(self) -> float:
        return self.time

    def grid_time(self, vf: int, if_: int) -> float:
        value = self.full_grid.get(grid_key(vf, if_))
        return math.inf if value is None else value

    def action(self, space: ActionSpace) -> Action:
        return space.action_for(self.vf, self.if_)


class BaselineConfig(BaseModel):
    k: int = Field(default=DEFAULT_K, ge=1)
    tree_max_depth: int = Field(default=DEFAULT_TREE_MAX_DEPTH, ge=0)
    tree_min_leaf: int = Field(default=DEFAULT_TREE_MIN_LEAF, ge=1)
    random_trials: int = Field(default=DEFAULT_RANDOM_TRIALS, ge=1)


class SupervisedConfig(BaseModel):
    hidden: Tuple[int, ...] = DEFAULT_HIDDEN
    lr: float = Field(default=DEFAULT_SUPERVISED_LR, gt=0.0)
    epochs: int = Field(default=DEFAULT_EPOCHS, ge=0)
    batch_size: int = Field(default=DEFAULT_MINIBATCH, ge=1)
    validation_fraction: float = Field(default=DEFAULT_VALIDATION_FRACTION, ge=0.0, lt=1.0)
    seed: int = 0


class EpochStats(BaseModel):
    epoch: int
    loss: float
    train_accuracy: float
    heldout_accuracy: Optional[float] = None


class LabeledVector(NamedTuple):
    """One training pair for the vector-space predictors; label is an action index."""
    program_id: str
    vector: np.ndarray
    label: int
