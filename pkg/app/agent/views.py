from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.agent.constants import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_CLIP_EPS,
    DEFAULT_ENTROPY_COEF,
    DEFAULT_EPOCHS,
    DEFAULT_HIDDEN,
    DEFAULT_MAX_IF,
    DEFAULT_MAX_VF,
    DEFAULT_VALUE_COEF,
    LIMIT_MAX_IF,
    LIMIT_MAX_VF,
)
from app.embedding.views import PathContextBag
from app.nn.constants import DEFAULT_LR


def _is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


class ActionSpaceConfig(BaseModel):
    max_vf: int = Field(DEFAULT_MAX_VF, ge=1, le=LIMIT_MAX_VF, description="Largest vectorization factor")
    max_if: int = Field(DEFAULT_MAX_IF, ge=1, le=LIMIT_MAX_IF, description="Largest interleave count")

    @model_validator(mode="after")
    def _powers_of_two(self):
        if not (_is_power_of_two(self.max_vf) and _is_power_of_two(self.max_if)):
            raise ValueError("max_vf and max_if must be powers of two")
        return self


class PpoConfig(BaseModel):
    lr: float = Field(DEFAULT_LR, gt=0, description="Adam learning rate")
    clip_eps: float = Field(DEFAULT_CLIP_EPS, gt=0, lt=1, description="Clipping range of the probability ratio")
    epochs_per_batch: int = Field(DEFAULT_EPOCHS, ge=1)
    batch_size: int = Field(DEFAULT_BATCH_SIZE, ge=1, description="Transitions collected per update")
    minibatch_size: Optional[int] = Field(None, ge=1, description="None means one full-batch step per epoch")
    entropy_coef: float = Field(DEFAULT_ENTROPY_COEF, ge=0)
    value_coef: float = Field(DEFAULT_VALUE_COEF, ge=0)
    hidden: Tuple[int, ...] = Field(DEFAULT_HIDDEN, description="Trunk hidden layer widths")
    joint_embedding: bool = Field(True, description="Backpropagate the policy loss into the embedding")
    seed: int = 0


@dataclass(frozen=True)
class Action:
    index: int
    vf: int
    if_: int


@dataclass
class Transition:
    """One contextual-bandit step; there is never a successor state."""
    state: np.ndarray
    action: Action
    reward: float
    logp_old: float
    value_old: float
    # Present when the embedding is trained jointly
    bag: Optional[PathContextBag] = None


class UpdateStats(BaseModel):
    policy_loss: float
    value_loss: float
    entropy: float
    clip_frac: float
    loss: float
    ratio_mean: float = 1.0
    ratio_max_dev: float = 0.0
    # clip fraction of the first pass over the batch
    first_clip_frac: float = 0.0
