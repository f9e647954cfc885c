from collections import Counter
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel, Field
from sklearn.metrics import pairwise_distances

from app.agent.actions import ActionSpace
from app.agent.views import Action, ActionSpaceConfig
from app.baselines.constants import DEFAULT_K
from app.baselines.views import LabeledVector
from app.errors import DimMismatchError, EmptyModelError
from app.nn.constants import DTYPE
from app.nn.serialization import EncodedArray, decode_array, encode_array


@dataclass
class KnnModel:
    """Training vectors with their action labels, rows ordered by program_id."""
    vectors: np.ndarray
    labels: np.ndarray
    program_ids: List[str]
    action_space: ActionSpace
    k: int = DEFAULT_K

    def __len__(self) -> int:
        return len(self.program_ids)


class KnnState(BaseModel):
    k: int = Field(..., ge=1)
    action_space: ActionSpaceConfig
    program_ids: List[str]
    vectors: EncodedArray
    labels: List[int]


def knn_fit(pairs: Sequence[LabeledVector], action_space: ActionSpace, k: int = DEFAULT_K) -> KnnModel:
    if not pairs:
        raise EmptyModelError(detail="kNN needs at least one training vector")
    ordered = sorted(pairs, key=lambda pair: pair.program_id)
    return KnnModel(
        vectors=np.stack([np.asarray(pair.vector, dtype=DTYPE) for pair in ordered]),
        labels=np.array([pair.label for pair in ordered], dtype=np.int64),
        program_ids=[pair.program_id for pair in ordered],
        action_space=action_space,
        k=k,
    )


def knn_predict(model: KnnModel, v: np.ndarray) -> Action:
    """
    Majority action of the k nearest training vectors (Euclidean).

    Distance ties go to the lower program_id; vote ties go to the label of
    the nearest neighbor among the tied labels.
    """
    if len(model) == 0:
        raise EmptyModelError()
    v = np.asarray(v, dtype=DTYPE)
    if v.shape != model.vectors.shape[1:]:
        raise DimMismatchError(model.vectors.shape[1:], v.shape, "knn query")
    # minkowski runs through scipy cdist, which keeps equal distances bit-equal
    distances = pairwise_distances(v[None, :], model.vectors, metric="minkowski", p=2)[0]
    # stable sort keeps program_id order among equal distances
    nearest = np.argsort(distances, kind="stable")[: min(model.k, len(model))]
    votes = [int(label) for label in model.labels[nearest]]
    counts = Counter(votes)
    top = max(counts.values())
    winner = next(label for label in votes if counts[label] == top)
    return model.action_space.action(winner)


def to_state(model: KnnModel) -> KnnState:
    return KnnState(
        k=model.k,
        action_space=model.action_space.to_config(),
        program_ids=model.program_ids,
        vectors=encode_array(model.vectors),
        labels=[int(label) for label in model.labels],
    )


def from_state(state: KnnState) -> KnnModel:
    return KnnModel(
        vectors=decode_array(state.vectors),
        labels=np.array(state.labels, dtype=np.int64),
        program_ids=list(state.program_ids),
        action_space=ActionSpace.from_config(state.action_space),
        k=state.k,
    )
