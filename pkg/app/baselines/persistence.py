"""JSON model files for the kNN, tree and supervised predictors."""

import logging
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, ValidationError

from app.agent.constants import CHECKPOINT_FORMAT_VERSION
from app.baselines import knn, supervised, tree
from app.baselines.knn import KnnState
from app.baselines.supervised import SupervisedState
from app.baselines.tree import TreeState
from app.baselines.constants import MODEL_KNN, MODEL_SUPERVISED, MODEL_TREE
from app.config import LOGGER_NAME
from app.errors import NotABaselineModelError, SchemaError

logger = logging.getLogger(LOGGER_NAME)

BaselineModel = Union[knn.KnnModel, tree.TreeModel, supervised.SupervisedNet]


class ModelFile(BaseModel):
    format_version: int = CHECKPOINT_FORMAT_VERSION
    kind: str
    knn: Optional[KnnState] = None
    tree: Optional[TreeState] = None
    supervised: Optional[SupervisedState] = None


def to_model_file(model: BaselineModel) -> ModelFile:
    if isinstance(model, knn.KnnModel):
        return ModelFile(kind=MODEL_KNN, knn=knn.to_state(model))
    if isinstance(model, tree.TreeModel):
        return ModelFile(kind=MODEL_TREE, tree=tree.to_state(model))
    if isinstance(model, supervised.SupervisedNet):
        return ModelFile(kind=MODEL_SUPERVISED, supervised=supervised.to_state(model))
    raise NotABaselineModelError(detail=f"Not a baseline model: {type(model).__name__}")


def from_model_file(file: ModelFile) -> BaselineModel:
    if file.format_version != CHECKPOINT_FORMAT_VERSION:
        raise SchemaError(detail=f"Unsupported model format {file.format_version}")
    state = getattr(file, file.kind, None) if file.kind in (MODEL_KNN, MODEL_TREE, MODEL_SUPERVISED) else None
    if state is None:
        raise SchemaError(detail=f"Model file of kind {file.kind!r} carries no {file.kind} state")
    if file.kind == MODEL_KNN:
        return knn.from_state(state)
    if file.kind == MODEL_TREE:
        return tree.from_state(state)
    return supervised.from_state(state)


def save_model(path: Union[str, Path], model: BaselineModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_model_file(model).model_dump_json(), encoding="utf-8")
    logger.info("Saved %s model to %s", type(model).__name__, path)
    return path


def load_model(path: Union[str, Path]) -> BaselineModel:
    path = Path(path)
    try:
        file = ModelFile.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise SchemaError(detail=f"Cannot read model {path}: {e}")
    except ValidationError as e:
        raise SchemaError(detail=f"Model {path} does not match the schema: {e.error_count()} errors")
    return from_model_file(file)
