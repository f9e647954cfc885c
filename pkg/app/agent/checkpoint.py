"""Combined JSON checkpoint of the embedding network, the policy network and the action space."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError

from app.agent.actions import ActionSpace
from app.agent.constants import CHECKPOINT_FORMAT_VERSION
from app.agent.policy import PolicyNet
from app.agent.views import ActionSpaceConfig
from app.config import LOGGER_NAME
from app.embedding.network import EmbeddingNet
from app.embedding.views import EmbeddingConfig
from app.embedding.vocab import TokenVocab
from app.errors import DimMismatchError, NonFiniteError, SchemaError
from app.nn.core import Dense, Mlp, check_finite
from app.nn.serialization import EncodedArray, decode_params, encode_params

logger = logging.getLogger(LOGGER_NAME)


class EmbeddingState(BaseModel):
    config: EmbeddingConfig
    token_vocab: List[str] = Field(..., min_length=1)
    params: Dict[str, EncodedArray]


class PolicyState(BaseModel):
    in_dim: int = Field(..., ge=1)
    hidden: List[int] = Field(..., min_length=1)
    params: Dict[str, EncodedArray]


class Checkpoint(BaseModel):
    format_version: int = CHECKPOINT_FORMAT_VERSION
    config: Dict[str, Any] = Field(default_factory=dict, description="Run configuration the model was trained with")
    action_space: ActionSpaceConfig
    embedding: Optional[EmbeddingState] = None
    policy: PolicyState


def _policy_from_state(state: PolicyState, action_space: ActionSpace) -> PolicyNet:
    params = decode_params(state.params)
    dims = [state.in_dim, *state.hidden]
    try:
        trunk = Mlp(
            [
                Dense(params[f"trunk.layers.{i}.weight"], params[f"trunk.layers.{i}.bias"], "tanh")
                for i in range(len(dims) - 1)
            ]
        )
        policy_head = Dense(params["policy_head.weight"], params["policy_head.bias"], "identity")
        value_head = Dense(params["value_head.weight"], params["value_head.bias"], "identity")
    except KeyError as e:
        raise SchemaError(detail=f"Missing policy parameter {e}")
    if trunk.in_dim != state.in_dim or [layer.out_dim for layer in trunk.layers] != state.hidden:
        raise DimMismatchError(dims, [trunk.in_dim, *(layer.out_dim for layer in trunk.layers)], "policy trunk")
    return PolicyNet(trunk, policy_head, value_head, action_space)


def to_checkpoint(
    net: PolicyNet, embedder: Optional[EmbeddingNet] = None, config: Optional[Dict[str, Any]] = None
) -> Checkpoint:
    embedding = None
    if embedder is not None:
        embedding = EmbeddingState(
            config=embedder.config,
            token_vocab=list(embedder.vocab.tokens),
            params=encode_params(embedder.params()),
        )
    return Checkpoint(
        config=config or {},
        action_space=net.action_space.to_config(),
        embedding=embedding,
        policy=PolicyState(in_dim=net.in_dim, hidden=net.hidden, params=encode_params(net.params())),
    )


def from_checkpoint(checkpoint: Checkpoint) -> Tuple[PolicyNet, Optional[EmbeddingNet]]:
    if checkpoint.format_version != CHECKPOINT_FORMAT_VERSION:
        raise SchemaError(detail=f"Unsupported checkpoint format {checkpoint.format_version}")
    try:
        action_space = ActionSpace.from_config(checkpoint.action_space)
        net = _policy_from_state(checkpoint.policy, action_space)
        embedder = None
        if checkpoint.embedding is not None:
            state = checkpoint.embedding
            embedder = EmbeddingNet(state.config, TokenVocab(state.token_vocab), decode_params(state.params))
            if embedder.dim != net.in_dim:
                raise DimMismatchError(net.in_dim, embedder.dim, "embedding dim")
        for name, value in net.params().items():
            check_finite(value, name)
    except (DimMismatchError, NonFiniteError) as e:
        raise SchemaError(detail=f"Inconsistent checkpoint: {e.detail}", context=e.context)
    return net, embedder


def dumps(net: PolicyNet, embedder: Optional[EmbeddingNet] = None, config: Optional[Dict[str, Any]] = None) -> str:
    return to_checkpoint(net, embedder, config).model_dump_json()


def loads(text: Union[str, bytes]) -> Tuple[PolicyNet, Optional[EmbeddingNet]]:
    try:
        checkpoint = Checkpoint.model_validate(json.loads(text))
    except json.JSONDecodeError as e:
        raise SchemaError(detail=f"Checkpoint is not valid JSON: {e}")
    except ValidationError as e:
        raise SchemaError(detail=f"Checkpoint does not match the schema: {e.error_count()} errors", context={"errors": e.errors(include_url=False, include_input=False)})
    return from_checkpoint(checkpoint)


def save(path: Union[str, Path], net: PolicyNet, embedder: Optional[EmbeddingNet] = None, config: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(net, embedder, config), encoding="utf-8")
    logger.info("Saved checkpoint to %s", path)
    return path


def load(path: Union[str, Path]) -> Tuple[PolicyNet, Optional[EmbeddingNet]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SchemaError(detail=f"Cannot read checkpoint {path}: {e}")
    net, embedder = loads(text)
    logger.info("Loaded checkpoint from %s", path)
    return net, embedder
