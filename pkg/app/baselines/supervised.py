"""Supervised FCNN trained with cross-entropy on brute-force labels."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from sklearn.metrics import accuracy_score
from sklearn.model_selection import train_test_split

from app.agent.actions import ActionSpace
from app.agent.views import Action, ActionSpaceConfig
from app.baselines.views import EpochStats, LabeledVector, SupervisedConfig
from app.config import LOGGER_NAME
from app.errors import EmptyModelError, SchemaError
from app.nn.constants import DTYPE
from app.nn.core import AdamState, Dense, Mlp, adam_step, log_softmax, softmax_logits_to_dist
from app.nn.serialization import EncodedArray, decode_params, encode_params

logger = logging.getLogger(LOGGER_NAME)

# Fewer labeled programs than this train without a held-out split
_MIN_HELDOUT_PROGRAMS = 5


@dataclass
class SupervisedNet:
    """Mlp in_dim -> hidden... -> |actions| with a linear output layer."""
    mlp: Mlp
    action_space: ActionSpace
    history: List[EpochStats] = field(default_factory=list)

    @classmethod
    def init(
        cls, rng: np.random.Generator, in_dim: int, action_space: ActionSpace, hidden: Sequence[int]
    ) -> "SupervisedNet":
        dims = [in_dim, *hidden, len(action_space)]
        activations = ["tanh"] * len(hidden) + ["identity"]
        return cls(Mlp.build(rng, dims, activations), action_space)

    def logits(self, x: np.ndarray) -> np.ndarray:
        out, _ = self.mlp.forward(x)
        return out

    def predict_indices(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(np.atleast_2d(x)), axis=-1)


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean cross-entropy of a batch and its gradient with respect to the logits."""
    batch = logits.shape[0]
    rows = np.arange(batch)
    loss = -float(log_softmax(logits)[rows, labels].mean())
    d_logits = softmax_logits_to_dist(logits)
    d_logits[rows, labels] -= 1.0
    return loss, d_logits / batch


def supervised_predict(net: SupervisedNet, v: np.ndarray) -> Action:
    return net.action_space.action(int(net.predict_indices(v)[0]))


def supervised_fit(
    pairs: Sequence[LabeledVector], action_space: ActionSpace, cfg: SupervisedConfig = SupervisedConfig()
) -> SupervisedNet:
    """
    Train with minibatch Adam on cross-entropy.

    A validation_fraction share of the programs is held out and its accuracy
    is recorded after every epoch in net.history. Deterministic for a fixed
    cfg.seed.

    Raises:
        EmptyModelError: no training pairs
    """
    if not pairs:
        raise EmptyModelError(detail="Supervised training needs at least one labeled program")
    ordered = sorted(pairs, key=lambda pair: pair.program_id)
    x = np.stack([np.asarray(pair.vector, dtype=DTYPE) for pair in ordered])
    y = np.array([pair.label for pair in ordered], dtype=np.int64)

    indices = np.arange(len(ordered))
    heldout = np.array([], dtype=np.int64)
    if cfg.validation_fraction > 0 and len(ordered) >= _MIN_HELDOUT_PROGRAMS:
        indices, heldout = train_test_split(indices, test_size=cfg.validation_fraction, random_state=cfg.seed)

    rng = np.random.default_rng(cfg.seed)
    net = SupervisedNet.init(rng, x.shape[1], action_space, cfg.hidden)
    params = net.mlp.params()
    state = AdamState.for_params(params, lr=cfg.lr)

    for epoch in range(cfg.epochs):
        order = rng.permutation(indices)
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            logits, caches = net.mlp.forward(x[batch])
            loss, d_logits = cross_entropy(logits, y[batch])
            _, grads = net.mlp.backward(caches, d_logits)
            adam_step(params, grads, state)
            losses.append(loss * len(batch))

        stats = EpochStats(
            epoch=epoch + 1,
            loss=float(sum(losses) / len(indices)),
            train_accuracy=float(accuracy_score(y[indices], net.predict_indices(x[indices]))),
            heldout_accuracy=(
                float(accuracy_score(y[heldout], net.predict_indices(x[heldout]))) if len(heldout) else None
            ),
        )
        net.history.append(stats)
        logger.debug(
            "Supervised epoch %d: loss=%.4f train_acc=%.3f heldout_acc=%s",
            stats.epoch, stats.loss, stats.train_accuracy, stats.heldout_accuracy,
        )

    if net.history:
        last = net.history[-1]
        logger.info(
            "Supervised FCNN trained for %d epochs: train_acc=%.3f heldout_acc=%s",
            cfg.epochs, last.train_accuracy, last.heldout_accuracy,
        )
    return net


class SupervisedState(BaseModel):
    action_space: ActionSpaceConfig
    dims: List[int] = Field(..., min_length=2)
    params: Dict[str, EncodedArray]


def to_state(net: SupervisedNet) -> SupervisedState:
    dims = [net.mlp.in_dim, *(layer.out_dim for layer in net.mlp.layers)]
    return SupervisedState(
        action_space=net.action_space.to_config(), dims=dims, params=encode_params(net.mlp.params())
    )


def from_state(state: SupervisedState) -> SupervisedNet:
    params = decode_params(state.params)
    count = len(state.dims) - 1
    try:
        layers = [
            Dense(
                params[f"layers.{i}.weight"],
                params[f"layers.{i}.bias"],
                "identity" if i == count - 1 else "tanh",
            )
            for i in range(count)
        ]
    except KeyError as e:
        raise SchemaError(detail=f"Missing supervised parameter {e}")
    return SupervisedNet(Mlp(layers), ActionSpace.from_config(state.action_space))
