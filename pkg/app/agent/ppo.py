"""Clipped-surrogate PPO for one-step episodes, with optional backprop into the embedding."""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.agent.constants import ADVANTAGE_STD_FLOOR
from app.agent.policy import PolicyNet
from app.agent.views import PpoConfig, Transition, UpdateStats
from app.config import LOGGER_NAME
from app.embedding.network import EmbeddingNet
from app.errors import EmptyBatchError
from app.nn.core import AdamState, Params, adam_step, check_finite, log_softmax, softmax_logits_to_dist

logger = logging.getLogger(LOGGER_NAME)

EMBEDDING_PREFIX = "embedding."


def normalized_advantages(rewards: np.ndarray, values: np.ndarray) -> np.ndarray:
    advantages = rewards - values
    if len(advantages) < 2:
        return advantages
    centered = advantages - advantages.mean()
    std = centered.std()
    if std < ADVANTAGE_STD_FLOOR:
        return np.zeros_like(centered)
    return centered / std


def clipped_surrogate(ratio: np.ndarray, advantages: np.ndarray, clip_eps: float) -> np.ndarray:
    """Per-sample min(r A, clip(r, 1 - eps, 1 + eps) A)."""
    return np.minimum(ratio * advantages, np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantages)


def loss_and_grads(
    net: PolicyNet,
    batch: Sequence[Transition],
    advantages: np.ndarray,
    cfg: PpoConfig,
    embedder: Optional[EmbeddingNet] = None,
) -> Tuple[float, UpdateStats, Params]:
    """
    PPO loss over batch and its exact gradient.

    Each sample goes through the same single-vector forward pass used by act(),
    so the ratio of an unchanged network is exactly 1. When embedder is given
    and a transition carries its bag, the state is recomputed from the bag and
    gradients for the embedding appear under the "embedding." prefix.
    """
    size = len(batch)
    grads: Params = {name: np.zeros_like(value) for name, value in net.params().items()}
    if embedder is not None:
        for name, value in embedder.zero_grads().items():
            grads[EMBEDDING_PREFIX + name] = value

    surrogate = np.zeros(size)
    value_errors = np.zeros(size)
    entropies = np.zeros(size)
    ratios = np.zeros(size)

    for b, transition in enumerate(batch):
        embed_cache = None
        state = transition.state
        if embedder is not None and transition.bag is not None:
            state, embed_cache = embedder.forward(transition.bag)
        logits, value, cache = net.forward(state)
        probs = softmax_logits_to_dist(logits)
        log_probs = log_softmax(logits)
        action = transition.action.index

        ratio = float(np.exp(log_probs[action] - transition.logp_old))
        advantage = float(advantages[b])
        clipped = float(np.clip(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps))
        entropy = float(-(probs * log_probs).sum())
        ratios[b] = ratio
        surrogate[b] = min(ratio * advantage, clipped * advantage)
        value_errors[b] = value - transition.reward
        entropies[b] = entropy

        # the clipped branch is constant in the parameters
        d_logp = -ratio * advantage / size if ratio * advantage <= clipped * advantage else 0.0
        one_hot = np.zeros_like(probs)
        one_hot[action] = 1.0
        d_logits = d_logp * (one_hot - probs)
        d_logits += cfg.entropy_coef / size * probs * (log_probs + entropy)
        d_value = 2.0 * cfg.value_coef * value_errors[b] / size

        d_state, sample_grads = net.backward(cache, d_logits, d_value)
        for name, value_grad in sample_grads.items():
            grads[name] += value_grad
        if embed_cache is not None:
            embedder.backward(embed_cache, d_state).add_into(grads, prefix=EMBEDDING_PREFIX)

    policy_loss = float(-surrogate.mean())
    value_loss = float(np.mean(value_errors ** 2))
    entropy = float(entropies.mean())
    loss = policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * entropy
    stats = UpdateStats(
        policy_loss=policy_loss,
        value_loss=value_loss,
        entropy=entropy,
        clip_frac=float(np.mean(np.abs(ratios - 1.0) > cfg.clip_eps)),
        loss=loss,
        ratio_mean=float(ratios.mean()),
        ratio_max_dev=float(np.abs(ratios - 1.0).max()),
    )
    for name, grad in grads.items():
        check_finite(grad, f"gradient {name}")
    return loss, stats, grads


class PpoTrainer:
    """Owns the Adam state across updates; rollouts and updates must not overlap."""

    def __init__(self, net: PolicyNet, cfg: PpoConfig, embedder: Optional[EmbeddingNet] = None):
        self.net = net
        self.cfg = cfg
        self.embedder = embedder if cfg.joint_embedding else None
        self.rng = np.random.default_rng(cfg.seed)
        self.optimizer = AdamState.for_params(self.params(), lr=cfg.lr)
        self.updates = 0

    def params(self) -> Params:
        params = dict(self.net.params())
        if self.embedder is not None:
            for name, value in self.embedder.params().items():
                params[EMBEDDING_PREFIX + name] = value
        return params

    def update(self, batch: List[Transition]) -> UpdateStats:
        if not batch:
            raise EmptyBatchError()
        rewards = np.array([t.reward for t in batch], dtype=np.float64)
        values = np.array([t.value_old for t in batch], dtype=np.float64)
        advantages = normalized_advantages(rewards, values)

        params = self.params()
        first: Optional[UpdateStats] = None
        last: Optional[UpdateStats] = None
        for _ in range(self.cfg.epochs_per_batch):
            for indices in self._minibatches(len(batch)):
                _, stats, grads = loss_and_grads(
                    self.net,
                    [batch[i] for i in indices],
                    advantages[indices],
                    self.cfg,
                    self.embedder,
                )
                adam_step(params, grads, self.optimizer)
                if first is None:
                    first = stats
                last = stats
        self.updates += 1

        # loss terms from the last pass, ratio statistics from the first one
        result = last.model_copy(update={
            "ratio_mean": first.ratio_mean,
            "ratio_max_dev": first.ratio_max_dev,
            "first_clip_frac": first.clip_frac,
        })
        logger.debug(
            "PPO update %d: policy_loss=%.5f value_loss=%.5f entropy=%.4f clip_frac=%.3f",
            self.updates, result.policy_loss, result.value_loss, result.entropy, result.clip_frac,
        )
        return result

    def _minibatches(self, size: int) -> List[np.ndarray]:
        if self.cfg.minibatch_size is None or self.cfg.minibatch_size >= size:
            return [np.arange(size)]
        order = self.rng.permutation(size)
        step = self.cfg.minibatch_size
        return [order[i:i + step] for i in range(0, size, step)]


def ppo_update(trainer: PpoTrainer, batch: List[Transition]) -> Dict[str, float]:
    """Run epochs_per_batch Adam passes over batch; returns the training statistics."""
    return trainer.update(batch).model_dump()
