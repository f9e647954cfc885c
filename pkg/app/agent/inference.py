"""An embedding network and a policy bundled for action selection on loop nests."""

import logging
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np

from app.agent import checkpoint
from app.agent.actions import ActionSpace
from app.agent.constants import MODE_GREEDY, MODE_SAMPLE
from app.agent.policy import PolicyNet, act
from app.agent.views import Action, ActionSpaceConfig, PpoConfig
from app.config import LOGGER_NAME
from app.embedding.contexts import bag_for_snippet
from app.embedding.network import EmbeddingNet
from app.embedding.views import EmbeddingConfig, PathContextBag
from app.embedding.vocab import TokenVocab
from app.errors import SchemaError
from app.loop_ir.views import LoopNest
from app.memo import BoundedMemo

logger = logging.getLogger(LOGGER_NAME)


class LoopAgent:
    """Embeds a nest's snippet and maps the code vector to an action."""

    def __init__(self, net: PolicyNet, embedder: EmbeddingNet):
        self.net = net
        self.embedder = embedder
        self._bags: BoundedMemo[Tuple[str, str], PathContextBag] = BoundedMemo()

    @property
    def action_space(self) -> ActionSpace:
        return self.net.action_space

    def bag(self, nest: LoopNest) -> PathContextBag:
        return self._bags.get_or_compute(
            (nest.source_digest, nest.nest_id),
            lambda: bag_for_snippet(nest.embed_snippet, self.embedder.config),
        )

    def vector(self, nest: LoopNest) -> np.ndarray:
        vector, _ = self.embedder.forward(self.bag(nest))
        return vector

    def greedy(self, nest: LoopNest) -> Action:
        action, _, _ = act(self.net, self.vector(nest), MODE_GREEDY)
        return action

    def sample(self, nest: LoopNest, rng: np.random.Generator) -> Tuple[Action, float, float]:
        return act(self.net, self.vector(nest), MODE_SAMPLE, rng)

    def candidates(self, nest: LoopNest, count: int, rng: np.random.Generator) -> List[Action]:
        """The greedy action followed by up to count - 1 distinct sampled ones."""
        chosen = [self.greedy(nest)]
        distribution = self.net.distribution(self.vector(nest))
        for _ in range(count - 1):
            action = self.action_space.action(int(rng.choice(len(distribution), p=distribution)))
            if action not in chosen:
                chosen.append(action)
        return chosen

    def save(self, path: Union[str, Path], config: Optional[dict] = None) -> Path:
        return checkpoint.save(path, self.net, self.embedder, config)


def build_agent(
    nests: Iterable[LoopNest],
    embedding: EmbeddingConfig,
    action_space: ActionSpaceConfig,
    ppo: PpoConfig,
) -> LoopAgent:
    """Fresh agent whose token vocabulary covers the given nests."""
    bags = [bag_for_snippet(nest.embed_snippet, embedding) for nest in nests]
    vocab = TokenVocab.build(bags)
    embedder = EmbeddingNet(embedding, vocab)
    rng = np.random.default_rng(ppo.seed)
    net = PolicyNet.init(rng, embedder.dim, ActionSpace.from_config(action_space), ppo.hidden)
    logger.info("Built agent: %d tokens, %d actions, code dim %d", len(vocab), len(net.action_space), embedder.dim)
    return LoopAgent(net, embedder)


def load_agent(path: Union[str, Path]) -> LoopAgent:
    """
    Raises:
        SchemaError: unreadable checkpoint or one without an embedding
    """
    net, embedder = checkpoint.load(path)
    if embedder is None:
        raise SchemaError(detail=f"Checkpoint {path} has no embedding network")
    return LoopAgent(net, embedder)
