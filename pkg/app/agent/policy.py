from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.agent.actions import ActionSpace
from app.agent.constants import DEFAULT_HIDDEN, MODE_GREEDY, MODE_SAMPLE, POLICY_HEAD_SCALE
from app.agent.views import Action
from app.errors import AgentError, DimMismatchError
from app.nn.core import Dense, Mlp, Params, log_softmax, softmax_logits_to_dist


@dataclass
class PolicyCache:
    trunk: List
    policy: Tuple[np.ndarray, np.ndarray]
    value: Tuple[np.ndarray, np.ndarray]


class PolicyNet:
    """Shared tanh trunk feeding a categorical policy head and a scalar value head."""

    def __init__(self, trunk: Mlp, policy_head: Dense, value_head: Dense, action_space: ActionSpace):
        if policy_head.out_dim != len(action_space):
            raise DimMismatchError(len(action_space), policy_head.out_dim, "policy head")
        if policy_head.in_dim != trunk.out_dim or value_head.in_dim != trunk.out_dim:
            raise DimMismatchError(trunk.out_dim, (policy_head.in_dim, value_head.in_dim), "head input")
        if value_head.out_dim != 1:
            raise DimMismatchError(1, value_head.out_dim, "value head")
        self.trunk = trunk
        self.policy_head = policy_head
        self.value_head = value_head
        self.action_space = action_space

    @classmethod
    def init(
        cls,
        rng: np.random.Generator,
        in_dim: int,
        action_space: ActionSpace,
        hidden: Sequence[int] = DEFAULT_HIDDEN,
    ) -> "PolicyNet":
        trunk = Mlp.build(rng, [in_dim, *hidden])
        policy_head = Dense.init(rng, trunk.out_dim, len(action_space), "identity", scale=POLICY_HEAD_SCALE)
        value_head = Dense.init(rng, trunk.out_dim, 1, "identity")
        return cls(trunk, policy_head, value_head, action_space)

    @classmethod
    def zeros(cls, in_dim: int, action_space: ActionSpace, hidden: Sequence[int] = DEFAULT_HIDDEN) -> "PolicyNet":
        dims = [in_dim, *hidden]
        trunk = Mlp([Dense.zeros(a, b) for a, b in zip(dims, dims[1:])])
        return cls(
            trunk,
            Dense.zeros(trunk.out_dim, len(action_space), "identity"),
            Dense.zeros(trunk.out_dim, 1, "identity"),
            action_space,
        )

    @property
    def in_dim(self) -> int:
        return self.trunk.in_dim

    @property
    def hidden(self) -> List[int]:
        return [layer.out_dim for layer in self.trunk.layers]

    def params(self) -> Params:
        named = {f"trunk.{name}": value for name, value in self.trunk.params().items()}
        named.update({f"policy_head.{name}": value for name, value in self.policy_head.params().items()})
        named.update({f"value_head.{name}": value for name, value in self.value_head.params().items()})
        return named

    def forward(self, state: np.ndarray) -> Tuple[np.ndarray, float, PolicyCache]:
        """Logits and value for a single state vector."""
        state = np.asarray(state, dtype=np.float64)
        if state.shape != (self.in_dim,):
            raise DimMismatchError((self.in_dim,), state.shape, "state")
        features, trunk_cache = self.trunk.forward(state)
        logits, policy_cache = self.policy_head.forward(features)
        value, value_cache = self.value_head.forward(features)
        return logits, float(value[0]), PolicyCache(trunk_cache, policy_cache, value_cache)

    def backward(self, cache: PolicyCache, d_logits: np.ndarray, d_value: float) -> Tuple[np.ndarray, Params]:
        """Gradient with respect to the state plus parameter gradients."""
        d_features, policy_grads = self.policy_head.backward(cache.policy, d_logits)
        d_from_value, value_grads = self.value_head.backward(cache.value, np.array([d_value]))
        d_state, trunk_grads = self.trunk.backward(cache.trunk, d_features + d_from_value)
        grads = {f"trunk.{name}": value for name, value in trunk_grads.items()}
        grads.update({f"policy_head.{name}": value for name, value in policy_grads.items()})
        grads.update({f"value_head.{name}": value for name, value in value_grads.items()})
        return d_state, grads

    def distribution(self, state: np.ndarray) -> np.ndarray:
        logits, _, _ = self.forward(state)
        return softmax_logits_to_dist(logits)


def act(
    net: PolicyNet,
    state: np.ndarray,
    mode: str = MODE_SAMPLE,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[Action, float, float]:
    """
    Select an action for one code vector.

    Sampling draws from softmax(logits); greedy mode takes the argmax, lowest index on ties.

    Returns:
        (action, log-probability of that action, value estimate)
    """
    logits, value, _ = net.forward(state)
    if mode == MODE_GREEDY:
        index = int(np.argmax(logits))
    elif mode == MODE_SAMPLE:
        if rng is None:
            raise AgentError(detail="Sampling requires a random generator")
        index = int(rng.choice(len(logits), p=softmax_logits_to_dist(logits)))
    else:
        raise AgentError(detail=f"Unknown action selection mode {mode!r}")
    logp = float(log_softmax(logits)[index])
    return net.action_space.action(index), logp, value
