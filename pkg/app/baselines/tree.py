"""CART classification tree with Gini impurity over axis-aligned thresholds."""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from app.agent.actions import ActionSpace
from app.agent.views import Action, ActionSpaceConfig
from app.baselines.constants import DEFAULT_TREE_MAX_DEPTH, DEFAULT_TREE_MIN_LEAF
from app.baselines.views import LabeledVector
from app.errors import DimMismatchError, EmptyModelError
from app.nn.constants import DTYPE

_TOLERANCE = 1e-12


@dataclass
class TreeNode:
    label: int
    n_samples: int
    impurity: float
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass
class TreeModel:
    root: TreeNode
    action_space: ActionSpace
    n_features: int

    def depth(self) -> int:
        return self.root.depth()


def gini(counts: np.ndarray) -> np.ndarray:
    """Gini impurity of class-count vectors along the last axis; 0 for empty nodes."""
    counts = np.asarray(counts, dtype=DTYPE)
    total = counts.sum(axis=-1, keepdims=True)
    safe = np.where(total > 0, total, 1.0)
    impurity = 1.0 - ((counts / safe) ** 2).sum(axis=-1)
    return np.where(total[..., 0] > 0, impurity, 0.0)


def _midpoint(low: float, high: float) -> float:
    middle = low + (high - low) / 2.0
    return middle if middle < high else low


def best_split(
    x: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int
) -> Optional[Tuple[int, float, float]]:
    """
    (feature, threshold, weighted child impurity) of the best split, or None.

    Ties go to the lowest feature index, then the lowest threshold. A split is
    returned only when it lowers the impurity.
    """
    n, d = x.shape
    onehot = np.eye(n_classes, dtype=DTYPE)[y]
    total = onehot.sum(axis=0)
    parent = float(gini(total))
    n_left = np.arange(1, n)
    n_right = n - n_left

    best: Optional[Tuple[int, float, float]] = None
    for feature in range(d):
        order = np.argsort(x[:, feature], kind="stable")
        values = x[order, feature]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = total - left
        valid = (values[1:] > values[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
        if not valid.any():
            continue
        score = (n_left * gini(left) + n_right * gini(right)) / n
        score = np.where(valid, score, np.inf)
        position = int(np.flatnonzero(score <= score.min() + _TOLERANCE)[0])
        if best is None or score[position] < best[2] - _TOLERANCE:
            best = (feature, _midpoint(values[position], values[position + 1]), float(score[position]))

    if best is None or best[2] >= parent - _TOLERANCE:
        return None
    return best


def _grow(x: np.ndarray, y: np.ndarray, n_classes: int, depth: int, max_depth: int, min_leaf: int) -> TreeNode:
    counts = np.bincount(y, minlength=n_classes)
    node = TreeNode(label=int(np.argmax(counts)), n_samples=len(y), impurity=float(gini(counts)))
    if depth >= max_depth or node.impurity <= _TOLERANCE or len(y) < 2 * min_leaf:
        return node
    split = best_split(x, y, n_classes, min_leaf)
    if split is None:
        return node
    feature, threshold, _ = split
    goes_left = x[:, feature] <= threshold
    node.feature, node.threshold = feature, threshold
    node.left = _grow(x[goes_left], y[goes_left], n_classes, depth + 1, max_depth, min_leaf)
    node.right = _grow(x[~goes_left], y[~goes_left], n_classes, depth + 1, max_depth, min_leaf)
    return node


def tree_fit(
    pairs: Sequence[LabeledVector],
    action_space: ActionSpace,
    max_depth: int = DEFAULT_TREE_MAX_DEPTH,
    min_leaf: int = DEFAULT_TREE_MIN_LEAF,
) -> TreeModel:
    if not pairs:
        raise EmptyModelError(detail="A tree needs at least one training vector")
    ordered = sorted(pairs, key=lambda pair: pair.program_id)
    x = np.stack([np.asarray(pair.vector, dtype=DTYPE) for pair in ordered])
    y = np.array([pair.label for pair in ordered], dtype=np.int64)
    root = _grow(x, y, len(action_space), 0, max_depth, min_leaf)
    return TreeModel(root=root, action_space=action_space, n_features=x.shape[1])


def tree_predict(model: TreeModel, v: np.ndarray) -> Action:
    v = np.asarray(v, dtype=DTYPE)
    if v.shape != (model.n_features,):
        raise DimMismatchError((model.n_features,), v.shape, "tree query")
    node = model.root
    while not node.is_leaf:
        node = node.left if v[node.feature] <= node.threshold else node.right
    return model.action_space.action(node.label)


class TreeNodeState(BaseModel):
    label: int
    n_samples: int
    impurity: float
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNodeState"] = None
    right: Optional["TreeNodeState"] = None


class TreeState(BaseModel):
    action_space: ActionSpaceConfig
    n_features: int
    root: TreeNodeState


def _node_state(node: TreeNode) -> TreeNodeState:
    return TreeNodeState(
        label=node.label,
        n_samples=node.n_samples,
        impurity=node.impurity,
        feature=node.feature,
        threshold=node.threshold,
        left=_node_state(node.left) if node.left else None,
        right=_node_state(node.right) if node.right else None,
    )


def _node_from_state(state: TreeNodeState) -> TreeNode:
    return TreeNode(
        label=state.label,
        n_samples=state.n_samples,
        impurity=state.impurity,
        feature=state.feature,
        threshold=state.threshold,
        left=_node_from_state(state.left) if state.left else None,
        right=_node_from_state(state.right) if state.right else None,
    )


def to_state(model: TreeModel) -> TreeState:
    return TreeState(
        action_space=model.action_space.to_config(), n_features=model.n_features, root=_node_state(model.root)
    )


def from_state(state: TreeState) -> TreeModel:
    return TreeModel(
        root=_node_from_state(state.root),
        action_space=ActionSpace.from_config(state.action_space),
        n_features=state.n_features,
    )
