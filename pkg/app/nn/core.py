"""Dense layers, MLPs, softmax and Adam in float64 numpy with hand-written backprop."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.errors import DimMismatchError, NonFiniteError, UnknownActivationError
from app.nn.constants import (
    ACTIVATIONS,
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    DEFAULT_LR,
    DTYPE,
)

# A 2-D float64 array, rows x cols, row-major
Tensor2 = np.ndarray
Params = Dict[str, np.ndarray]


def check_finite(array: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(array)):
        raise NonFiniteError(detail=f"Non-finite value in {what}", context={"what": what})
    return array


def glorot_uniform(rng: np.random.Generator, rows: int, cols: int) -> Tensor2:
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols)).astype(DTYPE)


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    return np.tanh(z) if activation == "tanh" else z


@dataclass
class Dense:
    weight: Tensor2  # out_dim x in_dim
    bias: np.ndarray
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise UnknownActivationError(detail=f"Unknown activation {self.activation!r}")
        self.weight = np.asarray(self.weight, dtype=DTYPE)
        self.bias = np.asarray(self.bias, dtype=DTYPE)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise DimMismatchError((self.weight.shape[0],), self.bias.shape, "bias")

    @classmethod
    def init(
        cls, rng: np.random.Generator, in_dim: int, out_dim: int, activation: str = "tanh", scale: float = 1.0
    ) -> "Dense":
        return cls(glorot_uniform(rng, out_dim, in_dim) * scale, np.zeros(out_dim, dtype=DTYPE), activation)

    @classmethod
    def zeros(cls, in_dim: int, out_dim: int, activation: str = "tanh") -> "Dense":
        return cls(np.zeros((out_dim, in_dim), dtype=DTYPE), np.zeros(out_dim, dtype=DTYPE), activation)

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]

    def params(self) -> Params:
        return {"weight": self.weight, "bias": self.bias}

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
        """x is (in_dim,) or (batch, in_dim); the cache keeps the input and the activated output."""
        if x.shape[-1] != self.in_dim:
            raise DimMismatchError(self.in_dim, x.shape[-1], "dense input")
        y = _activate(x @ self.weight.T + self.bias, self.activation)
        return y, (x, y)

    def backward(self, cache: Tuple[np.ndarray, np.ndarray], dy: np.ndarray) -> Tuple[np.ndarray, Params]:
        x, y = cache
        if dy.shape != y.shape:
            raise DimMismatchError(y.shape, dy.shape, "dense upstream gradient")
        dz = dy * (1.0 - y * y) if self.activation == "tanh" else dy
        if dz.ndim == 1:
            d_weight = np.outer(dz, x)
            d_bias = dz.copy()
        else:
            d_weight = dz.T @ x
            d_bias = dz.sum(axis=0)
        dx = dz @ self.weight
        return dx, {"weight": d_weight, "bias": d_bias}


@dataclass
class Mlp:
    layers: List[Dense] = field(default_factory=list)

    def __post_init__(self):
        for previous, layer in zip(self.layers, self.layers[1:]):
            if previous.out_dim != layer.in_dim:
                raise DimMismatchError(previous.out_dim, layer.in_dim, "layer chain")

    @classmethod
    def build(
        cls,
        rng: np.random.Generator,
        dims: Sequence[int],
        activations: Optional[Sequence[str]] = None,
    ) -> "Mlp":
        """Glorot-initialized MLP through dims, e.g. (340, 64, 64) for the default trunk."""
        activations = activations or ["tanh"] * (len(dims) - 1)
        return cls([Dense.init(rng, a, b, act) for a, b, act in zip(dims, dims[1:], activations)])

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def params(self) -> Params:
        named: Params = {}
        for i, layer in enumerate(self.layers):
            for name, value in layer.params().items():
                named[f"layers.{i}.{name}"] = value
        return named

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, List]:
        x = np.asarray(x, dtype=DTYPE)
        if x.shape[-1] != self.in_dim:
            raise DimMismatchError(self.in_dim, x.shape[-1], "mlp input")
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x)
            caches.append(cache)
        return check_finite(x, "mlp output"), caches

    def backward(self, caches: List, dy: np.ndarray) -> Tuple[np.ndarray, Params]:
        dy = np.asarray(dy, dtype=DTYPE)
        if dy.shape[-1] != self.out_dim:
            raise DimMismatchError(self.out_dim, dy.shape[-1], "mlp upstream gradient")
        grads: Params = {}
        for i in reversed(range(len(self.layers))):
            dy, layer_grads = self.layers[i].backward(caches[i], dy)
            for name, value in layer_grads.items():
                grads[f"layers.{i}.{name}"] = value
        return check_finite(dy, "mlp input gradient"), grads


def forward(mlp: Mlp, x: np.ndarray) -> Tuple[np.ndarray, List]:
    return mlp.forward(x)


def backward(mlp: Mlp, cache: List, dy: np.ndarray) -> Tuple[np.ndarray, Params]:
    return mlp.backward(cache, dy)


def softmax_logits_to_dist(logits: np.ndarray) -> np.ndarray:
    """Softmax along the last axis with max subtraction."""
    logits = np.asarray(logits, dtype=DTYPE)
    check_finite(logits, "logits")
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=DTYPE)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


@dataclass
class AdamState:
    m: Params
    v: Params
    t: int = 0
    lr: float = DEFAULT_LR
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    @classmethod
    def for_params(cls, params: Params, lr: float = DEFAULT_LR, **kwargs) -> "AdamState":
        return cls(
            m={name: np.zeros_like(value) for name, value in params.items()},
            v={name: np.zeros_like(value) for name, value in params.items()},
            lr=lr,
            **kwargs,
        )


def adam_step(params: Params, grads: Params, state: AdamState) -> Tuple[Params, AdamState]:
    """
    One bias-corrected Adam step, updating params in place.

    Parameters without an entry in grads are left untouched.
    """
    for name, grad in grads.items():
        if name not in params or params[name].shape != grad.shape:
            expected = params[name].shape if name in params else None
            raise DimMismatchError(expected, grad.shape, f"gradient {name}")
        if state.m[name].shape != grad.shape:
            raise DimMismatchError(state.m[name].shape, grad.shape, f"adam moment {name}")

    state.t += 1
    correction1 = 1.0 - state.beta1 ** state.t
    correction2 = 1.0 - state.beta2 ** state.t
    for name, grad in grads.items():
        check_finite(grad, f"gradient {name}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        params[name] -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params, state
