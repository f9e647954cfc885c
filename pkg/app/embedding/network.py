"""Attention-pooled path-context encoder with exact gradients."""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from app.embedding.views import CodeVector, EmbeddingConfig, PathContextBag
from app.embedding.vocab import TokenVocab
from app.errors import DimMismatchError
from app.nn.constants import DTYPE
from app.nn.core import Dense, Params, check_finite, softmax_logits_to_dist

PARAM_NAMES = ("token_table", "path_table", "combine.weight", "combine.bias", "attention")


@dataclass
class EmbedCache:
    start_ids: np.ndarray
    path_ids: np.ndarray
    end_ids: np.ndarray
    inputs: np.ndarray  # contexts x (2*d_tok + d_path)
    hidden: np.ndarray  # contexts x dim, tanh outputs
    weights: np.ndarray  # attention distribution over contexts


@dataclass
class EmbeddingGrads:
    """Gradients of EmbeddingNet; table gradients are kept only for the rows a bag touched."""
    token_rows: np.ndarray
    token_grad: np.ndarray
    path_rows: np.ndarray
    path_grad: np.ndarray
    combine_weight: np.ndarray
    combine_bias: np.ndarray
    attention: np.ndarray

    def add_into(self, dense: Params, prefix: str = "") -> Params:
        """Accumulate into dense gradient buffers keyed like EmbeddingNet.params()."""
        np.add.at(dense[prefix + "token_table"], self.token_rows, self.token_grad)
        np.add.at(dense[prefix + "path_table"], self.path_rows, self.path_grad)
        dense[prefix + "combine.weight"] += self.combine_weight
        dense[prefix + "combine.bias"] += self.combine_bias
        dense[prefix + "attention"] += self.attention
        return dense


class EmbeddingNet:
    def __init__(
        self,
        config: EmbeddingConfig,
        vocab: TokenVocab,
        params: Optional[Dict[str, np.ndarray]] = None,
    ):
        """Seeded uniform(-init_scale, init_scale) initialization unless params are given."""
        self.config = config
        self.vocab = vocab
        in_dim = 2 * config.d_tok + config.d_path
        if params is None:
            rng = np.random.default_rng(config.seed)
            scale = config.init_scale
            params = {
                "token_table": rng.uniform(-scale, scale, size=(len(vocab), config.d_tok)),
                "path_table": rng.uniform(-scale, scale, size=(config.path_buckets, config.d_path)),
                "combine.weight": rng.uniform(-scale, scale, size=(config.dim, in_dim)),
                "combine.bias": np.zeros(config.dim),
                "attention": rng.uniform(-scale, scale, size=config.dim),
            }
        expected = {
            "token_table": (len(vocab), config.d_tok),
            "path_table": (config.path_buckets, config.d_path),
            "combine.weight": (config.dim, in_dim),
            "combine.bias": (config.dim,),
            "attention": (config.dim,),
        }
        for name, shape in expected.items():
            if name not in params or tuple(np.shape(params[name])) != shape:
                got = np.shape(params[name]) if name in params else None
                raise DimMismatchError(shape, got, name)

        self.token_table = np.asarray(params["token_table"], dtype=DTYPE)
        self.path_table = np.asarray(params["path_table"], dtype=DTYPE)
        self.combine = Dense(params["combine.weight"], params["combine.bias"], "tanh")
        self.attention = np.asarray(params["attention"], dtype=DTYPE)

    @property
    def dim(self) -> int:
        return self.config.dim

    def params(self) -> Params:
        return {
            "token_table": self.token_table,
            "path_table": self.path_table,
            "combine.weight": self.combine.weight,
            "combine.bias": self.combine.bias,
            "attention": self.attention,
        }

    def zero_grads(self) -> Params:
        return {name: np.zeros_like(value) for name, value in self.params().items()}

    def ids(self, bag: PathContextBag) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        starts = np.array(self.vocab.lookup_many(c.start_token for c in bag.contexts), dtype=np.int64)
        paths = np.array([c.path_id % self.config.path_buckets for c in bag.contexts], dtype=np.int64)
        ends = np.array(self.vocab.lookup_many(c.end_token for c in bag.contexts), dtype=np.int64)
        return starts, paths, ends

    def forward(self, bag: PathContextBag) -> Tuple[CodeVector, Optional[EmbedCache]]:
        if not bag.contexts:
            return np.zeros(self.dim, dtype=DTYPE), None
        starts, paths, ends = self.ids(bag)
        inputs = np.concatenate(
            [self.token_table[starts], self.path_table[paths], self.token_table[ends]], axis=1
        )
        hidden, _ = self.combine.forward(inputs)
        weights = softmax_logits_to_dist(hidden @ self.attention)
        vector = weights @ hidden
        return check_finite(vector, "code vector"), EmbedCache(starts, paths, ends, inputs, hidden, weights)

    def backward(self, cache: Optional[EmbedCache], upstream: np.ndarray) -> EmbeddingGrads:
        upstream = np.asarray(upstream, dtype=DTYPE)
        if upstream.shape != (self.dim,):
            raise DimMismatchError((self.dim,), upstream.shape, "code vector gradient")
        if cache is None:
            return EmbeddingGrads(
                token_rows=np.zeros(0, dtype=np.int64),
                token_grad=np.zeros((0, self.config.d_tok)),
                path_rows=np.zeros(0, dtype=np.int64),
                path_grad=np.zeros((0, self.config.d_path)),
                combine_weight=np.zeros_like(self.combine.weight),
                combine_bias=np.zeros_like(self.combine.bias),
                attention=np.zeros_like(self.attention),
            )

        hidden, weights = cache.hidden, cache.weights
        # v = sum_i w_i h_i with w = softmax(H a)
        d_hidden = np.outer(weights, upstream)
        d_weights = hidden @ upstream
        d_scores = weights * (d_weights - weights @ d_weights)
        d_attention = hidden.T @ d_scores
        d_hidden += np.outer(d_scores, self.attention)

        d_inputs, combine_grads = self.combine.backward((cache.inputs, hidden), d_hidden)
        d_tok, d_path = self.config.d_tok, self.config.d_path
        d_start = d_inputs[:, :d_tok]
        d_path_rows = d_inputs[:, d_tok:d_tok + d_path]
        d_end = d_inputs[:, d_tok + d_path:]

        token_ids = np.concatenate([cache.start_ids, cache.end_ids])
        token_rows, token_inverse = np.unique(token_ids, return_inverse=True)
        token_grad = np.zeros((len(token_rows), d_tok), dtype=DTYPE)
        np.add.at(token_grad, token_inverse, np.concatenate([d_start, d_end]))

        path_rows, path_inverse = np.unique(cache.path_ids, return_inverse=True)
        path_grad = np.zeros((len(path_rows), d_path), dtype=DTYPE)
        np.add.at(path_grad, path_inverse, d_path_rows)

        return EmbeddingGrads(
            token_rows=token_rows,
            token_grad=token_grad,
            path_rows=path_rows,
            path_grad=path_grad,
            combine_weight=combine_grads["weight"],
            combine_bias=combine_grads["bias"],
            attention=d_attention,
        )


def embed(bag: PathContextBag, net: EmbeddingNet) -> CodeVector:
    vector, _ = net.forward(bag)
    return vector


def embed_backward(bag: PathContextBag, net: EmbeddingNet, upstream_grad: np.ndarray) -> EmbeddingGrads:
    """Recomputes the forward pass for bag and backpropagates upstream_grad."""
    _, cache = net.forward(bag)
    return net.backward(cache, upstream_grad)
