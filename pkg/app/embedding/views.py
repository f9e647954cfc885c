from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from app.embedding.constants import (
    DEFAULT_CODE_DIM,
    DEFAULT_INIT_SCALE,
    DEFAULT_MAX_CONTEXTS,
    DEFAULT_MAX_PATH_LEN,
    DEFAULT_MAX_WIDTH,
    DEFAULT_PATH_BUCKETS,
    DEFAULT_PATH_DIM,
    DEFAULT_TOKEN_DIM,
    DOWN_ARROW,
    UP_ARROW,
)

# Fixed-length, finite float64 vector produced by EmbeddingNet
CodeVector = np.ndarray


class EmbeddingConfig(BaseModel):
    d_tok: int = Field(DEFAULT_TOKEN_DIM, ge=1, description="Token embedding width")
    d_path: int = Field(DEFAULT_PATH_DIM, ge=1, description="Path embedding width")
    dim: int = Field(DEFAULT_CODE_DIM, ge=1, description="Code vector width")
    max_path_len: int = Field(DEFAULT_MAX_PATH_LEN, ge=2, description="Maximum edges between two terminals")
    max_width: int = Field(DEFAULT_MAX_WIDTH, ge=1, description="Maximum sibling distance at the common ancestor")
    max_contexts: int = Field(DEFAULT_MAX_CONTEXTS, ge=1, description="Contexts kept per snippet")
    path_buckets: int = Field(DEFAULT_PATH_BUCKETS, ge=1, description="Size of the hashed path vocabulary")
    init_scale: float = Field(DEFAULT_INIT_SCALE, gt=0)
    canonicalize: bool = Field(True, description="Rename identifiers to var0, var1, ... before extraction")
    seed: int = 0


@dataclass(frozen=True)
class PathContext:
    start_token: str
    # (node label, "up" | "down") from the start terminal's parent to the end terminal's parent
    path: Tuple[Tuple[str, str], ...]
    end_token: str
    path_id: int

    def render(self) -> str:
        return render_path(self.path)

    def key(self) -> Tuple[str, Tuple[Tuple[str, str], ...], str]:
        return self.start_token, self.path, self.end_token


def render_path(path: Tuple[Tuple[str, str], ...]) -> str:
    """Index↑Assign↓Index style rendering; the common ancestor is the last "up" step."""
    parts: List[str] = []
    for i, (label, direction) in enumerate(path):
        if i > 0:
            parts.append(UP_ARROW if direction == "up" else DOWN_ARROW)
        parts.append(label)
    return "".join(parts)


@dataclass
class PathContextBag:
    contexts: List[PathContext] = field(default_factory=list)
    snippet_hash: str = ""

    def __len__(self) -> int:
        return len(self.contexts)

    def tokens(self) -> List[str]:
        return [t for c in self.contexts for t in (c.start_token, c.end_token)]
