from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List

from app.embedding.constants import UNK_ID, UNK_TOKEN
from app.embedding.views import PathContextBag


@dataclass
class TokenVocab:
    """Terminal-token vocabulary; id 0 is reserved for unknown tokens."""
    tokens: List[str] = field(default_factory=lambda: [UNK_TOKEN])

    def __post_init__(self):
        if not self.tokens or self.tokens[0] != UNK_TOKEN:
            self.tokens = [UNK_TOKEN] + [t for t in self.tokens if t != UNK_TOKEN]
        self._index: Dict[str, int] = {token: i for i, token in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def lookup(self, token: str) -> int:
        return self._index.get(token, UNK_ID)

    def lookup_many(self, tokens: Iterable[str]) -> List[int]:
        return [self.lookup(token) for token in tokens]

    @classmethod
    def build(cls, bags: Iterable[PathContextBag], min_count: int = 1) -> "TokenVocab":
        """Most frequent tokens first, ties by token text."""
        counts = Counter(token for bag in bags for token in bag.tokens())
        ranked = sorted(
            (token for token, count in counts.items() if count >= min_count and token != UNK_TOKEN),
            key=lambda token: (-counts[token], token),
        )
        return cls([UNK_TOKEN] + ranked)
