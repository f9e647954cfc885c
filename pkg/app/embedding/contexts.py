"""Path-context extraction: (terminal, AST path, terminal) triples of a loop snippet."""

import hashlib
import logging
from typing import List, Tuple

import numpy as np

from app.config import LOGGER_NAME
from app.embedding.constants import DOWN, PATH_HASH_BYTES, UP
from app.embedding.views import EmbeddingConfig, PathContext, PathContextBag, render_path
from app.errors import EmptySnippetError
from app.loop_ir.normalize import normalize_identifiers
from app.loop_ir.parser import parse_statement
from app.loop_ir.views import AstNode

logger = logging.getLogger(LOGGER_NAME)

# Each ancestor entry: (node, index of the next node on the way down among its children)
Chain = List[Tuple[AstNode, int]]


def path_id(path: Tuple[Tuple[str, str], ...], buckets: int) -> int:
    """Stable 64-bit blake2b hash of the rendered path, folded into the bucket range."""
    digest = hashlib.blake2b(render_path(path).encode("utf-8"), digest_size=PATH_HASH_BYTES)
    return int.from_bytes(digest.digest(), "little") % buckets


def snippet_digest(snippet: str) -> str:
    return hashlib.sha256(snippet.encode("utf-8")).hexdigest()


def _terminal_chains(root: AstNode) -> List[Tuple[AstNode, Chain]]:
    """Terminals in DFS order, each with its ancestor chain from the root."""
    found: List[Tuple[AstNode, Chain]] = []

    def visit(node: AstNode, chain: Chain) -> None:
        if node.is_terminal:
            found.append((node, chain))
            return
        for i, child in enumerate(node.children):
            visit(child, chain + [(node, i)])

    visit(root, [])
    return found


def _pair_path(first: Chain, second: Chain, cfg: EmbeddingConfig):
    common = 0
    limit = min(len(first), len(second))
    while common < limit and first[common][0] is second[common][0] and first[common][1] == second[common][1]:
        common += 1
    # first[common] is the lowest common ancestor, reached through different children
    lca, left_child = first[common]
    right_child = second[common][1]
    if abs(right_child - left_child) > cfg.max_width:
        return None
    ups = [node for node, _ in reversed(first[common + 1:])]
    downs = [node for node, _ in second[common + 1:]]
    if len(ups) + len(downs) + 2 > cfg.max_path_len:
        return None
    return (
        tuple((node.label(), UP) for node in ups)
        + ((lca.label(), UP),)
        + tuple((node.label(), DOWN) for node in downs)
    )


def extract_contexts(snippet: str, cfg: EmbeddingConfig) -> PathContextBag:
    """
    Enumerate path contexts between every ordered pair of terminals.

    Pairs are visited in DFS order of their terminals; duplicates are dropped and
    bags larger than max_contexts are subsampled with a generator seeded by
    (cfg.seed, snippet hash), keeping the surviving contexts in enumeration order.

    Args:
        snippet: loop text, normally already canonicalized
        cfg: extraction limits

    Returns:
        PathContextBag
    """
    tree = parse_statement(snippet)
    digest = snippet_digest(snippet)
    terminals = _terminal_chains(tree)
    if not terminals:
        raise EmptySnippetError(context={"snippet": snippet[:200]})

    contexts: List[PathContext] = []
    seen = set()
    for i in range(len(terminals)):
        start, start_chain = terminals[i]
        for j in range(i + 1, len(terminals)):
            end, end_chain = terminals[j]
            path = _pair_path(start_chain, end_chain, cfg)
            if path is None:
                continue
            key = (start.token_text, path, end.token_text)
            if key in seen:
                continue
            seen.add(key)
            contexts.append(PathContext(start.token_text, path, end.token_text, path_id(path, cfg.path_buckets)))

    if len(contexts) > cfg.max_contexts:
        rng = np.random.default_rng([cfg.seed, int(digest[:8], 16)])
        keep = np.sort(rng.choice(len(contexts), size=cfg.max_contexts, replace=False))
        logger.debug("Subsampled %d of %d path contexts", cfg.max_contexts, len(contexts))
        contexts = [contexts[k] for k in keep]

    return PathContextBag(contexts=contexts, snippet_hash=digest)


def bag_for_snippet(snippet: str, cfg: EmbeddingConfig) -> PathContextBag:
    """Canonicalize identifiers (when enabled) and extract contexts."""
    if cfg.canonicalize:
        snippet, _ = normalize_identifiers(snippet)
    return extract_contexts(snippet, cfg)
