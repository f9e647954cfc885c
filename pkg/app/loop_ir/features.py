"""Static features of a loop nest for the simulated backend."""

import logging
from typing import Dict, List, Optional

from app.config import LOGGER_NAME
from app.env.views import SimLoopFeatures
from app.loop_ir.analysis import (
    contains_ident,
    index_base,
    induction_info,
    linear_coefficient,
    subscripts,
    trip_count,
)
from app.loop_ir.constants import (
    COMPOUND_ASSIGN_OPS,
    DEFAULT_ELEM_BITS,
    DEFAULT_TRIP_COUNT,
    MAX_STRIDE,
    TYPE_BITS,
)
from app.loop_ir.views import AstNode, LoopNest, NodeKind

logger = logging.getLogger(LOGGER_NAME)

_ARITH_OPS = {"+", "-", "*", "/", "%", "&", "|", "^", "<<", ">>", "&&", "||"}
_COUNTED_UNARY = {"-", "~", "!"}


def _loop_body(loop: AstNode) -> AstNode:
    return loop.children[-1]


def _loop_chain(nest: LoopNest) -> List[AstNode]:
    """Loops from outer_loop down to innermost_loop."""
    chain: List[AstNode] = []

    def descend(node: AstNode, path: List[AstNode]) -> bool:
        path = path + [node] if node.is_loop else path
        if node is nest.innermost_loop:
            chain.extend(path)
            return True
        return any(descend(child, path) for child in node.children)

    descend(nest.outer_loop, [])
    return chain


def elem_bits_of(ctype: str) -> int:
    words = ctype.replace("*", " ").replace("()", " ").split()
    for word in reversed(words):
        if word in TYPE_BITS:
            return TYPE_BITS[word]
    if "unsigned" in words or "signed" in words:
        return TYPE_BITS["int"]
    return DEFAULT_ELEM_BITS


def _non_subscript_nodes(node: AstNode):
    """Preorder walk that skips subscript expressions."""
    yield node
    children = node.children[:1] if node.kind == NodeKind.INDEX else node.children
    for child in children:
        yield from _non_subscript_nodes(child)


def count_ops(body: AstNode) -> int:
    """Arithmetic, bitwise, call and select operations plus one per store."""
    count = 0
    for node in _non_subscript_nodes(body):
        if node.kind == NodeKind.BINARY_OP and node.op in _ARITH_OPS:
            count += 1
        elif node.kind == NodeKind.UNARY_OP and node.op in _COUNTED_UNARY:
            count += 1
        elif node.kind in (NodeKind.CALL, NodeKind.TERNARY, NodeKind.CAST):
            count += 1
        elif node.kind == NodeKind.ASSIGN:
            count += 2 if node.op in COMPOUND_ASSIGN_OPS else 1
    return max(1, count)


def access_stride(body: AstNode, var: Optional[str], step: int) -> int:
    """Largest element stride of any array access with respect to the innermost induction variable."""
    if var is None:
        return MAX_STRIDE
    stride = 1
    indexes = [node for node in body.walk() if node.kind == NodeKind.INDEX]
    # only full chains count, not the inner Index nodes of a[i][j]
    partial = {id(node.children[0]) for node in indexes}
    for node in indexes:
        if id(node) in partial:
            continue
        subs = subscripts(node)
        inner = subs[-1]
        coefficient = linear_coefficient(inner, var)
        outer_uses = any(contains_ident(sub, var) for sub in subs[:-1])
        if outer_uses or coefficient is None:
            stride = MAX_STRIDE
        elif coefficient:
            stride = max(stride, abs(coefficient * step))
    return max(1, min(stride, MAX_STRIDE))


def _is_self_update(node: AstNode, var: Optional[str]) -> bool:
    target = node.children[0]
    if target.kind == NodeKind.IDENT:
        name = target.token_text
        if name == var:
            return False
        if node.op in COMPOUND_ASSIGN_OPS:
            return True
        return contains_ident(node.children[1], name)
    if target.kind == NodeKind.INDEX and var is not None:
        # a[j] += ... inside a loop over i accumulates across iterations
        if any(contains_ident(sub, var) for sub in subscripts(target)):
            return False
        return node.op in COMPOUND_ASSIGN_OPS
    return False


def has_reduction(body: AstNode, var: Optional[str]) -> bool:
    return any(
        node.kind == NodeKind.ASSIGN and _is_self_update(node, var) for node in body.walk()
    )


def has_predicate(body: AstNode) -> bool:
    return any(node.kind in (NodeKind.IF, NodeKind.TERNARY) for node in body.walk())


def element_bits(body: AstNode, symbols: Dict[str, str]) -> int:
    """Widest element type among the arrays accessed in the body."""
    widths = []
    for node in body.walk():
        if node.kind == NodeKind.INDEX:
            base = index_base(node)
            if base.kind == NodeKind.IDENT and base.token_text in symbols:
                widths.append(elem_bits_of(symbols[base.token_text]))
    return max(widths, default=DEFAULT_ELEM_BITS)


def sim_features(nest: LoopNest) -> SimLoopFeatures:
    """
    Derive simulator features from a nest.

    The trip count is the product of the trip counts along the loop chain that
    ends at the innermost loop; loops with unknown bounds count as DEFAULT_TRIP_COUNT.
    """
    total = 1
    for loop in _loop_chain(nest):
        count = trip_count(loop, nest.defines)
        if count is None:
            logger.debug("Unknown trip count in %s, using %d", nest.nest_id, DEFAULT_TRIP_COUNT)
            count = DEFAULT_TRIP_COUNT
        total *= max(1, count)

    info = induction_info(nest.innermost_loop)
    var = info.var if info else None
    step = abs(info.step) if info else 1
    body = _loop_body(nest.innermost_loop)

    return SimLoopFeatures(
        trip_count=total,
        ops_per_iter=count_ops(body),
        stride=access_stride(body, var, step),
        has_reduction=has_reduction(body, var),
        has_predicate=has_predicate(body),
        elem_bits=element_bits(body, nest.symbols),
    )
