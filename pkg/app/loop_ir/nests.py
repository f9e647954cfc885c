import hashlib
import logging
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from app.config import LOGGER_NAME
from app.errors import NestNotFoundError
from app.loop_ir.analysis import is_countable
from app.loop_ir.lexer import tokenize
from app.loop_ir.parser import parse
from app.loop_ir.views import AstNode, LoopNest, NodeKind, SourceSpan

logger = logging.getLogger(LOGGER_NAME)


def source_digest(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


def loop_depth(node: AstNode) -> int:
    """Maximal number of loops on any root-to-leaf path of the subtree."""
    inner = max((loop_depth(child) for child in node.children), default=0)
    return inner + 1 if node.is_loop else inner


def _deepest_loop(node: AstNode) -> Tuple[int, Optional[AstNode]]:
    best_depth, best_loop = 0, None
    for child in node.children:
        depth, loop = _deepest_loop(child)
        # strict comparison keeps the first loop in source order on ties
        if depth > best_depth:
            best_depth, best_loop = depth, loop
    if node.is_loop:
        return best_depth + 1, best_loop if best_loop is not None else node
    return best_depth, best_loop


def _declared(nodes: Iterable[AstNode]) -> Dict[str, str]:
    symbols: Dict[str, str] = {}
    for root in nodes:
        for node in root.walk():
            if node.kind == NodeKind.DECL and node.children:
                symbols[node.children[0].token_text] = node.ctype or ""
    return symbols


def _outermost_loops(node: AstNode, found: List[AstNode]) -> None:
    for child in node.children:
        if child.is_loop:
            if child.kind == NodeKind.WHILE_LOOP and not is_countable(child):
                logger.warning(
                    "Skipping non-countable while loop at line %d", child.span.line
                )
                _outermost_loops(child, found)
                continue
            found.append(child)
        else:
            _outermost_loops(child, found)


def extract_loop_nests(
    tu: AstNode,
    source: str,
    file: str = "<input>",
    skip_functions: FrozenSet[str] = frozenset(),
) -> List[LoopNest]:
    """
    One LoopNest per maximal outermost loop, in source order.

    Args:
        tu: TranslationUnit parsed from source
        source: the exact text tu was parsed from
        file: path recorded in nest ids
        skip_functions: function names whose loops are ignored (e.g. a timing driver)

    Returns:
        List of LoopNest objects
    """
    digest = source_digest(source)
    defines = tokenize(source).defines
    globals_ = _declared(child for child in tu.children if child.kind == NodeKind.DECL)

    nests: List[LoopNest] = []
    seen_ids: Dict[str, int] = {}
    for function in tu.children:
        if function.kind != NodeKind.FUNCTION_DEF:
            continue
        name = function.children[0].token_text
        if name in skip_functions:
            continue
        symbols = dict(globals_)
        symbols.update(_declared(function.children[1:]))

        outer_loops: List[AstNode] = []
        _outermost_loops(function, outer_loops)
        for outer in outer_loops:
            depth, innermost = _deepest_loop(outer)
            keyword = "for" if innermost.kind == NodeKind.FOR_LOOP else "while"
            anchor = SourceSpan(
                innermost.span.byte_start,
                innermost.span.byte_start + len(keyword),
                innermost.span.line,
            )
            nest_id = f"{file}:{outer.span.line}"
            if nest_id in seen_ids:
                seen_ids[nest_id] += 1
                nest_id = f"{nest_id}#{seen_ids[nest_id]}"
            else:
                seen_ids[nest_id] = 0
            nests.append(
                LoopNest(
                    nest_id=nest_id,
                    file=file,
                    function=name,
                    outer_loop=outer,
                    innermost_loop=innermost,
                    depth=depth,
                    pragma_anchor=anchor,
                    embed_snippet=source[outer.span.byte_start:outer.span.byte_end],
                    source=source,
                    source_digest=digest,
                    countable=is_countable(innermost),
                    symbols=symbols,
                    defines=defines,
                )
            )
    logger.debug("Extracted %d loop nests from %s", len(nests), file)
    return nests


def load_program(
    source: str, file: str = "<input>", skip_functions: FrozenSet[str] = frozenset()
) -> Tuple[AstNode, List[LoopNest]]:
    """Parse source and extract its loop nests."""
    tu = parse(source)
    return tu, extract_loop_nests(tu, source, file=file, skip_functions=skip_functions)


def select_nests(nests: Sequence[LoopNest], key: Optional[str] = None) -> List[int]:
    """
    Indices of the nests named by key: a 0-based index or a nest id; all when key is None.

    Raises:
        NestNotFoundError: key matches no nest
    """
    if key is None:
        return list(range(len(nests)))
    if key.isdigit() and int(key) < len(nests):
        return [int(key)]
    for index, nest in enumerate(nests):
        if nest.nest_id == key:
            return [index]
    raise NestNotFoundError(
        detail=f"No loop nest {key!r}",
        context={"nests": [nest.nest_id for nest in nests]},
    )
