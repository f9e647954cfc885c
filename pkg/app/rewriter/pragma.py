"""
Insert and remove framework pragmas above innermost loops.

Only whole pragma lines are added or removed, so the token stream of the
executable code never changes. Framework pragmas end with a marker comment
and user-written pragmas are never touched.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from app.config import LOGGER_NAME
from app.errors import AlreadyInjectedError, InvalidFactorError, NoPragmaFoundError, StaleNestError
from app.loop_ir.nests import source_digest
from app.loop_ir.views import LoopNest
from app.rewriter.constants import INLINE_MARKER, MARKER, PRAGMA_PREFIX, PRAGMA_TEMPLATE

logger = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True)
class PragmaDirective:
    vf: int
    if_: int

    def __post_init__(self):
        for name, value in (("vf", self.vf), ("if_", self.if_)):
            if value < 1 or value & (value - 1):
                raise InvalidFactorError(
                    detail=f"{name} must be a power of two, got {value}", context={name: value}
                )

    def render(self) -> str:
        return PRAGMA_TEMPLATE.format(vf=self.vf, if_=self.if_)


def _line_bounds(source: str, pos: int) -> Tuple[int, int]:
    """[start, end) of the line containing pos, end excluding the newline."""
    start = source.rfind("\n", 0, pos) + 1
    end = source.find("\n", pos)
    return start, len(source) if end == -1 else end


def _framework_marker(line: str) -> Optional[str]:
    text = line.strip()
    if not text.startswith(PRAGMA_PREFIX):
        return None
    if text.endswith(INLINE_MARKER):
        return INLINE_MARKER
    if text.endswith(MARKER):
        return MARKER
    return None


def _anchor_start(source: str, nest: LoopNest) -> int:
    return min(nest.pragma_anchor.byte_start, len(source))


def _insertion_point(source: str, nest: LoopNest) -> int:
    """Offset at which inject places the pragma of nest."""
    anchor = nest.pragma_anchor.byte_start
    line_start, _ = _line_bounds(source, anchor)
    return anchor if source[line_start:anchor].strip() else line_start


def _framework_spans(source: str) -> List[Tuple[int, int]]:
    """Spans of every framework pragma, each exactly the text inject added."""
    spans = []
    start = 0
    while start < len(source):
        end = source.find("\n", start)
        end = len(source) if end == -1 else end
        marker = _framework_marker(source[start:end])
        if marker == MARKER:
            spans.append((start, min(end + 1, len(source))))
        elif marker == INLINE_MARKER and start > 0:
            spans.append((start - 1, min(end + 1, len(source))))
        start = end + 1
    return spans


def _locate_in_original(source: str, nest: LoopNest) -> Optional[Tuple[int, int]]:
    """
    Strip every framework pragma to recover the source nest came from, then
    pick the pragma that was inserted at the insertion point of nest.
    """
    spans = _framework_spans(source)
    pieces, origins = [], []
    last = removed = 0
    for start, end in spans:
        pieces.append(source[last:start])
        origins.append(start - removed)
        removed += end - start
        last = end
    pieces.append(source[last:])
    original = "".join(pieces)
    if not spans or source_digest(original) != nest.source_digest:
        return None
    position = _insertion_point(original, nest)
    for span, origin in zip(spans, origins):
        if origin == position:
            return span
    return None


def _locate(source: str, nest: LoopNest) -> Optional[Tuple[int, int]]:
    """Span of the framework pragma belonging to nest, or None."""
    anchor = _anchor_start(source, nest)
    line_start, line_end = _line_bounds(source, anchor)

    # nest taken from the source before injection
    if source_digest(source) != nest.source_digest:
        span = _locate_in_original(source, nest)
        if span is not None:
            return span
        # the original also held framework pragmas: assume ours sits where the anchor line began
        marker = _framework_marker(source[line_start:line_end])
        if marker == MARKER:
            return line_start, min(line_end + 1, len(source))
        if source.startswith("\n" + PRAGMA_PREFIX, anchor):
            inline_end = source.find("\n", anchor + 1)
            if inline_end != -1 and _framework_marker(source[anchor + 1:inline_end]) == INLINE_MARKER:
                return anchor, inline_end + 1
        return None

    # nest taken from the injected source: the pragma is the line above the anchor line
    if line_start == 0 or source[line_start:anchor].strip():
        return None
    previous_start, previous_end = _line_bounds(source, line_start - 1)
    marker = _framework_marker(source[previous_start:previous_end])
    if marker == MARKER:
        return previous_start, line_start
    if marker == INLINE_MARKER and previous_start > 0:
        return previous_start - 1, line_start
    return None


def _insertion(source: str, nest: LoopNest, directive: PragmaDirective) -> Tuple[int, str]:
    anchor = nest.pragma_anchor.byte_start
    position = _insertion_point(source, nest)
    if position == anchor and source[_line_bounds(source, anchor)[0]:anchor].strip():
        # the loop shares its line with other code
        return anchor, f"\n{directive.render()} {INLINE_MARKER}\n"
    return position, f"{source[position:anchor]}{directive.render()} {MARKER}\n"


def _check_not_injected(source: str, nest: LoopNest) -> None:
    if _locate(source, nest) is not None:
        raise AlreadyInjectedError(context={"nest_id": nest.nest_id})


def _check_fresh(source: str, nest: LoopNest) -> None:
    if source_digest(source) != nest.source_digest:
        raise StaleNestError(context={"nest_id": nest.nest_id})


def inject(source: str, nest: LoopNest, directive: PragmaDirective) -> str:
    """
    Insert directive immediately above the innermost loop of nest.

    Raises:
        AlreadyInjectedError: a framework pragma is already present for nest
        StaleNestError: nest was not extracted from source
    """
    _check_not_injected(source, nest)
    _check_fresh(source, nest)
    position, text = _insertion(source, nest, directive)
    logger.debug("Injecting %s for %s at offset %d", directive.render(), nest.nest_id, position)
    return source[:position] + text + source[position:]


def inject_many(source: str, items: Iterable[Tuple[LoopNest, PragmaDirective]]) -> str:
    """Inject one pragma per nest in a single pass; all nests must come from source."""
    items = list(items)
    for nest, _ in items:
        _check_not_injected(source, nest)
        _check_fresh(source, nest)
    insertions: List[Tuple[int, str]] = [_insertion(source, nest, directive) for nest, directive in items]
    # back to front so earlier offsets stay valid
    for position, text in sorted(insertions, key=lambda item: item[0], reverse=True):
        source = source[:position] + text + source[position:]
    return source


def remove(source: str, nest: LoopNest) -> str:
    """
    Exact inverse of inject for nest.

    nest may come either from the original source or from the injected one.

    Raises:
        NoPragmaFoundError: no framework pragma belongs to nest
    """
    span = _locate(source, nest)
    if span is None:
        raise NoPragmaFoundError(context={"nest_id": nest.nest_id})
    start, end = span
    return source[:start] + source[end:]
