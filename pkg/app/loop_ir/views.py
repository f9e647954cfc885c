from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple


class NodeKind(str, Enum):
    TRANSLATION_UNIT = "TranslationUnit"
    FUNCTION_DEF = "FunctionDef"
    FOR_LOOP = "ForLoop"
    WHILE_LOOP = "WhileLoop"
    COMPOUND_STMT = "CompoundStmt"
    IF = "If"
    EXPR_STMT = "ExprStmt"
    BINARY_OP = "BinaryOp"
    UNARY_OP = "UnaryOp"
    TERNARY = "Ternary"
    ASSIGN = "Assign"
    CALL = "Call"
    INDEX = "Index"
    IDENT = "Ident"
    INT_LIT = "IntLit"
    FLOAT_LIT = "FloatLit"
    STRING_LIT = "StringLit"
    CAST = "Cast"
    DECL = "Decl"
    RETURN = "Return"


TERMINAL_KINDS = frozenset(
    {NodeKind.IDENT, NodeKind.INT_LIT, NodeKind.FLOAT_LIT, NodeKind.STRING_LIT}
)
LOOP_KINDS = frozenset({NodeKind.FOR_LOOP, NodeKind.WHILE_LOOP})


@dataclass(frozen=True)
class SourceSpan:
    """Half-open character range [byte_start, byte_end) with the 1-based line of its start.

    Offsets index the decoded text; for ASCII sources they equal byte offsets.
    """
    byte_start: int
    byte_end: int
    line: int

    def cover(self, other: "SourceSpan") -> "SourceSpan":
        return SourceSpan(self.byte_start, max(self.byte_end, other.byte_end), self.line)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.start, self.end, self.line)


@dataclass
class AstNode:
    kind: NodeKind
    span: SourceSpan
    children: List["AstNode"] = field(default_factory=list)
    token_text: str = ""
    # Operator for BinaryOp/UnaryOp/compound Assign ("=" is left as None)
    op: Optional[str] = None
    # Declared or cast-to type for Decl/Cast/FunctionDef
    ctype: Optional[str] = None
    # Number of array dimensions with an explicit size on a Decl
    rank: int = 0

    @property
    def is_terminal(self) -> bool:
        return self.kind in TERMINAL_KINDS

    @property
    def is_loop(self) -> bool:
        return self.kind in LOOP_KINDS

    def label(self) -> str:
        """Node label used in AST paths; casts and declarations carry their type."""
        if self.kind in (NodeKind.CAST, NodeKind.DECL) and self.ctype:
            return f"{self.kind.value}:{self.ctype}"
        return self.kind.value if self.op is None else f"{self.kind.value}:{self.op}"

    def walk(self) -> Iterator["AstNode"]:
        """Pre-order traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def terminals(self) -> List["AstNode"]:
        return [n for n in self.walk() if n.is_terminal]

    def shape(self) -> Tuple:
        """Span-free structural fingerprint, equal for isomorphic subtrees."""
        return (
            self.kind.value,
            self.op,
            self.ctype,
            self.rank,
            self.token_text,
            tuple(child.shape() for child in self.children),
        )


@dataclass
class LexResult:
    tokens: List[Token]
    # Integer-valued "#define NAME VALUE" lines, used for trip counts only
    defines: Dict[str, int]
    # (line, text) of every preprocessor line that was skipped
    directives: List[Tuple[int, str]]


@dataclass
class LoopNest:
    nest_id: str
    file: str
    function: str
    outer_loop: AstNode
    innermost_loop: AstNode
    depth: int
    pragma_anchor: SourceSpan
    embed_snippet: str
    source: str
    source_digest: str
    countable: bool = True
    # Declared C type for every visible identifier (globals, params, locals)
    symbols: Dict[str, str] = field(default_factory=dict)
    defines: Dict[str, int] = field(default_factory=dict)

    @property
    def line(self) -> int:
        return self.outer_loop.span.line

    def summary(self) -> Dict[str, object]:
        return {
            "nest_id": self.nest_id,
            "file": self.file,
            "line": self.line,
            "depth": self.depth,
            "embed_snippet": self.embed_snippet,
        }
