from dataclasses import dataclass
from typing import Dict, Set, Tuple

from app.loop_ir.constants import (
    CANONICAL_PREFIX,
    KEYWORDS,
    ROLE_ARRAY,
    ROLE_FUNCTION,
    ROLE_SCALAR,
    SPECIFIER_WORDS,
)
from app.loop_ir.lexer import tokenize
from app.loop_ir.parser import parse_statement
from app.loop_ir.views import NodeKind


@dataclass(frozen=True)
class Renamed:
    name: str
    role: str


RenameMap = Dict[str, Renamed]


def normalize_identifiers(snippet: str) -> Tuple[str, RenameMap]:
    """
    Canonicalize identifiers of a loop snippet to var0, var1, ... in first-occurrence order.

    The output is the token stream joined by single spaces, so alpha-equivalent
    snippets normalize to identical text and canonical text is a fixed point.

    Returns:
        (normalized text, map original name -> Renamed(new name, role))
    """
    tree = parse_statement(snippet)

    arrays: Set[str] = set()
    functions: Set[str] = set()
    for node in tree.walk():
        if node.kind == NodeKind.INDEX and node.children[0].kind == NodeKind.IDENT:
            arrays.add(node.children[0].token_text)
        elif node.kind == NodeKind.CALL and node.children[0].kind == NodeKind.IDENT:
            functions.add(node.children[0].token_text)

    rename: RenameMap = {}
    out = []
    for token in tokenize(snippet).tokens:
        text = token.text
        if token.kind == "IDENT" and text not in KEYWORDS and text not in SPECIFIER_WORDS:
            if text not in rename:
                if text in functions:
                    role = ROLE_FUNCTION
                elif text in arrays:
                    role = ROLE_ARRAY
                else:
                    role = ROLE_SCALAR
                rename[text] = Renamed(f"{CANONICAL_PREFIX}{len(rename)}", role)
            text = rename[text].name
        out.append(text)
    return " ".join(out), rename
