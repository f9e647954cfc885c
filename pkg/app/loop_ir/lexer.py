import re
from typing import Dict, List, Tuple

from app.errors import CSyntaxError
from app.loop_ir.views import LexResult, Token

TOKEN_SPEC = [
    ("WS", r"[ \t\r\n\f\v]+"),
    ("LINE_COMMENT", r"//[^\n]*"),
    ("BLOCK_COMMENT", r"/\*.*?\*/"),
    ("FLOAT", r"(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?[fFlL]?|\d+[eE][+-]?\d+[fFlL]?"),
    ("INT", r"0[xX][0-9a-fA-F]+[uUlL]*|\d+[uUlL]*"),
    ("STRING", r'"(?:\\.|[^"\\\n])*"'),
    ("CHAR", r"'(?:\\.|[^'\\\n])+'"),
    ("IDENT", r"[A-Za-z_]\w*"),
    (
        "PUNCT",
        r"<<=|>>=|\.\.\.|->|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||\+=|-=|\*=|/=|%=|&=|\^=|\|="
        r"|[{}()\[\];,?:=<>+\-*/%&|^!~.]",
    ),
]
TOKEN_RE = re.compile(
    "|".join(f"(?P<{name}>{pattern})" for name, pattern in TOKEN_SPEC), re.DOTALL
)
DEFINE_RE = re.compile(r"#\s*define\s+([A-Za-z_]\w*)\s+\(?\s*(-?\d+)\s*\)?\s*$")
SKIPPED = {"WS", "LINE_COMMENT", "BLOCK_COMMENT"}


def _directive_end(source: str, pos: int) -> int:
    """End offset of a preprocessor line starting at pos, honoring backslash continuations."""
    end = pos
    while True:
        newline = source.find("\n", end)
        if newline == -1:
            return len(source)
        if newline > 0 and source[newline - 1] == "\\":
            end = newline + 1
            continue
        return newline


def tokenize(source: str) -> LexResult:
    """
    Split C-subset source into tokens.

    Lines whose first non-blank character is '#' are skipped; integer
    "#define NAME VALUE" lines are recorded so loop bounds can be folded.
    """
    tokens: List[Token] = []
    defines: Dict[str, int] = {}
    directives: List[Tuple[int, str]] = []

    pos = 0
    line = 1
    line_start = 0
    at_line_start = True
    length = len(source)

    while pos < length:
        if at_line_start and source[pos] == "#":
            end = _directive_end(source, pos)
            text = source[pos:end]
            directives.append((line, text))
            match = DEFINE_RE.match(text)
            if match:
                defines[match.group(1)] = int(match.group(2))
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = pos + text.rfind("\n") + 1
            pos = end
            continue

        match = TOKEN_RE.match(source, pos)
        if match is None:
            raise CSyntaxError(
                f"unexpected character {source[pos]!r}",
                line,
                pos - line_start + 1,
                expected=["token"],
            )
        kind = match.lastgroup
        text = match.group()
        if kind not in SKIPPED:
            if kind == "CHAR":
                kind = "INT"
            tokens.append(Token(kind, text, pos, match.end(), line, pos - line_start + 1))
            at_line_start = False

        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
            # A block comment spanning lines leaves us mid-line unless only blanks follow
            at_line_start = kind == "WS" or source[line_start:match.end()].strip() == ""
        pos = match.end()

    return LexResult(tokens=tokens, defines=defines, directives=directives)
