""" Recursive descent parser for the restricted C subset.

Grammar coverage: function definitions and prototypes, declarations with
array dimensions and initializers, for/while loops, if/else, return,
compound and expression statements, assignment (plain and compound),
ternary, binary arithmetic/bitwise/comparison/logical operators, prefix and
postfix unary operators, casts, calls, array indexing, integer/float/char
and string literals. Preprocessor lines are skipped by the lexer.
"""

from dataclasses import replace
from typing import Iterable, List, Optional, Tuple

from app.errors import CSyntaxError
from app.loop_ir.constants import (
    ASSIGN_OPS,
    BINARY_PRECEDENCE,
    KEYWORDS,
    PREFIX_OPS,
    QUALIFIERS,
    SPECIFIER_WORDS,
    STORAGE_CLASSES,
    TYPE_WORDS,
)
from app.loop_ir.lexer import tokenize
from app.loop_ir.views import AstNode, LexResult, NodeKind, SourceSpan, Token


class CParser:
    """Parser over the token list of a single source buffer."""

    def __init__(self, source: str):
        self.source = source
        self.lex: LexResult = tokenize(source)
        self.tokens: List[Token] = self.lex.tokens
        self.index = 0

    # Token helpers

    def peek(self, offset: int = 0) -> Optional[Token]:
        position = self.index + offset
        return self.tokens[position] if position < len(self.tokens) else None

    def at(self, *texts: str) -> bool:
        token = self.peek()
        return token is not None and token.kind in ("PUNCT", "IDENT") and token.text in texts

    def consume(self) -> Token:
        token = self.peek()
        if token is None:
            self.error("unexpected end of input", ["token"])
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.peek()
            self.error(f"expected {text!r} but found {found.text if found else 'end of input'!r}", [text])
        return self.consume()

    def error(self, message: str, expected: Iterable[str]):
        token = self.peek()
        if token is None:
            line = self.source.count("\n") + 1
            column = len(self.source) - self.source.rfind("\n")
        else:
            line, column = token.line, token.column
        raise CSyntaxError(message, line, column, expected=expected)

    def span_from(self, first: Token) -> SourceSpan:
        last = self.tokens[self.index - 1]
        return SourceSpan(first.start, last.end, first.line)

    def starts_declaration(self) -> bool:
        token = self.peek()
        return token is not None and token.kind == "IDENT" and token.text in SPECIFIER_WORDS

    def starts_type_name(self) -> bool:
        token = self.peek()
        return token is not None and token.kind == "IDENT" and token.text in TYPE_WORDS | QUALIFIERS

    # Top level

    def parse_translation_unit(self) -> AstNode:
        items: List[AstNode] = []
        while self.peek() is not None:
            items.extend(self.parse_external())
        if items:
            span = SourceSpan(items[0].span.byte_start, items[-1].span.byte_end, items[0].span.line)
        else:
            span = SourceSpan(0, max(len(self.source), 1), 1)
        return AstNode(NodeKind.TRANSLATION_UNIT, span, items)

    def parse_snippet(self) -> AstNode:
        """Parse a sequence of block items (a loop snippet); one item is returned bare."""
        first = self.peek()
        if first is None:
            self.error("empty snippet", ["statement"])
        items: List[AstNode] = []
        while self.peek() is not None:
            items.extend(self.parse_statement())
        if len(items) == 1:
            return items[0]
        return AstNode(NodeKind.COMPOUND_STMT, self.span_from(first), items)

    def parse_external(self) -> List[AstNode]:
        first = self.peek()
        if not self.starts_declaration():
            self.error(f"expected declaration but found {first.text!r}", ["type specifier"])
        ctype = self.parse_specifiers()
        pointer, name = self.parse_declarator_head()
        if self.at("("):
            return [self.parse_function(first, ctype + pointer, name)]
        decls = [self.finish_declarator(first, ctype, pointer, name)]
        while self.at(","):
            self.consume()
            pointer, name = self.parse_declarator_head()
            decls.append(self.finish_declarator(first, ctype, pointer, name))
        self.expect(";")
        return decls

    def parse_function(self, first: Token, ctype: str, name: AstNode) -> AstNode:
        self.expect("(")
        params: List[AstNode] = []
        if self.at("void") and self.peek(1) is not None and self.peek(1).text == ")":
            self.consume()
        elif not self.at(")"):
            while True:
                param_first = self.peek()
                param_type = self.parse_specifiers()
                pointer, param_name = self.parse_declarator_head()
                params.append(self.finish_declarator(param_first, param_type, pointer, param_name, allow_init=False))
                if not self.at(","):
                    break
                self.consume()
        self.expect(")")
        if self.at(";"):
            self.consume()
            return AstNode(NodeKind.DECL, self.span_from(first), [name], ctype=f"{ctype}()")
        body = self.parse_compound()
        return AstNode(NodeKind.FUNCTION_DEF, self.span_from(first), [name, *params, body], ctype=ctype)

    # Declarations

    def parse_specifiers(self) -> str:
        words: List[str] = []
        while self.starts_declaration():
            word = self.consume().text
            if word not in STORAGE_CLASSES:
                words.append(word)
        if not any(w in TYPE_WORDS for w in words):
            self.error("declaration without a type", ["type specifier"])
        return " ".join(words)

    def parse_declarator_head(self) -> Tuple[str, AstNode]:
        pointer = ""
        while self.at("*"):
            self.consume()
            pointer += "*"
            while self.at(*QUALIFIERS):
                self.consume()
        token = self.peek()
        if token is None or token.kind != "IDENT" or token.text in KEYWORDS or token.text in SPECIFIER_WORDS:
            self.error("expected identifier", ["identifier"])
        self.consume()
        return pointer, AstNode(NodeKind.IDENT, token.span, token_text=token.text)

    def finish_declarator(
        self, first: Token, ctype: str, pointer: str, name: AstNode, allow_init: bool = True
    ) -> AstNode:
        children = [name]
        rank = 0
        while self.at("["):
            self.consume()
            if self.at("]"):
                pointer += "*"
            else:
                children.append(self.parse_expression())
                rank += 1
            self.expect("]")
        if allow_init and self.at("="):
            self.consume()
            children.append(self.parse_assignment())
        last = self.tokens[self.index - 1]
        span = SourceSpan(first.start, last.end, first.line)
        return AstNode(NodeKind.DECL, span, children, ctype=ctype + pointer, rank=rank)

    def parse_declaration(self) -> List[AstNode]:
        first = self.peek()
        ctype = self.parse_specifiers()
        decls = []
        while True:
            pointer, name = self.parse_declarator_head()
            decls.append(self.finish_declarator(first, ctype, pointer, name))
            if not self.at(","):
                break
            self.consume()
        self.expect(";")
        return decls

    # Statements

    def parse_statement(self) -> List[AstNode]:
        token = self.peek()
        if token is None:
            self.error("expected statement", ["statement"])
        if self.at("{"):
            return [self.parse_compound()]
        if self.at("for"):
            return [self.parse_for()]
        if self.at("while"):
            return [self.parse_while()]
        if self.at("if"):
            return [self.parse_if()]
        if self.at("return"):
            self.consume()
            children = [] if self.at(";") else [self.parse_expression()]
            self.expect(";")
            return [AstNode(NodeKind.RETURN, self.span_from(token), children)]
        if self.at(";"):
            self.consume()
            return [AstNode(NodeKind.EXPR_STMT, token.span)]
        if self.starts_declaration():
            return self.parse_declaration()
        expr = self.parse_expression()
        self.expect(";")
        return [AstNode(NodeKind.EXPR_STMT, self.span_from(token), [expr])]

    def parse_compound(self) -> AstNode:
        first = self.expect("{")
        items: List[AstNode] = []
        while not self.at("}"):
            if self.peek() is None:
                self.error("unterminated block", ["}"])
            items.extend(self.parse_statement())
        self.consume()
        return AstNode(NodeKind.COMPOUND_STMT, self.span_from(first), items)

    def parse_for(self) -> AstNode:
        first = self.consume()
        self.expect("(")
        if self.at(";"):
            init = AstNode(NodeKind.EXPR_STMT, self.consume().span)
        elif self.starts_declaration():
            init_first = self.peek()
            decls = self.parse_declaration()
            init = decls[0] if len(decls) == 1 else AstNode(
                NodeKind.COMPOUND_STMT, self.span_from(init_first), decls
            )
        else:
            init = self.parse_expression()
            self.expect(";")
        if self.at(";"):
            cond = AstNode(NodeKind.EXPR_STMT, self.consume().span)
        else:
            cond = self.parse_expression()
            self.expect(";")
        if self.at(")"):
            step = AstNode(NodeKind.EXPR_STMT, self.peek().span)
        else:
            step = self.parse_expression()
        self.expect(")")
        body = self.parse_body()
        return AstNode(NodeKind.FOR_LOOP, self.span_from(first), [init, cond, step, body])

    def parse_while(self) -> AstNode:
        first = self.consume()
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        body = self.parse_body()
        return AstNode(NodeKind.WHILE_LOOP, self.span_from(first), [cond, body])

    def parse_if(self) -> AstNode:
        first = self.consume()
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        children = [cond, self.parse_body()]
        if self.at("else"):
            self.consume()
            children.append(self.parse_body())
        return AstNode(NodeKind.IF, self.span_from(first), children)

    def parse_body(self) -> AstNode:
        first = self.peek()
        items = self.parse_statement()
        if len(items) == 1:
            return items[0]
        return AstNode(NodeKind.COMPOUND_STMT, self.span_from(first), items)

    # Expressions

    def parse_expression(self) -> AstNode:
        node = self.parse_assignment()
        while self.at(","):
            self.consume()
            right = self.parse_assignment()
            node = AstNode(NodeKind.BINARY_OP, node.span.cover(right.span), [node, right], op=",")
        return node

    def parse_assignment(self) -> AstNode:
        left = self.parse_conditional()
        if self.at(*ASSIGN_OPS):
            op = self.consume().text
            right = self.parse_assignment()
            return AstNode(
                NodeKind.ASSIGN,
                left.span.cover(right.span),
                [left, right],
                op=None if op == "=" else op,
            )
        return left

    def parse_conditional(self) -> AstNode:
        cond = self.parse_binary(1)
        if self.at("?"):
            self.consume()
            then = self.parse_expression()
            self.expect(":")
            other = self.parse_conditional()
            return AstNode(NodeKind.TERNARY, cond.span.cover(other.span), [cond, then, other])
        return cond

    def parse_binary(self, min_precedence: int) -> AstNode:
        left = self.parse_unary()
        while True:
            token = self.peek()
            if token is None or token.kind != "PUNCT":
                return left
            precedence = BINARY_PRECEDENCE.get(token.text)
            if precedence is None or precedence < min_precedence:
                return left
            self.consume()
            right = self.parse_binary(precedence + 1)
            left = AstNode(NodeKind.BINARY_OP, left.span.cover(right.span), [left, right], op=token.text)

    def parse_unary(self) -> AstNode:
        token = self.peek()
        if token is None:
            self.error("expected expression", ["expression"])
        if token.kind == "PUNCT" and token.text in PREFIX_OPS:
            self.consume()
            operand = self.parse_unary()
            op = f"pre{token.text}" if token.text in ("++", "--") else token.text
            return AstNode(NodeKind.UNARY_OP, SourceSpan(token.start, operand.span.byte_end, token.line), [operand], op=op)
        if self.at("(") and self._cast_ahead():
            self.consume()
            words = []
            while self.starts_type_name():
                words.append(self.consume().text)
            while self.at("*"):
                self.consume()
                words.append("*")
            self.expect(")")
            operand = self.parse_unary()
            ctype = " ".join(w for w in words if w != "*") + "*" * words.count("*")
            return AstNode(NodeKind.CAST, SourceSpan(token.start, operand.span.byte_end, token.line), [operand], ctype=ctype)
        return self.parse_postfix()

    def _cast_ahead(self) -> bool:
        following = self.peek(1)
        return following is not None and following.kind == "IDENT" and following.text in TYPE_WORDS | QUALIFIERS

    def parse_postfix(self) -> AstNode:
        node = self.parse_primary()
        while True:
            if self.at("["):
                self.consume()
                subscript = self.parse_expression()
                end = self.expect("]")
                node = AstNode(NodeKind.INDEX, SourceSpan(node.span.byte_start, end.end, node.span.line), [node, subscript])
            elif self.at("("):
                self.consume()
                args = [node]
                if not self.at(")"):
                    args.append(self.parse_assignment())
                    while self.at(","):
                        self.consume()
                        args.append(self.parse_assignment())
                end = self.expect(")")
                node = AstNode(NodeKind.CALL, SourceSpan(node.span.byte_start, end.end, node.span.line), args)
            elif self.at("++", "--"):
                end = self.consume()
                node = AstNode(
                    NodeKind.UNARY_OP,
                    SourceSpan(node.span.byte_start, end.end, node.span.line),
                    [node],
                    op=f"post{end.text}",
                )
            else:
                return node

    def parse_primary(self) -> AstNode:
        token = self.peek()
        if token is None:
            self.error("expected expression", ["identifier", "number", "("])
        if token.kind == "IDENT" and token.text not in KEYWORDS and token.text not in SPECIFIER_WORDS:
            self.consume()
            return AstNode(NodeKind.IDENT, token.span, token_text=token.text)
        if token.kind == "INT":
            self.consume()
            return AstNode(NodeKind.INT_LIT, token.span, token_text=token.text)
        if token.kind == "FLOAT":
            self.consume()
            return AstNode(NodeKind.FLOAT_LIT, token.span, token_text=token.text)
        if token.kind == "STRING":
            self.consume()
            return AstNode(NodeKind.STRING_LIT, token.span, token_text=token.text)
        if self.at("("):
            self.consume()
            inner = self.parse_expression()
            end = self.expect(")")
            if inner.is_terminal:
                return inner
            return replace(inner, span=SourceSpan(token.start, end.end, token.line))
        self.error(f"unexpected token {token.text!r}", ["identifier", "number", "("])


def parse(source: str) -> AstNode:
    """Parse a whole translation unit."""
    return CParser(source).parse_translation_unit()


def parse_statement(snippet: str) -> AstNode:
    """Parse a loop snippet (one or more block items)."""
    return CParser(snippet).parse_snippet()
