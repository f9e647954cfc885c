"""Static loop analysis: induction variables, constant folding, trip counts, affine subscripts."""

from dataclasses import dataclass
from typing import Dict, List, Optional

from app.loop_ir.constants import COMPARISON_OPS
from app.loop_ir.views import AstNode, NodeKind

_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "!=": "!="}


@dataclass(frozen=True)
class InductionInfo:
    var: str
    start: Optional[AstNode]
    bound: AstNode
    comparison: str
    step: int


def parse_int_literal(text: str) -> int:
    if text.startswith("'"):
        body = text[1:-1]
        escapes = {"\\n": 10, "\\t": 9, "\\0": 0, "\\\\": 92, "\\'": 39}
        return escapes.get(body, ord(body[-1]))
    digits = text.rstrip("uUlL")
    return int(digits, 16) if digits[:2].lower() == "0x" else int(digits, 10)


def _c_div(a: int, b: int) -> int:
    quotient = abs(a) // abs(b)
    return quotient if (a >= 0) == (b >= 0) else -quotient


def fold_constant(node: Optional[AstNode], defines: Dict[str, int]) -> Optional[int]:
    """Evaluate an integer constant expression, or None when it is not constant."""
    if node is None:
        return None
    if node.kind == NodeKind.INT_LIT:
        return parse_int_literal(node.token_text)
    if node.kind == NodeKind.IDENT:
        return defines.get(node.token_text)
    if node.kind == NodeKind.CAST:
        return fold_constant(node.children[0], defines)
    if node.kind == NodeKind.UNARY_OP and node.op in ("-", "+"):
        value = fold_constant(node.children[0], defines)
        if value is None:
            return None
        return -value if node.op == "-" else value
    if node.kind == NodeKind.BINARY_OP:
        left = fold_constant(node.children[0], defines)
        right = fold_constant(node.children[1], defines)
        if left is None or right is None:
            return None
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op in ("/", "%") and right != 0:
            quotient = _c_div(left, right)
            return quotient if node.op == "/" else left - quotient * right
        if node.op == "<<":
            return left << right
        if node.op == ">>":
            return left >> right
    return None


def _is_var(node: AstNode, name: Optional[str] = None) -> bool:
    return node.kind == NodeKind.IDENT and (name is None or node.token_text == name)


def _step_of(node: AstNode, var: str) -> Optional[int]:
    """Constant increment applied to var by an update expression, else None."""
    if node.kind == NodeKind.UNARY_OP and _is_var(node.children[0], var):
        if node.op in ("pre++", "post++"):
            return 1
        if node.op in ("pre--", "post--"):
            return -1
    if node.kind == NodeKind.ASSIGN and _is_var(node.children[0], var):
        value = node.children[1]
        if node.op in ("+=", "-="):
            amount = fold_constant(value, {})
            if amount is None:
                return None
            return amount if node.op == "+=" else -amount
        if node.op is None and value.kind == NodeKind.BINARY_OP and value.op in ("+", "-"):
            left, right = value.children
            if _is_var(left, var):
                amount = fold_constant(right, {})
                if amount is not None:
                    return amount if value.op == "+" else -amount
            if value.op == "+" and _is_var(right, var):
                return fold_constant(left, {})
    return None


def _condition(node: AstNode):
    if node.kind != NodeKind.BINARY_OP or node.op not in COMPARISON_OPS:
        return None
    left, right = node.children
    if _is_var(left):
        return left.token_text, node.op, right
    if _is_var(right):
        return right.token_text, _FLIP[node.op], left
    return None


def induction_info(loop: AstNode) -> Optional[InductionInfo]:
    """Induction variable, bound and constant step of an affine-countable loop."""
    if loop.kind == NodeKind.FOR_LOOP:
        init, cond, step, _ = loop.children
        parsed = _condition(cond)
        if parsed is None:
            return None
        var, comparison, bound = parsed
        increment = _step_of(step, var)
        if not increment:
            return None
        start = None
        if init.kind == NodeKind.ASSIGN and init.op is None and _is_var(init.children[0], var):
            start = init.children[1]
        elif init.kind == NodeKind.DECL and init.rank == 0 and _is_var(init.children[0], var) and len(init.children) == 2:
            start = init.children[1]
        return InductionInfo(var, start, bound, comparison, increment)

    if loop.kind == NodeKind.WHILE_LOOP:
        cond, body = loop.children
        parsed = _condition(cond)
        if parsed is None:
            return None
        var, comparison, bound = parsed
        statements = body.children if body.kind == NodeKind.COMPOUND_STMT else [body]
        steps = [
            _step_of(stmt.children[0], var)
            for stmt in statements
            if stmt.kind == NodeKind.EXPR_STMT and stmt.children
        ]
        steps = [s for s in steps if s]
        if len(steps) != 1:
            return None
        return InductionInfo(var, None, bound, comparison, steps[0])
    return None


def is_countable(loop: AstNode) -> bool:
    return induction_info(loop) is not None


def trip_count(loop: AstNode, defines: Dict[str, int]) -> Optional[int]:
    info = induction_info(loop)
    if info is None:
        return None
    start = fold_constant(info.start, defines)
    bound = fold_constant(info.bound, defines)
    if start is None or bound is None:
        return None
    step = info.step
    span = bound - start
    if info.comparison == "<" and step > 0:
        return max(0, -(-span // step))
    if info.comparison == "<=" and step > 0:
        return max(0, span // step + 1)
    if info.comparison == ">" and step < 0:
        return max(0, -(-(-span) // -step))
    if info.comparison == ">=" and step < 0:
        return max(0, (-span) // -step + 1)
    if info.comparison == "!=" and span % step == 0 and span // step >= 0:
        return span // step
    return None


def contains_ident(node: AstNode, name: str) -> bool:
    return any(n.kind == NodeKind.IDENT and n.token_text == name for n in node.walk())


def linear_coefficient(expr: AstNode, var: str) -> Optional[int]:
    """Coefficient of var in an affine integer expression; None when non-affine in var."""
    if not contains_ident(expr, var):
        return 0
    if _is_var(expr, var):
        return 1
    if expr.kind == NodeKind.CAST:
        return linear_coefficient(expr.children[0], var)
    if expr.kind == NodeKind.UNARY_OP and expr.op in ("-", "+"):
        inner = linear_coefficient(expr.children[0], var)
        if inner is None:
            return None
        return -inner if expr.op == "-" else inner
    if expr.kind == NodeKind.BINARY_OP:
        left, right = expr.children
        if expr.op in ("+", "-"):
            a = linear_coefficient(left, var)
            b = linear_coefficient(right, var)
            if a is None or b is None:
                return None
            return a + b if expr.op == "+" else a - b
        if expr.op == "*":
            if not contains_ident(left, var):
                factor = fold_constant(left, {})
                inner = linear_coefficient(right, var)
            elif not contains_ident(right, var):
                factor = fold_constant(right, {})
                inner = linear_coefficient(left, var)
            else:
                return None
            if factor is None or inner is None:
                return None
            return factor * inner
    return None


def subscripts(index: AstNode) -> List[AstNode]:
    """Subscript expressions of a (possibly multi-dimensional) Index chain, outermost first."""
    subs: List[AstNode] = []
    node = index
    while node.kind == NodeKind.INDEX:
        subs.append(node.children[1])
        node = node.children[0]
    return list(reversed(subs))


def index_base(index: AstNode) -> AstNode:
    node = index
    while node.kind == NodeKind.INDEX:
        node = node.children[0]
    return node
