"""
Canonical dsl-v1 formatting.

Parentheses are emitted exactly where the AST needs them, so
``parse_model(format_model(doc)) == doc`` for every valid document.
"""
import math

from dsl.document import InverseDecl, ModelDocument, NoiseDecl, Statement, VarDecl
from scm.expr import BinOp, Compare, Expr, IfThenElse, Neg, Num, Ref

# binding strength, loosest first
_IF, _CMP, _SUM, _PROD, _UNARY, _ATOM = range(6)


def format_number(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"Cannot format non-finite number {value!r}")
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _level(expr: Expr) -> int:
    if isinstance(expr, IfThenElse):
        return _IF
    if isinstance(expr, Compare):
        return _CMP
    if isinstance(expr, BinOp):
        return _SUM if expr.op in ("+", "-") else _PROD
    if isinstance(expr, Neg):
        return _UNARY
    if isinstance(expr, Num) and expr.value < 0:
        return _UNARY
    return _ATOM


def _wrap(expr: Expr, needs_parens: bool) -> str:
    text = format_expr(expr)
    return f"({text})" if needs_parens else text


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Num):
        return format_number(expr.value)
    if isinstance(expr, Ref):
        return expr.name
    if isinstance(expr, Neg):
        operand = expr.operand
        # a bare "-2" would re-parse as a literal
        return "-" + _wrap(operand, _level(operand) < _ATOM or isinstance(operand, Num))
    if isinstance(expr, BinOp):
        level = _level(expr)
        left = _wrap(expr.left, _level(expr.left) < level)
        right = _wrap(expr.right, _level(expr.right) <= level)
        return f"{left} {expr.op} {right}"
    if isinstance(expr, Compare):
        left = _wrap(expr.left, _level(expr.left) <= _CMP)
        right = _wrap(expr.right, _level(expr.right) <= _CMP)
        return f"{left} {expr.op} {right}"
    if isinstance(expr, IfThenElse):
        cond = _wrap(expr.cond, _level(expr.cond) < _CMP)
        return f"if {cond} then {format_expr(expr.then)} else {format_expr(expr.orelse)}"
    raise TypeError(f"Not an expression node: {expr!r}")


def format_statement(stmt: Statement) -> str:
    if isinstance(stmt, NoiseDecl):
        args = ", ".join(format_number(a) for a in stmt.args)
        return f"noise {stmt.name} ~ {stmt.distribution}({args})"
    if isinstance(stmt, VarDecl):
        return f"var {stmt.name} = {format_expr(stmt.expr)}"
    if isinstance(stmt, InverseDecl):
        return f"inverse {stmt.noise} = {format_expr(stmt.expr)}"
    raise TypeError(f"Not a statement: {stmt!r}")


def format_model(doc: ModelDocument) -> str:
    """Render a document one statement per line, LF-terminated"""
    return "".join(format_statement(s) + "\n" for s in doc.statements)


def to_document(scm) -> ModelDocument:
    """Re-emit a validated Scm as a document: noises, then equations, then declared inverses"""
    statements = [NoiseDecl(v.noise, v.distribution.name, tuple(v.distribution.params())) for v in scm.variables]
    statements += [VarDecl(v.name, v.expr) for v in scm.variables]
    statements += [InverseDecl(v.noise, v.inverse) for v in scm.variables if v.inverse is not None]
    return ModelDocument(tuple(statements))
