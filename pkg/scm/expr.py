"""
Expression AST for structural equations and its vectorised evaluator.

Every node evaluates over numpy arrays holding one entry per sample, so a
single call evaluates a whole batch of noise draws.
"""
from dataclasses import dataclass, field
from typing import Any, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

from scm.errors import EvaluationError

ARITHMETIC_OPS = ("+", "-", "*", "/")
COMPARISON_OPS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Num:
    value: float
    span: Any = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Ref:
    """Reference to an endogenous variable or a noise symbol"""
    name: str
    span: Any = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: Any = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Any = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expr"
    right: "Expr"
    span: Any = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IfThenElse:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    span: Any = field(default=None, compare=False, repr=False)


Expr = Union[Num, Ref, Neg, BinOp, Compare, IfThenElse]


def children(expr: Expr) -> Tuple[Expr, ...]:
    if isinstance(expr, Neg):
        return (expr.operand,)
    if isinstance(expr, (BinOp, Compare)):
        return (expr.left, expr.right)
    if isinstance(expr, IfThenElse):
        return (expr.cond, expr.then, expr.orelse)
    return ()


def iter_refs(expr: Expr) -> Iterator[Ref]:
    """Yield Ref nodes in source order"""
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Ref):
            yield node
        stack.extend(reversed(children(node)))


def depth(expr: Expr) -> int:
    """Height of the tree; a lone number or name has depth 1"""
    deepest = 0
    stack = [(expr, 1)]
    while stack:
        node, level = stack.pop()
        deepest = max(deepest, level)
        stack.extend((child, level + 1) for child in children(node))
    return deepest


def referenced_names(expr: Expr) -> List[str]:
    """Distinct referenced names, in first-appearance order"""
    seen = {}
    for ref in iter_refs(expr):
        seen.setdefault(ref.name, None)
    return list(seen)


def _compare(op: str, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    if op == "==":
        out = left == right
    elif op == "!=":
        out = left != right
    elif op == "<":
        out = left < right
    elif op == "<=":
        out = left <= right
    elif op == ">":
        out = left > right
    else:
        out = left >= right
    return out.astype(float)


def evaluate(expr: Expr, env: Mapping[str, np.ndarray], n: int) -> np.ndarray:
    """
    Evaluate ``expr`` over ``n`` rows.

    Args:
        expr: Expression to evaluate
        env: Name -> float array of length n
        n: Row count

    Raises:
        EvaluationError: division by zero, non-finite results, or unbound names
    """
    if isinstance(expr, Num):
        return np.full(n, expr.value, dtype=float)

    if isinstance(expr, Ref):
        try:
            return env[expr.name]
        except KeyError:
            raise EvaluationError(None, f"unbound name '{expr.name}'") from None

    if isinstance(expr, Neg):
        return -evaluate(expr.operand, env, n)

    if isinstance(expr, BinOp):
        left = evaluate(expr.left, env, n)
        right = evaluate(expr.right, env, n)
        with np.errstate(all="ignore"):
            if expr.op == "+":
                out = left + right
            elif expr.op == "-":
                out = left - right
            elif expr.op == "*":
                out = left * right
            else:
                if np.any(right == 0.0):
                    raise EvaluationError(None, "division by zero")
                out = left / right
        if not np.all(np.isfinite(out)):
            raise EvaluationError(None, f"non-finite result of '{expr.op}'")
        return out

    if isinstance(expr, Compare):
        return _compare(expr.op, evaluate(expr.left, env, n), evaluate(expr.right, env, n))

    if isinstance(expr, IfThenElse):
        mask = evaluate(expr.cond, env, n) != 0.0
        out = np.empty(n, dtype=float)
        # each branch only sees the rows that select it
        if mask.any():
            rows = np.flatnonzero(mask)
            out[rows] = evaluate(expr.then, _take(env, rows), len(rows))
        if not mask.all():
            rows = np.flatnonzero(~mask)
            out[rows] = evaluate(expr.orelse, _take(env, rows), len(rows))
        return out

    raise TypeError(f"Not an expression node: {expr!r}")


def _take(env: Mapping[str, np.ndarray], rows: np.ndarray) -> dict:
    return {name: values[rows] for name, values in env.items()}


def evaluate_scalar(expr: Expr, values: Mapping[str, float]) -> float:
    env = {name: np.array([float(v)]) for name, v in values.items()}
    return float(evaluate(expr, env, 1)[0])


def _additive_terms(expr: Expr, sign: int = 1) -> List[Tuple[int, Expr]]:
    if isinstance(expr, BinOp) and expr.op in ("+", "-"):
        right_sign = sign if expr.op == "+" else -sign
        return _additive_terms(expr.left, sign) + _additive_terms(expr.right, right_sign)
    if isinstance(expr, Neg):
        return _additive_terms(expr.operand, -sign)
    return [(sign, expr)]


def additive_inverse(expr: Expr, var: str, noise: str) -> Optional[Expr]:
    """
    Derive ``noise`` as a function of ``var`` and its parents when ``expr``
    has the additive-noise form ``g(Pa) ± noise``.

    Returns None when the noise is not exactly one top-level additive term.
    """
    terms = _additive_terms(expr)
    noise_terms = [(s, t) for s, t in terms if isinstance(t, Ref) and t.name == noise]
    if len(noise_terms) != 1:
        return None
    rest = [(s, t) for s, t in terms if not (isinstance(t, Ref) and t.name == noise)]
    if any(noise in referenced_names(t) for _, t in rest):
        return None

    noise_sign = noise_terms[0][0]
    rest_expr = None
    for s, t in rest:
        if rest_expr is None:
            rest_expr = t if s > 0 else Neg(t)
        else:
            rest_expr = BinOp("+" if s > 0 else "-", rest_expr, t)

    target = Ref(var)
    if noise_sign > 0:
        return target if rest_expr is None else BinOp("-", target, rest_expr)
    return Neg(target) if rest_expr is None else BinOp("-", rest_expr, target)
