"""
Recursive-descent parser for dsl-v1 model text.

Grammar (one statement per line):

    noise   := "noise" IDENT "~" DIST "(" num ("," num)* ")"
    var     := "var" IDENT "=" expr
    inverse := "inverse" IDENT "=" expr
    expr    := "if" cmp "then" expr "else" expr | cmp
    cmp     := sum (("=="|"!="|"<"|"<="|">"|">=") sum)?
    sum     := prod (("+"|"-") prod)*
    prod    := unary (("*"|"/") unary)*
    unary   := ("-"|"+") unary | atom
    atom    := NUMBER | IDENT | "(" expr ")"

Errors are collected per line; a bad line is skipped and parsing resumes on
the next one, so a single call reports every broken statement.
"""
import math
from typing import List, Optional, Union

from dsl.document import InverseDecl, ModelDocument, NoiseDecl, SourceSpan, Statement, VarDecl
from dsl.lexer import KEYWORDS, Token, end_span, lex_line, split_lines
from scm.distributions import DISTRIBUTION_NAMES
from scm.errors import DslSyntaxError, ParseFailed, ScmError, UnknownDistribution
from scm.expr import BinOp, Compare, Expr, IfThenElse, Neg, Num, Ref, depth

MAX_NESTING = 100
# evaluation and formatting recurse once per level of the expression tree
MAX_DEPTH = 200

_COMPARISONS = {"==": "==", "=": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


class _LineParser:
    """Parses the tokens of one line into a statement"""

    def __init__(self, tokens: List[Token], line: str, lineno: int):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0
        self.eol = end_span(line, lineno)

    # token helpers

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def here(self) -> SourceSpan:
        tok = self.peek()
        return tok.span if tok else self.eol

    def fail(self, expected: str):
        tok = self.peek()
        raise DslSyntaxError(self.here(), expected, found=tok.text if tok else None)

    def accept(self, text: str) -> Optional[Token]:
        tok = self.peek()
        if tok is not None and tok.kind in ("op", "ident") and tok.text == text:
            self.pos += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            self.fail(f"'{text}'")
        return tok

    def identifier(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != "ident" or tok.text in KEYWORDS:
            self.fail("identifier")
        self.pos += 1
        return tok

    def number(self) -> float:
        sign = 1.0
        if self.accept("-"):
            sign = -1.0
        elif self.accept("+"):
            pass
        tok = self.peek()
        if tok is None or tok.kind != "number":
            self.fail("number")
        self.pos += 1
        return sign * self._literal(tok)

    def _literal(self, tok: Token) -> float:
        value = float(tok.text)
        if not math.isfinite(value):
            raise DslSyntaxError(tok.span, "finite number", found=tok.text)
        return value

    def end(self):
        if self.peek() is not None:
            self.fail("end of line")

    # statements

    def statement(self) -> Statement:
        head = self.peek()
        if head is None or head.kind != "ident" or head.text not in ("noise", "var", "inverse"):
            self.fail("'noise', 'var' or 'inverse'")
        self.pos += 1
        start = head.span
        if head.text == "noise":
            stmt = self.noise(start)
        else:
            name = self.identifier()
            self.expect("=")
            first = self.here()
            expr = self.expr()
            if depth(expr) > MAX_DEPTH:
                raise DslSyntaxError(first, f"an expression at most {MAX_DEPTH} operators deep")
            span = self._span_from(start)
            stmt = VarDecl(name.text, expr, span) if head.text == "var" else InverseDecl(name.text, expr, span)
        self.end()
        return stmt

    def noise(self, start: SourceSpan) -> NoiseDecl:
        name = self.identifier()
        self.expect("~")
        dist = self.peek()
        if dist is None or dist.kind != "ident":
            self.fail("distribution name")
        if dist.text not in DISTRIBUTION_NAMES:
            raise UnknownDistribution(dist.span, dist.text)
        self.pos += 1
        self.expect("(")
        args = [self.number()]
        while self.accept(","):
            args.append(self.number())
        self.expect(")")
        return NoiseDecl(name.text, dist.text, tuple(args), self._span_from(start))

    def _span_from(self, start: SourceSpan) -> SourceSpan:
        last = self.tokens[self.pos - 1]
        return SourceSpan(start.line, start.column, last.column + last.length - start.column)

    # expressions

    def expr(self) -> Expr:
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise DslSyntaxError(self.here(), f"at most {MAX_NESTING} levels of nesting")
        try:
            if_tok = self.accept("if")
            if if_tok:
                cond = self.comparison()
                self.expect("then")
                then = self.expr()
                self.expect("else")
                orelse = self.expr()
                return IfThenElse(cond, then, orelse, if_tok.span)
            return self.comparison()
        finally:
            self.depth -= 1

    def comparison(self) -> Expr:
        left = self.sum()
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text in _COMPARISONS:
            self.pos += 1
            right = self.sum()
            return Compare(_COMPARISONS[tok.text], left, right, tok.span)
        return left

    def sum(self) -> Expr:
        left = self.product()
        while True:
            tok = self.accept("+") or self.accept("-")
            if tok is None:
                return left
            left = BinOp(tok.text, left, self.product(), tok.span)

    def product(self) -> Expr:
        left = self.unary()
        while True:
            tok = self.accept("*") or self.accept("/")
            if tok is None:
                return left
            left = BinOp(tok.text, left, self.unary(), tok.span)

    def unary(self) -> Expr:
        tok = self.accept("-")
        if tok:
            nxt = self.peek()
            # "-2" is a literal, not a negation node
            if nxt is not None and nxt.kind == "number":
                self.pos += 1
                return Num(-self._literal(nxt), tok.span)
            return Neg(self._nested(self.unary), tok.span)
        if self.accept("+"):
            return self._nested(self.unary)
        return self.atom()

    def _nested(self, rule):
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise DslSyntaxError(self.here(), f"at most {MAX_NESTING} levels of nesting")
        try:
            return rule()
        finally:
            self.depth -= 1

    def atom(self) -> Expr:
        tok = self.peek()
        if tok is None:
            self.fail("expression")
        if tok.kind == "number":
            self.pos += 1
            return Num(self._literal(tok), tok.span)
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.pos += 1
            return Ref(tok.text, tok.span)
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail("expression")


def parse_model(text: Union[str, bytes]) -> ModelDocument:
    """
    Parse model text into a ModelDocument.

    Args:
        text: Model source; bytes are decoded as UTF-8 with replacement

    Raises:
        ParseFailed: carrying one diagnostic per broken line
    """
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", errors="replace")

    statements: List[Statement] = []
    diagnostics: List[ScmError] = []
    for lineno, line in enumerate(split_lines(text), start=1):
        try:
            tokens = lex_line(line, lineno)
            if not tokens:
                continue
            statements.append(_LineParser(tokens, line, lineno).statement())
        except (DslSyntaxError, UnknownDistribution) as e:
            diagnostics.append(e)

    if diagnostics:
        raise ParseFailed(diagnostics)
    return ModelDocument(tuple(statements))


def load_model(text: Union[str, bytes]):
    """Parse and validate model text in one step"""
    from scm.validation import validate

    return validate(parse_model(text))
