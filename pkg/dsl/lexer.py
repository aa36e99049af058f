"""
Line lexer for the model DSL.

The DSL is statement-per-line, so lexing works one line at a time and a bad
character only costs the rest of its own line.
"""
import re
from dataclasses import dataclass
from typing import List

from dsl.document import SourceSpan
from scm.errors import DslSyntaxError

KEYWORDS = frozenset({"noise", "var", "inverse", "if", "then", "else"})

_TOKEN_SPECS = [
    ("number", r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"),
    ("ident", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("op", r"==|!=|<=|>=|[≠≤≥<>=+\-*/(),~]"),
    ("comment", r"#.*"),
    ("space", r"[ \t\f\v]+"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{kind}>{pattern})" for kind, pattern in _TOKEN_SPECS))
_NEWLINE_RE = re.compile(r"\r\n|\n|\r")

# unicode spellings normalised to the canonical ASCII operator
_OP_ALIASES = {"≠": "!=", "≤": "<=", "≥": ">="}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int
    length: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, self.length)


def split_lines(text: str) -> List[str]:
    """Split on LF, CRLF or CR only"""
    return _NEWLINE_RE.split(text)


def lex_line(line: str, lineno: int) -> List[Token]:
    """
    Tokenize one line; comments and whitespace are dropped.

    Raises:
        DslSyntaxError: on a character no token starts with
    """
    tokens: List[Token] = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if not m:
            raise DslSyntaxError(SourceSpan(lineno, pos + 1, 1), "a token", found=line[pos])
        kind = m.lastgroup
        text = m.group()
        length = len(text)
        if kind == "op":
            text = _OP_ALIASES.get(text, text)
        if kind not in ("comment", "space"):
            tokens.append(Token(kind, text, lineno, pos + 1, length))
        pos = m.end()
    return tokens


def end_span(line: str, lineno: int) -> SourceSpan:
    """Zero-length span just past the last character of a line"""
    return SourceSpan(lineno, len(line) + 1, 0)
