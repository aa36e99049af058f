"""
Parsed model document (dsl-v1): statements in source order, each with a span.

Spans are excluded from equality, so two documents compare equal when their
ASTs match regardless of whitespace, comments or layout.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

from scm.expr import Expr

DSL_VERSION = "dsl-v1"


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 0

    def to_dict(self) -> Dict[str, int]:
        return {"line": self.line, "column": self.column, "length": self.length}


@dataclass(frozen=True)
class NoiseDecl:
    name: str
    distribution: str
    args: Tuple[float, ...]
    span: Optional[SourceSpan] = field(default=None, compare=False)


@dataclass(frozen=True)
class VarDecl:
    name: str
    expr: Expr
    span: Optional[SourceSpan] = field(default=None, compare=False)


@dataclass(frozen=True)
class InverseDecl:
    """Inverse equation: the noise name on the left"""
    noise: str
    expr: Expr
    span: Optional[SourceSpan] = field(default=None, compare=False)


Statement = Union[NoiseDecl, VarDecl, InverseDecl]


@dataclass(frozen=True)
class ModelDocument:
    statements: Tuple[Statement, ...] = ()

    @property
    def noises(self) -> Tuple[NoiseDecl, ...]:
        return tuple(s for s in self.statements if isinstance(s, NoiseDecl))

    @property
    def variables(self) -> Tuple[VarDecl, ...]:
        return tuple(s for s in self.statements if isinstance(s, VarDecl))

    @property
    def inverses(self) -> Tuple[InverseDecl, ...]:
        return tuple(s for s in self.statements if isinstance(s, InverseDecl))
