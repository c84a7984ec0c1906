"""Statement and expression nodes for method and script bodies.

Bodies are deliberately tiny: object creation, literals, parameter/field
reads and message sends. Dispatch order is the only observable behaviour.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True, order=True)
class Loc:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True, order=True)
class Signature:
    """Selector name plus arity, rendered as ``name/arity``."""

    name: str
    arity: int

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("signature name must be non-empty")
        if self.arity < 0:
            raise ValueError("signature arity must be non-negative")

    @classmethod
    def parse(cls, text: str) -> Signature:
        name, sep, arity = text.rpartition("/")
        if not sep or not name or not arity.isdigit():
            raise ValueError(f"malformed signature {text!r}, expected name/arity")
        return cls(name, int(arity))

    def __str__(self) -> str:
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True)
class SelfRef:
    loc: Optional[Loc] = field(default=None, compare=False)

    def __str__(self) -> str:
        return "self"


@dataclass(frozen=True)
class ParamRef:
    name: str
    loc: Optional[Loc] = field(default=None, compare=False)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FieldRef:
    name: str
    loc: Optional[Loc] = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"field {self.name}"


@dataclass(frozen=True)
class IntLiteral:
    value: int
    loc: Optional[Loc] = field(default=None, compare=False)

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class StringLiteral:
    value: str
    loc: Optional[Loc] = field(default=None, compare=False)

    def __str__(self) -> str:
        return json.dumps(self.value)


@dataclass(frozen=True)
class New:
    class_name: str
    args: tuple[Expr, ...] = ()
    loc: Optional[Loc] = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"new {self.class_name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Send:
    receiver: Expr
    selector: Signature
    args: tuple[Expr, ...] = ()
    loc: Optional[Loc] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.selector.arity != len(self.args):
            raise ValueError(
                f"send of {self.selector} with {len(self.args)} argument(s)")

    def __str__(self) -> str:
        return f"{self.receiver}.{self.selector.name}({', '.join(map(str, self.args))})"


Expr = Union[SelfRef, ParamRef, FieldRef, IntLiteral, StringLiteral, New, Send]


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    loc: Optional[Loc] = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"{self.expr};"


@dataclass(frozen=True)
class Return:
    expr: Expr
    loc: Optional[Loc] = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"return {self.expr};"


@dataclass(frozen=True)
class Fail:
    tag: str
    loc: Optional[Loc] = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"fail {self.tag};"


Stmt = Union[ExprStmt, Return, Fail]


def walk_expr(expr: Expr):
    """Yield ``expr`` and every sub-expression, pre-order."""
    yield expr
    if isinstance(expr, Send):
        yield from walk_expr(expr.receiver)
        for arg in expr.args:
            yield from walk_expr(arg)
    elif isinstance(expr, New):
        for arg in expr.args:
            yield from walk_expr(arg)


def walk_body(body: tuple[Stmt, ...]):
    for stmt in body:
        if isinstance(stmt, (ExprStmt, Return)):
            yield from walk_expr(stmt.expr)
