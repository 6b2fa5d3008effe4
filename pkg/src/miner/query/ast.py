"""Syntax tree of queries.

Positions and checker annotations are excluded from equality, so two parses
of equivalent text compare equal regardless of layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .types import Type

Pos = tuple[int, int]


@dataclass(kw_only=True)
class Node:
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(kw_only=True)
class Expr(Node):
    ty: Optional[Type] = field(default=None, compare=False, repr=False)


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class FloatLit(Expr):
    value: float


@dataclass
class StrLit(Expr):
    value: str


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class Name(Expr):
    id: str


@dataclass
class Attr(Expr):
    obj: Expr
    name: str
    # set by the checker when ``obj`` names an enum type
    enum_value: Any = field(default=None, compare=False, repr=False)


@dataclass
class Index(Expr):
    obj: Expr
    index: Expr


@dataclass
class Call(Expr):
    func: str
    args: list[Expr]
    builtin: Any = field(default=None, compare=False, repr=False)


@dataclass
class Unary(Expr):
    op: str
    operand: Expr


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class Clause(Node):
    phase: str  # "before" | "after"
    binder: Optional[str]
    node_type: Optional[str]  # None is the wildcard
    body: "Stmt"


@dataclass
class VisitorLit(Expr):
    clauses: list[Clause]


@dataclass(kw_only=True)
class Stmt(Node):
    pass


@dataclass
class VarDecl(Stmt):
    name: str
    declared: Optional[Type]
    init: Optional[Expr]


@dataclass
class Assign(Stmt):
    name: str
    value: Expr


@dataclass
class If(Stmt):
    cond: Expr
    then: Stmt
    orelse: Optional[Stmt]


@dataclass
class Foreach(Stmt):
    var: str
    var_type: Type
    cond: Expr
    body: Stmt
    # arrays indexed by the loop variable; filled in by the checker
    bounds: list[Expr] = field(default_factory=list, compare=False, repr=False)


@dataclass
class Stop(Stmt):
    pass


@dataclass
class Emit(Stmt):
    output: str
    indices: list[Expr]
    value: Expr
    weight: Optional[Expr]


@dataclass
class Visit(Stmt):
    target: Expr
    visitor: Optional[Expr]


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class Block(Stmt):
    statements: list[Stmt]


@dataclass
class OutputDecl(Node):
    name: str
    agg_kind: str  # sum, mean, collection, set, top
    top_n: Optional[int]
    indices: list[tuple[str, Type]]
    value_type: Type
    weight_type: Optional[Type]


@dataclass
class Program(Node):
    outputs: list[OutputDecl]
    statements: list[Stmt]
