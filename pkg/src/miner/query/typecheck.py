"""Static checking: name resolution, typing, and the rules for emit/visit/stop.

The checker works on a deep copy of the program and annotates that copy, so
checking is free of side effects on the caller's tree.
"""
from __future__ import annotations

import copy
import difflib
from dataclasses import dataclass, field
from typing import Any, Optional

from .. import schema
from . import ast as A
from .lexer import Diagnostic, QueryError
from .types import (
    ANY,
    ANY_ARRAY,
    BOOL,
    ERROR,
    FIELDS,
    ENUM_MEMBERS,
    FLOAT,
    INT,
    NUMERIC,
    STRING,
    TIME,
    VISITOR,
    VOID,
    Array,
    EnumType,
    Named,
    NodeType,
    Scalar,
    Type,
    assignable,
)

AGG_NUMERIC = ("sum", "mean")


@dataclass
class TypedProgram:
    program: A.Program
    registry: Any
    outputs: dict[str, A.OutputDecl] = field(default_factory=dict)


class _Scope:
    def __init__(self, parent: Optional["_Scope"] = None) -> None:
        self.vars: dict[str, Type] = {}
        self.parent = parent

    def lookup(self, name: str) -> Optional[Type]:
        s: Optional[_Scope] = self
        while s is not None:
            if name in s.vars:
                return s.vars[name]
            s = s.parent
        return None


class Checker:
    def __init__(self, registry) -> None:
        self.registry = registry
        self.errors: list[Diagnostic] = []
        self.outputs: dict[str, A.OutputDecl] = {}
        # innermost visitor clause phase, or None outside any clause
        self.phase: Optional[str] = None

    def err(self, pos, message: str) -> None:
        self.errors.append(Diagnostic(pos[0], pos[1], message))

    # types

    def resolve(self, t: Type, pos) -> Type:
        if isinstance(t, Array):
            inner = self.resolve(t.elem, pos)
            return ERROR if inner == ERROR else Array(inner)
        if isinstance(t, Named):
            if t.name in FIELDS:
                return NodeType(t.name)
            if t.name in ENUM_MEMBERS:
                return EnumType(t.name)
            self.err(pos, f"unknown type '{t.name}'")
            return ERROR
        return t

    # program

    def check(self, prog: A.Program) -> None:
        for out in prog.outputs:
            self.check_output(out)
            self.outputs[out.name] = out
        top = _Scope()
        top.vars["input"] = NodeType("Project")
        for st in prog.statements:
            self.stmt(st, top)

    def check_output(self, out: A.OutputDecl) -> None:
        if out.name == "input":
            self.err(out.pos, "'input' is reserved and cannot name an output")
        if out.agg_kind in AGG_NUMERIC and out.value_type not in NUMERIC:
            self.err(out.pos, f"{out.agg_kind} output '{out.name}' must be of int or float, not {out.value_type}")
        if out.agg_kind == "top":
            if out.weight_type is None:
                self.err(out.pos, f"top output '{out.name}' requires a weight type")
            elif out.weight_type not in NUMERIC:
                self.err(out.pos, f"weight of '{out.name}' must be int or float, not {out.weight_type}")
        elif out.weight_type is not None:
            self.err(out.pos, f"only top outputs take a weight, '{out.name}' is {out.agg_kind}")

    # statements

    def stmt(self, st: A.Stmt, scope: _Scope) -> None:
        method = getattr(self, "stmt_" + type(st).__name__)
        method(st, scope)

    def declare(self, scope: _Scope, name: str, t: Type, pos) -> None:
        if name == "input":
            self.err(pos, "'input' is reserved and cannot be redeclared")
            return
        if name in self.outputs:
            self.err(pos, f"'{name}' is already declared as an output")
            return
        if name in scope.vars:
            self.err(pos, f"'{name}' is already declared in this scope")
            return
        if name in ENUM_MEMBERS:
            self.err(pos, f"'{name}' names an enum type")
            return
        scope.vars[name] = t

    def stmt_VarDecl(self, st: A.VarDecl, scope: _Scope) -> None:
        if st.declared is not None:
            st.declared = self.resolve(st.declared, st.pos)
        init_t = self.expr(st.init, scope) if st.init is not None else None
        if st.declared is None:
            t = init_t
            if t == VOID:
                self.err(st.pos, f"cannot infer a type for '{st.name}' from a {t} expression")
                t = ERROR
        else:
            t = st.declared
            if init_t is not None and not assignable(t, init_t):
                self.err(st.init.pos, f"type mismatch: '{st.name}' is {t} but value is {init_t}")
        self.declare(scope, st.name, t, st.pos)

    def stmt_Assign(self, st: A.Assign, scope: _Scope) -> None:
        t = scope.lookup(st.name)
        vt = self.expr(st.value, scope)
        if st.name == "input":
            self.err(st.pos, "'input' cannot be assigned")
        elif t is None:
            self.err(st.pos, f"unknown variable '{st.name}'")
        elif not assignable(t, vt):
            self.err(st.value.pos, f"type mismatch: '{st.name}' is {t} but value is {vt}")

    def cond(self, e: A.Expr, scope: _Scope, what: str) -> None:
        t = self.expr(e, scope)
        if not assignable(BOOL, t):
            self.err(e.pos, f"{what} condition must be bool, not {t}")

    def stmt_If(self, st: A.If, scope: _Scope) -> None:
        self.cond(st.cond, scope, "if")
        self.stmt(st.then, _Scope(scope))
        if st.orelse is not None:
            self.stmt(st.orelse, _Scope(scope))

    def stmt_Foreach(self, st: A.Foreach, scope: _Scope) -> None:
        st.var_type = self.resolve(st.var_type, st.pos)
        if st.var_type not in (INT, ERROR):
            self.err(st.pos, f"foreach variable '{st.var}' must be int, not {st.var_type}")
        inner = _Scope(scope)
        self.declare(inner, st.var, INT, st.pos)
        self.cond(st.cond, inner, "foreach")
        st.bounds = _indexed_by(st.cond, st.var)
        if not st.bounds:
            self.err(st.cond.pos, f"foreach condition must index an array with '{st.var}'")
        self.stmt(st.body, _Scope(inner))

    def stmt_Stop(self, st: A.Stop, scope: _Scope) -> None:
        if self.phase is None:
            self.err(st.pos, "'stop' is only allowed inside a before clause")
        elif self.phase != "before":
            self.err(st.pos, "'stop' is not allowed in an after clause")

    def stmt_Emit(self, st: A.Emit, scope: _Scope) -> None:
        out = self.outputs.get(st.output)
        idx_types = [self.expr(e, scope) for e in st.indices]
        vt = self.expr(st.value, scope)
        wt = self.expr(st.weight, scope) if st.weight is not None else None
        if out is None:
            self.err(st.pos, f"'{st.output}' is not an output variable")
            return
        if len(st.indices) != len(out.indices):
            self.err(st.pos, f"output '{out.name}' takes {len(out.indices)} index(es), got {len(st.indices)}")
        else:
            for e, t, (label, want) in zip(st.indices, idx_types, out.indices):
                if not assignable(want, t) or (want == FLOAT and t == INT):
                    self.err(e.pos, f"index '{label}' of '{out.name}' is {want}, got {t}")
        if not assignable(out.value_type, vt):
            self.err(st.value.pos, f"type mismatch: output '{out.name}' is of {out.value_type}, got {vt}")
        if out.agg_kind == "top":
            if st.weight is None:
                self.err(st.pos, f"top output '{out.name}' requires 'weight'")
            elif out.weight_type is not None and not assignable(out.weight_type, wt):
                self.err(st.weight.pos, f"weight of '{out.name}' is {out.weight_type}, got {wt}")
        elif st.weight is not None:
            self.err(st.weight.pos, f"output '{out.name}' is {out.agg_kind} and takes no weight")

    def stmt_Visit(self, st: A.Visit, scope: _Scope) -> None:
        t = self.expr(st.target, scope)
        if t != ERROR and not isinstance(t, NodeType):
            self.err(st.target.pos, f"visit target must be a schema node, not {t}")
        if st.visitor is None:
            if self.phase is None:
                self.err(st.pos, "visit(x) without a visitor is only allowed inside a visitor clause")
        else:
            vt = self.expr(st.visitor, scope)
            if vt not in (VISITOR, ERROR):
                self.err(st.visitor.pos, f"second argument of visit must be a visitor, not {vt}")

    def stmt_ExprStmt(self, st: A.ExprStmt, scope: _Scope) -> None:
        self.expr(st.expr, scope)

    def stmt_Block(self, st: A.Block, scope: _Scope) -> None:
        inner = _Scope(scope)
        for s in st.statements:
            self.stmt(s, inner)

    # expressions

    def expr(self, e: A.Expr, scope: _Scope) -> Type:
        t = getattr(self, "expr_" + type(e).__name__)(e, scope)
        e.ty = t
        return t

    def expr_IntLit(self, e, scope):
        return INT

    def expr_FloatLit(self, e, scope):
        return FLOAT

    def expr_StrLit(self, e, scope):
        return STRING

    def expr_BoolLit(self, e, scope):
        return BOOL

    def expr_Name(self, e: A.Name, scope: _Scope) -> Type:
        t = scope.lookup(e.id)
        if t is not None:
            return t
        if e.id in ENUM_MEMBERS:
            self.err(e.pos, f"enum type '{e.id}' used as a value; write {e.id}.<MEMBER>")
        elif e.id in self.outputs:
            self.err(e.pos, f"output '{e.id}' can only be used on the left of '<<'")
        else:
            self.err(e.pos, f"unknown name '{e.id}'")
        return ERROR

    def expr_Attr(self, e: A.Attr, scope: _Scope) -> Type:
        if isinstance(e.obj, A.Name) and e.obj.id in ENUM_MEMBERS and scope.lookup(e.obj.id) is None:
            members = ENUM_MEMBERS[e.obj.id]
            e.obj.ty = EnumType(e.obj.id)
            if e.name not in members:
                close = difflib.get_close_matches(e.name, members, n=3)
                hint = f" (did you mean {', '.join(close)}?)" if close else ""
                self.err(e.pos, f"unknown member '{e.name}' of {e.obj.id}{hint}; valid members: {', '.join(members)}")
                return ERROR
            e.enum_value = schema.ENUMS[e.obj.id][e.name]
            return EnumType(e.obj.id)
        t = self.expr(e.obj, scope)
        if t == ERROR:
            return ERROR
        if not isinstance(t, NodeType):
            self.err(e.pos, f"{t} has no attribute '{e.name}'")
            return ERROR
        fields = FIELDS[t.name]
        if e.name not in fields:
            self.err(e.pos, f"{t.name} has no attribute '{e.name}'; attributes: {', '.join(fields)}")
            return ERROR
        return fields[e.name]

    def expr_Index(self, e: A.Index, scope: _Scope) -> Type:
        t = self.expr(e.obj, scope)
        it = self.expr(e.index, scope)
        if it not in (INT, ERROR):
            self.err(e.index.pos, f"array index must be int, not {it}")
        if t == ERROR:
            return ERROR
        if not isinstance(t, Array):
            self.err(e.pos, f"cannot index a value of type {t}")
            return ERROR
        return t.elem

    def expr_Call(self, e: A.Call, scope: _Scope) -> Type:
        arg_types = [self.expr(a, scope) for a in e.args]
        fn = self.registry.lookup(e.func)
        if fn is None:
            self.err(e.pos, f"unknown function '{e.func}'")
            return ERROR
        e.builtin = fn
        if not fn.accepts_arity(len(e.args)):
            want = str(len(fn.params)) if fn.min_args == len(fn.params) else f"{fn.min_args}..{len(fn.params)}"
            self.err(e.pos, f"{e.func}() takes {want} argument(s), got {len(e.args)}")
            return fn.returns
        for a, at, pt in zip(e.args, arg_types, fn.params):
            if pt == ANY:
                continue
            if pt == ANY_ARRAY:
                if at != ERROR and not isinstance(at, Array):
                    self.err(a.pos, f"{e.func}() expects an array, got {at}")
                continue
            if not assignable(pt, at):
                self.err(a.pos, f"{e.func}() expects {pt}, got {at}")
        return fn.returns

    def expr_Unary(self, e: A.Unary, scope: _Scope) -> Type:
        t = self.expr(e.operand, scope)
        if t == ERROR:
            return ERROR
        if e.op == "!":
            if t != BOOL:
                self.err(e.pos, f"operator '!' needs bool, not {t}")
                return ERROR
            return BOOL
        if t not in NUMERIC:
            self.err(e.pos, f"unary '-' needs int or float, not {t}")
            return ERROR
        return t

    def expr_Binary(self, e: A.Binary, scope: _Scope) -> Type:
        lt = self.expr(e.left, scope)
        rt = self.expr(e.right, scope)
        if ERROR in (lt, rt):
            return ERROR
        op = e.op
        bad = f"operator '{op}' cannot combine {lt} and {rt}"
        if op in ("&&", "||"):
            if lt == BOOL and rt == BOOL:
                return BOOL
        elif op in ("+", "-", "*", "/"):
            if lt in NUMERIC and rt in NUMERIC:
                return FLOAT if FLOAT in (lt, rt) else INT
            if op == "+" and lt == STRING and rt == STRING:
                return STRING
        elif op in ("<", "<=", ">", ">="):
            if (lt in NUMERIC and rt in NUMERIC) or (lt == rt and lt in (STRING, TIME)):
                return BOOL
        elif op in ("==", "!="):
            if (lt in NUMERIC and rt in NUMERIC) or lt == rt:
                return BOOL
        self.err(e.pos, bad)
        return ERROR

    def expr_VisitorLit(self, e: A.VisitorLit, scope: _Scope) -> Type:
        seen: dict[tuple[str, Optional[str]], A.Clause] = {}
        for c in e.clauses:
            key = (c.phase, c.node_type)
            if key in seen:
                first = seen[key].pos
                what = c.node_type or "_"
                self.err(c.pos, f"duplicate {c.phase} clause for {what} (first at {first[0]}:{first[1]})")
            seen[key] = c
            inner = _Scope(scope)
            if c.node_type is not None:
                if c.node_type not in FIELDS:
                    self.err(c.pos, f"unknown node type '{c.node_type}'")
                    inner.vars[c.binder] = ERROR
                else:
                    self.declare(inner, c.binder, NodeType(c.node_type), c.pos)
            saved = self.phase
            self.phase = c.phase
            self.stmt(c.body, inner)
            self.phase = saved
        return VISITOR


def _mentions(e: A.Expr, name: str) -> bool:
    if isinstance(e, A.Name):
        return e.id == name
    return any(_mentions(c, name) for c in _children(e))


def _children(e: A.Expr) -> list[A.Expr]:
    if isinstance(e, A.Attr):
        return [e.obj]
    if isinstance(e, A.Index):
        return [e.obj, e.index]
    if isinstance(e, A.Call):
        return list(e.args)
    if isinstance(e, A.Unary):
        return [e.operand]
    if isinstance(e, A.Binary):
        return [e.left, e.right]
    return []


def _indexed_by(e: A.Expr, var: str, guarded: bool = False) -> list[tuple[A.Expr, bool]]:
    """Arrays indexed directly by ``var`` inside ``e``, each flagged if under def()."""
    found = []
    if (isinstance(e, A.Index) and isinstance(e.index, A.Name) and e.index.id == var
            and not _mentions(e.obj, var) and isinstance(e.obj.ty, Array)):
        found.append((e.obj, guarded))
    if isinstance(e, A.Call) and e.func == "def":
        guarded = True
    for c in _children(e):
        found.extend(_indexed_by(c, var, guarded))
    return found


def typecheck(program: A.Program, builtins=None) -> TypedProgram:
    """Check ``program``; raise QueryError listing every problem found."""
    if builtins is None:
        from ..engine.builtins import default_registry

        builtins = default_registry()
    prog = copy.deepcopy(program)
    checker = Checker(builtins)
    checker.check(prog)
    if checker.errors:
        raise QueryError(checker.errors)
    return TypedProgram(prog, builtins, checker.outputs)
