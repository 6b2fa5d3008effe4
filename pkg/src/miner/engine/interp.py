"""Tree-walking evaluation of a typed program against one project at a time."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

from .. import schema
from ..errors import QueryRuntimeError
from ..query import ast as A
from ..query.types import BOOL, FLOAT, INT, STRING, TIME, Array, Type
from .aggregate import INT64_MAX, INT64_MIN, AggregateState, OutputSpec, agg_update, render_key

_UNSET = object()


class _Stop(Exception):
    """Raised by ``stop``; caught by the enclosing before clause."""


class Scope:
    __slots__ = ("vars", "parent")

    def __init__(self, parent: Optional["Scope"] = None) -> None:
        self.vars: dict[str, Any] = {}
        self.parent = parent

    def get(self, name: str, pos) -> Any:
        s = self
        while s is not None:
            if name in s.vars:
                v = s.vars[name]
                if v is _UNSET:
                    raise QueryRuntimeError(f"variable '{name}' read before assignment", pos)
                return v
            s = s.parent
        raise QueryRuntimeError(f"unbound name '{name}'", pos)

    def set(self, name: str, value: Any) -> None:
        s = self
        while s is not None:
            if name in s.vars:
                s.vars[name] = value
                return
            s = s.parent
        raise KeyError(name)


def _children_of(node) -> tuple[str, ...]:
    return {
        "Project": ("repository",),
        "CodeRepository": ("revisions",),
        "Revision": ("files",),
        "ChangedFile": (),  # handled specially: the stored AST
        "ASTRoot": ("namespace",),
        "Namespace": ("declarations",),
        "Declaration": ("modifiers", "fields", "methods", "nested"),
        "Method": ("modifiers", "params", "statements"),
        "Variable": ("modifiers",),
        "Statement": ("expressions", "statements"),
        "Expression": ("expressions",),
        "Modifier": (),
    }[node]


CHILD_FIELDS = {name: _children_of(name) for name in schema.NODE_TYPES}
# node type -> direct child node types
_CHILD_TYPES = {
    "Project": {"CodeRepository"},
    "CodeRepository": {"Revision"},
    "Revision": {"ChangedFile"},
    "ChangedFile": {"ASTRoot"},
    "ASTRoot": {"Namespace"},
    "Namespace": {"Declaration"},
    "Declaration": {"Modifier", "Variable", "Method", "Declaration"},
    "Method": {"Modifier", "Variable", "Statement"},
    "Variable": {"Modifier"},
    "Statement": {"Expression", "Statement"},
    "Expression": {"Expression"},
    "Modifier": set(),
}


def _reachable() -> dict[str, frozenset[str]]:
    out = {}
    for start in _CHILD_TYPES:
        seen = {start}
        todo = [start]
        while todo:
            for c in _CHILD_TYPES[todo.pop()]:
                if c not in seen:
                    seen.add(c)
                    todo.append(c)
        out[start] = frozenset(seen)
    return out


REACHABLE = _reachable()


def ast_for(dataset, f: schema.ChangedFile) -> Optional[schema.ASTRoot]:
    if (f.file_kind is not schema.FileKind.SOURCE_JAVA or f.parse_error or not f.blob_hash
            or f.change_kind is schema.ChangeKind.DELETED):
        return None
    return dataset.ast(f.blob_hash)


def children(node, dataset) -> Iterable:
    name = type(node).__name__
    if name == "ChangedFile":
        root = ast_for(dataset, node)
        return () if root is None else (root,)
    out = []
    for fname in CHILD_FIELDS[name]:
        v = getattr(node, fname)
        if isinstance(v, list):
            out.extend(v)
        elif v is not None:
            out.append(v)
    return out


@dataclass
class Visitor:
    before: dict[Optional[str], A.Clause]
    after: dict[Optional[str], A.Clause]
    scope: Scope
    # node types a clause can fire on; None when a wildcard clause exists
    targets: Optional[frozenset[str]]

    def wants(self, type_name: str) -> bool:
        return self.targets is None or not self.targets.isdisjoint(REACHABLE[type_name])


class Context:
    """What a builtin with ``needs_context`` receives."""

    def __init__(self, dataset, project) -> None:
        self.dataset = dataset
        self.project = project


def zero_value(t: Type):
    if t == INT or t == TIME:
        return 0
    if t == FLOAT:
        return 0.0
    if t == STRING:
        return ""
    if t == BOOL:
        return False
    if isinstance(t, Array):
        return []
    return _UNSET


def _check_int(v: int, pos) -> int:
    if not INT64_MIN <= v <= INT64_MAX:
        raise QueryRuntimeError("integer overflow", pos)
    return v


class Interpreter:
    def __init__(self, program: A.Program, outputs: dict[str, A.OutputDecl], dataset) -> None:
        self.program = program
        self.dataset = dataset
        self.specs = {name: OutputSpec.from_decl(d) for name, d in outputs.items()}
        self.state: Optional[AggregateState] = None
        self.project = None
        self.visitors: list[Visitor] = []

    # entry point

    def run_project(self, project: schema.Project) -> AggregateState:
        """Run the top-level statements once for ``project``; errors propagate."""
        self.state = AggregateState.empty(self.specs)
        self.project = project
        self.visitors = []
        scope = Scope()
        scope.vars["input"] = project
        try:
            for st in self.program.statements:
                self.exec(st, scope)
        except RecursionError:
            raise QueryRuntimeError("evaluation nested too deeply", (0, 0)) from None
        return self.state

    # statements

    def exec(self, st: A.Stmt, scope: Scope) -> None:
        getattr(self, "exec_" + type(st).__name__)(st, scope)

    def exec_VarDecl(self, st: A.VarDecl, scope: Scope) -> None:
        if st.init is None:
            scope.vars[st.name] = zero_value(st.declared)
            return
        v = self.eval(st.init, scope)
        if st.declared == FLOAT and isinstance(v, int):
            v = float(v)
        scope.vars[st.name] = v

    def exec_Assign(self, st: A.Assign, scope: Scope) -> None:
        v = self.eval(st.value, scope)
        if isinstance(v, int) and not isinstance(v, bool) and isinstance(self._current(scope, st.name), float):
            v = float(v)
        scope.set(st.name, v)

    @staticmethod
    def _current(scope: Scope, name: str):
        s = scope
        while s is not None:
            if name in s.vars:
                return s.vars[name]
            s = s.parent
        return None

    def exec_If(self, st: A.If, scope: Scope) -> None:
        if self.eval(st.cond, scope):
            self.exec(st.then, Scope(scope))
        elif st.orelse is not None:
            self.exec(st.orelse, Scope(scope))

    def exec_Foreach(self, st: A.Foreach, scope: Scope) -> None:
        inner = Scope(scope)
        inner.vars[st.var] = 0
        n = 0
        for bound, guarded in st.bounds:
            try:
                arr = self.eval(bound, inner)
            except QueryRuntimeError:
                if not guarded:
                    raise
                continue
            n = max(n, len(arr))
        for i in range(n):
            inner = Scope(scope)
            inner.vars[st.var] = i
            if self.eval(st.cond, inner):
                self.exec(st.body, Scope(inner))

    def exec_Stop(self, st: A.Stop, scope: Scope) -> None:
        raise _Stop()

    def exec_Emit(self, st: A.Emit, scope: Scope) -> None:
        keys = tuple(render_key(self.eval(e, scope), e.pos) for e in st.indices)
        value = self.eval(st.value, scope)
        weight = self.eval(st.weight, scope) if st.weight is not None else None
        agg_update(self.state, st.output, keys, value, weight, st.pos)

    def exec_Visit(self, st: A.Visit, scope: Scope) -> None:
        node = self.eval(st.target, scope)
        if st.visitor is None:
            visitor = self.visitors[-1]
        else:
            visitor = self.eval(st.visitor, scope)
        self.dispatch(node, visitor)

    def exec_ExprStmt(self, st: A.ExprStmt, scope: Scope) -> None:
        self.eval(st.expr, scope)

    def exec_Block(self, st: A.Block, scope: Scope) -> None:
        inner = Scope(scope)
        for s in st.statements:
            self.exec(s, inner)

    # traversal

    def dispatch(self, node, visitor: Visitor) -> None:
        tname = type(node).__name__
        clause = visitor.before.get(tname) or visitor.before.get(None)
        stopped = False
        if clause is not None:
            stopped = self.run_clause(clause, node, visitor)
        if not stopped:
            for child in children(node, self.dataset):
                if visitor.wants(type(child).__name__):
                    self.dispatch(child, visitor)
        clause = visitor.after.get(tname) or visitor.after.get(None)
        if clause is not None:
            self.run_clause(clause, node, visitor)

    def run_clause(self, clause: A.Clause, node, visitor: Visitor) -> bool:
        scope = Scope(visitor.scope)
        if clause.binder is not None:
            scope.vars[clause.binder] = node
        self.visitors.append(visitor)
        try:
            self.exec(clause.body, scope)
        except _Stop:
            return True
        finally:
            self.visitors.pop()
        return False

    # expressions

    def eval(self, e: A.Expr, scope: Scope):
        return getattr(self, "eval_" + type(e).__name__)(e, scope)

    def eval_IntLit(self, e, scope):
        return e.value

    eval_FloatLit = eval_StrLit = eval_BoolLit = eval_IntLit

    def eval_Name(self, e: A.Name, scope: Scope):
        return scope.get(e.id, e.pos)

    def eval_Attr(self, e: A.Attr, scope: Scope):
        if e.enum_value is not None:
            return e.enum_value
        obj = self.eval(e.obj, scope)
        v = getattr(obj, e.name)
        if v is None:
            raise QueryRuntimeError(f"{type(obj).__name__}.{e.name} is absent", e.pos)
        return v

    def eval_Index(self, e: A.Index, scope: Scope):
        arr = self.eval(e.obj, scope)
        i = self.eval(e.index, scope)
        if not 0 <= i < len(arr):
            raise QueryRuntimeError(f"index {i} out of range for array of length {len(arr)}", e.pos)
        return arr[i]

    def eval_Call(self, e: A.Call, scope: Scope):
        fn = e.builtin
        if fn.special:  # def()
            try:
                self.eval(e.args[0], scope)
            except QueryRuntimeError:
                return False
            return True
        args = [self.eval(a, scope) for a in e.args]
        for i, (a, pt) in enumerate(zip(args, fn.params)):
            if pt == FLOAT and isinstance(a, int) and not isinstance(a, bool):
                args[i] = float(a)
        try:
            if fn.needs_context:
                return fn.impl(Context(self.dataset, self.project), *args)
            return fn.impl(*args)
        except QueryRuntimeError as exc:
            if exc.pos == (0, 0):
                exc.pos = e.pos
            raise
        except Exception as exc:  # a user builtin failing is a per-project fault
            raise QueryRuntimeError(f"{e.func}(): {exc}", e.pos) from None

    def eval_Unary(self, e: A.Unary, scope: Scope):
        v = self.eval(e.operand, scope)
        if e.op == "!":
            return not v
        if isinstance(v, int):
            return _check_int(-v, e.pos)
        return -v

    def eval_Binary(self, e: A.Binary, scope: Scope):
        op = e.op
        if op == "&&":
            return bool(self.eval(e.left, scope)) and bool(self.eval(e.right, scope))
        if op == "||":
            return bool(self.eval(e.left, scope)) or bool(self.eval(e.right, scope))
        a = self.eval(e.left, scope)
        b = self.eval(e.right, scope)
        return _BINOPS[op](a, b, e)

    def eval_VisitorLit(self, e: A.VisitorLit, scope: Scope) -> Visitor:
        before = {c.node_type: c for c in e.clauses if c.phase == "before"}
        after = {c.node_type: c for c in e.clauses if c.phase == "after"}
        types = {c.node_type for c in e.clauses}
        return Visitor(before, after, scope, None if None in types else frozenset(types))


def _both_int(a, b) -> bool:
    return isinstance(a, int) and isinstance(b, int)


def _add(a, b, e):
    if isinstance(a, str):
        return a + b
    return _check_int(a + b, e.pos) if _both_int(a, b) else float(a) + float(b)


def _sub(a, b, e):
    return _check_int(a - b, e.pos) if _both_int(a, b) else float(a) - float(b)


def _mul(a, b, e):
    return _check_int(a * b, e.pos) if _both_int(a, b) else float(a) * float(b)


def _div(a, b, e):
    if b == 0:
        raise QueryRuntimeError("division by zero", e.pos)
    if _both_int(a, b):
        q = abs(a) // abs(b)  # truncates toward zero
        return _check_int(q if (a < 0) == (b < 0) else -q, e.pos)
    return float(a) / float(b)


_NODE_CLASSES = tuple(schema.NODE_TYPES.values())


def _eq(a, b, e):
    if isinstance(a, _NODE_CLASSES):
        return a is b
    return a == b


_BINOPS: dict[str, Callable] = {
    "+": _add,
    "-": _sub,
    "*": _mul,
    "/": _div,
    "==": _eq,
    "!=": lambda a, b, e: not _eq(a, b, e),
    "<": lambda a, b, e: a < b,
    "<=": lambda a, b, e: a <= b,
    ">": lambda a, b, e: a > b,
    ">=": lambda a, b, e: a >= b,
}
