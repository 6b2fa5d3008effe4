"""Render a parsed program back to query text.

Binary and unary expressions are fully parenthesized, so re-parsing the
output yields the same tree without relying on precedence.
"""
from __future__ import annotations

from . import ast as A
from .types import Array, Type


def _type(t: Type) -> str:
    if isinstance(t, Array):
        return f"array of {_type(t.elem)}"
    return str(t)


def _str(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def expr(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.FloatLit):
        return repr(e.value)
    if isinstance(e, A.StrLit):
        return _str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.Name):
        return e.id
    if isinstance(e, A.Attr):
        return f"{expr(e.obj)}.{e.name}"
    if isinstance(e, A.Index):
        return f"{expr(e.obj)}[{expr(e.index)}]"
    if isinstance(e, A.Call):
        return f"{e.func}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, A.Unary):
        return f"({e.op}{expr(e.operand)})"
    if isinstance(e, A.Binary):
        return f"({expr(e.left)} {e.op} {expr(e.right)})"
    if isinstance(e, A.VisitorLit):
        clauses = []
        for c in e.clauses:
            head = "_" if c.node_type is None else f"{c.binder}: {c.node_type}"
            clauses.append(f"{c.phase} {head} -> {stmt(c.body)}")
        return "visitor { " + " ".join(clauses) + " }"
    raise TypeError(f"not an expression: {e!r}")


def stmt(s: A.Stmt) -> str:
    if isinstance(s, A.VarDecl):
        if s.declared is None:
            return f"{s.name} := {expr(s.init)};"
        init = f" = {expr(s.init)}" if s.init is not None else ""
        return f"{s.name}: {_type(s.declared)}{init};"
    if isinstance(s, A.Assign):
        return f"{s.name} = {expr(s.value)};"
    if isinstance(s, A.If):
        text = f"if ({expr(s.cond)}) {stmt(s.then)}"
        if s.orelse is not None:
            text += f" else {stmt(s.orelse)}"
        return text
    if isinstance(s, A.Foreach):
        return f"foreach ({s.var}: {_type(s.var_type)}; {expr(s.cond)}) {stmt(s.body)}"
    if isinstance(s, A.Stop):
        return "stop;"
    if isinstance(s, A.Emit):
        keys = "".join(f"[{expr(i)}]" for i in s.indices)
        weight = f" weight {expr(s.weight)}" if s.weight is not None else ""
        return f"{s.output}{keys} << {expr(s.value)}{weight};"
    if isinstance(s, A.Visit):
        extra = f", {expr(s.visitor)}" if s.visitor is not None else ""
        return f"visit({expr(s.target)}{extra});"
    if isinstance(s, A.ExprStmt):
        return f"{expr(s.expr)};"
    if isinstance(s, A.Block):
        return "{ " + " ".join(stmt(x) for x in s.statements) + " }"
    raise TypeError(f"not a statement: {s!r}")


def output_decl(d: A.OutputDecl) -> str:
    kind = f"top({d.top_n})" if d.agg_kind == "top" else d.agg_kind
    idx = "".join(f"[{label}: {_type(t)}]" for label, t in d.indices)
    weight = f" weight {_type(d.weight_type)}" if d.weight_type is not None else ""
    return f"{d.name}: output {kind}{idx} of {_type(d.value_type)}{weight};"


def pretty_print(program: A.Program) -> str:
    lines = [output_decl(d) for d in program.outputs]
    lines += [stmt(s) for s in program.statements]
    return "\n".join(lines) + ("\n" if lines else "")
