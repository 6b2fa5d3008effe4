"""Recursive-descent parser for queries.

Grammar (LL, no backtracking)::

    program    := { outputDecl } { statement }
    outputDecl := IDENT ":" "output" aggKind { "[" IDENT ":" scalarType "]" }
                  "of" scalarType [ "weight" scalarType ] ";"
    aggKind    := "sum" | "mean" | "collection" | "set" | "top" "(" INT ")"
    statement  := IDENT ":=" expr ";" | IDENT ":" type [ "=" expr ] ";"
                | IDENT "=" expr ";"
                | "if" "(" expr ")" statement [ "else" statement ]
                | "foreach" "(" IDENT ":" type ";" expr ")" statement
                | "stop" ";" | "visit" "(" expr [ "," expr ] ")" ";"
                | "{" { statement } "}"
                | expr "<<" expr [ "weight" expr ] ";"      (emit; lhs is out[..][..])
                | expr ";"
    clause     := ("before" | "after") ( IDENT ":" IDENT | "_" ) "->" statement
"""
from __future__ import annotations

from typing import Optional

from . import ast as A
from .lexer import Diagnostic, QueryError, Token, TokenKind, lex
from .types import SCALARS, Array, Named, Type

AGG_KINDS = ("sum", "mean", "collection", "set", "top")
SCALAR_NAMES = tuple(SCALARS)
# binary operators by increasing precedence
LEVELS = (("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-"), ("*", "/"))


def _describe(expected) -> str:
    items = sorted(set(expected))
    if len(items) == 1:
        return items[0]
    return "one of " + ", ".join(items)


class Parser:
    def __init__(self, tokens: list[Token]) -> None:
        if not tokens or tokens[-1].kind is not TokenKind.EOF:
            raise ValueError("token stream must end with EOF")
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def is_(self, text: str, tok: Optional[Token] = None) -> bool:
        t = tok or self.tok
        return t.text == text and t.kind in (TokenKind.KEYWORD, TokenKind.OPERATOR, TokenKind.PUNCT)

    def error(self, expected, tok: Optional[Token] = None) -> QueryError:
        t = tok or self.tok
        return QueryError([Diagnostic(t.line, t.column, f"syntax error: expected {_describe(expected)}, found {t}")])

    def expect(self, text: str) -> Token:
        if not self.is_(text):
            raise self.error([f"'{text}'"])
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.is_(text):
            self.i += 1
            return True
        return False

    def ident(self) -> Token:
        if self.tok.kind is not TokenKind.IDENT:
            raise self.error(["identifier"])
        t = self.tok
        self.i += 1
        return t

    # program

    def program(self) -> A.Program:
        outputs: list[A.OutputDecl] = []
        seen: dict[str, A.OutputDecl] = {}
        while (self.tok.kind is TokenKind.IDENT and self.is_(":", self.peek())
               and self.is_("output", self.peek(2))):
            decl = self.output_decl()
            if decl.name in seen:
                first = seen[decl.name].pos
                raise QueryError([Diagnostic(
                    decl.pos[0], decl.pos[1],
                    f"duplicate output '{decl.name}' (first declared at {first[0]}:{first[1]})",
                )])
            seen[decl.name] = decl
            outputs.append(decl)
        stmts = []
        while self.tok.kind is not TokenKind.EOF:
            stmts.append(self.statement())
        return A.Program(outputs, stmts, pos=(1, 1))

    def output_decl(self) -> A.OutputDecl:
        name = self.ident()
        self.expect(":")
        self.expect("output")
        kind_tok = self.tok
        if not (kind_tok.kind is TokenKind.KEYWORD and kind_tok.text in AGG_KINDS):
            raise self.error([f"'{k}'" for k in AGG_KINDS])
        self.i += 1
        top_n = None
        if kind_tok.text == "top":
            self.expect("(")
            if self.tok.kind is not TokenKind.INT_LIT:
                raise self.error(["integer literal"])
            top_n = int(self.tok.text)
            if top_n <= 0:
                raise QueryError([Diagnostic(self.tok.line, self.tok.column, "top(n) requires n > 0")])
            self.i += 1
            self.expect(")")
        indices = []
        while self.accept("["):
            label = self.ident()
            self.expect(":")
            indices.append((label.text, self.scalar_type()))
            self.expect("]")
        self.expect("of")
        value_type = self.scalar_type()
        weight_type = None
        if self.accept("weight"):
            weight_type = self.scalar_type()
        self.expect(";")
        return A.OutputDecl(
            name.text, kind_tok.text, top_n, indices, value_type, weight_type, pos=(name.line, name.column)
        )

    def scalar_type(self) -> Type:
        t = self.tok
        if t.kind is TokenKind.KEYWORD and t.text in SCALARS:
            self.i += 1
            return SCALARS[t.text]
        raise self.error([f"'{s}'" for s in SCALAR_NAMES])

    def type_(self) -> Type:
        t = self.tok
        if t.kind is TokenKind.KEYWORD and t.text in SCALARS:
            self.i += 1
            return SCALARS[t.text]
        if self.is_("array"):
            self.i += 1
            self.expect("of")
            return Array(self.type_())
        if t.kind is TokenKind.IDENT:
            self.i += 1
            return Named(t.text)
        raise self.error([f"'{s}'" for s in SCALAR_NAMES] + ["'array'", "type name"])

    # statements

    def statement(self) -> A.Stmt:
        t = self.tok
        pos = (t.line, t.column)
        if self.is_("{"):
            self.i += 1
            body = []
            while not self.is_("}"):
                if self.tok.kind is TokenKind.EOF:
                    raise self.error(["'}'"])
                body.append(self.statement())
            self.i += 1
            return A.Block(body, pos=pos)
        if self.is_("if"):
            self.i += 1
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.statement()
            orelse = self.statement() if self.accept("else") else None
            return A.If(cond, then, orelse, pos=pos)
        if self.is_("foreach"):
            self.i += 1
            self.expect("(")
            var = self.ident()
            self.expect(":")
            vtype = self.type_()
            self.expect(";")
            cond = self.expr()
            self.expect(")")
            return A.Foreach(var.text, vtype, cond, self.statement(), pos=pos)
        if self.is_("stop"):
            self.i += 1
            self.expect(";")
            return A.Stop(pos=pos)
        if self.is_("visit"):
            self.i += 1
            self.expect("(")
            target = self.expr()
            visitor = self.expr() if self.accept(",") else None
            self.expect(")")
            self.expect(";")
            return A.Visit(target, visitor, pos=pos)
        if t.kind is TokenKind.IDENT:
            nxt = self.peek()
            if self.is_(":=", nxt):
                self.i += 2
                init = self.expr()
                self.expect(";")
                return A.VarDecl(t.text, None, init, pos=pos)
            if self.is_(":", nxt):
                self.i += 2
                declared = self.type_()
                init = self.expr() if self.accept("=") else None
                self.expect(";")
                return A.VarDecl(t.text, declared, init, pos=pos)
            if self.is_("=", nxt):
                self.i += 2
                value = self.expr()
                self.expect(";")
                return A.Assign(t.text, value, pos=pos)
        e = self.expr()
        if self.is_("<<"):
            arrow = self.tok
            target = e
            indices: list[A.Expr] = []
            while isinstance(target, A.Index):
                indices.append(target.index)
                target = target.obj
            if not isinstance(target, A.Name):
                raise QueryError([Diagnostic(arrow.line, arrow.column,
                                             "left side of '<<' must be an output variable")])
            self.i += 1
            value = self.expr()
            weight = self.expr() if self.accept("weight") else None
            self.expect(";")
            return A.Emit(target.id, indices[::-1], value, weight, pos=pos)
        if not self.is_(";"):
            raise self.error(["';'", "'<<'", "operator"])
        self.i += 1
        return A.ExprStmt(e, pos=pos)

    # expressions

    def expr(self, level: int = 0) -> A.Expr:
        if level == len(LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        ops = LEVELS[level]
        while self.tok.kind is TokenKind.OPERATOR and self.tok.text in ops:
            op = self.tok
            self.i += 1
            right = self.expr(level + 1)
            left = A.Binary(op.text, left, right, pos=left.pos)
        return left

    def unary(self) -> A.Expr:
        t = self.tok
        if t.kind is TokenKind.OPERATOR and t.text in ("!", "-"):
            self.i += 1
            return A.Unary(t.text, self.unary(), pos=(t.line, t.column))
        return self.postfix(self.primary())

    def postfix(self, e: A.Expr) -> A.Expr:
        while True:
            if self.is_("."):
                self.i += 1
                name = self.ident()
                e = A.Attr(e, name.text, pos=e.pos)
            elif self.is_("["):
                self.i += 1
                idx = self.expr()
                self.expect("]")
                e = A.Index(e, idx, pos=e.pos)
            else:
                return e

    def primary(self) -> A.Expr:
        t = self.tok
        pos = (t.line, t.column)
        if t.kind is TokenKind.INT_LIT:
            self.i += 1
            return A.IntLit(int(t.text), pos=pos)
        if t.kind is TokenKind.FLOAT_LIT:
            self.i += 1
            return A.FloatLit(float(t.text), pos=pos)
        if t.kind is TokenKind.STRING_LIT:
            self.i += 1
            return A.StrLit(t.text, pos=pos)
        if self.is_("true") or self.is_("false"):
            self.i += 1
            return A.BoolLit(t.text == "true", pos=pos)
        if self.is_("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if self.is_("visitor"):
            return self.visitor_literal()
        if t.kind is TokenKind.IDENT:
            self.i += 1
            if self.is_("("):
                self.i += 1
                args = []
                if not self.is_(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                return A.Call(t.text, args, pos=pos)
            return A.Name(t.text, pos=pos)
        raise self.error(["expression"])

    def visitor_literal(self) -> A.VisitorLit:
        t = self.expect("visitor")
        self.expect("{")
        clauses = []
        while not self.is_("}"):
            c = self.tok
            if not (self.is_("before") or self.is_("after")):
                raise self.error(["'before'", "'after'", "'}'"])
            self.i += 1
            if self.tok.kind is TokenKind.IDENT and self.tok.text == "_":
                self.i += 1
                binder, node_type = None, None
            else:
                binder = self.ident().text
                self.expect(":")
                node_type = self.ident().text
            self.expect("->")
            body = self.statement()
            clauses.append(A.Clause(c.text, binder, node_type, body, pos=(c.line, c.column)))
        self.i += 1
        return A.VisitorLit(clauses, pos=(t.line, t.column))


def parse_query(tokens: list[Token]) -> A.Program:
    return Parser(tokens).program()


def parse_text(text: str) -> A.Program:
    return parse_query(lex(text))
