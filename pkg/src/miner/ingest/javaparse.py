"""A forgiving parser for the Java subset stored in datasets.

Only two things make a file unparseable: lexical garbage (an unterminated
string or comment, a character Java has no token for) and unbalanced
brackets. Everything else the subset does not model is absorbed into
coarse OTHER statements/expressions, or skipped at member level.
"""
from __future__ import annotations

import bisect
import re
from dataclasses import dataclass

from ..schema import (
    ASTRoot,
    Declaration,
    DeclarationKind,
    Expression,
    ExpressionKind,
    FileKind,
    Method,
    Modifier,
    ModifierKind,
    Namespace,
    Statement,
    StatementKind,
    Variable,
)


# deeper trees are rejected so that serializing them stays within Python's stack
MAX_DEPTH = 128


class ParseFailure(Exception):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue default do
    double else enum extends final finally float for goto if implements import instanceof
    int interface long native new package private protected public return short static
    strictfp super switch synchronized this throw throws transient try void volatile while
    true false null""".split()
)
PRIMITIVES = frozenset("boolean byte char short int long float double void".split())
OTHER_MODIFIERS = frozenset("native transient volatile strictfp".split())
SIMPLE_MODIFIERS = {
    "static": ModifierKind.STATIC,
    "final": ModifierKind.FINAL,
    "abstract": ModifierKind.ABSTRACT,
    "synchronized": ModifierKind.SYNCHRONIZED,
}
DECL_KEYWORDS = {
    "class": DeclarationKind.CLASS,
    "interface": DeclarationKind.INTERFACE,
    "enum": DeclarationKind.ENUM,
}

# '>' is always lexed alone so nested generics close one level per token.
_OPERATORS = sorted(
    """<<= ... -> :: ++ -- && || == != <= >= += -= *= /= &= |= ^= %= <<
    ( ) { } [ ] ; , . @ = > < ! ~ ? : + - * / & | ^ %""".split(),
    key=len,
    reverse=True,
)
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\f\r\n]+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<badcomment>/\*)
  | (?P<textblock>\"\"\"(?:[^\\]|\\.)*?\"\"\")
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<char>'(?:[^'\\\n]|\\.)+')
  | (?P<badstr>["'])
  | (?P<num>(?:0[xX][0-9a-fA-F_]*(?:\.[0-9a-fA-F_]*)?(?:[pP][+-]?\d+)?|0[bB][01_]+|(?:\d[\d_]*(?:\.[\d_]*)?|\.\d[\d_]*)(?:[eE][+-]?\d+)?)[lLfFdD]?)
  | (?P<id>(?:[^\W\d]|\$)(?:\w|\$)*)
  | (?P<op>"""
    + "|".join(re.escape(o) for o in _OPERATORS)
    + r""")
    """,
    re.VERBOSE | re.DOTALL,
)

LITERAL_KINDS = frozenset({"num", "str", "char", "textblock"})
OPENERS = {"(": ")", "[": "]", "{": "}"}
CLOSERS = {")": "(", "]": "[", "}": "{"}


@dataclass(slots=True)
class Tok:
    kind: str  # id, kw, num, str, char, textblock, op, eof
    text: str
    offset: int


class _Source:
    def __init__(self, text: str) -> None:
        self.text = text
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def position(self, offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(self.line_starts, offset)
        return line, offset - self.line_starts[line - 1] + 1

    def fail(self, message: str, offset: int) -> ParseFailure:
        return ParseFailure(message, *self.position(offset))


def tokenize(src: _Source) -> list[Tok]:
    text = src.text
    toks: list[Tok] = []
    pos, end = 0, len(text)
    match = _TOKEN_RE.match
    while pos < end:
        m = match(text, pos)
        if m is None:
            raise src.fail(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "badcomment":
            raise src.fail("unterminated comment", pos)
        if kind == "badstr":
            raise src.fail("unterminated string or character literal", pos)
        if kind not in ("ws", "comment"):
            s = m.group()
            if kind == "id" and s in KEYWORDS:
                kind = "kw"
            toks.append(Tok(kind, s, pos))
        pos = m.end()
    toks.append(Tok("eof", "", end))
    return toks


def _match_brackets(src: _Source, toks: list[Tok]) -> dict[int, int]:
    """Map each bracket token index to its partner; raise on imbalance."""
    pairs: dict[int, int] = {}
    stack: list[int] = []
    for i, t in enumerate(toks):
        if t.kind != "op":
            continue
        if t.text in OPENERS:
            stack.append(i)
        elif t.text in CLOSERS:
            if not stack or toks[stack[-1]].text != CLOSERS[t.text]:
                raise src.fail(f"unbalanced {t.text!r}", t.offset)
            j = stack.pop()
            pairs[i] = j
            pairs[j] = i
    if stack:
        j = stack[-1]
        opener = toks[j]
        line, col = src.position(opener.offset)
        raise src.fail(
            f"expected {OPENERS[opener.text]!r} to close {opener.text!r} opened at {line}:{col}",
            toks[-1].offset,
        )
    return pairs


def _join(toks: list[Tok]) -> str:
    out = []
    prev_word = False
    for t in toks:
        word = t.kind in ("id", "kw")
        if word and prev_word:
            out.append(" ")
        out.append(t.text)
        prev_word = word
    return "".join(out)


class _Parser:
    def __init__(self, toks: list[Tok], pairs: dict[int, int]) -> None:
        self.t = toks
        self.pair = pairs
        self.i = 0

    # token helpers

    def at(self, text: str, k: int = 0) -> bool:
        tok = self.t[min(self.i + k, len(self.t) - 1)]
        return tok.text == text and tok.kind in ("op", "kw", "id")

    def kind(self, k: int = 0) -> str:
        return self.t[min(self.i + k, len(self.t) - 1)].kind

    def text(self, k: int = 0) -> str:
        return self.t[min(self.i + k, len(self.t) - 1)].text

    def is_ident(self, k: int = 0) -> bool:
        return self.kind(k) == "id"

    def skip_group(self) -> None:
        self.i = self.pair[self.i] + 1

    def skip_angles(self) -> list[Tok]:
        start, depth = self.i, 0
        while self.kind() != "eof":
            tx = self.text()
            if self.kind() == "op" and tx in OPENERS:
                self.skip_group()
                continue
            if tx == "<":
                depth += 1
            elif tx == ">":
                depth -= 1
            elif tx in (";", "{", "}", ")", "]"):
                break
            self.i += 1
            if depth == 0:
                break
        return self.t[start:self.i]

    def skip_to_semicolon(self, limit: int) -> None:
        while self.i < limit and not self.at(";"):
            if self.kind() == "op" and self.text() in OPENERS:
                self.skip_group()
            else:
                self.i += 1
        if self.i < limit:
            self.i += 1

    def qname(self) -> str:
        parts = [self.text()]
        self.i += 1
        while self.at(".") and self.kind(1) in ("id", "kw") and self.text(1) != "class":
            if self.text(1) in ("*",):
                break
            parts.append(self.text(1))
            self.i += 2
        return ".".join(parts)

    # declarations

    def unit(self) -> Namespace:
        ns = Namespace()
        start = self.i
        self.modifiers()  # package annotations carry no schema slot
        if not self.at("package"):
            self.i = start
        else:
            self.i += 1
            if self.kind() in ("id", "kw"):
                ns.name = self.qname()
            self.skip_to_semicolon(len(self.t) - 1)
        while True:
            if self.at(";"):
                self.i += 1
                continue
            if not self.at("import"):
                break
            self.i += 1
            if self.at("static"):
                self.i += 1
            if self.kind() in ("id", "kw"):
                name = self.qname()
                if self.at(".") and self.at("*", 1):
                    name += ".*"
                ns.imports.append(name)
            self.skip_to_semicolon(len(self.t) - 1)
        end = len(self.t) - 1
        while self.i < end:
            if self.at(";"):
                self.i += 1
                continue
            start = self.i
            mods = self.modifiers()
            decl = self.type_decl(mods) if self.at_type_decl() else None
            if decl is not None:
                ns.declarations.append(decl)
            elif self.i == start or not self.at_type_decl():
                self.recover(end)
        return ns

    def recover(self, limit: int) -> None:
        """Skip one unmodeled construct: up to ';' or past a '{...}' group."""
        if self.i >= limit:
            return
        while self.i < limit:
            if self.at(";"):
                self.i += 1
                return
            if self.at("{"):
                self.skip_group()
                return
            if self.kind() == "op" and self.text() in OPENERS:
                self.skip_group()
            else:
                self.i += 1

    def modifiers(self) -> list[Modifier]:
        mods: list[Modifier] = []
        while True:
            tx, kind = self.text(), self.kind()
            if kind == "kw" and tx in ("public", "private", "protected"):
                mods.append(Modifier(ModifierKind.VISIBILITY, visibility=tx))
                self.i += 1
            elif kind == "kw" and tx in SIMPLE_MODIFIERS and not (tx == "synchronized" and self.at("(", 1)):
                mods.append(Modifier(SIMPLE_MODIFIERS[tx]))
                self.i += 1
            elif kind == "kw" and tx in OTHER_MODIFIERS:
                mods.append(Modifier(ModifierKind.OTHER, other=tx))
                self.i += 1
            elif kind == "kw" and tx == "default" and not (self.at(":", 1) or self.at("->", 1)):
                mods.append(Modifier(ModifierKind.OTHER, other=tx))
                self.i += 1
            elif kind == "id" and tx == "sealed" and self.kind(1) in ("kw", "id"):
                mods.append(Modifier(ModifierKind.OTHER, other=tx))
                self.i += 1
            elif kind == "id" and tx == "non" and self.at("-", 1) and self.text(2) == "sealed":
                mods.append(Modifier(ModifierKind.OTHER, other="non-sealed"))
                self.i += 3
            elif tx == "@" and kind == "op" and not self.at("interface", 1) and self.kind(1) in ("id", "kw"):
                self.i += 1
                name = self.qname()
                if self.at("("):
                    self.skip_group()
                mods.append(Modifier(ModifierKind.ANNOTATION, annotation_name=name))
            else:
                return mods

    def at_type_decl(self) -> bool:
        if self.kind() == "kw" and self.text() in DECL_KEYWORDS:
            return True
        if self.at("@") and self.at("interface", 1):
            return True
        return self.is_ident() and self.text() == "record" and self.is_ident(1) and (self.at("(", 2) or self.at("<", 2))

    def type_decl(self, mods: list[Modifier]) -> Declaration | None:
        if self.at("@"):
            kind = DeclarationKind.ANNOTATION_DECL
            self.i += 2
        elif self.text() == "record":
            kind = DeclarationKind.CLASS
            self.i += 1
        else:
            kind = DECL_KEYWORDS[self.text()]
            self.i += 1
        if not self.is_ident():
            return None
        decl = Declaration(self.text(), kind, mods)
        self.i += 1
        while not self.at("{"):
            if self.kind() == "eof" or self.at(";") or self.at("}"):
                return None
            if self.kind() == "op" and self.text() in OPENERS:
                self.skip_group()
            else:
                self.i += 1
        self.class_body(decl)
        return decl

    def class_body(self, decl: Declaration) -> None:
        end = self.pair[self.i]
        self.i += 1
        if decl.kind is DeclarationKind.ENUM:
            self.enum_constants(decl, end)
        while self.i < end:
            self.member(decl, end)
        self.i = end + 1

    def enum_constants(self, decl: Declaration, end: int) -> None:
        while self.i < end:
            if self.at(";"):
                self.i += 1
                return
            if self.at(","):
                self.i += 1
                continue
            start = self.i
            mods = self.modifiers()
            if self.is_ident() and (self.at("(", 1) or self.at(",", 1) or self.at(";", 1)
                                    or self.at("{", 1) or self.i + 1 == end):
                decl.fields.append(Variable(self.text(), decl.name, mods))
                self.i += 1
                if self.at("("):
                    self.skip_group()
                if self.at("{"):
                    self.skip_group()
            else:
                self.i = start
                return

    def member(self, decl: Declaration, end: int) -> None:
        if self.at(";"):
            self.i += 1
            return
        if self.at("{") or (self.at("static") and self.at("{", 1)):
            if self.at("static"):
                self.i += 1
            self.skip_group()
            return
        start = self.i
        mods = self.modifiers()
        if self.at_type_decl():
            nested = self.type_decl(mods)
            if nested is not None:
                decl.nested.append(nested)
            else:
                self.recover(end)
            return
        if self.at("<"):
            self.skip_angles()
        if self.is_ident() and self.at("(", 1):
            decl.methods.append(self.method(mods, "", end))
            return
        type_name = self.type_ref()
        if type_name is not None and self.is_ident():
            if self.at("(", 1):
                decl.methods.append(self.method(mods, type_name, end))
                return
            if self.field_declarators(decl, mods, type_name, end):
                return
        if self.i == start:
            self.i += 1
        self.recover(end)

    def type_ref(self) -> str | None:
        start = self.i
        while self.at("@") and self.kind(1) in ("id", "kw") and not self.at("interface", 1):
            self.i += 1
            self.qname()
            if self.at("("):
                self.skip_group()
        begin = self.i
        if self.kind() == "kw" and self.text() in PRIMITIVES:
            self.i += 1
        elif self.is_ident() or self.at("?"):
            self.i += 1
            while True:
                if self.at("<"):
                    self.skip_angles()
                if self.at(".") and self.is_ident(1):
                    self.i += 2
                    continue
                break
        else:
            self.i = start
            return None
        while self.at("[") and self.at("]", 1):
            self.i += 2
        if self.at("..."):
            self.i += 1
        return _join(self.t[begin:self.i])

    def field_declarators(self, decl, mods, type_name, end) -> bool:
        found = False
        while self.is_ident():
            name = self.text()
            nxt = self.text(1)
            if nxt not in ("=", ",", ";", "["):
                break
            self.i += 1
            dims = ""
            while self.at("[") and self.at("]", 1):
                dims += "[]"
                self.i += 2
            decl.fields.append(Variable(name, type_name + dims, list(mods)))
            found = True
            if self.at("="):
                self.i += 1
                self.skip_initializer(end)
            if self.at(","):
                self.i += 1
                continue
            break
        if not found:
            return False
        self.skip_to_semicolon(end)
        return True

    def skip_initializer(self, limit: int) -> None:
        while self.i < limit and not self.at(";"):
            if self.at(",") and self.is_ident(1) and self.text(2) in ("=", ",", ";", "["):
                return
            if self.kind() == "op" and self.text() in OPENERS:
                self.skip_group()
            else:
                self.i += 1

    def method(self, mods: list[Modifier], return_type: str, end: int) -> Method:
        m = Method(self.text(), mods, return_type)
        self.i += 1
        close = self.pair[self.i]
        self.i += 1
        while self.i < close:
            pmods = self.modifiers()
            ptype = self.type_ref()
            if ptype is not None and (self.is_ident() or self.at("this")):
                pname = self.text()
                self.i += 1
                while self.at("[") and self.at("]", 1):
                    ptype += "[]"
                    self.i += 2
                m.params.append(Variable(pname, ptype, pmods))
            # skip to the next parameter
            while self.i < close and not self.at(","):
                if self.kind() == "op" and self.text() in OPENERS:
                    self.skip_group()
                else:
                    self.i += 1
            if self.at(","):
                self.i += 1
        self.i = close + 1
        while self.i < end and not self.at("{") and not self.at(";") and not self.at("default"):
            if self.kind() == "op" and self.text() in OPENERS:
                self.skip_group()
            else:
                self.i += 1
        if self.at("{"):
            m.statements = self.block()
        else:
            self.skip_to_semicolon(end)
        return m

    # statements

    def block(self) -> list[Statement]:
        end = self.pair[self.i]
        self.i += 1
        out = []
        while self.i < end:
            st = self.statement(end)
            if st is not None:
                out.append(st)
        self.i = end + 1
        return out

    def paren_expr(self) -> list[Expression]:
        if not self.at("("):
            return []
        close = self.pair[self.i]
        e = self.expr_of(self.i + 1, close)
        self.i = close + 1
        return [e] if e is not None else []

    def statement(self, end: int) -> Statement | None:
        tx, kind = self.text(), self.kind()
        if tx == "{" and kind == "op":
            return Statement(StatementKind.BLOCK, self.block())
        if tx == ";" and kind == "op":
            self.i += 1
            return None
        if kind == "kw":
            if tx == "if":
                self.i += 1
                cond = self.paren_expr()
                body = [s for s in [self.statement(end)] if s is not None]
                if self.at("else"):
                    self.i += 1
                    els = self.statement(end)
                    if els is not None:
                        body.append(els)
                return Statement(StatementKind.IF, body, cond)
            if tx == "for":
                self.i += 1
                exprs = []
                if self.at("("):
                    close = self.pair[self.i]
                    exprs = [e for lo, hi in self.split(self.i + 1, close, (";", ":")) if (e := self.expr_of(lo, hi))]
                    self.i = close + 1
                body = self.statement(end)
                return Statement(StatementKind.FOR, [body] if body else [], exprs)
            if tx == "while":
                self.i += 1
                cond = self.paren_expr()
                body = self.statement(end)
                return Statement(StatementKind.WHILE, [body] if body else [], cond)
            if tx == "do":
                self.i += 1
                body = self.statement(end)
                cond = []
                if self.at("while"):
                    self.i += 1
                    cond = self.paren_expr()
                self.skip_to_semicolon(end)
                return Statement(StatementKind.OTHER, [body] if body else [], cond)
            if tx == "return":
                self.i += 1
                return Statement(StatementKind.RETURN, [], self.expr_until_semicolon(end))
            if tx == "switch":
                self.i += 1
                exprs = self.paren_expr()
                body = self.switch_body() if self.at("{") else []
                return Statement(StatementKind.OTHER, body, exprs)
            if tx == "try":
                return self.try_statement(end)
            if tx == "synchronized" and self.at("(", 1):
                self.i += 1
                exprs = self.paren_expr()
                body = self.block() if self.at("{") else []
                return Statement(StatementKind.OTHER, [Statement(StatementKind.BLOCK, body)], exprs)
            if tx in ("throw", "assert"):
                self.i += 1
                return Statement(StatementKind.OTHER, [], self.expr_until_semicolon(end))
            if tx in ("break", "continue"):
                self.skip_to_semicolon(end)
                return Statement(StatementKind.OTHER)
        if kind == "id" and self.at(":", 1):
            self.i += 2
            inner = self.statement(end)
            return Statement(StatementKind.OTHER, [inner] if inner else [])
        start = self.i
        if tx == "@" or (kind == "kw" and (tx in SIMPLE_MODIFIERS or tx in OTHER_MODIFIERS)) or self.at_type_decl():
            mods = self.modifiers()
            if self.at_type_decl():
                self.type_decl(mods)
                return Statement(StatementKind.OTHER)
            start = self.i
        return Statement(StatementKind.EXPR, [], self.expr_until_semicolon(end, start))

    def expr_until_semicolon(self, end: int, start: int | None = None) -> list[Expression]:
        lo = self.i if start is None else start
        self.i = lo
        while self.i < end and not self.at(";"):
            if self.kind() == "op" and self.text() in OPENERS:
                self.skip_group()
            else:
                self.i += 1
        hi = self.i
        if self.i < end:
            self.i += 1
        e = self.expr_of(lo, hi)
        return [e] if e is not None else []

    def switch_body(self) -> list[Statement]:
        end = self.pair[self.i]
        self.i += 1
        out = []
        while self.i < end:
            if self.at("case"):
                while self.i < end and not (self.at(":") or self.at("->")):
                    if self.kind() == "op" and self.text() in OPENERS:
                        self.skip_group()
                    else:
                        self.i += 1
                self.i += 1
                continue
            if self.at("default") and (self.at(":", 1) or self.at("->", 1)):
                self.i += 2
                continue
            st = self.statement(end)
            if st is not None:
                out.append(st)
        self.i = end + 1
        return out

    def try_statement(self, end: int) -> Statement:
        self.i += 1
        exprs = []
        if self.at("("):
            close = self.pair[self.i]
            exprs = [e for lo, hi in self.split(self.i + 1, close, (";",)) if (e := self.expr_of(lo, hi))]
            self.i = close + 1
        body = []
        if self.at("{"):
            body.append(Statement(StatementKind.BLOCK, self.block()))
        while self.at("catch") or self.at("finally"):
            self.i += 1
            if self.at("("):
                self.skip_group()
            if self.at("{"):
                body.append(Statement(StatementKind.BLOCK, self.block()))
        return Statement(StatementKind.OTHER, body, exprs)

    # expressions

    def split(self, lo: int, hi: int, seps: tuple[str, ...]) -> list[tuple[int, int]]:
        parts, start, i = [], lo, lo
        t = self.t
        while i < hi:
            tok = t[i]
            if tok.kind == "op":
                if tok.text in OPENERS:
                    i = self.pair[i] + 1
                    continue
                if tok.text in seps:
                    parts.append((start, i))
                    start = i + 1
            i += 1
        parts.append((start, hi))
        return [(a, b) for a, b in parts if b > a]

    def _is_literal(self, tok: Tok) -> bool:
        return tok.kind in LITERAL_KINDS or (tok.kind == "kw" and tok.text in ("true", "false", "null"))

    def _callee(self, tok: Tok) -> bool:
        return tok.kind == "id" or (tok.kind == "kw" and tok.text in ("this", "super"))

    def _is_chain(self, lo: int, hi: int) -> bool:
        i, t = lo, self.t
        while i < hi:
            tok = t[i]
            if tok.kind == "op" and tok.text in ("(", "["):
                i = self.pair[i] + 1
                continue
            if tok.kind == "op" and tok.text == ".":
                pass
            elif self._callee(tok) or self._is_literal(tok):
                pass
            elif tok.kind == "kw" and tok.text == "new" and i == lo:
                pass
            else:
                return False
            i += 1
        return True

    def expr_of(self, lo: int, hi: int) -> Expression | None:
        t = self.t
        while hi - lo >= 2 and t[lo].text == "(" and t[lo].kind == "op" and self.pair[lo] == hi - 1:
            lo, hi = lo + 1, hi - 1
        if hi <= lo:
            return None
        if hi - lo == 1 and self._is_literal(t[lo]):
            return Expression(ExpressionKind.LITERAL, literal=t[lo].text)
        last = t[hi - 1]
        if last.kind == "op" and last.text == ")":
            opener = self.pair[hi - 1]
            name_at = opener - 1
            if name_at >= lo and self._callee(t[name_at]):
                receiver_end = name_at - 1 if name_at - 1 >= lo and t[name_at - 1].text == "." else name_at
                is_call = name_at == lo or (
                    receiver_end == name_at - 1 and self._is_chain(lo, receiver_end)
                    and not (t[lo].text == "new" and receiver_end == lo + 1)
                )
                if name_at > lo and t[name_at - 1].text == "new":
                    is_call = False
                if is_call:
                    subs = []
                    if receiver_end > lo:
                        recv = self.expr_of(lo, receiver_end)
                        if recv is not None and (recv.kind is not ExpressionKind.OTHER or recv.expressions):
                            subs.append(recv)
                    for a, b in self.split(opener + 1, hi - 1, (",",)):
                        e = self.expr_of(a, b)
                        if e is not None:
                            subs.append(e)
                    return Expression(ExpressionKind.CALL, method_name=t[name_at].text, expressions=subs)
        return Expression(ExpressionKind.OTHER, expressions=self.collect(lo, hi))

    def collect(self, lo: int, hi: int) -> list[Expression]:
        out: list[Expression] = []
        t = self.t
        i = lo
        while i < hi:
            tok = t[i]
            if self._is_literal(tok):
                out.append(Expression(ExpressionKind.LITERAL, literal=tok.text))
                i += 1
            elif self._callee(tok) and i + 1 < hi and t[i + 1].text == "(" and t[i + 1].kind == "op":
                close = self.pair[i + 1]
                args = [e for a, b in self.split(i + 2, close, (",",)) if (e := self.expr_of(a, b))]
                if i > lo and t[i - 1].text == "new":
                    out.append(Expression(ExpressionKind.OTHER, expressions=args))
                else:
                    out.append(Expression(ExpressionKind.CALL, method_name=tok.text, expressions=args))
                i = close + 1
            elif tok.kind == "op" and tok.text in ("(", "["):
                out.extend(self.collect(i + 1, self.pair[i]))
                i = self.pair[i] + 1
            elif tok.kind == "op" and tok.text == "{":
                prev = t[i - 1] if i > lo else None
                if prev is not None and prev.text in ("->", ")"):
                    i = self.pair[i] + 1
                else:
                    out.extend(self.collect(i + 1, self.pair[i]))
                    i = self.pair[i] + 1
            elif tok.kind == "kw" and tok.text == "switch":
                i += 1
                if i < hi and t[i].text == "(":
                    out.extend(self.collect(i + 1, self.pair[i]))
                    i = self.pair[i] + 1
                if i < hi and t[i].text == "{":
                    i = self.pair[i] + 1
            else:
                i += 1
        return out


def parse_source(content: bytes, file_kind: FileKind = FileKind.SOURCE_JAVA) -> ASTRoot:
    """Parse one Java source blob; raise ParseFailure on unparseable input."""
    if file_kind is not FileKind.SOURCE_JAVA:
        raise ValueError(f"cannot parse {file_kind.name} content")
    text = content.decode("utf-8", errors="replace")
    if text.startswith("﻿"):
        text = text[1:]
    src = _Source(text)
    toks = tokenize(src)
    pairs = _match_brackets(src, toks)
    parser = _Parser(toks, pairs)
    try:
        root = ASTRoot(parser.unit())
    except RecursionError:
        raise src.fail("nesting too deep", toks[min(parser.i, len(toks) - 1)].offset) from None
    if _depth(root) > MAX_DEPTH:
        raise src.fail(f"nesting deeper than {MAX_DEPTH} levels", 0)
    return root


_NESTED = {
    Namespace: ("declarations",),
    Declaration: ("modifiers", "fields", "methods", "nested"),
    Method: ("modifiers", "params", "statements"),
    Variable: ("modifiers",),
    Statement: ("expressions", "statements"),
    Expression: ("expressions",),
}


def _depth(root: ASTRoot) -> int:
    best = 0
    stack = [(root.namespace, 2)]
    while stack:
        node, d = stack.pop()
        best = max(best, d)
        for name in _NESTED.get(type(node), ()):
            stack.extend((child, d + 1) for child in getattr(node, name))
    return best
