"""Tokenizer for the query language."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class TokenKind(enum.Enum):
    IDENT = "IDENT"
    INT_LIT = "INT_LIT"
    FLOAT_LIT = "FLOAT_LIT"
    STRING_LIT = "STRING_LIT"
    KEYWORD = "KEYWORD"
    OPERATOR = "OPERATOR"
    PUNCT = "PUNCT"
    EOF = "EOF"


KEYWORDS = frozenset(
    """output of weight sum mean collection set top int float string bool time array
    if else foreach stop visit visitor before after true false""".split()
)
# Longest first so the scanner can take the first hit.
OPERATORS = ("<<", ":=", "->", "==", "!=", "<=", ">=", "&&", "||", "<", ">", "+", "-", "*", "/", "!", "=")
PUNCTUATION = frozenset("()[]{}.,;:")
ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}
INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int

    def __str__(self) -> str:
        return "end of input" if self.kind is TokenKind.EOF else repr(self.text)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str

    def format(self, filename: str = "<query>") -> str:
        return f"{filename}:{self.line}:{self.column}: error: {self.message}"


class QueryError(Exception):
    """One or more positioned diagnostics from lexing, parsing or typechecking."""

    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        self.diagnostics = diagnostics
        super().__init__("\n".join(d.format() for d in diagnostics))

    def format(self, filename: str = "<query>") -> str:
        return "\n".join(d.format(filename) for d in self.diagnostics)


def _error(line: int, col: int, message: str) -> QueryError:
    return QueryError([Diagnostic(line, col, message)])


def lex(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(k: int) -> None:
        nonlocal i, line, col
        for ch in text[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == "#":
            end = text.find("\n", i)
            advance((n if end < 0 else end) - i)
            continue
        start_line, start_col = line, col
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            j = i + 1
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, word, start_line, start_col))
            advance(j - i)
            continue
        if ch.isascii() and ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            kind = TokenKind.INT_LIT
            if j + 1 < n and text[j] == "." and text[j + 1].isdigit():
                kind = TokenKind.FLOAT_LIT
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    kind = TokenKind.FLOAT_LIT
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            if kind is TokenKind.INT_LIT and int(lit) > INT64_MAX:
                raise _error(start_line, start_col, f"integer literal {lit} out of range")
            if kind is TokenKind.FLOAT_LIT and math.isinf(float(lit)):
                raise _error(start_line, start_col, f"float literal {lit} out of range")
            tokens.append(Token(kind, lit, start_line, start_col))
            advance(j - i)
            continue
        if ch == '"':
            j = i + 1
            out = []
            while True:
                if j >= n or text[j] == "\n":
                    raise _error(start_line, start_col, "unterminated string literal")
                c = text[j]
                if c == '"':
                    break
                if c == "\\":
                    if j + 1 >= n or text[j + 1] not in ESCAPES:
                        bad_col = start_col + (j - i)
                        raise _error(start_line, bad_col, "invalid escape sequence in string literal")
                    out.append(ESCAPES[text[j + 1]])
                    j += 2
                    continue
                out.append(c)
                j += 1
            tokens.append(Token(TokenKind.STRING_LIT, "".join(out), start_line, start_col))
            advance(j + 1 - i)
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token(TokenKind.OPERATOR, op, start_line, start_col))
                advance(len(op))
                break
        else:
            if ch in PUNCTUATION:
                tokens.append(Token(TokenKind.PUNCT, ch, start_line, start_col))
                advance(1)
                continue
            raise _error(start_line, start_col, f"illegal character {ch!r}")
    tokens.append(Token(TokenKind.EOF, "", line, col))
    return tokens
