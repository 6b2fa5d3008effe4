"""Static types of the query language."""
from __future__ import annotations

from dataclasses import dataclass

from .. import schema


class Type:
    pass


@dataclass(frozen=True)
class Scalar(Type):
    name: str  # int, float, string, bool, time

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Array(Type):
    elem: Type

    def __str__(self) -> str:
        return f"array of {self.elem}"


@dataclass(frozen=True)
class NodeType(Type):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class EnumType(Type):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Named(Type):
    """A type name the parser could not classify; resolved by the checker."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class _Special(Type):
    name: str

    def __str__(self) -> str:
        return self.name


INT = Scalar("int")
FLOAT = Scalar("float")
STRING = Scalar("string")
BOOL = Scalar("bool")
TIME = Scalar("time")
SCALARS = {t.name: t for t in (INT, FLOAT, STRING, BOOL, TIME)}
VISITOR = _Special("visitor")
VOID = _Special("void")
ERROR = _Special("<error>")
ANY = _Special("any")
ANY_ARRAY = _Special("array")
NUMERIC = (INT, FLOAT)

_A = Array
FIELDS: dict[str, dict[str, Type]] = {
    "Project": {
        "id": STRING, "name": STRING, "url": STRING, "stars": INT, "created": TIME,
        "repository": NodeType("CodeRepository"),
    },
    "CodeRepository": {"url": STRING, "head_index": INT, "revisions": _A(NodeType("Revision"))},
    "Revision": {
        "id": STRING, "author": STRING, "committer": STRING, "commit_time": TIME, "log": STRING,
        "files": _A(NodeType("ChangedFile")),
    },
    "ChangedFile": {
        "path": STRING, "change_kind": EnumType("ChangeKind"), "file_kind": EnumType("FileKind"),
        "blob_hash": STRING, "parse_error": BOOL,
    },
    "ASTRoot": {"namespace": NodeType("Namespace")},
    "Namespace": {"name": STRING, "imports": _A(STRING), "declarations": _A(NodeType("Declaration"))},
    "Declaration": {
        "name": STRING, "kind": EnumType("DeclarationKind"), "modifiers": _A(NodeType("Modifier")),
        "fields": _A(NodeType("Variable")), "methods": _A(NodeType("Method")),
        "nested": _A(NodeType("Declaration")),
    },
    "Method": {
        "name": STRING, "modifiers": _A(NodeType("Modifier")), "return_type_name": STRING,
        "params": _A(NodeType("Variable")), "statements": _A(NodeType("Statement")),
    },
    "Variable": {"name": STRING, "type_name": STRING, "modifiers": _A(NodeType("Modifier"))},
    "Statement": {
        "kind": EnumType("StatementKind"), "statements": _A(NodeType("Statement")),
        "expressions": _A(NodeType("Expression")),
    },
    "Expression": {
        "kind": EnumType("ExpressionKind"), "method_name": STRING, "literal": STRING,
        "expressions": _A(NodeType("Expression")),
    },
    "Modifier": {
        "kind": EnumType("ModifierKind"), "visibility": STRING, "annotation_name": STRING, "other": STRING,
    },
}
assert set(FIELDS) == set(schema.NODE_TYPES)
ENUM_MEMBERS: dict[str, tuple[str, ...]] = {n: tuple(e.__members__) for n, e in schema.ENUMS.items()}


def parse_type_name(text: str) -> Type:
    """Type from its source spelling, e.g. ``"array of Modifier"``."""
    words = text.split()
    if not words:
        raise ValueError("empty type")
    if words[0] == "array":
        if len(words) < 3 or words[1] != "of":
            raise ValueError(f"bad type {text!r}")
        return Array(parse_type_name(" ".join(words[2:])))
    if len(words) != 1:
        raise ValueError(f"bad type {text!r}")
    name = words[0]
    if name in SCALARS:
        return SCALARS[name]
    if name in FIELDS:
        return NodeType(name)
    if name in ENUM_MEMBERS:
        return EnumType(name)
    raise ValueError(f"unknown type {name!r}")


def assignable(target: Type, source: Type) -> bool:
    if target == ERROR or source == ERROR:
        return True
    if target == source:
        return True
    return target == FLOAT and source == INT


def valid_user_type(t: Type) -> bool:
    if isinstance(t, Array):
        return valid_user_type(t.elem)
    return isinstance(t, (Scalar, NodeType, EnumType))
