"""The mining schema: the tree of records every query walks.

Project -> CodeRepository -> Revision -> ChangedFile, and for Java sources
ChangedFile -> ASTRoot -> Namespace -> Declaration -> ... (looked up through the
dataset's AST store by blob hash, never stored inline).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields
from typing import Any, Optional


class ChangeKind(enum.Enum):
    ADDED = "ADDED"
    MODIFIED = "MODIFIED"
    DELETED = "DELETED"


class FileKind(enum.Enum):
    SOURCE_JAVA = "SOURCE_JAVA"
    OTHER = "OTHER"


class DeclarationKind(enum.Enum):
    CLASS = "CLASS"
    INTERFACE = "INTERFACE"
    ENUM = "ENUM"
    ANNOTATION_DECL = "ANNOTATION_DECL"


class StatementKind(enum.Enum):
    BLOCK = "BLOCK"
    IF = "IF"
    FOR = "FOR"
    WHILE = "WHILE"
    RETURN = "RETURN"
    EXPR = "EXPR"
    OTHER = "OTHER"


class ExpressionKind(enum.Enum):
    CALL = "CALL"
    LITERAL = "LITERAL"
    OTHER = "OTHER"


class ModifierKind(enum.Enum):
    VISIBILITY = "VISIBILITY"
    STATIC = "STATIC"
    FINAL = "FINAL"
    ABSTRACT = "ABSTRACT"
    SYNCHRONIZED = "SYNCHRONIZED"
    ANNOTATION = "ANNOTATION"
    OTHER = "OTHER"


ENUMS: dict[str, type[enum.Enum]] = {
    cls.__name__: cls
    for cls in (ChangeKind, FileKind, DeclarationKind, StatementKind, ExpressionKind, ModifierKind)
}


@dataclass(slots=True)
class Modifier:
    kind: ModifierKind
    visibility: str = ""
    annotation_name: str = ""
    other: str = ""


@dataclass(slots=True)
class Expression:
    kind: ExpressionKind
    method_name: str = ""
    literal: str = ""
    expressions: list[Expression] = field(default_factory=list)


@dataclass(slots=True)
class Statement:
    kind: StatementKind
    statements: list[Statement] = field(default_factory=list)
    expressions: list[Expression] = field(default_factory=list)


@dataclass(slots=True)
class Variable:
    name: str
    type_name: str = ""
    modifiers: list[Modifier] = field(default_factory=list)


@dataclass(slots=True)
class Method:
    name: str
    modifiers: list[Modifier] = field(default_factory=list)
    return_type_name: str = ""
    params: list[Variable] = field(default_factory=list)
    statements: list[Statement] = field(default_factory=list)


@dataclass(slots=True)
class Declaration:
    name: str
    kind: DeclarationKind
    modifiers: list[Modifier] = field(default_factory=list)
    fields: list[Variable] = field(default_factory=list)
    methods: list[Method] = field(default_factory=list)
    nested: list[Declaration] = field(default_factory=list)


@dataclass(slots=True)
class Namespace:
    name: str = ""
    imports: list[str] = field(default_factory=list)
    declarations: list[Declaration] = field(default_factory=list)


@dataclass(slots=True)
class ASTRoot:
    namespace: Namespace = field(default_factory=Namespace)


@dataclass(slots=True)
class ChangedFile:
    path: str
    change_kind: ChangeKind
    file_kind: FileKind
    blob_hash: str = ""
    parse_error: bool = False


@dataclass(slots=True)
class Revision:
    id: str
    author: str
    committer: str
    commit_time: int
    log: str
    files: list[ChangedFile] = field(default_factory=list)


@dataclass(slots=True)
class CodeRepository:
    url: str
    head_index: Optional[int] = None
    revisions: list[Revision] = field(default_factory=list)


@dataclass(slots=True)
class Project:
    id: str
    name: str
    url: str
    stars: int = 0
    created: int = 0
    metadata: dict[str, str] = field(default_factory=dict)
    repository: CodeRepository = field(default_factory=lambda: CodeRepository(url=""))


# Classes that make up the traversable tree, keyed by the name queries use.
NODE_TYPES: dict[str, type] = {
    cls.__name__: cls
    for cls in (
        Project, CodeRepository, Revision, ChangedFile, ASTRoot, Namespace,
        Declaration, Method, Variable, Statement, Expression, Modifier,
    )
}


def to_json(obj: Any) -> Any:
    """Convert a schema object into plain JSON values, keeping field order."""
    if isinstance(obj, enum.Enum):
        return obj.name
    if isinstance(obj, list):
        return [to_json(x) for x in obj]
    if isinstance(obj, dict):
        return {k: to_json(v) for k, v in obj.items()}
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: to_json(getattr(obj, f.name)) for f in fields(obj)}
    return obj


def _modifier(d: dict) -> Modifier:
    return Modifier(ModifierKind[d["kind"]], d["visibility"], d["annotation_name"], d["other"])


def _expression(d: dict) -> Expression:
    return Expression(
        ExpressionKind[d["kind"]], d["method_name"], d["literal"],
        [_expression(e) for e in d["expressions"]],
    )


def _statement(d: dict) -> Statement:
    return Statement(
        StatementKind[d["kind"]],
        [_statement(s) for s in d["statements"]],
        [_expression(e) for e in d["expressions"]],
    )


def _variable(d: dict) -> Variable:
    return Variable(d["name"], d["type_name"], [_modifier(m) for m in d["modifiers"]])


def _method(d: dict) -> Method:
    return Method(
        d["name"],
        [_modifier(m) for m in d["modifiers"]],
        d["return_type_name"],
        [_variable(v) for v in d["params"]],
        [_statement(s) for s in d["statements"]],
    )


def _declaration(d: dict) -> Declaration:
    return Declaration(
        d["name"],
        DeclarationKind[d["kind"]],
        [_modifier(m) for m in d["modifiers"]],
        [_variable(v) for v in d["fields"]],
        [_method(m) for m in d["methods"]],
        [_declaration(n) for n in d["nested"]],
    )


def ast_from_json(d: dict) -> ASTRoot:
    ns = d["namespace"]
    return ASTRoot(Namespace(ns["name"], list(ns["imports"]), [_declaration(x) for x in ns["declarations"]]))


def _changed_file(d: dict) -> ChangedFile:
    return ChangedFile(
        d["path"], ChangeKind[d["change_kind"]], FileKind[d["file_kind"]], d["blob_hash"], d["parse_error"]
    )


def _revision(d: dict) -> Revision:
    return Revision(
        d["id"], d["author"], d["committer"], d["commit_time"], d["log"],
        [_changed_file(f) for f in d["files"]],
    )


def project_from_json(d: dict) -> Project:
    repo = d["repository"]
    return Project(
        id=d["id"],
        name=d["name"],
        url=d["url"],
        stars=d["stars"],
        created=d["created"],
        metadata=dict(d["metadata"]),
        repository=CodeRepository(
            repo["url"], repo["head_index"], [_revision(r) for r in repo["revisions"]]
        ),
    )


def compute_snapshot(repo: CodeRepository, at: Optional[int] = None) -> list[ChangedFile]:
    """Live files of ``repo`` as of time ``at`` (or head), sorted by path.

    Revisions are replayed in stored order, which already breaks commit-time
    ties by revision id.
    """
    live: dict[str, ChangedFile] = {}
    for rev in repo.revisions:
        if at is not None and rev.commit_time > at:
            continue
        for f in rev.files:
            if f.change_kind is ChangeKind.DELETED:
                live.pop(f.path, None)
            else:
                live[f.path] = f
    return [live[p] for p in sorted(live)]
