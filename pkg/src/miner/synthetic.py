"""Seeded synthetic corpora for benchmarks and large randomized tests."""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass

from .dataset import DatasetManifest, write_dataset
from .schema import (
    ASTRoot,
    ChangedFile,
    ChangeKind,
    CodeRepository,
    Declaration,
    DeclarationKind,
    Expression,
    ExpressionKind,
    FileKind,
    Method,
    Modifier,
    ModifierKind,
    Namespace,
    Project,
    Revision,
    Statement,
    StatementKind,
    Variable,
    to_json,
)

ANNOTATIONS = ("Override", "Deprecated", "Test", "Nullable", "Inject")
BASE_TIME = 1_300_000_000_000_000


@dataclass
class SyntheticConfig:
    projects: int = 100
    revisions: int = 6
    files_per_revision: int = 3
    paths: int = 8
    methods: int = 4
    statements: int = 6
    seed: int = 0


def _modifiers(rng: random.Random) -> list[Modifier]:
    mods = []
    if rng.random() < 0.6:
        mods.append(Modifier(ModifierKind.ANNOTATION, annotation_name=rng.choice(ANNOTATIONS)))
    mods.append(Modifier(ModifierKind.VISIBILITY, visibility=rng.choice(("public", "private", "protected"))))
    if rng.random() < 0.3:
        mods.append(Modifier(ModifierKind.STATIC))
    return mods


def _expression(rng: random.Random, depth: int) -> Expression:
    if depth == 0 or rng.random() < 0.4:
        return Expression(ExpressionKind.LITERAL, literal=str(rng.randrange(100)))
    kids = [_expression(rng, depth - 1) for _ in range(rng.randrange(1, 3))]
    return Expression(ExpressionKind.CALL, method_name=f"m{rng.randrange(10)}", expressions=kids)


def _statement(rng: random.Random, depth: int) -> Statement:
    kind = rng.choice((StatementKind.EXPR, StatementKind.RETURN, StatementKind.IF, StatementKind.FOR))
    inner = []
    if depth > 0 and kind in (StatementKind.IF, StatementKind.FOR):
        inner = [_statement(rng, depth - 1) for _ in range(rng.randrange(1, 3))]
    return Statement(kind, inner, [_expression(rng, 3)])


def random_ast(rng: random.Random, cfg: SyntheticConfig, name: str) -> ASTRoot:
    methods = [
        Method(
            f"m{i}", _modifiers(rng), "void",
            [Variable(f"p{j}", "int", _modifiers(rng) if rng.random() < 0.2 else []) for j in range(rng.randrange(3))],
            [_statement(rng, 2) for _ in range(rng.randrange(1, cfg.statements + 1))],
        )
        for i in range(rng.randrange(1, cfg.methods + 1))
    ]
    fields = [Variable(f"f{i}", "String", _modifiers(rng)) for i in range(rng.randrange(3))]
    decl = Declaration(name, DeclarationKind.CLASS, _modifiers(rng), fields, methods, [])
    return ASTRoot(Namespace("org.synthetic", ["java.util.List"], [decl]))


def blob_hash(root: ASTRoot, salt: str) -> str:
    payload = json.dumps(to_json(root), sort_keys=True) + salt
    return hashlib.sha256(payload.encode()).hexdigest()


def random_project(rng: random.Random, cfg: SyntheticConfig, index: int, asts: dict[str, ASTRoot]) -> Project:
    pid = f"synthetic/p{index:05d}"
    live: set[str] = set()
    revisions = []
    t = BASE_TIME + index * 1_000_000
    for r in range(cfg.revisions):
        t += rng.randrange(1, 10_000) * 1_000_000
        touched = {}
        for _ in range(rng.randrange(1, cfg.files_per_revision + 1)):
            path = f"src/C{rng.randrange(cfg.paths)}.java"
            if path in live and rng.random() < 0.15:
                touched[path] = ChangedFile(path, ChangeKind.DELETED, FileKind.SOURCE_JAVA)
                continue
            kind = ChangeKind.MODIFIED if path in live else ChangeKind.ADDED
            root = random_ast(rng, cfg, path[4:-5])
            h = blob_hash(root, f"{pid}:{r}:{path}")
            asts[h] = root
            touched[path] = ChangedFile(path, kind, FileKind.SOURCE_JAVA, h)
        for path, f in touched.items():
            if f.change_kind is ChangeKind.DELETED:
                live.discard(path)
            else:
                live.add(path)
        files = [touched[p] for p in sorted(touched)]
        rev_id = hashlib.sha1(f"{pid}:{r}".encode()).hexdigest()
        revisions.append(Revision(rev_id, "dev", "dev", t, f"change {r}", files))
    repo = CodeRepository(f"https://example.invalid/{pid}.git", len(revisions) - 1 if revisions else None, revisions)
    return Project(pid, f"p{index:05d}", f"https://example.invalid/{pid}", rng.randrange(1000), BASE_TIME, {}, repo)


def generate(cfg: SyntheticConfig) -> tuple[list[Project], dict[str, ASTRoot]]:
    rng = random.Random(cfg.seed)
    asts: dict[str, ASTRoot] = {}
    projects = [random_project(rng, cfg, i, asts) for i in range(cfg.projects)]
    return projects, asts


def write_synthetic(out_dir, cfg: SyntheticConfig, name: str = "synthetic") -> DatasetManifest:
    projects, asts = generate(cfg)
    return write_dataset(projects, asts, out_dir, name)
