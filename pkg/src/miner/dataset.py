"""Immutable on-disk datasets: writing, reading and validation.

Layout of a dataset directory::

    manifest.json    {"format_version":1,"name":...,"created":...,"project_count":N,"ast_count":M}
    projects.jsonl   one Project per line, sorted by id
    asts.jsonl       one {"blob_hash":...,"ast":{...}} per line, sorted by blob_hash
"""
from __future__ import annotations

import json
import mmap
import os
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Optional, Sequence

from .errors import FormatError, InputError, UnsupportedVersionError
from .schema import (
    ASTRoot,
    ENUMS,
    Project,
    ast_from_json,
    project_from_json,
    to_json,
)

FORMAT_VERSION = 1
MANIFEST = "manifest.json"
PROJECTS = "projects.jsonl"
ASTS = "asts.jsonl"


@dataclass
class DatasetManifest:
    format_version: int
    name: str
    created: int
    project_count: int
    ast_count: int


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def _latest_timestamp(projects: Sequence[Project]) -> int:
    stamps = [p.created for p in projects]
    stamps += [r.commit_time for p in projects for r in p.repository.revisions]
    return max(stamps, default=0)


def write_dataset(
    projects: Sequence[Project],
    ast_store: Mapping[str, ASTRoot],
    dir: str | os.PathLike,
    name: str,
    created: Optional[int] = None,
) -> DatasetManifest:
    """Materialize a dataset at ``dir``; refuses to touch a nonempty directory.

    ``created`` defaults to the newest timestamp found in the data, so the
    output bytes depend only on the logical input.
    """
    out = Path(dir)
    if out.exists():
        if not out.is_dir() or any(out.iterdir()):
            raise InputError(f"{out}: refusing to write dataset into a nonempty location")
    ids = [p.id for p in projects]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise InputError(f"duplicate project ids: {', '.join(dupes)}")
    if any(not i for i in ids):
        raise InputError("project id must be nonempty")

    out.mkdir(parents=True, exist_ok=True)
    ordered = sorted(projects, key=lambda p: p.id)
    with open(out / PROJECTS, "w", encoding="utf-8", newline="\n") as fh:
        for p in ordered:
            fh.write(_dumps(to_json(p)) + "\n")
    with open(out / ASTS, "w", encoding="utf-8", newline="\n") as fh:
        for h in sorted(ast_store):
            fh.write(_dumps({"blob_hash": h, "ast": to_json(ast_store[h])}) + "\n")

    manifest = DatasetManifest(
        format_version=FORMAT_VERSION,
        name=name,
        created=_latest_timestamp(ordered) if created is None else created,
        project_count=len(ordered),
        ast_count=len(ast_store),
    )
    with open(out / MANIFEST, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dumps(to_json(manifest)) + "\n")
    return manifest


def _map_file(path: Path) -> bytes | mmap.mmap:
    with open(path, "rb") as fh:
        if os.fstat(fh.fileno()).st_size == 0:
            return b""
        return mmap.mmap(fh.fileno(), 0, access=mmap.ACCESS_READ)


def _line_spans(buf) -> list[tuple[int, int]]:
    spans = []
    start, end = 0, len(buf)
    while start < end:
        nl = buf.find(b"\n", start)
        if nl < 0:
            nl = end
        if nl > start:
            spans.append((start, nl))
        start = nl + 1
    return spans


def _read_manifest(root: Path) -> DatasetManifest:
    path = root / MANIFEST
    if not path.is_file():
        raise FormatError(f"{path}: manifest not found")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: corrupt manifest: {exc}") from None
    if not isinstance(raw, dict):
        raise FormatError(f"{path}: manifest is not a JSON object")
    version = raw.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported format_version {version!r}")
    try:
        m = DatasetManifest(**raw)
    except TypeError as exc:
        raise FormatError(f"{path}: corrupt manifest: {exc}") from None
    for key in ("created", "project_count", "ast_count"):
        if not isinstance(getattr(m, key), int) or (key != "created" and getattr(m, key) < 0):
            raise FormatError(f"{path}: bad value for {key}")
    return m


class Dataset:
    """Read-only handle over a dataset directory.

    Records are decoded on demand from memory-mapped files, so the handle can be
    shared by forked workers without coordination.
    """

    def __init__(self, root: Path, manifest: DatasetManifest, ast_cache_size: int = 4096) -> None:
        self.root = root
        self.manifest = manifest
        for fname in (PROJECTS, ASTS):
            if not (root / fname).is_file():
                raise FormatError(f"{root / fname}: file not found")
        self._projects = _map_file(root / PROJECTS)
        self._asts = _map_file(root / ASTS)
        self._project_spans = _line_spans(self._projects)
        if len(self._project_spans) != manifest.project_count:
            raise FormatError(
                f"{root / PROJECTS}: manifest says {manifest.project_count} projects, "
                f"found {len(self._project_spans)} records"
            )
        self._ast_index: dict[str, tuple[int, int]] = {}
        prefix = b'{"blob_hash":"'
        for start, end in _line_spans(self._asts):
            line = self._asts[start:end]
            if line.startswith(prefix) and line[len(prefix) + 64: len(prefix) + 66] == b'",':
                key = line[len(prefix): len(prefix) + 64].decode("ascii", "replace")
            else:
                try:
                    key = json.loads(line)["blob_hash"]
                except (ValueError, KeyError, TypeError):
                    raise FormatError(f"{root / ASTS}: corrupt record at byte {start}") from None
            self._ast_index[key] = (start, end)
        if len(self._ast_index) != manifest.ast_count:
            raise FormatError(
                f"{root / ASTS}: manifest says {manifest.ast_count} ASTs, "
                f"found {len(self._ast_index)} records"
            )
        self._ids: Optional[dict[str, int]] = None
        self._ast_cache: OrderedDict[str, ASTRoot] = OrderedDict()
        self._ast_cache_size = ast_cache_size

    @property
    def name(self) -> str:
        return self.manifest.name

    def __len__(self) -> int:
        return len(self._project_spans)

    def __iter__(self) -> Iterator[Project]:
        for i in range(len(self)):
            yield self.project(i)

    def project(self, index: int) -> Project:
        start, end = self._project_spans[index]
        try:
            return project_from_json(json.loads(self._projects[start:end]))
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"{self.root / PROJECTS}: corrupt record {index}: {exc}") from None

    def project_by_id(self, project_id: str) -> Project:
        if self._ids is None:
            self._ids = {}
            for i, (start, end) in enumerate(self._project_spans):
                self._ids[json.loads(self._projects[start:end])["id"]] = i
        return self.project(self._ids[project_id])

    def has_ast(self, blob_hash: str) -> bool:
        return blob_hash in self._ast_index

    def ast(self, blob_hash: str) -> Optional[ASTRoot]:
        cached = self._ast_cache.get(blob_hash)
        if cached is not None:
            self._ast_cache.move_to_end(blob_hash)
            return cached
        span = self._ast_index.get(blob_hash)
        if span is None:
            return None
        try:
            root = ast_from_json(json.loads(self._asts[span[0]:span[1]])["ast"])
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"{self.root / ASTS}: corrupt AST {blob_hash}: {exc}") from None
        self._ast_cache[blob_hash] = root
        if len(self._ast_cache) > self._ast_cache_size:
            self._ast_cache.popitem(last=False)
        return root

    def blob_hashes(self) -> list[str]:
        return list(self._ast_index)


def read_dataset(dir: str | os.PathLike) -> Dataset:
    root = Path(dir)
    return Dataset(root, _read_manifest(root))


@dataclass
class Issue:
    check: str
    message: str

    def __str__(self) -> str:
        return f"[{self.check}] {self.message}"


@dataclass
class ValidationReport:
    dataset: str
    issues: list[Issue] = field(default_factory=list)
    projects: int = 0
    revisions: int = 0
    asts: int = 0

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, check: str, message: str) -> None:
        self.issues.append(Issue(check, message))


def _check_enum(report: ValidationReport, where: str, enum_name: str, value) -> None:
    if value not in ENUMS[enum_name].__members__:
        report.add("enum", f"{where}: invalid {enum_name} value {value!r}")


def _check_modifiers(report: ValidationReport, where: str, mods) -> None:
    for m in mods:
        _check_enum(report, where, "ModifierKind", m.get("kind"))
        if m.get("kind") == "ANNOTATION" and not m.get("annotation_name"):
            report.add("enum", f"{where}: annotation modifier without a name")


def _check_expression(report, where, e) -> None:
    _check_enum(report, where, "ExpressionKind", e.get("kind"))
    for sub in e.get("expressions", []):
        _check_expression(report, where, sub)


def _check_statement(report, where, s) -> None:
    _check_enum(report, where, "StatementKind", s.get("kind"))
    for sub in s.get("statements", []):
        _check_statement(report, where, sub)
    for e in s.get("expressions", []):
        _check_expression(report, where, e)


def _check_declaration(report, where, d) -> None:
    _check_enum(report, where, "DeclarationKind", d.get("kind"))
    _check_modifiers(report, where, d.get("modifiers", []))
    for v in d.get("fields", []):
        _check_modifiers(report, where, v.get("modifiers", []))
    for m in d.get("methods", []):
        _check_modifiers(report, where, m.get("modifiers", []))
        for v in m.get("params", []):
            _check_modifiers(report, where, v.get("modifiers", []))
        for s in m.get("statements", []):
            _check_statement(report, where, s)
    for n in d.get("nested", []):
        _check_declaration(report, where, n)


def _jsonl(path: Path, report: ValidationReport, check: str) -> list[dict]:
    records = []
    with open(path, "rb") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except ValueError as exc:
                report.add(check, f"{path.name}:{lineno}: unparseable record: {exc}")
    return records


def validate_dataset(dir: str | os.PathLike) -> ValidationReport:
    """Check a dataset directory; problems become report entries, never exceptions."""
    root = Path(dir)
    report = ValidationReport(dataset=str(root))
    try:
        manifest = _read_manifest(root)
    except FormatError as exc:
        report.add("manifest", str(exc))
        return report
    missing = [f for f in (PROJECTS, ASTS) if not (root / f).is_file()]
    for f in missing:
        report.add("manifest", f"{root / f}: file not found")
    if missing:
        return report

    projects = _jsonl(root / PROJECTS, report, "records")
    asts = _jsonl(root / ASTS, report, "records")
    report.projects, report.asts = len(projects), len(asts)
    if manifest.project_count != len(projects):
        report.add("counts", f"manifest project_count={manifest.project_count}, found {len(projects)}")
    if manifest.ast_count != len(asts):
        report.add("counts", f"manifest ast_count={manifest.ast_count}, found {len(asts)}")

    ast_hashes = set()
    prev_hash = None
    for rec in asts:
        h = rec.get("blob_hash")
        if prev_hash is not None and not (h > prev_hash):
            report.add("ordering", f"asts.jsonl not strictly sorted at {h}")
        prev_hash = h
        ast_hashes.add(h)
        try:
            for d in rec["ast"]["namespace"]["declarations"]:
                _check_declaration(report, f"ast {h}", d)
        except (KeyError, TypeError):
            report.add("records", f"ast {h}: malformed AST record")

    prev_id = None
    for p in projects:
        try:
            pid = p["id"]
            revs = p["repository"]["revisions"]
            head = p["repository"]["head_index"]
        except (KeyError, TypeError):
            report.add("records", f"malformed project record {p.get('id') if isinstance(p, dict) else p!r}")
            continue
        if not pid:
            report.add("records", "project with empty id")
        if prev_id is not None and not (pid > prev_id):
            report.add("ordering", f"projects.jsonl not strictly sorted by id at {pid}")
        prev_id = pid
        if not isinstance(p.get("stars"), int) or p["stars"] < 0:
            report.add("records", f"project {pid}: invalid stars {p.get('stars')!r}")
        report.revisions += len(revs)
        if revs and not (isinstance(head, int) and 0 <= head < len(revs)):
            report.add("head", f"project {pid}: head_index {head!r} out of range")
        if not revs and head is not None:
            report.add("head", f"project {pid}: head_index set on empty history")
        prev_key = None
        seen_ids = set()
        for r in revs:
            key = (r.get("commit_time"), r.get("id"))
            if r.get("id") in seen_ids:
                report.add("ordering", f"project {pid}: duplicate revision {r.get('id')}")
            seen_ids.add(r.get("id"))
            if prev_key is not None and key < prev_key:
                report.add("ordering", f"project {pid}: revision {r.get('id')} out of (commit_time, id) order")
            prev_key = key
            prev_path = None
            for f in r.get("files", []):
                path = f.get("path")
                where = f"project {pid}, revision {r.get('id')}, file {path}"
                if prev_path is not None and not (path > prev_path):
                    report.add("ordering", f"project {pid}, revision {r.get('id')}: files not sorted at {path}")
                prev_path = path
                _check_enum(report, where, "ChangeKind", f.get("change_kind"))
                _check_enum(report, where, "FileKind", f.get("file_kind"))
                h = f.get("blob_hash")
                if f.get("change_kind") == "DELETED":
                    if h:
                        report.add("records", f"{where}: DELETED file carries a blob hash")
                    continue
                if f.get("file_kind") != "SOURCE_JAVA" or not h:
                    continue
                if f.get("parse_error"):
                    if h in ast_hashes:
                        report.add("records", f"{where}: parse_error set but AST {h} stored")
                elif h not in ast_hashes:
                    report.add("dangling", f"{where}: blob_hash {h} has no stored AST")
    return report
