"""Assemble a dataset from a directory of clones plus optional metadata."""
from __future__ import annotations

import logging
import multiprocessing as mp
import os
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from ..dataset import DatasetManifest, write_dataset
from ..errors import InputError, MinerError
from ..schema import ASTRoot, CodeRepository, Project
from .git import BlobReader, _extract
from .github import load_metadata_dir, parse_timestamp
from .javaparse import ParseFailure, parse_source

log = logging.getLogger(__name__)


@dataclass
class BuildReport:
    manifest: Optional[DatasetManifest] = None
    projects: int = 0
    revisions: int = 0
    distinct_asts: int = 0
    parsed: int = 0
    parse_failures: int = 0
    skipped: list[tuple[str, str]] = field(default_factory=list)

    def summary(self) -> str:
        return (
            f"projects={self.projects} revisions={self.revisions} "
            f"distinct_asts={self.distinct_asts} parse_failures={self.parse_failures}"
            + (f" skipped={len(self.skipped)}" if self.skipped else "")
        )


def project_id_for(dirname: str) -> str:
    name = dirname[:-4] if dirname.endswith(".git") else dirname
    return name.replace("__", "/", 1) if "__" in name else name


def _extract_job(path: str) -> tuple[str, CodeRepository | None, dict[str, str], str]:
    try:
        repo, blobs = _extract(path)
        return path, repo, blobs, ""
    except (MinerError, OSError, ValueError) as exc:
        return path, None, {}, str(exc)
    except Exception as exc:  # git misbehaving on one repository must not sink the build
        return path, None, {}, f"{type(exc).__name__}: {exc}"


def _parse_job(path: str, items: list[tuple[str, str]]) -> list[tuple[str, ASTRoot | None]]:
    out = []
    with BlobReader(path) as reader:
        for digest, gsha in items:
            data = reader.read(gsha)
            if data is None:
                out.append((digest, None))
                continue
            try:
                out.append((digest, parse_source(data)))
            except ParseFailure as exc:
                log.debug("%s: parse failure in blob %s: %s", path, gsha, exc)
                out.append((digest, None))
    return out


def _executor(jobs: int) -> Executor | None:
    if jobs <= 1:
        return None
    methods = mp.get_all_start_methods()
    ctx = mp.get_context("fork" if "fork" in methods else None)
    return ProcessPoolExecutor(max_workers=jobs, mp_context=ctx)


def _map(pool: Executor | None, fn, *iterables):
    if pool is None:
        return list(map(fn, *iterables))
    return list(pool.map(fn, *iterables))


def _project(dirname: str, repo: CodeRepository, meta: Optional[dict]) -> Project:
    pid = project_id_for(dirname)
    project = Project(id=pid, name=pid.rsplit("/", 1)[-1], url=repo.url, repository=repo)
    if meta:
        project.stars = int(meta.get("stargazers_count") or 0)
        project.created = parse_timestamp(meta.get("created_at"))
        project.url = meta.get("html_url") or repo.url
        extras = {
            "default_branch": meta.get("default_branch"),
            "fork": meta.get("fork"),
            "language": meta.get("language"),
        }
        project.metadata = {
            k: (str(v).lower() if isinstance(v, bool) else str(v))
            for k, v in sorted(extras.items()) if v is not None
        }
    return project


def build_dataset(
    clones_root: str | os.PathLike,
    metadata_dir: str | os.PathLike | None,
    out_dir: str | os.PathLike,
    name: str,
    jobs: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> BuildReport:
    """Extract, parse and write. Output is independent of ``jobs``.

    Every distinct Java blob (by SHA-256) is parsed exactly once across the
    whole build, even when several repositories share it.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    root = Path(clones_root)
    if not root.is_dir():
        raise InputError(f"{root}: clones directory not found")
    out = Path(out_dir)
    if out.exists() and (not out.is_dir() or any(out.iterdir())):
        raise InputError(f"{out}: refusing to write dataset into a nonempty location")
    meta = load_metadata_dir(metadata_dir) if metadata_dir else {}
    meta_by_key = {k.lower(): v for k, v in meta.items()}

    clone_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    report = BuildReport()
    repos: list[tuple[str, CodeRepository]] = []
    owners: dict[str, tuple[str, str]] = {}  # sha256 -> (repo path, git blob id)

    pool = _executor(jobs)
    try:
        done = 0
        for path, repo, blobs, err in _map(pool, _extract_job, [str(p) for p in clone_dirs]):
            done += 1
            if progress and (done % 10 == 0 or done == len(clone_dirs)):
                progress(done, len(clone_dirs))
            dirname = Path(path).name
            if repo is None:
                log.warning("skipping %s: %s", dirname, err)
                report.skipped.append((dirname, err))
                continue
            repos.append((dirname, repo))
            for digest, gsha in blobs.items():
                owners.setdefault(digest, (path, gsha))

        by_repo: dict[str, list[tuple[str, str]]] = {}
        for digest in sorted(owners):
            path, gsha = owners[digest]
            by_repo.setdefault(path, []).append((digest, gsha))
        paths = sorted(by_repo)
        ast_store: dict[str, ASTRoot] = {}
        failed: set[str] = set()
        for results in _map(pool, _parse_job, paths, [by_repo[p] for p in paths]):
            for digest, ast in results:
                report.parsed += 1
                if ast is None:
                    failed.add(digest)
                else:
                    ast_store[digest] = ast
    finally:
        if pool is not None:
            pool.shutdown()

    projects = []
    for dirname, repo in repos:
        for rev in repo.revisions:
            for f in rev.files:
                if f.blob_hash in failed:
                    f.parse_error = True
        pid = project_id_for(dirname)
        projects.append(_project(dirname, repo, meta_by_key.get(pid.lower())))
        report.revisions += len(repo.revisions)

    ids = [p.id for p in projects]
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        raise InputError(f"clone directories map to duplicate project ids: {', '.join(sorted(dupes))}")
    report.manifest = write_dataset(projects, ast_store, out, name)
    report.projects = len(projects)
    report.distinct_asts = len(ast_store)
    report.parse_failures = len(failed)
    return report
