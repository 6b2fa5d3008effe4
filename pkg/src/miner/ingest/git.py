"""Git plumbing: non-interactive bare clones and history extraction.

Everything shells out to the system ``git``. Prompts are disabled so a clone
that needs credentials fails instead of hanging; authentication is whatever
the ambient git configuration provides.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..errors import InputError
from ..schema import ChangeKind, ChangedFile, CodeRepository, FileKind, Revision

log = logging.getLogger(__name__)

GIT_ENV = {
    "GIT_TERMINAL_PROMPT": "0",
    "GIT_ASKPASS": "",
    "SSH_ASKPASS": "",
    "GIT_SSH_COMMAND": "ssh -o BatchMode=yes",
    "LC_ALL": "C",
}
GITLINK_MODE = "160000"


def git_env() -> dict[str, str]:
    env = dict(os.environ)
    env.update(GIT_ENV)
    return env


def run_git(args: Sequence[str], cwd: str | os.PathLike | None = None, input: bytes | None = None) -> bytes:
    proc = subprocess.run(
        ["git", *args], cwd=cwd, input=input, capture_output=True, env=git_env(),
        stdin=None if input is not None else subprocess.DEVNULL,
    )
    if proc.returncode != 0:
        raise subprocess.CalledProcessError(proc.returncode, ["git", *args], proc.stdout, proc.stderr)
    return proc.stdout


@dataclass
class CloneReport:
    requested: int = 0
    succeeded: list[str] = field(default_factory=list)
    failed: list[tuple[str, str]] = field(default_factory=list)


@dataclass(frozen=True)
class CloneSource:
    full_name: str  # owner/name
    url: str

    @property
    def dirname(self) -> str:
        return self.full_name.replace("/", "__")


def _name_from_location(loc: str) -> str:
    path = loc.rstrip("/")
    if "://" in path:
        path = path.split("://", 1)[1]
        path = path.split("/", 1)[1] if "/" in path else path
    if ":" in path and not path.startswith("/"):
        path = path.split(":", 1)[1]  # scp-like git@host:owner/name
    if path.endswith(".git"):
        path = path[:-4]
    parts = [p for p in path.split("/") if p]
    if len(parts) >= 2:
        return f"{parts[-2]}/{parts[-1]}"
    return f"local/{parts[-1]}" if parts else "local/repo"


def source_from_line(line: str, github: str = "https://github.com") -> CloneSource:
    """Interpret one ``--repos`` line: ``owner/name``, a local path, or a URL."""
    s = line.strip()
    is_name = (
        s.count("/") == 1 and "://" not in s and not s.startswith((".", "/", "~"))
        and not os.path.exists(s)
    )
    if is_name:
        return CloneSource(s, f"{github}/{s}.git")
    if "://" not in s and ":" not in s.split("/", 1)[0]:
        s = str(Path(s).expanduser().resolve())
    return CloneSource(_name_from_location(s), s)


def read_repo_list(path: str | os.PathLike) -> list[str]:
    lines = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if line:
            lines.append(line)
    return lines


def sources_from_metadata(meta_dir: str | os.PathLike) -> list[CloneSource]:
    out = []
    for path in sorted(Path(meta_dir).glob("*.json")):
        data = json.loads(path.read_text(encoding="utf-8"))
        name = data["full_name"]
        url = data.get("clone_url") or (data["html_url"].rstrip("/") + ".git")
        out.append(CloneSource(name, url))
    return out


def is_git_repo(path: str | os.PathLike) -> bool:
    p = Path(path)
    if not p.is_dir():
        return False
    try:
        run_git(["rev-parse", "--git-dir"], cwd=p)
    except (subprocess.CalledProcessError, OSError):
        return False
    return True


def _clone_one(src: CloneSource, dest: Path) -> Optional[str]:
    target = dest / src.dirname
    if target.exists() and (target / "HEAD").is_file() and (target / "objects").is_dir():
        return None
    try:
        run_git(["clone", "--bare", "--quiet", "--", src.url, str(target)])
    except subprocess.CalledProcessError as exc:
        err = exc.stderr.decode("utf-8", "replace").strip()
        return err[-500:] or f"git clone exited {exc.returncode}"
    except OSError as exc:
        return str(exc)
    return None


def clone_repositories(
    sources: str | os.PathLike | Iterable[str | CloneSource],
    dest: str | os.PathLike,
    jobs: int = 1,
) -> CloneReport:
    """Bare-clone every source into ``dest/<owner>__<name>``.

    ``sources`` is either a metadata directory or an iterable of repo
    specifiers. Existing clones count as successes without touching the
    network; a failing clone never stops the others.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    if isinstance(sources, (str, os.PathLike)) and Path(sources).is_dir() and not is_git_repo(sources):
        srcs = sources_from_metadata(sources)
    else:
        srcs = [s if isinstance(s, CloneSource) else source_from_line(s) for s in sources]
    seen: dict[str, CloneSource] = {}
    for s in srcs:
        seen.setdefault(s.full_name, s)
    srcs = list(seen.values())

    out = Path(dest)
    out.mkdir(parents=True, exist_ok=True)
    report = CloneReport(requested=len(srcs))
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(lambda s: _clone_one(s, out), srcs))
    for src, err in zip(srcs, results):
        if err is None:
            report.succeeded.append(src.full_name)
        else:
            log.warning("clone of %s failed: %s", src.full_name, err)
            report.failed.append((src.full_name, err))
    return report


class BlobReader:
    """A long-lived ``git cat-file --batch`` process."""

    def __init__(self, repo_path: str | os.PathLike) -> None:
        self.proc = subprocess.Popen(
            ["git", "cat-file", "--batch"], cwd=repo_path, env=git_env(),
            stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
        )

    def read(self, sha: str) -> Optional[bytes]:
        assert self.proc.stdin is not None and self.proc.stdout is not None
        self.proc.stdin.write(sha.encode() + b"\n")
        self.proc.stdin.flush()
        header = self.proc.stdout.readline().split()
        if len(header) != 3:
            return None
        size = int(header[2])
        data = self.proc.stdout.read(size)
        self.proc.stdout.read(1)
        return data if header[1] == b"blob" else None

    def close(self) -> None:
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.wait()

    def __enter__(self) -> "BlobReader":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def file_kind_for(path: str) -> FileKind:
    return FileKind.SOURCE_JAVA if path.lower().endswith(".java") else FileKind.OTHER


_STATUS = {"A": ChangeKind.ADDED, "M": ChangeKind.MODIFIED, "T": ChangeKind.MODIFIED, "D": ChangeKind.DELETED}


def _diff_entries(repo: Path, commit: str, parent: Optional[str]) -> list[tuple[str, str, str, str]]:
    """(path, status, new_mode, new_sha) against the first parent."""
    if parent is None:
        args = ["diff-tree", "-r", "-z", "--raw", "--no-renames", "--no-commit-id", "--root", commit]
    else:
        args = ["diff-tree", "-r", "-z", "--raw", "--no-renames", parent, commit]
    out = run_git(args, cwd=repo)
    fields_ = out.split(b"\0")
    entries = []
    i = 0
    while i < len(fields_) - 1:
        meta = fields_[i].decode("utf-8", "replace")
        if not meta.startswith(":"):
            i += 1
            continue
        path = fields_[i + 1].decode("utf-8", "replace")
        _, new_mode, _, new_sha, status = meta[1:].split(" ")
        entries.append((path, status[0], new_mode, new_sha))
        i += 2
    return entries


def _extract(repo_path: str | os.PathLike) -> tuple[CodeRepository, dict[str, str]]:
    """History plus a map of SHA-256 -> git blob id for each Java blob seen."""
    repo = Path(repo_path)
    if not is_git_repo(repo):
        raise InputError(f"{repo}: not a git repository")
    try:
        head = run_git(["rev-parse", "--verify", "--quiet", "HEAD^{commit}"], cwd=repo).decode().strip()
    except subprocess.CalledProcessError:
        return CodeRepository(url=_origin(repo), head_index=None, revisions=[]), {}

    raw = run_git(
        ["log", "--no-color", "--encoding=UTF-8", "--format=%H%x00%P%x00%an%x00%cn%x00%ct%x00%B%x1e", head],
        cwd=repo,
    )
    revisions: list[Revision] = []
    parents: dict[str, Optional[str]] = {}
    for rec in raw.split(b"\x1e"):
        rec = rec.lstrip(b"\n")
        if not rec:
            continue
        sha, par, author, committer, ctime, body = rec.split(b"\0", 5)
        sid = sha.decode()
        parents[sid] = par.split()[0].decode() if par.strip() else None
        revisions.append(Revision(
            id=sid,
            author=author.decode("utf-8", "replace"),
            committer=committer.decode("utf-8", "replace"),
            commit_time=int(ctime) * 1_000_000,
            log=body.decode("utf-8", "replace").rstrip("\n"),
        ))
    revisions.sort(key=lambda r: (r.commit_time, r.id))

    java_blobs: dict[str, str] = {}
    hash_cache: dict[str, Optional[str]] = {}
    with BlobReader(repo) as reader:
        for rev in revisions:
            files = []
            for path, status, mode, gsha in _diff_entries(repo, rev.id, parents[rev.id]):
                if mode == GITLINK_MODE or status not in _STATUS:
                    continue
                kind = _STATUS[status]
                fkind = file_kind_for(path)
                if kind is ChangeKind.DELETED:
                    files.append(ChangedFile(path, kind, fkind, "", False))
                    continue
                if gsha not in hash_cache:
                    data = reader.read(gsha)
                    hash_cache[gsha] = None if data is None else hashlib.sha256(data).hexdigest()
                digest = hash_cache[gsha]
                if digest is None:
                    log.warning("%s: unreadable blob %s at %s", repo, gsha, path)
                    files.append(ChangedFile(path, kind, fkind, "", True))
                    continue
                if fkind is FileKind.SOURCE_JAVA:
                    java_blobs.setdefault(digest, gsha)
                files.append(ChangedFile(path, kind, fkind, digest, False))
            files.sort(key=lambda f: f.path)
            rev.files = files

    head_index = next(i for i, r in enumerate(revisions) if r.id == head)
    return CodeRepository(url=_origin(repo), head_index=head_index, revisions=revisions), java_blobs


def _origin(repo: Path) -> str:
    try:
        return run_git(["config", "--get", "remote.origin.url"], cwd=repo).decode().strip()
    except subprocess.CalledProcessError:
        return ""


def extract_history(repo_path: str | os.PathLike) -> CodeRepository:
    """Linearized default-branch history with per-file changes (no ASTs)."""
    return _extract(repo_path)[0]
