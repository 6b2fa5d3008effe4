"""Independent reference implementations used to check the real code.

Nothing here imports the parser, the extractor or the engine.
"""
from __future__ import annotations

import re
import subprocess
from pathlib import Path

_COMMENT_OR_STRING = re.compile(r'//[^\n]*|/\*.*?\*/|"(?:\\.|[^"\\\n])*"|\'(?:\\.|[^\'\\\n])*\'', re.DOTALL)
_ANNOTATION = re.compile(r"@\s*(?!interface\b)[A-Za-z_][\w.]*")


def count_annotations(java_source: str) -> int:
    """Count annotation uses with a regex after blanking comments and literals."""
    return len(_ANNOTATION.findall(_COMMENT_OR_STRING.sub(" ", java_source)))


def head_files(repo: Path) -> dict[str, bytes]:
    """Contents of every file in the HEAD tree, read straight from git."""
    listing = subprocess.run(
        ["git", "ls-tree", "-r", "-z", "--name-only", "HEAD"], cwd=repo, check=True, capture_output=True
    ).stdout.decode()
    out = {}
    for path in filter(None, listing.split("\0")):
        out[path] = subprocess.run(
            ["git", "cat-file", "blob", f"HEAD:{path}"], cwd=repo, check=True, capture_output=True
        ).stdout
    return out


def head_annotation_count(repo: Path) -> int:
    return sum(
        count_annotations(data.decode("utf-8"))
        for path, data in head_files(repo).items()
        if path.endswith(".java")
    )


def replay_snapshot(events, at=None) -> dict[str, object]:
    """Brute-force snapshot: for each path, the last event touching it wins.

    ``events`` is a list of (time, order, path, deleted, payload).
    """
    last: dict[str, tuple] = {}
    for ev in sorted(events, key=lambda e: (e[0], e[1])):
        t, _, path, _, _ = ev
        if at is not None and t > at:
            continue
        last[path] = ev
    return {p: ev[4] for p, ev in sorted(last.items()) if not ev[3]}
