"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 input/format error, 3 partial
failure, 4 network or rate-limit error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .csvexport import to_csv
from .dataset import read_dataset, validate_dataset
from .errors import FormatError, InputError, NetworkError
from .ingest.github import DEFAULT_API_BASE, SearchCriteria, fetch_repo_metadata, list_repositories, write_metadata_file

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_PARTIAL, EXIT_NETWORK = 0, 1, 2, 3, 4

log = logging.getLogger("miner")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _nonneg(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="miner", description="Build repository datasets and run mining queries over them.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress details")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    cpus = os.cpu_count() or 1

    s = sub.add_parser("search", help="search GitHub and write one metadata file per repository")
    s.add_argument("--query", required=True)
    s.add_argument("--min-stars", type=_nonneg, default=0)
    s.add_argument("--language")
    s.add_argument("--max", type=_positive, default=100, dest="max_results")
    s.add_argument("--api-base", default=DEFAULT_API_BASE)
    s.add_argument("--out", required=True)

    s = sub.add_parser("fetch-metadata", help="fetch metadata for named repositories")
    s.add_argument("names", nargs="*", metavar="NAME")
    s.add_argument("--repos", help="file with one owner/name per line")
    s.add_argument("--out", required=True)
    s.add_argument("--api-base", default=DEFAULT_API_BASE)
    s.add_argument("--force", action="store_true", help="overwrite existing metadata files")

    s = sub.add_parser("clone", help="bare-clone repositories")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--metadata")
    g.add_argument("--repos")
    s.add_argument("--dest", required=True)
    s.add_argument("--jobs", type=_positive, default=4)

    s = sub.add_parser("build", help="build a dataset from cloned repositories")
    s.add_argument("--src", required=True)
    s.add_argument("--metadata")
    s.add_argument("--out", required=True)
    s.add_argument("--name", required=True)
    s.add_argument("--jobs", type=_positive, default=cpus)

    s = sub.add_parser("info", help="print a dataset's manifest and counts")
    s.add_argument("dataset")

    s = sub.add_parser("validate", help="check a dataset for consistency")
    s.add_argument("dataset")

    s = sub.add_parser("run", help="run a query over a dataset")
    s.add_argument("query")
    s.add_argument("--dataset", required=True)
    s.add_argument("--workers", type=_positive, default=cpus)
    s.add_argument("--out")
    s.add_argument("--errors")

    s = sub.add_parser("csv", help="convert a result file to CSV")
    s.add_argument("result")
    s.add_argument("--header", action="store_true")
    s.add_argument("--out")
    return p


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="")


def cmd_search(args) -> int:
    raw: dict[str, dict] = {}
    criteria = SearchCriteria(args.query, args.min_stars, args.language, args.max_results)
    found = list_repositories(criteria, args.api_base, os.environ.get("GITHUB_TOKEN"), raw=raw)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for meta in found:
        write_metadata_file(out, raw[meta.full_name])
        print(f"{meta.full_name}\t{meta.stargazers_count}")
    return EXIT_OK


def _repo_names(args) -> list[str]:
    from .ingest.git import read_repo_list

    names = list(args.names)
    if args.repos:
        names += read_repo_list(args.repos)
    return names


def cmd_fetch_metadata(args) -> int:
    names = _repo_names(args)
    if not names:
        raise UsageError("give repository names or --repos FILE")
    report = fetch_repo_metadata(names, args.out, args.api_base, os.environ.get("GITHUB_TOKEN"), force=args.force)
    for name, why in report.failed:
        print(f"{name}: {why}", file=sys.stderr)
    print(f"written={len(report.written)} skipped={len(report.skipped)} failed={len(report.failed)}", file=sys.stderr)
    return EXIT_PARTIAL if report.partial_failure else EXIT_OK


def cmd_clone(args) -> int:
    from .ingest.git import clone_repositories, read_repo_list

    if args.metadata:
        if not Path(args.metadata).is_dir():
            raise InputError(f"{args.metadata}: metadata directory not found")
        from .ingest.git import sources_from_metadata

        sources = sources_from_metadata(args.metadata)
    else:
        sources = read_repo_list(args.repos)
    report = clone_repositories(sources, args.dest, args.jobs)
    for name, why in report.failed:
        print(f"{name}: {why}", file=sys.stderr)
    print(f"cloned {len(report.succeeded)}/{report.requested}", file=sys.stderr)
    return EXIT_PARTIAL if report.failed else EXIT_OK


def cmd_build(args) -> int:
    from .ingest.build import build_dataset

    def progress(done: int, total: int) -> None:
        print(f"extracted {done}/{total} repositories", file=sys.stderr)

    report = build_dataset(args.src, args.metadata, args.out, args.name, jobs=args.jobs, progress=progress)
    print(report.summary())
    return EXIT_PARTIAL if report.skipped else EXIT_OK


def cmd_info(args) -> int:
    ds = read_dataset(args.dataset)
    m = ds.manifest
    revisions = sum(len(p.repository.revisions) for p in ds)
    print(f"name: {m.name}")
    print(f"format_version: {m.format_version}")
    print(f"created: {m.created}")
    print(f"projects: {m.project_count}")
    print(f"revisions: {revisions}")
    print(f"asts: {m.ast_count}")
    return EXIT_OK


def cmd_validate(args) -> int:
    report = validate_dataset(args.dataset)
    for issue in report.issues:
        print(issue)
    print(f"{len(report.issues)} issue(s): projects={report.projects} revisions={report.revisions} asts={report.asts}",
          file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_INPUT


def cmd_run(args) -> int:
    from .engine.execute import execute
    from .query import QueryError, compile_query

    path = Path(args.query)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None
    dataset = read_dataset(args.dataset)
    try:
        typed = compile_query(text)
    except QueryError as exc:
        print(exc.format(str(path)), file=sys.stderr)
        return EXIT_INPUT
    result = execute(typed, dataset, args.workers)
    _write(args.out, result.text)
    errors_path = args.errors or (args.out + ".errors" if args.out else None)
    if errors_path is not None:
        Path(errors_path).write_text(result.errors_text, encoding="utf-8", newline="")
    elif result.errors:
        sys.stderr.write(result.errors_text)
    if result.errors:
        print(f"{len(result.errors)} project(s) failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_csv(args) -> int:
    try:
        text = Path(args.result).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{args.result}: {exc}") from None
    _write(args.out, to_csv(text, header=args.header))
    return EXIT_OK


COMMANDS = {
    "search": cmd_search,
    "fetch-metadata": cmd_fetch_metadata,
    "clone": cmd_clone,
    "build": cmd_build,
    "info": cmd_info,
    "validate": cmd_validate,
    "run": cmd_run,
    "csv": cmd_csv,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"miner {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NetworkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except (InputError, FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
