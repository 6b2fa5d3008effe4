"""Run a typed program over every project of a dataset, optionally in parallel."""
from __future__ import annotations

import multiprocessing
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from ..errors import QueryRuntimeError
from ..query.typecheck import TypedProgram
from .aggregate import AggregateState, OutputSpec, Row, merge_into, table_rows
from .interp import Interpreter

RECURSION_LIMIT = 6000


@dataclass(frozen=True)
class ProjectError:
    project_id: str
    line: int
    column: int
    message: str

    def format(self) -> str:
        return f"{self.project_id}\t{self.line}:{self.column}\t{self.message}"


@dataclass
class ExecutionResult:
    state: AggregateState
    rows: list[Row]
    errors: list[ProjectError] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "".join(r.line() + "\n" for r in self.rows)

    @property
    def errors_text(self) -> str:
        return "".join(e.format() + "\n" for e in self.errors)

    @property
    def ok(self) -> bool:
        return not self.errors


def run_partition(typed: TypedProgram, dataset, indices) -> tuple[AggregateState, list[tuple[int, ProjectError]]]:
    """Evaluate the projects at ``indices``; a failing project contributes nothing."""
    interp = Interpreter(typed.program, typed.outputs, dataset)
    total = AggregateState.empty(interp.specs)
    errors = []
    for i in indices:
        project = dataset.project(i)
        try:
            state = interp.run_project(project)
        except QueryRuntimeError as exc:
            errors.append((i, ProjectError(project.id, exc.pos[0], exc.pos[1], exc.message)))
            continue
        merge_into(total, state)
    return total, errors


# set in the parent before forking; workers read it instead of unpickling the program
_JOB: Optional[tuple[TypedProgram, object]] = None


def _worker(indices: list[int]):
    sys.setrecursionlimit(max(sys.getrecursionlimit(), RECURSION_LIMIT))
    typed, dataset = _JOB
    return run_partition(typed, dataset, indices)


def partition(n_projects: int, workers: int) -> list[list[int]]:
    """Round-robin assignment of project indices to workers."""
    parts = [list(range(w, n_projects, workers)) for w in range(workers)]
    return [p for p in parts if p]


def execute(typed: TypedProgram, dataset, workers: int = 1) -> ExecutionResult:
    if workers < 1:
        raise ValueError("workers must be >= 1")
    global _JOB
    parts = partition(len(dataset), workers)
    merged = AggregateState.empty({n: OutputSpec.from_decl(d) for n, d in typed.outputs.items()})
    errors: list[tuple[int, ProjectError]] = []
    if len(parts) <= 1:
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, RECURSION_LIMIT))
        try:
            results = [run_partition(typed, dataset, p) for p in parts]
        finally:
            sys.setrecursionlimit(old)
    else:
        _JOB = (typed, dataset)
        try:
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(max_workers=len(parts), mp_context=ctx) as pool:
                results = list(pool.map(_worker, parts))
        finally:
            _JOB = None
    for state, errs in results:
        merge_into(merged, state)
        errors.extend(errs)
    rows, overflow = table_rows(merged)
    out = [e for _, e in sorted(errors, key=lambda t: t[0])]
    decls = typed.outputs
    for o in overflow:
        line, col = decls[o.name].pos
        out.append(ProjectError("*", line, col, o.message()))
    return ExecutionResult(merged, rows, out)
