#!/usr/bin/env python3
"""Time the annotation-count query over a synthetic corpus of small projects."""
import argparse
import os
import tempfile
import time
from pathlib import Path

from miner.dataset import read_dataset
from miner.engine.execute import execute
from miner.query import compile_query
from miner.synthetic import SyntheticConfig, write_synthetic

ANNOTATION_QUERY = """\
o: output sum[project: string] of int;

visit(input, visitor {
    before node: CodeRepository -> {
        snapshot := getsnapshot(node);
        foreach (i: int; def(snapshot[i]))
            visit(snapshot[i]);
        stop;
    }
    before mod: Modifier -> {
        if (mod.kind == ModifierKind.ANNOTATION)
            o[input.id] << 1;
    }
});
"""


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--projects", type=int, default=1000)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--seed", type=int, default=4)
    args = ap.parse_args()
    cfg = SyntheticConfig(projects=args.projects, revisions=4, files_per_revision=2, paths=5, methods=3,
                          statements=4, seed=args.seed)
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "ds"
        write_synthetic(out, cfg, "throughput")
        start = time.perf_counter()
        result = execute(compile_query(ANNOTATION_QUERY), read_dataset(out), args.workers)
        elapsed = time.perf_counter() - start
    rows = result.text.count("\n")
    print(f"projects={args.projects} workers={args.workers} rows={rows} errors={len(result.errors)} "
          f"seconds={elapsed:.2f}")


if __name__ == "__main__":
    main()
