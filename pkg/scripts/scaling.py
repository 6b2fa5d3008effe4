#!/usr/bin/env python3
"""Wall time of a CPU-bound query as the worker count grows.

Prints one tab-separated line per worker count: workers, seconds, speedup
over the first count.
"""
import argparse
import tempfile
import time
from pathlib import Path

from miner.dataset import read_dataset
from miner.engine.execute import execute
from miner.query import compile_query
from miner.synthetic import SyntheticConfig, write_synthetic

CPU_BOUND_QUERY = """\
n: output sum[p: string] of int;
h: output mean of float;
visit(input, visitor {
    before e: Expression -> {
        x := len(e.expressions) * 31 + 7;
        y := x * x - 3 * x + 1;
        n[input.id] << y / 5;
        h << 1.5 * y;
    }
    before s: Statement -> n[input.id] << len(s.statements);
});
"""


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--projects", type=int, default=256)
    ap.add_argument("--workers", type=int, nargs="+", default=[1, 2, 4, 8, 16])
    ap.add_argument("--repeat", type=int, default=1, help="keep the best of this many runs")
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()
    program = compile_query(CPU_BOUND_QUERY)
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "ds"
        write_synthetic(out, SyntheticConfig(projects=args.projects, seed=args.seed), "scaling")
        dataset = read_dataset(out)
        base = None
        print("workers\tseconds\tspeedup")
        for w in args.workers:
            best = float("inf")
            for _ in range(args.repeat):
                start = time.perf_counter()
                execute(program, dataset, w)
                best = min(best, time.perf_counter() - start)
            base = base or best
            print(f"{w}\t{best:.2f}\t{base / best:.2f}", flush=True)


if __name__ == "__main__":
    main()
