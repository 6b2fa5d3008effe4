#!/usr/bin/env python3
"""Write a seeded synthetic dataset for benchmarking."""
import argparse
import dataclasses

from miner.synthetic import SyntheticConfig, write_synthetic


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", help="dataset directory to create (must be empty or absent)")
    ap.add_argument("--name", default="synthetic")
    for field in dataclasses.fields(SyntheticConfig):
        ap.add_argument(f"--{field.name.replace('_', '-')}", type=int, default=field.default)
    args = ap.parse_args()
    cfg = SyntheticConfig(**{f.name: getattr(args, f.name) for f in dataclasses.fields(SyntheticConfig)})
    manifest = write_synthetic(args.out, cfg, args.name)
    print(f"{manifest.project_count} projects, {manifest.ast_count} ASTs -> {args.out}")


if __name__ == "__main__":
    main()
