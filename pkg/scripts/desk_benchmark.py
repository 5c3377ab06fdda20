"""Desk-scale benchmark: train one model per n, then compare beam search with the baseline.

Runs the CLI end to end so the outputs match what a user would get:
``<out>/models/n<N>/`` holds each model and ``<out>/bench/`` the tables.

    python scripts/desk_benchmark.py --n 2 3 4 --batches 300
"""

import argparse
import sys
from pathlib import Path

from clifford_guidance.cli import main as cli


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[3])
    ap.add_argument("--batches", type=int, default=300)
    ap.add_argument("--batch-size", type=int, default=500)
    ap.add_argument("--instances", type=int, default=200)
    ap.add_argument("--max-steps", type=int, default=200)
    ap.add_argument("--algorithms", default="beam,greedy")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/desk")
    args = ap.parse_args()
    out = Path(args.out)
    for n in args.n:
        code = cli(["train", "--n", str(n), "--batches", str(args.batches),
                    "--batch-size", str(args.batch_size), "--seed", str(args.seed),
                    "--out", str(out / "models" / f"n{n}")])
        if code:
            sys.exit(code)
    n_range = ",".join(map(str, args.n))
    sys.exit(cli(["bench", "--n-range", n_range, "--model-dir", str(out / "models"),
                  "--instances", str(args.instances), "--max-steps", str(args.max_steps),
                  "--algorithms", args.algorithms, "--seed", str(args.seed),
                  "--out", str(out / "bench")]))


if __name__ == "__main__":
    main()
