"""Exhaustive distance tables for every (n, phase mode, weighting) that fits in memory.

    python scripts/gods_number_table.py --out runs/gods
"""

import argparse
import json
import time
from pathlib import Path

from clifford_guidance.guidance import atomic_write_text
from clifford_guidance.moves import build_moveset
from clifford_guidance.oracle import build_distance_table, gods_number

CASES = [
    (1, "phases"), (1, "phaseless"),
    (2, "phases"), (2, "phaseless"),
    (3, "phaseless"),
]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/gods")
    ap.add_argument("--skip-n3", action="store_true", help="skip the 1.45M-node n=3 table")
    args = ap.parse_args()
    out = Path(args.out)
    rows = []
    for n, mode in CASES:
        if n == 3 and args.skip_n3:
            continue
        for scheme in ("unit", "cnot_count"):
            start = time.perf_counter()
            table = build_distance_table(build_moveset(n, weight_scheme=scheme), mode, allow_large=True)
            row = {"n": n, "phase_mode": mode, "weights": scheme, "nodes": table.node_count,
                   "gods_number": gods_number(table), "histogram": table.histogram(),
                   "seconds": round(time.perf_counter() - start, 2)}
            rows.append(row)
            print(f"n={n} {mode:9s} {scheme:10s} nodes={row['nodes']:>8d} "
                  f"god={row['gods_number']:g} ({row['seconds']}s)")
    atomic_write_text(out / "gods_numbers.json", json.dumps(rows, indent=1) + "\n")


if __name__ == "__main__":
    main()
