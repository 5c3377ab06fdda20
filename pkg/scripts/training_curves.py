"""Loss curves for a range of qubit counts under linear and log-linear walk scaling.

Writes ``loss_n<N>_<scaling>.csv`` (step,loss) per run plus a summary table.

    python scripts/training_curves.py --n 2 3 4 --batches 300 --batch-size 500
"""

import argparse
import json
from pathlib import Path

from clifford_guidance.guidance import TrainConfig, atomic_write_text, loss_csv, save_model, train
from clifford_guidance.moves import build_moveset
from clifford_guidance.walker import WalkConfig


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--scalings", nargs="+", default=["linear", "loglinear"])
    ap.add_argument("--batches", type=int, default=300)
    ap.add_argument("--batch-size", type=int, default=500)
    ap.add_argument("--weights", default="cnot_count")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/curves")
    args = ap.parse_args()
    out = Path(args.out)
    summary = []
    for n in args.n:
        ms = build_moveset(n, weight_scheme=args.weights)
        for scaling in args.scalings:
            walk = WalkConfig(n, scaling, seed=args.seed)
            if walk.l_max < 1:
                print(f"skip n={n} {scaling}: L_max={walk.l_max}")
                continue
            cfg = TrainConfig(walk, args.batch_size, args.batches, seed=args.seed)
            try:
                model, rep = train(cfg, ms)
            except ValueError as exc:
                print(f"skip n={n} {scaling}: {exc}")
                continue
            atomic_write_text(out / f"loss_n{n}_{scaling}.csv", loss_csv(rep.losses))
            save_model(model, out / f"model_n{n}_{scaling}.json")
            summary.append({"n": n, "scaling": scaling, "l_max": walk.l_max,
                            "first_loss": rep.losses[0], "final_loss": rep.final_loss,
                            "seconds": round(rep.wall_time, 1)})
            print(f"n={n} {scaling:9s} L_max={walk.l_max:3d} first={rep.losses[0]:+.4f} "
                  f"final={rep.final_loss:+.4f} ({rep.wall_time:.1f}s)")
    atomic_write_text(out / "summary.json", json.dumps(summary, indent=1) + "\n")


if __name__ == "__main__":
    main()
