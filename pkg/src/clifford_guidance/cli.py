"""Command-line entry point: ``clifford-guidance <subcommand> [options]``.

Exit codes: 0 success, 2 usage error, 3 capacity error, 4 search failure,
5 bad or missing input file.

Seeds: every subcommand takes ``--seed``.  Training walks use batch streams
``0..N_B-1`` of that seed; evaluation instances for qubit count ``n`` use
batch stream ``EVAL_STREAM + n``; the search RNG for instance ``i`` is
``numpy.random.default_rng([seed, n, i])``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import BenchmarkTable, baseline_method, benchmark_compare
from .guidance import (
    ModelFormatError,
    TrainConfig,
    atomic_write_text,
    load_model,
    loss_csv,
    save_model,
    train,
)
from .moves import MoveSet, build_moveset, moveset_from_config
from .oracle import CapacityError, ExactGuidance, build_distance_table, gods_number, save_table
from .search import (
    LearnedGuidance,
    beam_synthesize,
    greedy_synthesize,
    verify_decomposition,
)
from .tableau import PhaseMode, Tableau, TableauError
from .walker import (
    WalkConfig,
    format_dataset,
    read_dataset,
    sample_instances,
    sample_rng,
    sample_walk,
    walk_from_indices,
)

log = logging.getLogger("clifford_guidance")

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_SEARCH, EXIT_INPUT = 0, 2, 3, 4, 5
EVAL_STREAM = 1 << 32
OUT_ENV = "CLIFFORD_GUIDANCE_OUT"

DEFAULTS = {
    "common": {"seed": 0, "weights": "cnot_count", "phases": False, "prune_trivial_moves": False},
    "gen-data": {"scaling": "loglinear", "count": 1000, "l_max": None},
    "train": {"scaling": "loglinear", "batch_size": 500, "batches": 1000, "lr": 1e-3,
              "checkpoint_interval": 0, "l_max": None, "dataset": None},
    "synth": {"weights": None, "algorithm": "greedy", "beam_width": 3, "max_steps": 1000,
              "random_walk": None, "scaling": "loglinear", "allow_large": False},
    "gods-number": {"weights": "unit", "phase_mode": "both", "allow_large": False},
    "bench": {"n_range": "3", "instances": 200, "max_steps": 200, "beam_width": 3,
              "algorithms": "beam", "scaling": "loglinear", "exact": True},
}
PAPER_SCALE = {
    "train": {"batch_size": 2000, "batches": 1000},
    "bench": {"instances": 20000, "max_steps": 1000},
}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class SearchFailure(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=None)
    common.add_argument("--seed", type=int, help="root seed for every random choice")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./runs)")
    common.add_argument("--config", help="JSON file of option values; flags override it")
    common.add_argument("-v", "--verbose", action="count", default=0)

    moves = argparse.ArgumentParser(add_help=False, argument_default=None)
    moves.add_argument("--n", type=int, help="number of qubits")
    moves.add_argument("--weights", choices=["unit", "cnot_count"], help="gate weight scheme")
    moves.add_argument("--moveset-config", help="JSON topology/weights document")
    moves.add_argument("--phases", action="store_true", help="track phase bits")
    moves.add_argument("--prune-trivial-moves", action="store_true",
                       help="drop X/Y/Z moves (self-loops without phases)")

    p = argparse.ArgumentParser(prog="clifford-guidance", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", parents=[common, moves], help="write a random-walk dataset")
    g.add_argument("--scaling", choices=["linear", "loglinear"])
    g.add_argument("--count", type=int)
    g.add_argument("--l-max", type=int)

    t = sub.add_parser("train", parents=[common, moves], help="train a guidance model")
    t.add_argument("--scaling", choices=["linear", "loglinear"])
    t.add_argument("--batch-size", type=int)
    t.add_argument("--batches", type=int, help="number of Adam steps (one fresh batch each)")
    t.add_argument("--lr", type=float)
    t.add_argument("--l-max", type=int)
    t.add_argument("--checkpoint-interval", type=int)
    t.add_argument("--dataset", help="train on batches cut from this dataset file")
    t.add_argument("--paper-scale", action="store_true")

    s = sub.add_parser("synth", parents=[common, moves], help="decompose one tableau")
    src = s.add_mutually_exclusive_group()
    src.add_argument("--model", help="trained model JSON")
    src.add_argument("--exact", action="store_true", help="use the exhaustive distance oracle")
    s.add_argument("--tableau", help="tableau text file to decompose")
    s.add_argument("--random-walk", type=int, metavar="L", help="decompose a random walk of L moves")
    s.add_argument("--algorithm", choices=["greedy", "beam"])
    s.add_argument("--beam-width", type=int)
    s.add_argument("--max-steps", type=int)
    s.add_argument("--allow-large", action="store_true")

    o = sub.add_parser("gods-number", parents=[common, moves], help="exhaustive distance table")
    o.add_argument("--phase-mode", choices=["phases", "phaseless", "both"])
    o.add_argument("--allow-large", action="store_true")

    b = sub.add_parser("bench", parents=[common, moves], help="benchmark against the baseline")
    b.add_argument("--n-range", help="e.g. 3, 3-5 or 3,4,6")
    b.add_argument("--model-dir", help="directory holding n<N>/model.json")
    b.add_argument("--instances", type=int)
    b.add_argument("--max-steps", type=int)
    b.add_argument("--beam-width", type=int)
    b.add_argument("--algorithms", help="comma list of greedy, beam")
    b.add_argument("--scaling", choices=["linear", "loglinear"])
    b.add_argument("--no-exact", dest="exact", action="store_false", default=None,
                   help="skip the exact-oracle optimum column")
    b.add_argument("--paper-scale", action="store_true")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS["common"])
    cfg.update(DEFAULTS[args.command])
    if getattr(args, "paper_scale", None):
        cfg.update(PAPER_SCALE.get(args.command, {}))
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        cfg.update({k.replace("-", "_"): v for k, v in file_cfg.items()})
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "verbose"):
            cfg[k] = v
    cfg["command"] = args.command
    cfg["out"] = cfg.get("out") or os.environ.get(OUT_ENV) or "runs"
    return cfg


def _moveset(cfg: dict, n: int | None = None) -> MoveSet:
    n = n if n is not None else cfg.get("n")
    if n is None or int(n) < 1:
        raise UsageError("--n must be a positive integer")
    doc = None
    if cfg.get("moveset_config"):
        try:
            doc = json.loads(Path(cfg["moveset_config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read move-set config: {exc}") from exc
    elif "weights_doc" in cfg or "edges" in cfg:
        doc = {"edges": cfg.get("edges"), "weights": cfg.get("weights_doc", {})}
    if doc is not None:
        doc = {**doc, "n": int(n)}
        return moveset_from_config(doc, bool(cfg.get("prune_trivial_moves")))
    return build_moveset(int(n), None, cfg["weights"],
                         prune_trivial_moves=bool(cfg.get("prune_trivial_moves")))


def _phase_mode(cfg: dict) -> PhaseMode:
    return PhaseMode.WITH_PHASES if cfg.get("phases") else PhaseMode.PHASELESS


def _walk_config(cfg: dict, n: int, phase_mode: PhaseMode | None = None) -> WalkConfig:
    wc = WalkConfig(n, cfg["scaling"], cfg.get("l_max"), int(cfg["seed"]),
                    phase_mode or _phase_mode(cfg))
    if wc.l_max < 1:
        raise UsageError(f"L_max={wc.l_max} for n={n}; pass --l-max")
    return wc


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo(cfg: dict, out: Path, extra: dict | None = None) -> None:
    record = {k: v for k, v in sorted(cfg.items())}
    if extra:
        record.update(extra)
    atomic_write_text(out / "effective_config.json", json.dumps(record, indent=1, sort_keys=True) + "\n")


def cmd_gen_data(cfg: dict) -> int:
    if cfg["count"] is None or int(cfg["count"]) < 1:
        raise UsageError("--count must be >= 1")
    ms = _moveset(cfg)
    wc = _walk_config(cfg, ms.n)
    samples = sample_instances(wc, ms, int(cfg["count"]))
    out = _out_dir(cfg)
    atomic_write_text(out / "dataset.txt", format_dataset(wc, ms, samples))
    _echo(cfg, out, {"l_max": wc.l_max, "moveset_fingerprint": ms.fingerprint})
    print(f"wrote {len(samples)} samples (L_max={wc.l_max}) to {out / 'dataset.txt'}")
    return EXIT_OK


def cmd_train(cfg: dict) -> int:
    ms = _moveset(cfg)
    wc = _walk_config(cfg, ms.n)
    try:
        tc = TrainConfig(wc, int(cfg["batch_size"]), int(cfg["batches"]), float(cfg["lr"]),
                         seed=int(cfg["seed"]), checkpoint_interval=int(cfg["checkpoint_interval"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    batch_source = None
    if cfg.get("dataset"):
        try:
            _, data = read_dataset(cfg["dataset"])
        except (OSError, ValueError) as exc:
            raise InputError(str(exc)) from exc
        if not data or data[0].tableau.n != ms.n:
            raise InputError("dataset does not match --n")
        batch_source = _dataset_batches(data, tc.batch_size)
    out = _out_dir(cfg)
    ckpt = out / "checkpoints" if tc.checkpoint_interval > 0 else None
    model, report = train(tc, ms, ckpt, batch_source=batch_source)
    save_model(model, out / "model.json")
    atomic_write_text(out / "loss.csv", loss_csv(report.losses))
    _echo(cfg, out, {"l_max": wc.l_max, "moveset_fingerprint": ms.fingerprint})
    log.info("trained in %.1f s", report.wall_time)
    print(f"first loss {report.losses[0]:.4f}, final loss {report.final_loss:.4f}; "
          f"model at {out / 'model.json'}")
    return EXIT_OK


def _dataset_batches(data, batch_size):
    def source(step: int):
        start = (step * batch_size) % len(data)
        idx = [(start + j) % len(data) for j in range(batch_size)]
        return [data[i] for i in idx]
    return source


def _load_model_or_fail(path: Path, n=None):
    if not path.exists():
        raise InputError(f"model file not found: expected {path}")
    try:
        return load_model(path, n)
    except ModelFormatError as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_synth(cfg: dict) -> int:
    model = None
    if cfg.get("model"):
        model = _load_model_or_fail(Path(cfg["model"]))
        if cfg.get("n") is None:
            cfg["n"] = model.n
    elif not cfg.get("exact"):
        raise UsageError("synth needs --model or --exact")
    if cfg.get("weights") is None:
        # zero-weight plateaus make exact-guided greedy descent wander
        cfg["weights"] = "unit" if cfg.get("exact") else "cnot_count"

    if cfg.get("tableau"):
        try:
            x = Tableau.from_text(Path(cfg["tableau"]).read_text())
        except (OSError, TableauError) as exc:
            raise InputError(f"cannot read tableau: {exc}") from exc
        if cfg.get("n") is None:
            cfg["n"] = x.n
    else:
        x = None
    ms = _moveset(cfg)
    if model is not None:
        mode = model.phase_mode
    elif x is not None:
        mode = x.phase_mode
    else:
        mode = _phase_mode(cfg)
    rng = np.random.default_rng([int(cfg["seed"]), ms.n, 0])
    if x is None:
        length = cfg.get("random_walk")
        walk_rng = sample_rng(int(cfg["seed"]), 0, 0, EVAL_STREAM + ms.n)
        if length is not None:
            if int(length) < 0:
                raise UsageError("--random-walk must be >= 0")
            idx = walk_rng.integers(0, len(ms), size=int(length)).tolist()
            x = walk_from_indices(ms, idx, mode).tableau
        else:
            x = sample_walk(_walk_config(cfg, ms.n, mode), ms, walk_rng).tableau
    x = x.with_phase_mode(mode)
    if x.n != ms.n:
        raise UsageError(f"tableau has n={x.n} but --n={ms.n}")

    if model is not None:
        if model.n != ms.n:
            raise InputError(f"model was trained for n={model.n}, not n={ms.n}")
        source = LearnedGuidance(model)
    else:
        table = build_distance_table(ms, mode, allow_large=bool(cfg.get("allow_large")))
        source = ExactGuidance(table, ms)

    if cfg["algorithm"] == "greedy":
        result = greedy_synthesize(x, ms, source, int(cfg["max_steps"]), rng)
    else:
        result = beam_synthesize(x, ms, source, int(cfg["beam_width"]), int(cfg["max_steps"]), rng)

    out = _out_dir(cfg)
    atomic_write_text(out / "input_tableau.txt", x.to_text())
    atomic_write_text(out / "decomposition.txt", result.to_text())
    atomic_write_text(out / "decomposition.json", result.to_json())
    _echo(cfg, out, {"moveset_fingerprint": ms.fingerprint, "phase_mode": mode.value})
    sys.stdout.write(result.to_text())
    if not result.success:
        raise SearchFailure(result.message)
    assert verify_decomposition(x, result.gates)
    return EXIT_OK


def cmd_gods_number(cfg: dict) -> int:
    ms = _moveset(cfg)
    modes = ["phases", "phaseless"] if cfg["phase_mode"] == "both" else [cfg["phase_mode"]]
    out = _out_dir(cfg)
    summary = {}
    for mode in modes:
        table = build_distance_table(ms, mode, allow_large=bool(cfg.get("allow_large")))
        god = gods_number(table)
        summary[mode] = {"node_count": table.node_count, "gods_number": god}
        hist = table.histogram_csv()
        atomic_write_text(out / f"histogram_{mode}.csv", hist)
        save_table(table, out / f"distance_table_{mode}.bin")
        print(f"# n={ms.n} mode={mode} weights={ms.weight_scheme.value} "
              f"nodes={table.node_count} gods_number={god:g}")
        sys.stdout.write(hist)
    atomic_write_text(out / "gods_number.json", json.dumps(summary, indent=1, sort_keys=True) + "\n")
    _echo(cfg, out, {"moveset_fingerprint": ms.fingerprint})
    return EXIT_OK


def parse_n_range(text: str) -> list[int]:
    values: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            values.extend(range(int(lo), int(hi) + 1))
        elif part:
            values.append(int(part))
    if not values or min(values) < 1:
        raise UsageError(f"bad --n-range {text!r}")
    return values


def cmd_bench(cfg: dict) -> int:
    if not cfg.get("model_dir"):
        raise UsageError("bench needs --model-dir")
    if int(cfg["instances"]) < 1:
        raise UsageError("--instances must be >= 1")
    algorithms = [a.strip() for a in str(cfg["algorithms"]).split(",") if a.strip()]
    if not algorithms or set(algorithms) - {"greedy", "beam"}:
        raise UsageError("--algorithms takes a comma list of greedy, beam")
    out = _out_dir(cfg)
    seed = int(cfg["seed"])
    rows, curves, extra_rows = [], [], []
    violations = 0
    for n in parse_n_range(cfg["n_range"]):
        path = Path(cfg["model_dir"]) / f"n{n}" / "model.json"
        model = _load_model_or_fail(path, n)
        ms = _moveset(cfg, n)
        wc = _walk_config(cfg, n, model.phase_mode)
        instances = [s.tableau for s in sample_instances(wc, ms, int(cfg["instances"]),
                                                         batch_index=EVAL_STREAM + n)]
        source = LearnedGuidance(model)
        methods = {}
        if "beam" in algorithms:
            methods[f"beam{cfg['beam_width']}"] = lambda i, t, n=n, ms=ms: beam_synthesize(
                t, ms, source, int(cfg["beam_width"]), int(cfg["max_steps"]),
                np.random.default_rng([seed, n, i]))
        if "greedy" in algorithms:
            methods["greedy"] = lambda i, t, n=n, ms=ms: greedy_synthesize(
                t, ms, source, int(cfg["max_steps"]), np.random.default_rng([seed, n, i]))
        methods["baseline"] = baseline_method()
        table = benchmark_compare(instances, methods, baseline_method())
        violations += table.violations
        rows.extend(table.rows)
        curves.extend(table.curves)
        if cfg.get("exact") and ms.weight_scheme.value == "cnot_count":
            try:
                dt = build_distance_table(ms, model.phase_mode, allow_large=True)
            except CapacityError:
                dt = None
            if dt is not None:
                opt = [dt.distance(t) for t in instances]
                extra_rows.append({"n": n, "mean_optimal_cnots": round(sum(opt) / len(opt), 4)})
        log.info("n=%d done", n)

    combined = BenchmarkTable(rows, curves, violations, ("mean_optimal_cnots",))
    optimum = {r["n"]: r["mean_optimal_cnots"] for r in extra_rows}
    for r in combined.rows:
        r["mean_optimal_cnots"] = optimum.get(r["n"])
    atomic_write_text(out / "bench.csv", combined.to_csv())
    atomic_write_text(out / "bench.json", combined.to_json())
    atomic_write_text(out / "curves.csv", combined.curves_csv())
    _echo(cfg, out)
    sys.stdout.write(combined.to_csv())
    if violations:
        raise SearchFailure(f"{violations} decompositions failed verification")
    return EXIT_OK


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "synth": cmd_synth,
    "gods-number": cmd_gods_number,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except SearchFailure as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
