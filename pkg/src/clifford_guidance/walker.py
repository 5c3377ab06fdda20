"""Random walks on the Cayley graph: training and evaluation tableaus.

Random streams
--------------
Every walk owns an independent Philox-4x64 stream.  Sample ``i`` of batch
``b`` (draw attempt ``a``) uses ``key = seed`` and initial counter
``[0, i, a, b]``; within a walk the length is drawn first, then the move
indices, with numpy's ``Generator.integers``.  Parallel and serial generation
therefore produce identical samples.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .moves import MoveSet
from .tableau import PhaseMode, Tableau, apply_gate, identity_tableau, parse_tableau_lines

_MASK64 = (1 << 64) - 1


class Scaling(str, enum.Enum):
    LINEAR = "linear"
    LOGLINEAR = "loglinear"


def default_l_max(n: int, scaling: Scaling | str) -> int:
    scaling = Scaling(scaling)
    raw = 10 * n if scaling is Scaling.LINEAR else 10 * n * math.log2(n)
    return math.floor(raw + 0.5)


@dataclass(frozen=True)
class WalkConfig:
    n: int
    scaling: Scaling = Scaling.LOGLINEAR
    l_max_override: int | None = None
    seed: int = 0
    phase_mode: PhaseMode = PhaseMode.PHASELESS
    # off by default: uniform move sampling allows g followed by g^-1
    prune_inverse: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scaling", Scaling(self.scaling))
        object.__setattr__(self, "phase_mode", PhaseMode.parse(self.phase_mode))

    @property
    def l_max(self) -> int:
        if self.l_max_override is not None:
            return int(self.l_max_override)
        return default_l_max(self.n, self.scaling)


@dataclass
class WalkSample:
    tableau: Tableau
    ub_distance: float
    walk_length: int
    gates: list[int] = field(default_factory=list)


def sample_rng(seed: int, index: int, attempt: int = 0, batch: int = 0) -> np.random.Generator:
    counter = [0, index & _MASK64, attempt & _MASK64, batch & _MASK64]
    return np.random.Generator(np.random.Philox(key=seed & _MASK64, counter=counter))


def walk_from_indices(ms: MoveSet, indices: Sequence[int], phase_mode=PhaseMode.PHASELESS,
                      ) -> WalkSample:
    t = identity_tableau(ms.n, phase_mode)
    cost = 0.0
    for i in indices:
        move = ms.moves[i]
        t = apply_gate(t, move)
        cost += move.weight
    return WalkSample(t, cost, len(indices), [int(i) for i in indices])


def _inverse_index(ms: MoveSet, i: int) -> int:
    m = ms.moves[i]
    try:
        return ms.index(m.inverse_kind(), *m.qubits)
    except KeyError:
        return -1


def sample_walk(cfg: WalkConfig, ms: MoveSet, rng: np.random.Generator) -> WalkSample:
    """Draw a length uniformly in [1, L_max], then that many uniform moves."""
    if cfg.n != ms.n:
        raise ValueError(f"walk config n={cfg.n} but move set n={ms.n}")
    l_max = cfg.l_max
    if l_max < 1:
        raise ValueError(f"L_max must be >= 1, got {l_max}")
    length = int(rng.integers(1, l_max + 1))
    m = len(ms)
    if not cfg.prune_inverse:
        indices = rng.integers(0, m, size=length).tolist()
    else:
        indices = []
        while len(indices) < length:
            i = int(rng.integers(0, m))
            if indices and _inverse_index(ms, indices[-1]) == i:
                continue
            indices.append(i)
    return walk_from_indices(ms, indices, cfg.phase_mode)


def sample_batch(cfg: WalkConfig, ms: MoveSet, batch_size: int, batch_index: int = 0,
                 max_attempts: int = 1000) -> list[WalkSample]:
    """Independent walks; redrawn whole if every ub_distance is equal."""
    if batch_size < 2:
        raise ValueError("batch_size must be >= 2")
    weights = set(ms.weights())
    if max(weights) == 0 or (len(weights) == 1 and cfg.l_max == 1):
        raise ValueError("every walk has the same cost under this move set and L_max; "
                         "the Pearson loss is undefined")
    for attempt in range(max_attempts):
        batch = [sample_walk(cfg, ms, sample_rng(cfg.seed, i, attempt, batch_index))
                 for i in range(batch_size)]
        ubs = [s.ub_distance for s in batch]
        if max(ubs) > min(ubs):
            return batch
    raise RuntimeError(f"no batch with nonzero ub_distance variance after {max_attempts} draws")


def sample_instances(cfg: WalkConfig, ms: MoveSet, count: int, batch_index: int = 0,
                     ) -> list[WalkSample]:
    """``count`` walks on stream ``batch_index`` without the variance check."""
    return [sample_walk(cfg, ms, sample_rng(cfg.seed, i, 0, batch_index)) for i in range(count)]


# -- dataset file --------------------------------------------------------------

DATASET_MAGIC = "# clifford-walk-dataset v1"


def format_dataset(cfg: WalkConfig, ms: MoveSet, samples: Sequence[WalkSample]) -> str:
    header = (f"{DATASET_MAGIC} n={cfg.n} phase_mode={cfg.phase_mode.value} "
              f"scaling={cfg.scaling.value} seed={cfg.seed} count={len(samples)} "
              f"L_max={cfg.l_max} moveset={ms.fingerprint}")
    parts = [header + "\n"]
    for s in samples:
        parts.append(s.tableau.to_text())
        parts.append(f"ub={s.ub_distance!r}\n")
        parts.append("gates=" + " ".join(map(str, s.gates)) + "\n")
    return "".join(parts)


def read_dataset(path: str | Path) -> tuple[dict, list[WalkSample]]:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(DATASET_MAGIC):
        raise ValueError(f"{path}: not a walk dataset")
    meta = dict(tok.split("=", 1) for tok in lines[0][len(DATASET_MAGIC):].split())
    samples = []
    i = 1
    while i < len(lines):
        t, i = parse_tableau_lines(lines, i)
        if i + 1 >= len(lines) or not lines[i].startswith("ub=") or not lines[i + 1].startswith("gates="):
            raise ValueError(f"{path}: truncated record near line {i}")
        ub = float(lines[i][3:])
        gates = [int(g) for g in lines[i + 1][6:].split()]
        samples.append(WalkSample(t, ub, len(gates), gates))
        i += 2
    if int(meta.get("count", len(samples))) != len(samples):
        raise ValueError(f"{path}: header count {meta['count']} but {len(samples)} records")
    return meta, samples
