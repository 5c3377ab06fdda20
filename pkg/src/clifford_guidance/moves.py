"""Generator alphabet for the Clifford Cayley graph."""

from __future__ import annotations

import enum
import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .tableau import (
    SINGLE_QUBIT_KINDS,
    GateKind,
    PhaseMode,
    Tableau,
    apply_gate,
    gate_tableau,
)


class WeightScheme(str, enum.Enum):
    UNIT = "unit"
    CNOT_COUNT = "cnot_count"
    FIDELITY = "fidelity"


CNOT_COUNT_WEIGHTS = {GateKind.CNOT: 1.0, GateKind.SWAP: 3.0}


@dataclass(frozen=True)
class Move:
    kind: GateKind
    qubits: tuple[int, ...]
    weight: float = 1.0

    def __post_init__(self):
        kind = GateKind(self.kind)
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "kind", kind)
        if len(qubits) != kind.arity:
            raise ValueError(f"{kind.value} takes {kind.arity} qubit(s), got {qubits}")
        if kind.arity == 2 and qubits[0] == qubits[1]:
            raise ValueError("two-qubit move needs distinct qubits")
        if kind is GateKind.SWAP:
            qubits = tuple(sorted(qubits))
        object.__setattr__(self, "qubits", qubits)
        if not self.weight >= 0 or math.isinf(self.weight):
            raise ValueError(f"move weight must be finite and >= 0, got {self.weight}")

    @property
    def label(self) -> str:
        return " ".join([self.kind.value, *map(str, self.qubits)])

    def tableau(self, n: int, phase_mode=PhaseMode.PHASELESS) -> Tableau:
        return gate_tableau(self.kind, self.qubits, n, phase_mode)

    def inverse_kind(self) -> GateKind:
        return {GateKind.S: GateKind.SDG, GateKind.SDG: GateKind.S}.get(self.kind, self.kind)


def weight_from_fidelity(f_gate: float, f_ref: float, rule: str = "prose") -> float:
    """Edge weight making one gate worth ``w`` copies of the reference gate.

    ``rule="prose"`` gives ``w = ln f_gate / ln f_ref`` (f_gate = f_ref**w), so
    worse gates cost more.  ``rule="displayed"`` gives the literal
    ``f_gate**w = f_ref`` relation, ``w = ln f_ref / ln f_gate``.
    """
    if not 0.0 < f_ref < 1.0:
        raise ValueError(f"reference fidelity must lie in (0, 1), got {f_ref}")
    if not 0.0 < f_gate <= 1.0:
        raise ValueError(f"gate fidelity must lie in (0, 1], got {f_gate}")
    if rule == "prose":
        return math.log(f_gate) / math.log(f_ref)
    if rule == "displayed":
        if f_gate == 1.0:
            raise ValueError("displayed rule is undefined for a perfect gate")
        return math.log(f_ref) / math.log(f_gate)
    raise ValueError(f"unknown fidelity rule {rule!r}")


def all_to_all(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def line_topology(n: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(n - 1)]


@dataclass(frozen=True)
class MoveSet:
    n: int
    moves: tuple[Move, ...]
    topology: tuple[tuple[int, int], ...]
    weight_scheme: WeightScheme
    fingerprint: str = field(default="", compare=False)

    def __len__(self) -> int:
        return len(self.moves)

    def __iter__(self):
        return iter(self.moves)

    def __getitem__(self, i: int) -> Move:
        return self.moves[i]

    def index(self, kind: GateKind | str, *qubits: int) -> int:
        probe = Move(GateKind(kind), qubits)
        for i, m in enumerate(self.moves):
            if m.kind is probe.kind and m.qubits == probe.qubits:
                return i
        raise KeyError(f"no move {probe.label} in move set")

    def find(self, kind: GateKind | str, *qubits: int) -> Move:
        return self.moves[self.index(kind, *qubits)]

    def weights(self) -> list[float]:
        return [m.weight for m in self.moves]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": [list(e) for e in self.topology],
            "scheme": self.weight_scheme.value,
            "moves": [[m.label, m.weight] for m in self.moves],
        }


def _fingerprint(n: int, moves: Sequence[Move]) -> str:
    blob = json.dumps([n, [[m.label, repr(m.weight)] for m in moves]])
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def build_moveset(
    n: int,
    topology: Iterable[Sequence[int]] | None = None,
    weight_scheme: WeightScheme | str = WeightScheme.UNIT,
    fidelities: Sequence[float] | None = None,
    reference_fidelity: float | None = None,
    fidelity_rule: str = "prose",
    prune_trivial_moves: bool = False,
) -> MoveSet:
    """Build the generator set for ``n`` qubits.

    Ordering: single-qubit moves by qubit, then kind (X, Y, Z, H, S, Sdg);
    CNOTs by (control, target); SWAPs by sorted pair.  ``topology`` lists
    undirected qubit pairs (all-to-all when ``None``).  For the fidelity
    scheme, ``fidelities`` holds one value per move in that order (before any
    pruning) and ``reference_fidelity`` fixes the unit of weight.

    ``prune_trivial_moves`` drops X/Y/Z, which are self-loops when phases are
    not tracked.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    scheme = WeightScheme(weight_scheme)
    if topology is None:
        edges = all_to_all(n)
    else:
        edges = sorted({tuple(sorted((int(a), int(b)))) for a, b in topology})
        for a, b in edges:
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"topology edge ({a}, {b}) invalid for n={n}")
        if n >= 2 and not edges:
            raise ValueError("empty topology for n >= 2")

    specs: list[tuple[GateKind, tuple[int, ...]]] = []
    for q in range(n):
        specs.extend((k, (q,)) for k in SINGLE_QUBIT_KINDS)
    directed = sorted({(a, b) for a, b in edges} | {(b, a) for a, b in edges})
    specs.extend((GateKind.CNOT, pair) for pair in directed)
    specs.extend((GateKind.SWAP, pair) for pair in edges)

    if scheme is WeightScheme.UNIT:
        weights = [1.0] * len(specs)
    elif scheme is WeightScheme.CNOT_COUNT:
        weights = [CNOT_COUNT_WEIGHTS.get(k, 0.0) for k, _ in specs]
    else:
        if fidelities is None or len(fidelities) != len(specs):
            got = None if fidelities is None else len(fidelities)
            raise ValueError(f"need {len(specs)} fidelities (one per move), got {got}")
        if reference_fidelity is None:
            raise ValueError("fidelity scheme needs a reference fidelity")
        weights = [weight_from_fidelity(f, reference_fidelity, fidelity_rule) for f in fidelities]

    moves = [Move(k, q, w) for (k, q), w in zip(specs, weights)]
    if prune_trivial_moves:
        moves = [m for m in moves if m.kind not in (GateKind.X, GateKind.Y, GateKind.Z)]
    return MoveSet(n, tuple(moves), tuple(edges), scheme, _fingerprint(n, moves))


def expected_move_count(n: int, num_edges: int | None = None) -> int:
    if num_edges is None:
        num_edges = n * (n - 1) // 2
    return 6 * n + 3 * num_edges


def neighbors(t: Tableau, ms: MoveSet) -> list[tuple[Move, Tableau]]:
    if t.n != ms.n:
        raise ValueError(f"tableau has n={t.n}, move set has n={ms.n}")
    return [(m, apply_gate(t, m)) for m in ms.moves]


def moveset_from_config(config: dict, prune_trivial_moves: bool = False) -> MoveSet:
    """Build a move set from the JSON topology/weights document.

    Fidelities are given per gate kind: a number applies to every instance,
    a list of ``[q, f]`` / ``[a, b, f]`` entries sets individual gates.
    """
    n = int(config["n"])
    edges = config.get("edges")
    weights = config.get("weights", {}) or {}
    scheme = WeightScheme(weights.get("scheme", "unit"))
    prune = bool(config.get("prune_trivial_moves", prune_trivial_moves))
    if scheme is not WeightScheme.FIDELITY:
        return build_moveset(n, edges, scheme, prune_trivial_moves=prune)

    table = {str(k).lower(): v for k, v in weights.get("fidelities", {}).items()}
    skeleton = build_moveset(n, edges, WeightScheme.UNIT)

    def lookup(kind: GateKind, qubits: tuple[int, ...]) -> float:
        if kind.value not in table:
            raise ValueError(f"no fidelity given for gate kind {kind.value!r}")
        spec = table[kind.value]
        if isinstance(spec, (int, float)):
            return float(spec)
        for entry in spec:
            *qs, f = entry
            key = tuple(int(q) for q in qs)
            if kind is GateKind.SWAP:
                key = tuple(sorted(key))
            if key == qubits:
                return float(f)
        raise ValueError(f"no fidelity for {kind.value} on qubits {qubits}")

    fids = [lookup(m.kind, m.qubits) for m in skeleton.moves]
    if "reference_fidelity" in weights:
        f_ref = float(weights["reference_fidelity"])
    else:
        ref = str(weights.get("reference", "h")).lower().split()
        kind = GateKind(ref[0])
        qubits = tuple(int(q) for q in ref[1:]) or skeleton.moves[
            next(i for i, m in enumerate(skeleton.moves) if m.kind is kind)].qubits
        f_ref = lookup(kind, qubits)
    return build_moveset(
        n, edges, WeightScheme.FIDELITY, fids, f_ref,
        fidelity_rule=weights.get("fidelity_rule", "prose"),
        prune_trivial_moves=prune,
    )
