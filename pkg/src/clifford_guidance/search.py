"""Guided synthesis: greedy descent and beam search towards the identity.

Both searches start from ``y = x^-1`` and right-multiply moves until the
identity is reached; the applied moves ``x_0, ..., x_{K-1}`` then satisfy
``x = x_0 x_1 ... x_{K-1}``.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .moves import Move, MoveSet
from .tableau import GateKind, Tableau, apply_gate, compose_gates, identity_tableau, inverse


class GuidanceSource:
    """Maps a batch of tableaus to nonnegative scores; lower means closer to identity."""

    tag = "custom"

    def __init__(self, fn: Callable[[Sequence[Tableau]], Sequence[float]], tag: str = "custom"):
        self._fn = fn
        self.tag = tag

    def evaluate(self, tableaus: Sequence[Tableau]) -> np.ndarray:
        return np.asarray(self._fn(tableaus), dtype=np.float64)


class LearnedGuidance(GuidanceSource):
    tag = "learned"

    def __init__(self, model):
        self.model = model

    def evaluate(self, tableaus: Sequence[Tableau]) -> np.ndarray:
        return self.model(tableaus)


def hamming_guidance(tableaus: Sequence[Tableau]) -> np.ndarray:
    """Number of tableau bits differing from the identity; a cheap baseline heuristic."""
    out = np.empty(len(tableaus))
    for i, t in enumerate(tableaus):
        d = sum((c ^ (1 << j)).bit_count() for j, c in enumerate(t.cols))
        if t.phases:
            d += t.phases.bit_count()
        out[i] = d
    return out


@dataclass
class SynthesisResult:
    success: bool
    gates: list[Move] = field(default_factory=list)
    weighted_cost: float = 0.0
    cnot_count: int = 0
    steps_taken: int = 0
    nodes_expanded: int = 0
    wall_time: float = 0.0
    message: str = ""

    @property
    def swap_count(self) -> int:
        return sum(1 for g in self.gates if g.kind is GateKind.SWAP)

    @property
    def effective_cnots(self) -> int:
        """CNOT count with each SWAP costed as three CNOTs."""
        return self.cnot_count + 3 * self.swap_count

    def to_text(self) -> str:
        lines = [g.label for g in self.gates]
        lines.append(f"# cost={self.weighted_cost!r} cnots={self.cnot_count} steps={self.steps_taken}")
        return "\n".join(lines) + "\n"

    def to_record(self) -> dict:
        return {
            "success": self.success,
            "gates": [g.label for g in self.gates],
            "weighted_cost": self.weighted_cost,
            "cnot_count": self.cnot_count,
            "swap_count": self.swap_count,
            "steps_taken": self.steps_taken,
            "nodes_expanded": self.nodes_expanded,
            "message": self.message,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=1) + "\n"


def _result(success, gates, steps, expanded, started, message="") -> SynthesisResult:
    return SynthesisResult(
        success=success,
        gates=list(gates),
        weighted_cost=float(sum(g.weight for g in gates)),
        cnot_count=sum(1 for g in gates if g.kind is GateKind.CNOT),
        steps_taken=steps,
        nodes_expanded=expanded,
        wall_time=time.perf_counter() - started,
        message=message,
    )


def _check_input(x: Tableau, ms: MoveSet) -> None:
    if x.n != ms.n:
        raise ValueError(f"tableau has n={x.n}, move set has n={ms.n}")


def greedy_synthesize(x: Tableau, ms: MoveSet, guidance: GuidanceSource, max_steps: int = 1000,
                      rng: np.random.Generator | None = None) -> SynthesisResult:
    """Repeatedly take the move whose successor scores lowest; ties broken by ``rng``."""
    _check_input(x, ms)
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    started = time.perf_counter()
    y = inverse(x)
    ident = identity_tableau(x.n, x.phase_mode)
    gates: list[Move] = []
    while y != ident:
        if len(gates) >= max_steps:
            return _result(False, gates, len(gates), len(gates), started,
                           f"no solution within {max_steps} steps")
        succ = [apply_gate(y, m) for m in ms.moves]
        scores = guidance.evaluate(succ)
        ties = np.flatnonzero(scores == scores.min())
        pick = int(ties[0]) if len(ties) == 1 else int(ties[rng.integers(len(ties))])
        y = succ[pick]
        gates.append(ms.moves[pick])
    return _result(True, gates, len(gates), len(gates), started)


def _top_ranked(scores: np.ndarray, width: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of the ``width`` lowest scores; equal scores at the cutoff drawn uniformly."""
    perm = rng.permutation(len(scores))
    order = perm[np.argsort(scores[perm], kind="stable")]
    return order[:width]


def beam_synthesize(x: Tableau, ms: MoveSet, guidance: GuidanceSource, beam_width: float = 3,
                    max_steps: int = 1000, rng: np.random.Generator | None = None,
                    visited_cap: int = 10**7) -> SynthesisResult:
    """Beam search keeping the ``beam_width`` best unvisited neighbours per generation.

    ``beam_width=math.inf`` keeps every new node (breadth-first search).
    ``max_steps`` counts generations.
    """
    _check_input(x, ms)
    if not beam_width >= 1:
        raise ValueError("beam_width must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    started = time.perf_counter()
    start = inverse(x)
    ident = identity_tableau(x.n, x.phase_mode)
    if start == ident:
        return _result(True, [], 0, 0, started)

    parent: dict[Tableau, tuple[Tableau, int] | None] = {start: None}

    def path_to(node: Tableau, last: int) -> list[Move]:
        idx = [last]
        link = parent[node]
        while link is not None:
            node, mi = link
            idx.append(mi)
            link = parent[node]
        return [ms.moves[i] for i in reversed(idx)]

    beam = [start]
    expanded = 0
    for generation in range(1, max_steps + 1):
        fresh: list[Tableau] = []
        for node in beam:
            expanded += 1
            for mi, move in enumerate(ms.moves):
                nb = apply_gate(node, move)
                if nb == ident:
                    return _result(True, path_to(node, mi), generation, expanded, started)
                if nb not in parent:
                    parent[nb] = (node, mi)
                    fresh.append(nb)
            if len(parent) > visited_cap:
                return _result(False, [], generation, expanded, started,
                               f"visited set exceeded cap of {visited_cap}")
        if not fresh:
            return _result(False, [], generation, expanded, started, "beam exhausted")
        if len(fresh) <= beam_width:
            beam = fresh
        else:
            keep = _top_ranked(guidance.evaluate(fresh), int(beam_width), rng)
            beam = [fresh[i] for i in keep]
    return _result(False, [], max_steps, expanded, started,
                   f"no solution within {max_steps} generations")


def verify_decomposition(x: Tableau, gates: Sequence) -> bool:
    try:
        return compose_gates(x.n, gates, x.phase_mode) == x
    except ValueError:
        return False


def parse_gate_lines(text: str, ms: MoveSet | None = None) -> list[Move]:
    """Read ``<kind> <q...>`` lines; ``#`` lines are ignored. Weights come from ``ms``."""
    gates = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *qs = line.split()
        qubits = tuple(int(q) for q in qs)
        if ms is not None:
            gates.append(ms.find(kind.lower(), *qubits))
        else:
            gates.append(Move(GateKind(kind.lower()), qubits))
    return gates
