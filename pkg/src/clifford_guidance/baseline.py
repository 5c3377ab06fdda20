"""Deterministic elimination synthesizer and the benchmark comparison table."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .moves import CNOT_COUNT_WEIGHTS, Move, MoveSet
from .search import SynthesisResult, verify_decomposition
from .tableau import GateKind, Tableau, TableauError, apply_gate, is_symplectic

METHOD_TAG = "canonical-elimination"
# Per qubit with m qubits left: <= 5m + 4 gates, summed over m gives <= 2.5n^2 + 6.5n.
GATE_BOUND_CONSTANT = 9


@dataclass
class BaselineResult:
    gates: list[Move]
    cnot_count: int
    weighted_cost: float
    method_tag: str = METHOD_TAG

    @property
    def effective_cnots(self) -> int:
        return self.cnot_count + 3 * sum(1 for g in self.gates if g.kind is GateKind.SWAP)

    def as_synthesis_result(self) -> SynthesisResult:
        return SynthesisResult(True, list(self.gates), self.weighted_cost, self.cnot_count,
                               len(self.gates), 0, 0.0, METHOD_TAG)


def _bit(v: int, i: int) -> int:
    return (v >> i) & 1


def _reduce_to_identity(x: Tableau) -> list[tuple[GateKind, tuple[int, ...]]]:
    """Gates g_1..g_K with x g_1 ... g_K = identity, fixing one qubit at a time.

    For qubit q the destabilizer row is first turned into X_q (local basis
    changes, a CNOT fan-in and possibly a SWAP), then the stabilizer row into
    Z_q using gates that leave X_q alone; Pauli gates clear the signs.
    """
    n = x.n
    t = x
    ops: list[tuple[GateKind, tuple[int, ...]]] = []

    def do(kind: GateKind, *qs: int) -> None:
        nonlocal t
        t = apply_gate(t, Move(kind, qs))
        ops.append((kind, qs))

    def xz(row: int, k: int) -> tuple[int, int]:
        return _bit(t.cols[k], row), _bit(t.cols[n + k], row)

    for q in range(n):
        d, s = q, n + q
        for k in range(q, n):
            bx, bz = xz(d, k)
            if bz and not bx:
                do(GateKind.H, k)
            elif bx and bz:
                do(GateKind.S, k)
        support = [k for k in range(q, n) if xz(d, k)[0]]
        if not support:
            raise TableauError("destabilizer row has no support; tableau is not symplectic")
        pivot = q if q in support else support[0]
        for k in support:
            if k != pivot:
                do(GateKind.CNOT, pivot, k)
        if pivot != q:
            do(GateKind.SWAP, q, pivot)

        for k in range(q + 1, n):
            bx, bz = xz(s, k)
            if bx and not bz:
                do(GateKind.H, k)
            elif bx and bz:
                do(GateKind.S, k)
                do(GateKind.H, k)
        for k in range(q + 1, n):
            if xz(s, k)[1]:
                do(GateKind.CNOT, k, q)
        if xz(s, q)[0]:
            do(GateKind.H, q)
            do(GateKind.S, q)
            do(GateKind.H, q)
        if t.phases is not None:
            if _bit(t.phases, d):
                do(GateKind.Z, q)
            if _bit(t.phases, s):
                do(GateKind.X, q)
    return ops


_INVERSE = {GateKind.S: GateKind.SDG, GateKind.SDG: GateKind.S}


def baseline_synthesize(x: Tableau, ms: MoveSet | None = None) -> BaselineResult:
    """Decompose ``x`` by Gaussian-style elimination; always succeeds on valid input.

    Weights come from ``ms`` when given (every emitted gate must exist in it),
    otherwise the CNOT-count weighting is used.
    """
    if not is_symplectic(x):
        raise TableauError("baseline synthesis needs a symplectic tableau")
    ops = _reduce_to_identity(x)
    gates = []
    for kind, qs in reversed(ops):
        kind = _INVERSE.get(kind, kind)
        if ms is not None:
            gates.append(ms.find(kind, *qs))
        else:
            gates.append(Move(kind, qs, CNOT_COUNT_WEIGHTS.get(kind, 0.0)))
    return BaselineResult(
        gates,
        sum(1 for g in gates if g.kind is GateKind.CNOT),
        float(sum(g.weight for g in gates)),
    )


# -- benchmark comparison ------------------------------------------------------

Method = Callable[[int, Tableau], SynthesisResult]


def baseline_method(ms: MoveSet | None = None) -> Method:
    return lambda i, t: baseline_synthesize(t, ms).as_synthesis_result()


def external_method(decompositions: Sequence[Sequence[Move] | None]) -> Method:
    """Wrap third-party gate lists (one per instance; ``None`` marks a failure)."""

    def run(i: int, t: Tableau) -> SynthesisResult:
        gates = decompositions[i]
        if gates is None or not verify_decomposition(t, gates):
            return SynthesisResult(False, message="external decomposition missing or invalid")
        return SynthesisResult(True, list(gates), float(sum(g.weight for g in gates)),
                               sum(1 for g in gates if g.kind is GateKind.CNOT), len(gates))

    return run


def _pct(num: float, den: float) -> float | None:
    return None if den == 0 else round(100.0 * num / den, 4)


@dataclass
class BenchmarkTable:
    rows: list[dict] = field(default_factory=list)
    curves: list[dict] = field(default_factory=list)
    violations: int = 0
    extra_columns: tuple[str, ...] = ()

    COLUMNS = ("n", "method", "instances", "success_pct", "lt_baseline_pct", "le_baseline_pct",
               "mean_cnot_reduction_pct", "mean_cnots", "mean_baseline_cnots")

    @property
    def columns(self) -> tuple[str, ...]:
        return self.COLUMNS + tuple(self.extra_columns)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow(["N/A" if row.get(c) is None else row[c] for c in self.columns])
        return buf.getvalue()

    def curves_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("method", "n", "cnot_count", "fraction_solved"))
        for c in self.curves:
            w.writerow((c["method"], c["n"], c["cnot_count"], c["fraction_solved"]))
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"columns": list(self.columns), "rows": self.rows,
                           "curves": self.curves, "violations": self.violations}, indent=1) + "\n"


def benchmark_compare(instances: Sequence[Tableau], methods: Mapping[str, Method],
                      baseline: Method | None = None) -> BenchmarkTable:
    """Compare each method's effective CNOT count against the baseline per n.

    Win fractions are conditioned on the method succeeding; the mean reduction
    ``(l_base - l_method) / l_base`` is over strict wins only.  Cells with an
    empty conditioning set are ``None`` (rendered N/A), as are win columns for
    the baseline itself.
    """
    if not instances:
        raise ValueError("benchmark needs at least one instance")
    baseline = baseline or baseline_method()
    table = BenchmarkTable()
    base = []
    for i, t in enumerate(instances):
        r = baseline(i, t)
        if not r.success or not verify_decomposition(t, r.gates):
            raise RuntimeError(f"baseline failed on instance {i}")
        base.append(r.effective_cnots)

    by_n: dict[int, list[int]] = {}
    for i, t in enumerate(instances):
        by_n.setdefault(t.n, []).append(i)

    for name, method in methods.items():
        results = []
        for i, t in enumerate(instances):
            r = method(i, t)
            if r.success and not verify_decomposition(t, r.gates):
                table.violations += 1
                r = SynthesisResult(False, message="decomposition failed verification")
            results.append(r)
        is_base = method is baseline or name == "baseline"
        for n in sorted(by_n):
            idx = by_n[n]
            solved = [i for i in idx if results[i].success]
            wins = [i for i in solved if results[i].effective_cnots < base[i]]
            ties = [i for i in solved if results[i].effective_cnots <= base[i]]
            reduction = None
            if wins and not is_base:
                reduction = round(100.0 * sum((base[i] - results[i].effective_cnots) / base[i]
                                              for i in wins) / len(wins), 4)
            table.rows.append({
                "n": n,
                "method": name,
                "instances": len(idx),
                "success_pct": _pct(len(solved), len(idx)),
                "lt_baseline_pct": None if is_base else _pct(len(wins), len(solved)),
                "le_baseline_pct": None if is_base else _pct(len(ties), len(solved)),
                "mean_cnot_reduction_pct": reduction,
                "mean_cnots": round(sum(results[i].effective_cnots for i in solved) / len(solved), 4)
                if solved else None,
                "mean_baseline_cnots": round(sum(base[i] for i in idx) / len(idx), 4),
            })
            counts = sorted(results[i].effective_cnots for i in solved)
            for value in sorted(set(counts)):
                upto = sum(1 for c in counts if c <= value)
                table.curves.append({"method": name, "n": n, "cnot_count": value,
                                     "fraction_solved": round(upto / len(idx), 6)})
    return table


def timed(method: Method) -> Method:
    """Attach wall time to results of methods that do not record it."""

    def run(i: int, t: Tableau) -> SynthesisResult:
        start = time.perf_counter()
        r = method(i, t)
        if not r.wall_time:
            r.wall_time = time.perf_counter() - start
        return r

    return run
