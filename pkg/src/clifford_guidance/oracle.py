"""Exhaustive shortest-path distances on the Cayley graph for small n.

Tableaus are packed into ``uint64`` keys (see ``Tableau.key``) so whole BFS
frontiers can be advanced with numpy bit operations.  This is only possible
while ``4n^2`` (+ ``2n`` phase bits) fits in 64 bits, and only tractable for
n <= 2 with phases and n <= 3 without them.
"""

from __future__ import annotations

import heapq
import itertools
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .moves import Move, MoveSet
from .search import GuidanceSource
from .tableau import (
    PhaseMode,
    Tableau,
    apply_columns,
    apply_gate,
    clifford_group_size,
    identity_tableau,
    inverse,
)

DEFAULT_MAX_NODES = 2_000_000
TABLE_MAGIC = b"CLFDTAB\x00"
TABLE_VERSION = 1
_HEADER = struct.Struct("<8sIIII16sQ")


class CapacityError(RuntimeError):
    """The requested group is too large to enumerate."""


class OracleLookupError(KeyError):
    pass


def _key_bits(n: int, mode: PhaseMode) -> int:
    return 4 * n * n + (2 * n if mode is PhaseMode.WITH_PHASES else 0)


def check_capacity(n: int, mode: PhaseMode | str, allow_large: bool = False,
                   max_nodes: int = DEFAULT_MAX_NODES) -> None:
    mode = PhaseMode.parse(mode)
    size = clifford_group_size(n, mode is PhaseMode.WITH_PHASES)
    if _key_bits(n, mode) > 64:
        raise CapacityError(f"n={n} ({mode.value}) does not fit a 64-bit key")
    if size > max_nodes:
        raise CapacityError(f"group has {size} elements, above the cap of {max_nodes}")
    if size > 100_000 and not allow_large:
        raise CapacityError(f"group has {size} elements; pass allow_large=True to enumerate it")


def apply_move_keys(keys: np.ndarray, move: Move, n: int, mode: PhaseMode) -> np.ndarray:
    """Vectorized ``apply_gate`` over an array of packed keys."""
    width = 2 * n
    mask = np.uint64((1 << width) - 1)
    cols = [(keys >> np.uint64(c * width)) & mask for c in range(width)]
    phase = None
    if mode is PhaseMode.WITH_PHASES:
        phase = (keys >> np.uint64(width * width)) & mask
    phase = apply_columns(cols, phase, move.kind, move.qubits, n, mask)
    out = np.zeros_like(keys)
    for c, col in enumerate(cols):
        out |= col << np.uint64(c * width)
    if phase is not None:
        out |= phase << np.uint64(width * width)
    return out


def _in_sorted(values: np.ndarray, sorted_ref: np.ndarray) -> np.ndarray:
    if sorted_ref.size == 0:
        return np.zeros(values.shape, dtype=bool)
    idx = np.searchsorted(sorted_ref, values)
    idx[idx == sorted_ref.size] = 0
    return sorted_ref[idx] == values


def _search_moves(ms: MoveSet, inverse_moves: bool) -> list[Move]:
    if not inverse_moves:
        return list(ms.moves)
    return [Move(m.inverse_kind(), m.qubits, m.weight) for m in ms.moves]


def is_inverse_closed(ms: MoveSet) -> bool:
    """True if every move's inverse gate is in the set with the same weight."""
    have = Counter((m.kind, m.qubits, m.weight) for m in ms.moves)
    inv = Counter((m.inverse_kind(), m.qubits, m.weight) for m in ms.moves)
    return have == inv


@dataclass
class DistanceTable:
    """Geodesic distance from the identity for every reachable tableau.

    With ``inverse_moves=False`` the distance of ``T`` is the cheapest word
    ``m_1 ... m_K`` (right-multiplied from the identity) equal to ``T``, i.e.
    the cost of synthesizing ``T``.  With ``inverse_moves=True`` words use the
    inverse gates, which makes the entry for a search state ``y`` its
    remaining cost to reach the identity.
    """

    n: int
    phase_mode: PhaseMode
    keys: np.ndarray
    distances: np.ndarray
    fingerprint: str = ""
    inverse_moves: bool = False

    @property
    def node_count(self) -> int:
        return int(self.keys.size)

    def lookup_keys(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.uint64)
        found = _in_sorted(keys, self.keys)
        if not found.all():
            bad = int(keys[~found][0])
            raise OracleLookupError(f"tableau key {bad:#x} not in the table "
                                    "(wrong n, phase mode, or corrupt input)")
        return self.distances[np.searchsorted(self.keys, keys)]

    def distance(self, t: Tableau) -> float:
        self._check(t)
        return float(self.lookup_keys(np.array([t.key()], dtype=np.uint64))[0])

    def _check(self, t: Tableau) -> None:
        if t.n != self.n or t.phase_mode is not self.phase_mode:
            raise OracleLookupError(f"table is for n={self.n} {self.phase_mode.value}, got "
                                    f"n={t.n} {t.phase_mode.value}")

    def histogram(self) -> list[tuple[float, int]]:
        values, counts = np.unique(self.distances, return_counts=True)
        return [(float(v), int(c)) for v, c in zip(values, counts)]

    def histogram_csv(self) -> str:
        return "distance,count\n" + "".join(f"{d:g},{c}\n" for d, c in self.histogram())

    def tableaus(self):
        for k in self.keys:
            yield Tableau.from_key(int(k), self.n, self.phase_mode)


def exact_distance(t: Tableau, table: DistanceTable) -> float:
    return table.distance(t)


def gods_number(table: DistanceTable) -> float:
    expected = clifford_group_size(table.n, table.phase_mode is PhaseMode.WITH_PHASES)
    if table.node_count != expected:
        raise ValueError(f"table is incomplete: {table.node_count} of {expected} nodes")
    return float(table.distances.max())


def _finish(levels: list[tuple[np.ndarray, float]], n, mode, ms, inverse_moves) -> DistanceTable:
    keys = np.concatenate([k for k, _ in levels])
    dist = np.concatenate([np.full(k.size, d) for k, d in levels])
    order = np.argsort(keys)
    return DistanceTable(n, mode, keys[order], dist[order], ms.fingerprint, inverse_moves)


def bfs_table(ms: MoveSet, phase_mode: PhaseMode | str = PhaseMode.PHASELESS,
              allow_large: bool = False, inverse_moves: bool = False,
              max_nodes: int = DEFAULT_MAX_NODES) -> DistanceTable:
    """Unweighted breadth-first distances (every move costs 1)."""
    mode = PhaseMode.parse(phase_mode)
    n = ms.n
    check_capacity(n, mode, allow_large, max_nodes)
    moves = _search_moves(ms, inverse_moves)
    start = np.array([identity_tableau(n, mode).key()], dtype=np.uint64)
    visited = start
    levels = [(start, 0.0)]
    frontier = start
    depth = 0
    while frontier.size:
        depth += 1
        nb = np.unique(np.concatenate([apply_move_keys(frontier, m, n, mode) for m in moves]))
        nb = nb[~_in_sorted(nb, visited)]
        if nb.size == 0:
            break
        levels.append((nb, float(depth)))
        visited = np.union1d(visited, nb)
        frontier = nb
    return _finish(levels, n, mode, ms, inverse_moves)


def bucket_dijkstra_table(ms: MoveSet, phase_mode: PhaseMode | str = PhaseMode.PHASELESS,
                          allow_large: bool = False, inverse_moves: bool = False,
                          max_nodes: int = DEFAULT_MAX_NODES) -> DistanceTable:
    """Dijkstra for integer weights using one bucket per distance.

    Zero-weight moves are closed by a breadth-first sweep inside each bucket,
    so a level is settled before any positive-weight move leaves it.
    """
    mode = PhaseMode.parse(phase_mode)
    n = ms.n
    check_capacity(n, mode, allow_large, max_nodes)
    moves = _search_moves(ms, inverse_moves)
    if any(m.weight != int(m.weight) for m in moves):
        raise ValueError("bucket Dijkstra needs integer move weights")
    zero = [m for m in moves if m.weight == 0]
    by_weight: dict[int, list[Move]] = {}
    for m in moves:
        if m.weight > 0:
            by_weight.setdefault(int(m.weight), []).append(m)

    start = np.array([identity_tableau(n, mode).key()], dtype=np.uint64)
    settled = np.empty(0, dtype=np.uint64)
    buckets: dict[int, list[np.ndarray]] = {0: [start]}
    levels = []
    while buckets:
        d = min(buckets)
        cand = np.unique(np.concatenate(buckets.pop(d)))
        cand = cand[~_in_sorted(cand, settled)]
        if cand.size == 0:
            continue
        level = cand
        frontier = cand
        while frontier.size and zero:
            nb = np.unique(np.concatenate([apply_move_keys(frontier, m, n, mode) for m in zero]))
            nb = nb[~_in_sorted(nb, settled) & ~_in_sorted(nb, level)]
            level = np.union1d(level, nb)
            frontier = nb
        levels.append((level, float(d)))
        settled = np.union1d(settled, level)
        if settled.size > max_nodes:
            raise CapacityError(f"more than {max_nodes} nodes settled")
        for w, group in by_weight.items():
            nb = np.unique(np.concatenate([apply_move_keys(level, m, n, mode) for m in group]))
            nb = nb[~_in_sorted(nb, settled)]
            if nb.size:
                buckets.setdefault(d + w, []).append(nb)
    return _finish(levels, n, mode, ms, inverse_moves)


def heap_dijkstra_table(ms: MoveSet, phase_mode: PhaseMode | str = PhaseMode.PHASELESS,
                        allow_large: bool = False, inverse_moves: bool = False,
                        max_nodes: int = DEFAULT_MAX_NODES) -> DistanceTable:
    """Textbook binary-heap Dijkstra over ``Tableau`` objects; any nonnegative weights."""
    mode = PhaseMode.parse(phase_mode)
    n = ms.n
    check_capacity(n, mode, allow_large, max_nodes)
    moves = _search_moves(ms, inverse_moves)
    start = identity_tableau(n, mode)
    best = {start: 0.0}
    done: dict[Tableau, float] = {}
    tie = itertools.count()
    heap = [(0.0, next(tie), start)]
    while heap:
        d, _, t = heapq.heappop(heap)
        if t in done:
            continue
        done[t] = d
        for m in moves:
            nb = apply_gate(t, m)
            nd = d + m.weight
            if nb not in done and nd < best.get(nb, float("inf")):
                best[nb] = nd
                heapq.heappush(heap, (nd, next(tie), nb))
    keys = np.array([t.key() for t in done], dtype=np.uint64)
    dist = np.array(list(done.values()))
    order = np.argsort(keys)
    return DistanceTable(n, mode, keys[order], dist[order], ms.fingerprint, inverse_moves)


def build_distance_table(ms: MoveSet, phase_mode: PhaseMode | str = PhaseMode.PHASELESS,
                         allow_large: bool = False, inverse_moves: bool = False,
                         max_nodes: int = DEFAULT_MAX_NODES) -> DistanceTable:
    """Pick the cheapest exact method for the move set's weights."""
    weights = {m.weight for m in ms.moves}
    if weights == {1.0}:
        builder = bfs_table
    elif all(w == int(w) for w in weights):
        builder = bucket_dijkstra_table
    else:
        builder = heap_dijkstra_table
    return builder(ms, phase_mode, allow_large, inverse_moves, max_nodes)


class ExactGuidance(GuidanceSource):
    """Remaining cost to the identity, read from a distance table."""

    tag = "exact"

    def __init__(self, table: DistanceTable, ms: MoveSet):
        if table.n != ms.n:
            raise ValueError("table and move set disagree on n")
        if table.fingerprint and ms.fingerprint and table.fingerprint != ms.fingerprint:
            raise ValueError("distance table was built for a different move set")
        self.table = table
        self.direct = table.inverse_moves or is_inverse_closed(ms)

    def remaining(self, t: Tableau) -> float:
        return self.table.distance(t if self.direct else inverse(t))

    def evaluate(self, tableaus: Sequence[Tableau]) -> np.ndarray:
        if not self.direct:
            tableaus = [inverse(t) for t in tableaus]
        for t in tableaus:
            self.table._check(t)
        keys = np.array([t.key() for t in tableaus], dtype=np.uint64)
        return self.table.lookup_keys(keys).astype(np.float64)


# -- persistence ---------------------------------------------------------------


def save_table(table: DistanceTable, path: str | Path) -> None:
    fp = table.fingerprint.encode("ascii")[:16].ljust(16, b"\x00")
    header = _HEADER.pack(TABLE_MAGIC, TABLE_VERSION, table.n,
                          int(table.phase_mode is PhaseMode.WITH_PHASES),
                          int(table.inverse_moves), fp, table.node_count)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(table.keys.astype("<u8").tobytes())
        fh.write(table.distances.astype("<f4").tobytes())
    tmp.replace(path)


def load_table(path: str | Path) -> DistanceTable:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated distance table")
    magic, version, n, phases, inv, fp, count = _HEADER.unpack_from(data)
    if magic != TABLE_MAGIC:
        raise ValueError(f"{path}: not a distance table")
    if version != TABLE_VERSION:
        raise ValueError(f"{path}: unsupported table version {version}")
    if len(data) != _HEADER.size + 12 * count:
        raise ValueError(f"{path}: expected {count} entries, file size disagrees")
    off = _HEADER.size
    keys = np.frombuffer(data, dtype="<u8", count=count, offset=off).astype(np.uint64)
    dist = np.frombuffer(data, dtype="<f4", count=count, offset=off + 8 * count).astype(np.float64)
    mode = PhaseMode.WITH_PHASES if phases else PhaseMode.PHASELESS
    return DistanceTable(n, mode, keys, dist, fp.rstrip(b"\x00").decode("ascii"), bool(inv))
