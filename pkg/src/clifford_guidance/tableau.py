"""Binary symplectic tableaus for the n-qubit Clifford group.

A tableau is stored column-wise: ``cols[c]`` is a ``2n``-bit integer whose bit
``r`` is the matrix entry ``S[r][c]``.  Columns ``0..n-1`` hold the X block and
columns ``n..2n-1`` the Z block; rows ``0..n-1`` are destabilizers and rows
``n..2n-1`` stabilizers.  Phase bits (when tracked) live in a single ``2n``-bit
integer, bit ``r`` being the sign of row ``r``.

Right-multiplying by a gate tableau is a handful of column operations, which is
why the column layout was chosen: every gate update is O(1) integer operations
regardless of ``n``.
"""

from __future__ import annotations

import enum
import math
from typing import Iterable, Sequence

import numpy as np


class PhaseMode(str, enum.Enum):
    WITH_PHASES = "phases"
    PHASELESS = "phaseless"

    @classmethod
    def parse(cls, value: "PhaseMode | str | bool") -> "PhaseMode":
        if isinstance(value, PhaseMode):
            return value
        if isinstance(value, bool):
            return cls.WITH_PHASES if value else cls.PHASELESS
        value = str(value).lower()
        if value in ("phases", "with_phases", "withphases", "1", "true"):
            return cls.WITH_PHASES
        if value in ("phaseless", "nophases", "0", "false"):
            return cls.PHASELESS
        raise ValueError(f"unknown phase mode {value!r}")


class GateKind(str, enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    S = "s"
    SDG = "sdg"
    CNOT = "cnot"
    SWAP = "swap"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.CNOT, GateKind.SWAP) else 1


SINGLE_QUBIT_KINDS = (GateKind.X, GateKind.Y, GateKind.Z, GateKind.H, GateKind.S, GateKind.SDG)


class TableauError(ValueError):
    """Raised for malformed, mismatched or non-symplectic tableaus."""


def _row_mask(n: int) -> int:
    return (1 << (2 * n)) - 1


def apply_columns(cols, phase, kind: GateKind, qubits: Sequence[int], n: int, mask):
    """Right-multiply by one gate, in place on ``cols``; returns the new phase.

    ``cols`` is a mutable list of column bitsets and ``mask`` the all-rows mask.
    Works unchanged for Python ints and for numpy ``uint64`` arrays (one
    tableau per array element), which the exhaustive oracle relies on.
    ``phase`` may be ``None`` to skip sign bookkeeping.
    """
    if kind.arity == 1:
        (q,) = qubits
        x, z = cols[q], cols[n + q]
        if kind is GateKind.H:
            cols[q], cols[n + q] = z, x
            if phase is not None:
                phase = phase ^ (x & z)
        elif kind is GateKind.S:
            cols[n + q] = z ^ x
            if phase is not None:
                phase = phase ^ (x & z)
        elif kind is GateKind.SDG:
            cols[n + q] = z ^ x
            if phase is not None:
                phase = phase ^ (x & (z ^ mask))
        elif phase is not None:
            if kind is GateKind.X:
                phase = phase ^ z
            elif kind is GateKind.Z:
                phase = phase ^ x
            else:
                phase = phase ^ x ^ z
        return phase
    a, b = qubits
    if kind is GateKind.CNOT:
        xa, xb, za, zb = cols[a], cols[b], cols[n + a], cols[n + b]
        if phase is not None:
            phase = phase ^ (xa & zb & (xb ^ za ^ mask))
        cols[b] = xb ^ xa
        cols[n + a] = za ^ zb
    else:
        cols[a], cols[b] = cols[b], cols[a]
        cols[n + a], cols[n + b] = cols[n + b], cols[n + a]
    return phase


class Tableau:
    """Immutable Clifford tableau; equality and hashing are exact and bitwise."""

    __slots__ = ("n", "cols", "phases", "_hash")

    def __init__(self, n: int, cols: Iterable[int], phases: int | None = None):
        cols = tuple(int(c) for c in cols)
        if n < 1:
            raise TableauError("n must be >= 1")
        if len(cols) != 2 * n:
            raise TableauError(f"expected {2 * n} columns, got {len(cols)}")
        mask = _row_mask(n)
        if any(c < 0 or c > mask for c in cols):
            raise TableauError("column has bits outside the 2n rows")
        if phases is not None and not 0 <= phases <= mask:
            raise TableauError("phase bits out of range")
        self.n = n
        self.cols = cols
        self.phases = None if phases is None else int(phases)
        self._hash = hash((n, cols, self.phases))

    @property
    def phase_mode(self) -> PhaseMode:
        return PhaseMode.PHASELESS if self.phases is None else PhaseMode.WITH_PHASES

    @property
    def with_phases(self) -> bool:
        return self.phases is not None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tableau):
            return NotImplemented
        return self.n == other.n and self.cols == other.cols and self.phases == other.phases

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Tableau(n={self.n}, mode={self.phase_mode.value}, key={self.key():#x})"

    # -- conversions ---------------------------------------------------

    @classmethod
    def from_matrix(cls, matrix, phases=None) -> "Tableau":
        """Build from a 2n x 2n 0/1 matrix (row-major) and optional 2n phase bits."""
        m = np.asarray(matrix, dtype=np.int64) & 1
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise TableauError(f"expected a square 2n x 2n matrix, got shape {m.shape}")
        dim = m.shape[0]
        cols = [sum(int(m[r, c]) << r for r in range(dim)) for c in range(dim)]
        p = None
        if phases is not None:
            pv = np.asarray(phases, dtype=np.int64) & 1
            if pv.shape != (dim,):
                raise TableauError("phase vector must have length 2n")
            p = sum(int(pv[r]) << r for r in range(dim))
        return cls(dim // 2, cols, p)

    def matrix(self) -> np.ndarray:
        dim = 2 * self.n
        out = np.zeros((dim, dim), dtype=np.uint8)
        for c, col in enumerate(self.cols):
            for r in range(dim):
                out[r, c] = (col >> r) & 1
        return out

    def phase_vector(self) -> np.ndarray | None:
        if self.phases is None:
            return None
        return np.array([(self.phases >> r) & 1 for r in range(2 * self.n)], dtype=np.uint8)

    def row(self, r: int) -> int:
        """Row ``r`` as a bitset over columns."""
        return sum(((col >> r) & 1) << c for c, col in enumerate(self.cols))

    def key(self) -> int:
        """Packed integer key: columns concatenated, then the phase bits on top."""
        width = 2 * self.n
        k = 0
        for c, col in enumerate(self.cols):
            k |= col << (c * width)
        if self.phases is not None:
            k |= self.phases << (width * width)
        return k

    @classmethod
    def from_key(cls, key: int, n: int, phase_mode: PhaseMode | str) -> "Tableau":
        width = 2 * n
        mask = _row_mask(n)
        cols = [(key >> (c * width)) & mask for c in range(width)]
        phases = None
        if PhaseMode.parse(phase_mode) is PhaseMode.WITH_PHASES:
            phases = (key >> (width * width)) & mask
        return cls(n, cols, phases)

    def drop_phases(self) -> "Tableau":
        return self if self.phases is None else Tableau(self.n, self.cols, None)

    def with_phase_mode(self, mode: PhaseMode | str) -> "Tableau":
        mode = PhaseMode.parse(mode)
        if mode is PhaseMode.PHASELESS:
            return self.drop_phases()
        return self if self.phases is not None else Tableau(self.n, self.cols, 0)

    # -- text format -----------------------------------------------------

    def to_text(self) -> str:
        lines = [f"n={self.n} phases={int(self.with_phases)}"]
        m = self.matrix()
        lines.extend("".join(str(int(b)) for b in row) for row in m)
        if self.phases is not None:
            lines.append("".join(str(int(b)) for b in self.phase_vector()))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Tableau":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        return parse_tableau_lines(lines)[0]


def parse_tableau_lines(lines: Sequence[str], start: int = 0) -> tuple[Tableau, int]:
    """Parse one tableau block beginning at ``lines[start]``; returns (tableau, next index)."""
    try:
        header = dict(tok.split("=", 1) for tok in lines[start].split())
        n = int(header["n"])
        has_phases = header["phases"] == "1"
    except (IndexError, KeyError, ValueError) as exc:
        raise TableauError(f"bad tableau header at line {start}") from exc
    if n < 1:
        raise TableauError("n must be >= 1")
    dim = 2 * n
    body = lines[start + 1: start + 1 + dim]
    if len(body) != dim or any(len(row) != dim or set(row) - {"0", "1"} for row in body):
        raise TableauError("tableau body must be 2n lines of 2n '0'/'1' characters")
    matrix = [[int(ch) for ch in row] for row in body]
    nxt = start + 1 + dim
    phases = None
    if has_phases:
        if nxt >= len(lines) or len(lines[nxt]) != dim or set(lines[nxt]) - {"0", "1"}:
            raise TableauError("missing or malformed phase line")
        phases = [int(ch) for ch in lines[nxt]]
        nxt += 1
    return Tableau.from_matrix(matrix, phases), nxt


# -- group operations ------------------------------------------------------


def identity_tableau(n: int, phase_mode: PhaseMode | str = PhaseMode.PHASELESS) -> Tableau:
    if n < 1:
        raise TableauError("n must be >= 1")
    mode = PhaseMode.parse(phase_mode)
    cols = [1 << c for c in range(2 * n)]
    return Tableau(n, cols, 0 if mode is PhaseMode.WITH_PHASES else None)


def _swap_halves(v: int, n: int) -> int:
    low = (1 << n) - 1
    return (v >> n) | ((v & low) << n)


def is_symplectic(t: Tableau) -> bool:
    """True iff S^T Omega S == Omega over GF(2)."""
    n = t.n
    for i, ci in enumerate(t.cols):
        for j, cj in enumerate(t.cols):
            # (S^T Omega S)[i][j] = <col_i, Omega col_j>
            val = (ci & _swap_halves(cj, n)).bit_count() & 1
            expected = 1 if (j == i + n or i == j + n) else 0
            if val != expected:
                return False
    return True


def _check_pair(a: Tableau, b: Tableau) -> None:
    if a.n != b.n:
        raise TableauError(f"qubit count mismatch: {a.n} vs {b.n}")
    if a.with_phases != b.with_phases:
        raise TableauError("phase mode mismatch")


def _pauli_product_phase(x1: int, z1: int, x2: int, z2: int, n: int) -> int:
    """Exponent of i picked up by P(x1,z1) * P(x2,z2) in the Y = iXZ convention."""
    total = 0
    for q in range(n):
        a, b = (x1 >> q) & 1, (z1 >> q) & 1
        c, d = (x2 >> q) & 1, (z2 >> q) & 1
        if a and b:
            total += d - c
        elif a:
            total += d * (2 * c - 1)
        elif b:
            total += c * (1 - 2 * d)
    return total


def compose(a: Tableau, b: Tableau) -> Tableau:
    """Group product ``a * b``: the symplectic part is ``a.S @ b.S`` mod 2.

    Signs are tracked by expanding each row of ``a`` as a product of ``b``'s
    rows and accumulating the Pauli multiplication phase.
    """
    _check_pair(a, b)
    n = a.n
    dim = 2 * n
    cols = []
    for j in range(dim):
        bj = b.cols[j]
        acc = 0
        k = 0
        while bj:
            if bj & 1:
                acc ^= a.cols[k]
            bj >>= 1
            k += 1
        cols.append(acc)
    if a.phases is None:
        return Tableau(n, cols, None)

    low = (1 << n) - 1
    b_rows = [b.row(k) for k in range(dim)]
    phases = 0
    for r in range(dim):
        v = a.row(r)
        vx, vz = v & low, v >> n
        exponent = 2 * ((a.phases >> r) & 1) + (vx & vz).bit_count()
        px = pz = 0
        for k in range(dim):
            if (v >> k) & 1:
                row = b_rows[k]
                rx, rz = row & low, row >> n
                exponent += 2 * ((b.phases >> k) & 1)
                exponent += _pauli_product_phase(px, pz, rx, rz, n)
                px ^= rx
                pz ^= rz
        exponent %= 4
        if exponent % 2:
            raise TableauError("non-Hermitian row produced; input is not a valid tableau")
        phases |= (exponent // 2) << r
    return Tableau(n, cols, phases)


def inverse(t: Tableau) -> Tableau:
    """Group inverse; the symplectic part is Omega S^T Omega."""
    if not is_symplectic(t):
        raise TableauError("cannot invert a non-symplectic tableau")
    n = t.n
    dim = 2 * n
    sigma = [(i + n) % dim for i in range(dim)]
    m = t.matrix()
    inv = np.empty_like(m)
    for i in range(dim):
        for j in range(dim):
            inv[i, j] = m[sigma[j], sigma[i]]
    cols = [sum(int(inv[r, c]) << r for r in range(dim)) for c in range(dim)]
    if t.phases is None:
        return Tableau(n, cols, None)
    candidate = Tableau(n, cols, 0)
    residual = compose(t, candidate).phases
    # Flipping inverse row j flips every product row r with S[r][j] = 1,
    # so the correction solves S @ delta = residual.
    delta = 0
    for j in range(dim):
        bit = 0
        for k in range(dim):
            bit ^= int(inv[j, k]) & ((residual >> k) & 1)
        delta |= bit << j
    return Tableau(n, cols, delta)


def apply_gate(t: Tableau, move) -> Tableau:
    """``compose(t, gate_tableau(move))`` via direct column and sign updates.

    ``move`` is anything with ``kind`` and ``qubits`` attributes.
    """
    kind = GateKind(move.kind)
    qubits = tuple(move.qubits)
    if len(qubits) != kind.arity:
        raise TableauError(f"{kind.value} takes {kind.arity} qubit(s)")
    if any(q < 0 or q >= t.n for q in qubits):
        raise TableauError(f"qubit index out of range for n={t.n}: {qubits}")
    if kind.arity == 2 and qubits[0] == qubits[1]:
        raise TableauError("two-qubit gate needs distinct qubits")
    cols = list(t.cols)
    phase = apply_columns(cols, t.phases, kind, qubits, t.n, _row_mask(t.n))
    return Tableau(t.n, cols, phase)


class _Gate:
    __slots__ = ("kind", "qubits")

    def __init__(self, kind, qubits):
        self.kind = GateKind(kind)
        self.qubits = tuple(qubits)


def gate_tableau(kind: GateKind | str, qubits: Sequence[int], n: int,
                 phase_mode: PhaseMode | str = PhaseMode.PHASELESS) -> Tableau:
    """Tableau of a single generator acting on ``n`` qubits."""
    return apply_gate(identity_tableau(n, phase_mode), _Gate(kind, qubits))


def compose_gates(n: int, gates: Iterable, phase_mode: PhaseMode | str = PhaseMode.PHASELESS,
                  start: Tableau | None = None) -> Tableau:
    t = identity_tableau(n, phase_mode) if start is None else start
    for g in gates:
        t = apply_gate(t, g)
    return t


def clifford_group_size(n: int, with_phases: bool = True) -> int:
    """Exact order of Cl(n) (global phase removed); phaseless drops the 2^(2n) factor."""
    if n < 1:
        raise ValueError("n must be >= 1")
    size = 2 ** (n * n + 2 * n) * math.prod(4 ** i - 1 for i in range(1, n + 1))
    if not with_phases:
        size //= 4 ** n
    return size
