"""Compile a phase-state key into Hadamard, Z-rotation and CNOT gates.

Uses two identities: CNOT circuits fix |+^n>, and conjugating Z_j by the
CNOT circuit |x> -> |Mx> yields Z^{M_j}. Rows of A are split into linearly
independent chunks. Each chunk is completed to an invertible M_k and its
rotations sit between the CNOT maps M_{k+1} M_k^{-1}. The circuit is

    H^n, RZ-layer_1, C_1, RZ-layer_2, C_2, ..., RZ-layer_l, C_l

with C_k = M_{k+1} M_k^{-1} for k < l and C_l = M_l^{-1}. Zero rows of A are
pure global phases and are kept as an exact global-phase integer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2
from .core import (DEFAULT_MAX_QUBITS, HpsInstance, Statevector, _check_cap, _roots)
from .errors import DimensionMismatch, SingularMatrix
from .gf2 import BitMatrix


@dataclass(frozen=True)
class Gate:
    """``H`` and ``RZ`` act on ``qubits[0]``; ``CNOT`` has ``qubits = (control, target)``.

    ``RZ`` with integer ``k`` applies exp(i (2 pi k / q) Z).
    """

    kind: str
    qubits: tuple[int, ...]
    k: int = 0

    def __post_init__(self):
        arity = {"H": 1, "RZ": 1, "CNOT": 2}
        if self.kind not in arity:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != arity[self.kind]:
            raise ValueError(f"{self.kind} takes {arity[self.kind]} qubit(s)")
        if self.kind == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise ValueError("CNOT control equals target")

    @staticmethod
    def h(q: int) -> "Gate":
        return Gate("H", (q,))

    @staticmethod
    def rz(q: int, k: int) -> "Gate":
        return Gate("RZ", (q,), k)

    @staticmethod
    def cnot(c: int, t: int) -> "Gate":
        return Gate("CNOT", (c, t))


@dataclass(frozen=True)
class Block:
    """Gate index range ``[start, stop)`` of one rotation layer plus its CNOT map."""

    start: int
    stop: int
    rotations: int
    linear_map: BitMatrix


@dataclass(frozen=True)
class Circuit:
    n: int
    q: int
    gates: tuple[Gate, ...]
    blocks: tuple[Block, ...] = ()
    global_phase: int = 0

    def __post_init__(self):
        for g in self.gates:
            if any(not 0 <= v < self.n for v in g.qubits):
                raise DimensionMismatch(f"gate {g} outside {self.n} qubits")
        lead = 0
        while lead < len(self.gates) and self.gates[lead].kind == "H":
            lead += 1
        if any(g.kind == "H" for g in self.gates[lead:]):
            raise ValueError("Hadamards are only allowed in the leading layer")


def cnot_synthesis(R: BitMatrix) -> list[Gate]:
    """CNOT list implementing x -> R x, by Gauss-Jordan elimination.

    Each elimination step ``row_t ^= row_s`` is a CNOT(s -> t). The steps
    reduce R to I, so R is their product in order, and the circuit applies
    them in reverse. At most n^2 gates.
    """
    n = R.rows
    if R.cols != n:
        raise DimensionMismatch("CNOT synthesis needs a square matrix")
    if gf2.rank(R) < n:
        raise SingularMatrix("CNOT circuits realize only invertible maps")
    W = R.bits().astype(bool)
    ops: list[tuple[int, int]] = []
    for c in range(n):
        if not W[c, c]:
            r = c + int(np.flatnonzero(W[c:, c])[0])
            W[c] ^= W[r]
            ops.append((r, c))
        for r in np.flatnonzero(W[:, c]):
            if r != c:
                W[r] ^= W[c]
                ops.append((c, int(r)))
    return [Gate.cnot(s, t) for s, t in reversed(ops)]


def _chunk_rows(rows: list[int], n: int) -> list[list[int]]:
    """Greedy split of row positions into consecutive linearly independent chunks."""
    chunks: list[list[int]] = []
    basis: dict[int, int] = {}
    for pos, r in rows:
        v = r
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                break
            v ^= basis[top]
        if v == 0 or not chunks:
            chunks.append([])
            basis = {}
            v = r
        basis[v.bit_length() - 1] = v
        chunks[-1].append(pos)
    return chunks


def compile(inst: HpsInstance) -> Circuit:  # noqa: A001 - mirrors the operation name
    n, q = inst.n, inst.q
    row_ints = inst.arch.row_ints()
    ks = inst.angles.ks
    gphase = sum(k for r, k in zip(row_ints, ks) if r == 0) % q
    live = [(i, r) for i, r in enumerate(row_ints) if r != 0]
    chunks = _chunk_rows(live, n)
    mats = [gf2.complete_to_basis(inst.arch.take_rows(ch)) for ch in chunks]

    gates = [Gate.h(j) for j in range(n)]
    blocks = []
    for b, ch in enumerate(chunks):
        start = len(gates)
        gates.extend(Gate.rz(j, ks[i]) for j, i in enumerate(ch))
        inv = gf2.invert(mats[b])
        link = mats[b + 1] @ inv if b + 1 < len(mats) else inv
        gates.extend(cnot_synthesis(link))
        blocks.append(Block(start, len(gates), len(ch), link))
    return Circuit(n, q, tuple(gates), tuple(blocks), gphase)


def _apply(amps: np.ndarray, g: Gate, n: int, q: int) -> np.ndarray:
    if g.kind == "H":
        j = g.qubits[0]
        a = amps.reshape(1 << j, 2, 1 << (n - j - 1))
        return (np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1) / np.sqrt(2)).reshape(-1)
    idx = np.arange(1 << n)
    if g.kind == "RZ":
        j = g.qubits[0]
        bit = (idx >> (n - 1 - j)) & 1
        theta = 2 * np.pi * g.k / q
        return amps * np.exp(1j * theta * (1 - 2 * bit))
    c, t = g.qubits
    src = idx ^ (((idx >> (n - 1 - c)) & 1) << (n - 1 - t))
    return amps[src]


def simulate(c: Circuit, state: Statevector | None = None, max_qubits: int = DEFAULT_MAX_QUBITS) -> Statevector:
    _check_cap(c.n, max_qubits)
    if state is None:
        state = Statevector.basis(c.n, 0)
    if state.n != c.n:
        raise DimensionMismatch(f"circuit on {c.n} qubits, state on {state.n}")
    amps = state.amps.copy()
    for g in c.gates:
        amps = _apply(amps, g, c.n, c.q)
    if c.global_phase:
        amps = amps * _roots(c.q)[c.global_phase]
    return Statevector(c.n, amps)


def gate_counts(c: Circuit) -> dict[str, int]:
    kinds = [g.kind for g in c.gates]
    return {"h": kinds.count("H"), "rz": kinds.count("RZ"), "cnot": kinds.count("CNOT"), "blocks": len(c.blocks)}


def to_text(c: Circuit) -> str:
    lines = [f"# circuit n={c.n} q={c.q}"]
    if c.global_phase:
        lines.append(f"GPHASE {c.global_phase}/{c.q}")
    starts = {b.start: i for i, b in enumerate(c.blocks)}
    for i, g in enumerate(c.gates):
        if i in starts:
            lines.append(f"# block {starts[i]}")
        if g.kind == "H":
            lines.append(f"H {g.qubits[0]}")
        elif g.kind == "RZ":
            lines.append(f"RZ {g.qubits[0]} {g.k}/{c.q}")
        else:
            lines.append(f"CNOT {g.qubits[0]} {g.qubits[1]}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Circuit:
    """Parse the text format; block boundaries are kept but their maps are not recomputed."""
    n = q = None
    gates: list[Gate] = []
    gphase = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if tok.startswith("n="):
                    n = int(tok[2:])
                elif tok.startswith("q="):
                    q = int(tok[2:])
            continue
        parts = line.split()
        op = parts[0]
        try:
            if op == "H" and len(parts) == 2:
                gates.append(Gate.h(int(parts[1])))
            elif op == "RZ" and len(parts) == 3:
                k, den = parts[2].split("/")
                q = q if q is not None else int(den)
                gates.append(Gate.rz(int(parts[1]), int(k)))
            elif op == "CNOT" and len(parts) == 3:
                gates.append(Gate.cnot(int(parts[1]), int(parts[2])))
            elif op == "GPHASE" and len(parts) == 2:
                k, den = parts[1].split("/")
                gphase, q = int(k), int(den)
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from None
    if n is None:
        n = 1 + max((v for g in gates for v in g.qubits), default=-1)
    return Circuit(n, q or 1, tuple(gates), (), gphase)
