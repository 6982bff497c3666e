"""Hamiltonian phase states from their compact (architecture, angles) key.

A key is an m x n binary architecture ``A`` and integers ``k_i`` in
``[0, q)`` with angles ``theta_i = 2 pi k_i / q``. The state is

    exp(i sum_i theta_i Z^{A_i}) |+^n>,   amps[x] = 2^{-n/2} exp(2 pi i s(x) / q)

with the integer phase ``s(x) = sum_i k_i (-1)^{<A_i, x>}``. Amplitude index
``x`` has qubit 0 as its most significant bit.

``s`` is the Walsh-Hadamard transform of the histogram ``c[a] = sum of k_i over
rows A_i = a``, so a full phase table costs O(n 2^n) integer operations
regardless of m.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Literal, NamedTuple, Sequence

import numpy as np

from . import gf2
from .errors import DimensionMismatch, SingularMatrix, TooManyQubits
from .gf2 import BitMatrix

DEFAULT_MAX_QUBITS = 20
STREAM_MAX_QUBITS = 24
_CHUNK_BITS = 16

Basis = Literal["computational", "x_basis", "y_basis"]


@dataclass(frozen=True)
class AngleVector:
    """Angles ``2 pi k_i / q`` stored as the integers ``k_i``."""

    q: int
    ks: tuple[int, ...]

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be at least 1")
        ks = tuple(int(k) for k in self.ks)
        if any(not 0 <= k < self.q for k in ks):
            raise ValueError(f"angle integers must lie in [0, {self.q})")
        object.__setattr__(self, "ks", ks)

    @classmethod
    def reduce(cls, q: int, ks) -> "AngleVector":
        return cls(q, tuple(int(k) % q for k in ks))

    @classmethod
    def zeros(cls, q: int, m: int) -> "AngleVector":
        return cls(q, (0,) * m)

    @property
    def m(self) -> int:
        return len(self.ks)

    def thetas(self) -> np.ndarray:
        return 2 * np.pi * np.asarray(self.ks, dtype=float) / self.q

    def __add__(self, other: "AngleVector") -> "AngleVector":
        if self.q != other.q or self.m != other.m:
            raise DimensionMismatch("angle vectors differ in q or length")
        return AngleVector.reduce(self.q, (a + b for a, b in zip(self.ks, other.ks)))

    def __neg__(self) -> "AngleVector":
        return AngleVector.reduce(self.q, (-k for k in self.ks))

    def permuted(self, perm: Sequence[int]) -> "AngleVector":
        return AngleVector(self.q, tuple(self.ks[i] for i in perm))


@dataclass(frozen=True)
class HpsInstance:
    """The secret key (A, k) of one phase state."""

    arch: BitMatrix
    angles: AngleVector

    def __post_init__(self):
        if self.arch.rows != self.angles.m:
            raise DimensionMismatch(f"{self.arch.rows} architecture rows but {self.angles.m} angles")

    @property
    def n(self) -> int:
        return self.arch.cols

    @property
    def m(self) -> int:
        return self.arch.rows

    @property
    def q(self) -> int:
        return self.angles.q

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "q": self.q, "arch": self.arch.to_strings(), "ks": list(self.angles.ks)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "HpsInstance":
        n, m, q = int(d["n"]), int(d["m"]), int(d["q"])
        arch = BitMatrix.from_strings(d["arch"], cols=n)
        if arch.rows != m:
            raise DimensionMismatch(f"header says m={m} but {arch.rows} rows given")
        ks = [int(k) for k in d["ks"]]
        if any(not 0 <= k < q for k in ks):
            raise ValueError(f"ks must lie in [0, {q})")
        return cls(arch, AngleVector(q, tuple(ks)))

    @classmethod
    def from_json(cls, text: str) -> "HpsInstance":
        return cls.from_dict(json.loads(text))

    @classmethod
    def make(cls, rows: Sequence[str], ks: Sequence[int], q: int, n: int | None = None) -> "HpsInstance":
        """Shorthand: ``HpsInstance.make(["11"], [1], q=8)``."""
        if n is None:
            if not rows:
                raise ValueError("pass n when there are no rows")
            n = len(rows[0])
        return cls(BitMatrix.from_strings(list(rows), cols=n), AngleVector(q, tuple(ks)))


@dataclass(frozen=True, eq=False)
class Statevector:
    """Read-only amplitude vector of length 2^n."""

    n: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        if amps.size != 1 << self.n:
            raise DimensionMismatch(f"{amps.size} amplitudes for {self.n} qubits")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @classmethod
    def plus(cls, n: int) -> "Statevector":
        return cls(n, np.full(1 << n, 2 ** (-n / 2), dtype=np.complex128))

    @classmethod
    def basis(cls, n: int, x: int) -> "Statevector":
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[x] = 1.0
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def vdot(self, other: "Statevector") -> complex:
        if self.n != other.n:
            raise DimensionMismatch("qubit counts differ")
        return complex(np.vdot(self.amps, other.amps))

    def to_bytes(self) -> bytes:
        """Little-endian interleaved (re, im) doubles."""
        return self.amps.astype("<c16").tobytes()

    def header(self) -> dict:
        return {"n": self.n, "format": "complex128-le-interleaved", "index_order": "qubit0-msb"}

    @classmethod
    def from_bytes(cls, n: int, data: bytes) -> "Statevector":
        return cls(n, np.frombuffer(data, dtype="<c16").astype(np.complex128))


@dataclass(frozen=True)
class EnsembleSpec:
    """How to draw a key: ``arch_mode`` in {uniform, full_rank, fixed}, ``angle_mode`` in {uniform, fixed}."""

    n: int
    m: int
    q: int
    arch_mode: str = "uniform"
    angle_mode: str = "uniform"
    arch: BitMatrix | None = None
    angles: AngleVector | None = None

    def __post_init__(self):
        if self.n < 1 or self.m < 0 or self.q < 1:
            raise ValueError("need n >= 1, m >= 0, q >= 1")
        if self.arch_mode not in ("uniform", "full_rank", "fixed"):
            raise ValueError(f"unknown arch_mode {self.arch_mode!r}")
        if self.angle_mode not in ("uniform", "fixed"):
            raise ValueError(f"unknown angle_mode {self.angle_mode!r}")
        if self.arch_mode == "fixed":
            if self.arch is None or self.arch.shape != (self.m, self.n):
                raise DimensionMismatch("fixed architecture must be m x n")
        if self.angle_mode == "fixed":
            if self.angles is None or self.angles.m != self.m or self.angles.q != self.q:
                raise DimensionMismatch("fixed angles must have length m and modulus q")


# --- phase kernel -----------------------------------------------------------


def parity(v):
    """Parity of the set bits of each integer (numpy arrays or ints)."""
    return np.bitwise_count(v) & 1


def walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis.

    ``out[..., x] = sum_a v[..., a] (-1)^{popcount(a & x)}``.
    """
    v = np.asarray(v)
    lead, size = v.shape[:-1], v.shape[-1]
    if size & (size - 1):
        raise DimensionMismatch("length must be a power of two")
    h = 1
    while h < size:
        a = v.reshape(*lead, -1, 2, h)
        v = np.stack((a[..., 0, :] + a[..., 1, :], a[..., 0, :] - a[..., 1, :]), axis=-2)
        h *= 2
    return v.reshape(*lead, size)


def _phase_chunks(rows: Sequence[int], ks: Sequence[int], n: int, chunk_bits: int = _CHUNK_BITS
                  ) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(start, s[start:start+len])`` with s(x) = sum_i k_i (-1)^{<A_i,x>} over Z.

    Splits x = (hi, lo) with ``lo`` the low ``chunk_bits`` bits, so that each
    chunk is one Walsh-Hadamard transform over the low bits of a histogram
    whose weights carry the sign from the high bits.
    """
    lo_bits = min(n, chunk_bits)
    lo_size = 1 << lo_bits
    rows = np.asarray(rows, dtype=np.int64).reshape(-1)
    ks = np.asarray(ks, dtype=np.int64).reshape(-1)
    a_hi = rows >> lo_bits
    a_lo = rows & (lo_size - 1)
    for hi in range(1 << (n - lo_bits)):
        w = np.where(parity(a_hi & hi), -ks, ks)
        c = np.zeros(lo_size, dtype=np.int64)
        np.add.at(c, a_lo, w)
        yield hi * lo_size, walsh_hadamard(c)


def phase_table(arch: BitMatrix, angles: AngleVector) -> np.ndarray:
    """Exact integer phases s(x) mod 2q for all 2^n strings."""
    _check_arch(arch, angles)
    n = arch.cols
    out = np.empty(1 << n, dtype=np.int64)
    for start, chunk in _phase_chunks(arch.row_ints(), angles.ks, n):
        out[start:start + chunk.size] = chunk
    return np.mod(out, 2 * angles.q)


def _roots(q: int) -> np.ndarray:
    """``exp(2 pi i s / q)`` for s in [0, 2q)."""
    return np.exp(2j * np.pi * np.arange(2 * q) / q)


def _check_arch(arch: BitMatrix, angles: AngleVector):
    if arch.rows != angles.m:
        raise DimensionMismatch(f"{arch.rows} rows but {angles.m} angles")


def _check_cap(n: int, cap: int):
    if n > cap:
        raise TooManyQubits(f"n={n} exceeds the cap of {cap} qubits")


def _as_bits(x, n: int) -> np.ndarray:
    if isinstance(x, str):
        x = [int(ch) for ch in x]
    x = np.asarray(x, dtype=np.int64).reshape(-1)
    if x.size != n:
        raise DimensionMismatch(f"bit vector of length {x.size}, expected {n}")
    if np.any((x != 0) & (x != 1)):
        raise ValueError("bit vector entries must be 0 or 1")
    return x


def bits_to_int(x) -> int:
    out = 0
    for b in np.asarray(x).reshape(-1):
        out = (out << 1) | int(b)
    return out


def int_to_bits(v: int, n: int) -> np.ndarray:
    return np.array([(v >> (n - 1 - j)) & 1 for j in range(n)], dtype=np.uint8)


# --- operations ---------------------------------------------------------------


def phase_at(inst: HpsInstance, x) -> int:
    """Integer s with amplitude phase exp(2 pi i s / q), reduced mod 2q."""
    x = _as_bits(x, inst.n)
    par = (inst.arch.bits().astype(np.int64) @ x) % 2
    s = sum(k * (1 - 2 * int(p)) for k, p in zip(inst.angles.ks, par))
    return s % (2 * inst.q)


def build_statevector(inst: HpsInstance, max_qubits: int = DEFAULT_MAX_QUBITS) -> Statevector:
    _check_cap(inst.n, max_qubits)
    s = phase_table(inst.arch, inst.angles)
    return Statevector(inst.n, _roots(inst.q)[s] * 2 ** (-inst.n / 2))


def inner_product(a: HpsInstance, b: HpsInstance, max_qubits: int = STREAM_MAX_QUBITS) -> complex:
    """<Phi_a|Phi_b>, streamed over 2^16-amplitude chunks.

    Uses linearity: s_b - s_a is the transform of the combined histogram with
    the rows of ``a`` carrying negated weights, so no vector is stored.
    """
    if a.n != b.n:
        raise DimensionMismatch(f"n={a.n} vs n={b.n}")
    _check_cap(a.n, max_qubits)
    q = math.lcm(a.q, b.q)
    rows = a.arch.row_ints() + b.arch.row_ints()
    ks = [-k * (q // a.q) for k in a.angles.ks] + [k * (q // b.q) for k in b.angles.ks]
    roots = _roots(q)
    total = 0j
    for _, chunk in _phase_chunks(rows, ks, a.n):
        total += roots[np.mod(chunk, 2 * q)].sum()
    return complex(total / (1 << a.n))


class Verdict(NamedTuple):
    accept: bool
    fidelity: float


ACCEPT_THRESHOLD = 1 - 1e-9


def fidelity_verify(claim: HpsInstance, truth: HpsInstance, rng: np.random.Generator | None = None) -> Verdict:
    """Exact-threshold verification, or a projective-measurement simulation when ``rng`` is given."""
    f = min(1.0, abs(inner_product(claim, truth)) ** 2)
    if rng is None:
        return Verdict(f >= ACCEPT_THRESHOLD, f)
    return Verdict(bool(rng.random() < f), f)


def apply_diagonal(state: Statevector, arch: BitMatrix, angles: AngleVector) -> Statevector:
    """Multiply amps[x] by exp(2 pi i s(x) / q)."""
    if arch.cols != state.n:
        raise DimensionMismatch(f"architecture on {arch.cols} qubits, state on {state.n}")
    s = phase_table(arch, angles)
    return Statevector(state.n, state.amps * _roots(angles.q)[s])


def apply_pauli_z_mask(state: Statevector, x) -> Statevector:
    mask = bits_to_int(_as_bits(x, state.n))
    idx = np.arange(1 << state.n)
    return Statevector(state.n, np.where(parity(idx & mask), -state.amps, state.amps))


def linear_image(R: BitMatrix) -> np.ndarray:
    """Integer encoding of R.y for every y in [0, 2^n)."""
    n = R.cols
    cols = BitMatrix.from_bits(R.bits().T).row_ints()
    y = np.arange(1 << n, dtype=np.int64)
    out = np.zeros_like(y)
    for j, col in enumerate(cols):
        out ^= ((y >> (n - 1 - j)) & 1) * col
    return out


def apply_linear_permutation(state: Statevector, R: BitMatrix) -> Statevector:
    """Basis relabeling |x> -> |R^{-1} x>, i.e. new[y] = old[R y]."""
    if R.shape != (state.n, state.n):
        raise DimensionMismatch(f"need an {state.n}x{state.n} matrix, got {R.shape}")
    if gf2.rank(R) < state.n:
        raise SingularMatrix("basis relabeling needs an invertible matrix")
    return Statevector(state.n, state.amps[linear_image(R)])


def hadamard_all(amps: np.ndarray) -> np.ndarray:
    """H on every qubit (last axis)."""
    n = int(np.log2(amps.shape[-1]))
    return walsh_hadamard(amps) * 2 ** (-n / 2)


def probabilities(state: Statevector, basis: Basis = "computational") -> np.ndarray:
    """Born probabilities of the product-basis measurement; outcome bit 0 means +1 eigenstate."""
    amps = state.amps
    if basis == "y_basis":
        idx = np.arange(1 << state.n)
        amps = amps * (-1j) ** np.bitwise_count(idx)
    if basis in ("x_basis", "y_basis"):
        amps = hadamard_all(amps)
    elif basis != "computational":
        raise ValueError(f"unknown basis {basis!r}")
    p = np.abs(amps) ** 2
    return p / p.sum()


def measure(state: Statevector, basis: Basis, rng: np.random.Generator, shots: int) -> np.ndarray:
    """Outcome histogram: counts indexed by outcome string (qubit 0 most significant)."""
    if shots < 1:
        raise ValueError("shots must be positive")
    return rng.multinomial(shots, probabilities(state, basis))


def sample_instance(spec: EnsembleSpec, rng: np.random.Generator) -> HpsInstance:
    if spec.arch_mode == "fixed":
        arch = spec.arch
    elif spec.arch_mode == "full_rank":
        arch = gf2.sample_full_rank(spec.m, spec.n, rng)
    else:
        arch = gf2.sample_uniform(spec.m, spec.n, rng)
    if spec.angle_mode == "fixed":
        angles = spec.angles
    else:
        angles = AngleVector(spec.q, tuple(rng.integers(0, spec.q, size=spec.m).tolist()))
    return HpsInstance(arch, angles)


def haar_random_state(n: int, rng: np.random.Generator, max_qubits: int = DEFAULT_MAX_QUBITS) -> Statevector:
    _check_cap(n, max_qubits)
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return Statevector(n, v / np.linalg.norm(v))


def canonicalize(inst: HpsInstance) -> HpsInstance:
    """Optional normal form producing the same state up to global phase.

    Duplicate rows are merged (angles add), angles are reduced mod q/2 when q
    is even (a shift by pi flips only the global sign), rows that reduce to a
    global phase (zero row or angle 0) are dropped, and rows are sorted.
    """
    q = inst.q
    period = q // 2 if q % 2 == 0 else q
    acc: dict[int, int] = {}
    for row, k in zip(inst.arch.row_ints(), inst.angles.ks):
        acc[row] = (acc.get(row, 0) + k) % q
    kept = sorted((r, k % period) for r, k in acc.items() if r != 0 and k % period != 0)
    arch = BitMatrix.from_row_ints([r for r, _ in kept], inst.n) if kept else BitMatrix.zeros(0, inst.n)
    return HpsInstance(arch, AngleVector(q, tuple(k for _, k in kept)))
