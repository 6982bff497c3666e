"""Bit-packed dense linear algebra over GF(2).

Rows are packed big-endian into 64-bit words: column 0 is the most
significant bit of word 0. Row reductions XOR whole words at a time, and
numpy applies each pivot to every affected row in one vectorized step.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, SingularMatrix

WORD = 64


def _nwords(cols: int) -> int:
    return -(-cols // WORD)


def _pack(bits: np.ndarray) -> np.ndarray:
    rows, cols = bits.shape
    nw = _nwords(cols)
    padded = np.zeros((rows, nw * WORD), dtype=np.uint8)
    padded[:, :cols] = bits
    packed = np.packbits(padded, axis=1, bitorder="big")
    return np.ascontiguousarray(packed).view(">u8").astype(np.uint64).reshape(rows, nw)


def _unpack(data: np.ndarray, cols: int) -> np.ndarray:
    rows = data.shape[0]
    raw = np.ascontiguousarray(data.astype(">u8")).view(np.uint8).reshape(rows, 8 * data.shape[1])
    return np.unpackbits(raw, axis=1, bitorder="big")[:, :cols]


def _col_mask(c: int) -> tuple[int, np.uint64]:
    return c // WORD, np.uint64(1 << (WORD - 1 - c % WORD))


class BitMatrix:
    """Immutable dense matrix over GF(2).

    ``data`` holds the packed rows with shape ``(rows, ceil(cols / 64))``.
    Build instances with :meth:`from_bits`, :meth:`from_strings`,
    :meth:`identity` or :meth:`zeros`.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: np.ndarray):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        data = np.asarray(data, dtype=np.uint64).reshape(rows, _nwords(cols))
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("BitMatrix is immutable")

    @classmethod
    def from_bits(cls, bits) -> "BitMatrix":
        arr = np.asarray(bits, dtype=np.int64)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected a 2-d bit array, got ndim={arr.ndim}")
        if arr.size and not np.all((arr == 0) | (arr == 1)):
            raise ValueError("entries must be 0 or 1")
        arr = arr.astype(np.uint8)
        return cls(arr.shape[0], arr.shape[1], _pack(arr))

    @classmethod
    def from_strings(cls, rows: Sequence[str], cols: int | None = None) -> "BitMatrix":
        """Parse rows written as '0'/'1' strings, e.g. ``["110", "011"]``."""
        rows = list(rows)
        if cols is None:
            if not rows:
                raise ValueError("column count is ambiguous for an empty row list")
            cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise DimensionMismatch("rows have inconsistent lengths")
        if any(ch not in "01" for r in rows for ch in r):
            raise ValueError("rows must contain only '0' and '1'")
        bits = np.array([[int(ch) for ch in r] for r in rows], dtype=np.uint8).reshape(len(rows), cols)
        return cls(len(rows), cols, _pack(bits))

    @classmethod
    def from_row_ints(cls, rows: Iterable[int], cols: int) -> "BitMatrix":
        """Rows given as integers whose most significant of ``cols`` bits is column 0."""
        rows = [int(r) for r in rows]
        if any(r < 0 or r >> cols for r in rows):
            raise DimensionMismatch("row integer does not fit in the column count")
        shifts = np.arange(cols - 1, -1, -1)
        bits = np.array([[(r >> int(s)) & 1 for s in shifts] for r in rows], dtype=np.uint8)
        return cls.from_bits(bits.reshape(len(rows), cols))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_bits(np.eye(n, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, np.zeros((rows, _nwords(cols)), dtype=np.uint64))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def bits(self) -> np.ndarray:
        """Unpacked copy as a ``uint8`` array of shape ``(rows, cols)``."""
        return _unpack(self.data, self.cols)

    def row_ints(self) -> list[int]:
        """Each row as a Python int, column 0 most significant."""
        out = []
        for row in self.data:
            v = 0
            for w in row:
                v = (v << WORD) | int(w)
            out.append(v >> (_nwords(self.cols) * WORD - self.cols))
        return out

    def to_strings(self) -> list[str]:
        return ["".join(str(int(b)) for b in row) for row in self.bits()]

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"index {(i, j)} out of bounds for shape {self.shape}")
        w, mask = _col_mask(j)
        return int(bool(self.data[i, w] & mask))

    def row(self, i: int) -> np.ndarray:
        return self.bits()[i]

    def take_rows(self, idx: Sequence[int]) -> "BitMatrix":
        idx = np.asarray(idx, dtype=np.int64)
        return BitMatrix(len(idx), self.cols, self.data[idx])

    @property
    def T(self) -> "BitMatrix":
        return BitMatrix.from_bits(self.bits().T)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data.tobytes()))

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        return matmul(self, other)

    def __repr__(self) -> str:
        body = ", ".join(self.to_strings()) if self.rows <= 8 else f"{self.rows} rows"
        return f"BitMatrix({self.rows}x{self.cols}: {body})"


def hstack(blocks: Sequence[BitMatrix]) -> BitMatrix:
    if len({b.rows for b in blocks}) > 1:
        raise DimensionMismatch("hstack needs equal row counts")
    return BitMatrix.from_bits(np.hstack([b.bits() for b in blocks]))


def vstack(blocks: Sequence[BitMatrix]) -> BitMatrix:
    if len({b.cols for b in blocks}) > 1:
        raise DimensionMismatch("vstack needs equal column counts")
    return BitMatrix.from_bits(np.vstack([b.bits() for b in blocks]))


def _eliminate(data: np.ndarray, cols: int, track: np.ndarray | None = None) -> list[int]:
    """In-place Gauss-Jordan elimination; mirrors row operations on ``track``."""
    rows = data.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        w, mask = _col_mask(c)
        hits = np.flatnonzero(data[r:, w] & mask)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            data[[r, p]] = data[[p, r]]
            if track is not None:
                track[[r, p]] = track[[p, r]]
        sel = (data[:, w] & mask) != 0
        sel[r] = False
        data[sel] ^= data[r]
        if track is not None:
            track[sel] ^= track[r]
        pivots.append(c)
        r += 1
    return pivots


def rank(M: BitMatrix) -> int:
    """GF(2) rank."""
    return len(_eliminate(M.data.copy(), M.cols))


def rref(M: BitMatrix) -> tuple[BitMatrix, BitMatrix, list[int]]:
    """Reduced row echelon form.

    Returns ``(R, T, pivots)`` with ``R = T @ M``, ``T`` invertible and
    ``pivots`` the pivot column of each nonzero row of ``R``.
    """
    data = M.data.copy()
    track = BitMatrix.identity(M.rows).data.copy()
    pivots = _eliminate(data, M.cols, track)
    return BitMatrix(M.rows, M.cols, data), BitMatrix(M.rows, M.rows, track), pivots


def invert(M: BitMatrix) -> BitMatrix:
    if M.rows != M.cols:
        raise DimensionMismatch(f"cannot invert a {M.rows}x{M.cols} matrix")
    data = M.data.copy()
    track = BitMatrix.identity(M.rows).data.copy()
    pivots = _eliminate(data, M.cols, track)
    if len(pivots) < M.rows:
        raise SingularMatrix(f"rank {len(pivots)} < {M.rows}")
    return BitMatrix(M.rows, M.rows, track)


def matmul(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    if A.cols != B.rows:
        raise DimensionMismatch(f"cannot multiply {A.shape} by {B.shape}")
    out = np.zeros((A.rows, B.data.shape[1]), dtype=np.uint64)
    a = A.bits().astype(bool)
    for j in range(A.cols):
        out[a[:, j]] ^= B.data[j]
    return BitMatrix(A.rows, B.cols, out)


def matvec(A: BitMatrix, x) -> np.ndarray:
    """Product with a bit vector; returns a ``uint8`` array of length ``A.rows``."""
    x = np.asarray(x, dtype=np.int64).reshape(-1)
    if x.size != A.cols:
        raise DimensionMismatch(f"vector of length {x.size} for {A.cols} columns")
    return ((A.bits().astype(np.int64) @ x) % 2).astype(np.uint8)


def complete_to_basis(M: BitMatrix) -> BitMatrix:
    """Append unit rows so that ``M`` (independent rows) becomes invertible.

    The first ``M.rows`` rows of the result are exactly the rows of ``M``.
    """
    _, _, pivots = rref(M)
    if len(pivots) < M.rows:
        raise SingularMatrix("rows are linearly dependent")
    free = [c for c in range(M.cols) if c not in set(pivots)]
    extra = np.zeros((len(free), M.cols), dtype=np.uint8)
    extra[np.arange(len(free)), free] = 1
    return BitMatrix.from_bits(np.vstack([M.bits(), extra]))


def sample_uniform(rows: int, cols: int, rng: np.random.Generator) -> BitMatrix:
    """Matrix with i.i.d. fair bits."""
    return BitMatrix.from_bits(rng.integers(0, 2, size=(rows, cols), dtype=np.uint8))


def sample_full_rank_counted(m: int, n: int, rng: np.random.Generator) -> tuple[BitMatrix, int]:
    """Rejection-sample a uniform rank-min(m, n) matrix; also return the number of draws."""
    target = min(m, n)
    rounds = 0
    while True:
        rounds += 1
        M = sample_uniform(m, n, rng)
        if rank(M) == target:
            return M, rounds


def sample_full_rank(m: int, n: int, rng: np.random.Generator) -> BitMatrix:
    return sample_full_rank_counted(m, n, rng)[0]


def sample_gl(n: int, rng: np.random.Generator) -> BitMatrix:
    """Uniform element of GL(n, Z2) by rejection from uniform matrices."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return sample_full_rank_counted(n, n, rng)[0]


def gl_size(n: int) -> int:
    """|GL(n, Z2)| = prod_{k<n} (2^n - 2^k)."""
    out = 1
    for k in range(n):
        out *= 2**n - 2**k
    return out
