"""Layered diagonal/Hadamard unitaries and their low-moment statistics.

U = (H^n D_1)(H^n D_2) ... (H^n D_L), where each D_l is the diagonal
exp(i sum_i theta_i Z^{A_i}) of an independent random key. The rightmost
factor acts first, so D_L is applied before anything else. In the "ideal"
mode every D_l is a uniformly random phase per basis string instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (AngleVector, Statevector, _roots, hadamard_all, parity, phase_table)
from .designs import MomentReport, trace_norm
from .errors import DimensionMismatch, TooLarge
from .gf2 import BitMatrix

FIRST_MOMENT_MAX_QUBITS = 6
_BATCH = 2048


def default_m(n: int) -> int:
    """n + ceil(log2 n) terms per layer."""
    return n + math.ceil(math.log2(n)) if n > 1 else 1


@dataclass(frozen=True, eq=False)
class LayeredUnitarySpec:
    """Per-layer keys in product order: ``layers[0]`` is the leftmost factor.

    ``ideal`` holds explicit phase tables (radians) instead of keys.
    """

    n: int
    q: int
    layers: tuple[tuple[BitMatrix, AngleVector], ...] = ()
    ideal: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        for A, th in self.layers:
            if A.cols != self.n or A.rows != th.m or th.q != self.q:
                raise DimensionMismatch("layer key does not match (n, q)")

    @property
    def depth(self) -> int:
        return len(self.ideal) if self.ideal is not None else len(self.layers)

    def diagonals(self) -> list[np.ndarray]:
        if self.ideal is not None:
            return [np.exp(1j * p) for p in self.ideal]
        return [_roots(self.q)[phase_table(A, th)] for A, th in self.layers]

    def compose(self, other: "LayeredUnitarySpec") -> "LayeredUnitarySpec":
        """Spec of U_self U_other."""
        if (self.n, self.q) != (other.n, other.q) or (self.ideal is None) != (other.ideal is None):
            raise DimensionMismatch("specs are not composable")
        if self.ideal is not None:
            return LayeredUnitarySpec(self.n, self.q, (), self.ideal + other.ideal)
        return LayeredUnitarySpec(self.n, self.q, self.layers + other.layers)


def sample_layered(n: int, m: int | None, q: int, layers: int, rng: np.random.Generator,
                   ideal: bool = False) -> LayeredUnitarySpec:
    if ideal:
        return LayeredUnitarySpec(n, q, (), tuple(rng.uniform(0, 2 * np.pi, 1 << n) for _ in range(layers)))
    m = default_m(n) if m is None else m
    out = []
    for _ in range(layers):
        A = BitMatrix.from_bits(rng.integers(0, 2, size=(m, n), dtype=np.uint8))
        out.append((A, AngleVector(q, tuple(rng.integers(0, q, size=m).tolist()))))
    return LayeredUnitarySpec(n, q, tuple(out))


def apply_layered(spec: LayeredUnitarySpec, state: Statevector) -> Statevector:
    if state.n != spec.n:
        raise DimensionMismatch(f"spec on {spec.n} qubits, state on {state.n}")
    amps = state.amps
    for D in reversed(spec.diagonals()):
        amps = hadamard_all(amps * D)
    return Statevector(spec.n, amps)


def unitary_matrix(spec: LayeredUnitarySpec) -> np.ndarray:
    d = 1 << spec.n
    M = np.eye(d, dtype=np.complex128)
    for D in reversed(spec.diagonals()):
        M = hadamard_all((D[:, None] * M).T).T
    return M


# --- batched sampling for the statistics ------------------------------------


def _arch_rows(N: int, m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    bits = rng.integers(0, 2, size=(N, m, n), dtype=np.int64)
    return bits @ (1 << np.arange(n - 1, -1, -1))


def _diag_batch(N: int, n: int, m: int, q: int, rng: np.random.Generator, ideal: bool) -> np.ndarray:
    d = 1 << n
    if ideal:
        return np.exp(1j * rng.uniform(0, 2 * np.pi, size=(N, d)))
    rows = _arch_rows(N, m, n, rng)
    ks = rng.integers(0, q, size=(N, m))
    signs = 1 - 2 * parity(rows[:, :, None] & np.arange(d)[None, None, :]).astype(np.int64)
    s = np.einsum("nm,nmd->nd", ks, signs)
    return _roots(q)[np.mod(s, 2 * q)]


def _unitary_batch(N: int, n: int, m: int, q: int, layers: int, rng: np.random.Generator,
                   ideal: bool) -> np.ndarray:
    d = 1 << n
    M = np.broadcast_to(np.eye(d, dtype=np.complex128), (N, d, d)).copy()
    for _ in range(layers):
        D = _diag_batch(N, n, m, q, rng, ideal)
        M = hadamard_all((D[:, :, None] * M).transpose(0, 2, 1)).transpose(0, 2, 1)
    return M


def _hadamard_matrix(n: int) -> np.ndarray:
    return hadamard_all(np.eye(1 << n, dtype=np.complex128))


def first_moment_distance(n: int, m: int | None, q: int, layers: int, samples: int, rng: np.random.Generator,
                          method: str = "conditional", ideal: bool = False, seed: int | None = None,
                          batches: int = 10) -> MomentReport:
    """Estimate || E[U |0><0| U^dag] - I/2^n ||_1.

    ``"sampled"`` averages U|0><0|U^dag over sampled unitaries. ``"conditional"``
    samples only the architectures and averages each layer's angles exactly:
    for fixed A, E_theta[D X D^dag][x, y] = X[x, y] when every term phase
    difference is 0 mod q, and 0 otherwise. Both estimate the same mean; the
    conditional one has far less variance. ``stderr`` is the spread of
    ``batches`` independent batch estimates divided by sqrt(batches).
    """
    if n > FIRST_MOMENT_MAX_QUBITS:
        raise TooLarge(f"n={n} exceeds {FIRST_MOMENT_MAX_QUBITS} for dense channel averages")
    if method not in ("conditional", "sampled"):
        raise ValueError(f"unknown method {method!r}")
    m = default_m(n) if m is None else m
    d = 1 << n
    Hm = _hadamard_matrix(n)
    xor = np.arange(d)[:, None] ^ np.arange(d)[None, :]
    sizes = [samples // batches + (i < samples % batches) for i in range(batches)]
    sums = []
    for size in sizes:
        acc = np.zeros((d, d), dtype=np.complex128)
        for lo in range(0, size, _BATCH):
            N = min(_BATCH, size - lo)
            if method == "sampled":
                v = np.zeros((N, d), dtype=np.complex128)
                v[:, 0] = 1
                for _ in range(layers):
                    v = hadamard_all(v * _diag_batch(N, n, m, q, rng, ideal))
                acc += v.T @ v.conj()
            else:
                X = np.zeros((N, d, d), dtype=np.complex128)
                X[:, 0, 0] = 1
                for _ in range(layers):
                    if ideal:
                        mask = np.broadcast_to(np.eye(d, dtype=bool), (N, d, d))
                    elif q <= 2:
                        mask = np.ones((N, d, d), dtype=bool)
                    else:
                        rows = _arch_rows(N, m, n, rng)
                        kernel = ~parity(rows[:, :, None] & np.arange(d)[None, None, :]).astype(bool).any(axis=1)
                        mask = kernel[:, xor]
                    X = Hm @ (mask * X) @ Hm
                acc += X.sum(axis=0)
        sums.append(acc)
    target = np.eye(d) / d
    value = trace_norm(sum(sums) / samples - target)
    per_batch = np.array([trace_norm(s / k - target) for s, k in zip(sums, sizes)])
    se = float(per_batch.std(ddof=1) / np.sqrt(batches)) if batches > 1 else 0.0
    return MomentReport(value, se, "monte_carlo",
                        {"n": n, "m": m, "q": q, "layers": layers, "samples": samples, "seed": seed},
                        {"estimator": method, "ideal": ideal})


def unitary_frame_potential(n: int, m: int | None, q: int, layers: int, t: int, samples: int,
                            rng: np.random.Generator, ideal: bool = False, identical: bool = False,
                            seed: int | None = None) -> MomentReport:
    """Estimate E |Tr(U^dag V)|^(2t) over independent pairs (Haar value t! for 2^n >= t)."""
    if samples < 2:
        raise ValueError("need at least two samples")
    m = default_m(n) if m is None else m
    vals = []
    for lo in range(0, samples, _BATCH):
        N = min(_BATCH, samples - lo)
        U = _unitary_batch(N, n, m, q, layers, rng, ideal)
        V = U if identical else _unitary_batch(N, n, m, q, layers, rng, ideal)
        tr = np.einsum("nij,nij->n", U.conj(), V)
        vals.append(np.abs(tr) ** (2 * t))
    vals = np.concatenate(vals)
    return MomentReport(float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(samples)), "monte_carlo",
                        {"n": n, "m": m, "q": q, "layers": layers, "t": t, "samples": samples, "seed": seed},
                        {"haar": math.factorial(t), "ideal": ideal})
