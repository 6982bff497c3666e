"""Half/half entanglement of phase states.

Write x = k || l with k the first n/2 qubits. The diagonal phases arranged as
the matrix Lambda[k, l] give the state 2^{-n/2} sum Lambda[k,l] |k>|l>. The
reduced state on the first half is therefore rho_A = 2^{-n} Lambda Lambda^dag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import EnsembleSpec, HpsInstance, Statevector, _roots, phase_table, sample_instance
from .designs import MomentReport
from .errors import InvalidQ, OddQubitCount, TooLarge

MAX_HALF = 12
EIG_FLOOR = 1e-12
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PartitionMatrix:
    half: int
    entries: np.ndarray


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    dim: int
    entries: np.ndarray

    def is_valid(self, tol: float = 1e-10) -> bool:
        H = self.entries
        if not np.allclose(H, H.conj().T, atol=tol):
            return False
        if abs(np.trace(H) - 1) > tol:
            return False
        return bool(np.linalg.eigvalsh(H).min() >= -tol)


def partition_matrix(inst: HpsInstance, max_half: int = MAX_HALF) -> PartitionMatrix:
    if inst.n % 2:
        raise OddQubitCount(f"n={inst.n} has no half/half cut")
    half = inst.n // 2
    if half > max_half:
        raise TooLarge(f"half size {half} exceeds {max_half}")
    lam = _roots(inst.q)[phase_table(inst.arch, inst.angles)].reshape(1 << half, 1 << half)
    return PartitionMatrix(half, lam)


def reduced_density(inst: HpsInstance, max_half: int = MAX_HALF) -> DensityMatrix:
    lam = partition_matrix(inst, max_half).entries
    return DensityMatrix(lam.shape[0], lam @ lam.conj().T / 2**inst.n)


def partial_trace_second_half(state: Statevector) -> DensityMatrix:
    """Trace out the last n/2 qubits of a pure state."""
    if state.n % 2:
        raise OddQubitCount(f"n={state.n} has no half/half cut")
    d = 1 << (state.n // 2)
    psi = state.amps.reshape(d, d)
    return DensityMatrix(d, psi @ psi.conj().T)


def entanglement_entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits."""
    lam = np.linalg.eigvalsh(rho.entries)
    lam = lam[lam >= EIG_FLOOR]
    return float(max(0.0, -(lam * np.log2(lam)).sum()))


class EntropyBounds(NamedTuple):
    lower: float
    upper: float
    entropy: float
    rank: int
    structural: float


def entropy_bounds(inst: HpsInstance) -> EntropyBounds:
    """-log2 ||rho||_F <= S <= log2 rank, plus the term-count bound S <= 4m."""
    rho = reduced_density(inst)
    lam = np.linalg.eigvalsh(rho.entries)
    rank = int((lam > RANK_TOL * rho.dim).sum())
    kept = lam[lam >= EIG_FLOOR]
    entropy = float(max(0.0, -(kept * np.log2(kept)).sum()))
    lower = float(max(0.0, -np.log2(np.linalg.norm(rho.entries))))
    upper = float(np.log2(rank)) if rank else 0.0
    return EntropyBounds(lower, upper, entropy, rank, 4.0 * inst.m)


def frobenius_bound(n: int, m: int) -> float:
    return 2 * 2 ** (-n / 2) + 0.75**m


def frobenius_second_moment(n: int, m: int, q: int, samples: int, rng: np.random.Generator,
                            seed: int | None = None) -> MomentReport:
    """Monte-Carlo estimate of E ||rho_A||_F^2 for uniform keys (needs q > 4)."""
    if q <= 4:
        raise InvalidQ(f"q={q}; the second-moment bound needs q > 4")
    spec = EnsembleSpec(n, m, q)
    vals = np.empty(samples)
    for i in range(samples):
        rho = reduced_density(sample_instance(spec, rng)).entries
        vals[i] = float(np.sum(np.abs(rho) ** 2))
    se = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return MomentReport(float(vals.mean()), se, "monte_carlo",
                        {"n": n, "m": m, "q": q, "samples": samples, "seed": seed},
                        {"bound": frobenius_bound(n, m)})
