"""Key-recovery and distinguishing experiments.

Public-architecture learner. If A (m <= n, rank m) is known, pick R with
A R = (I_m | 0). Relabeling a copy by R turns it into the product state
(x)_j exp(i theta_j Z)|+> on the first m qubits. For one such qubit,

    P(X = +) = cos^2 theta,    P(Y = +) = (1 - sin 2 theta) / 2,

so 2 theta = atan2(1 - 2 P_y, 2 P_x - 1) fixes theta mod pi. A pi shift of
one term multiplies the state by -1, so theta mod pi is enough to verify.
"""

from __future__ import annotations

import itertools
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import gf2
from .core import (AngleVector, EnsembleSpec, HpsInstance, Statevector, _roots,
                   apply_linear_permutation, haar_random_state, measure, parity,
                   probabilities, sample_instance, build_statevector)
from .errors import DimensionMismatch, RankDeficient, TooLarge, TooManyTerms
from .gf2 import BitMatrix

BRUTE_FORCE_GUARD_LOG2 = 22


def straightening_matrix(A: BitMatrix) -> BitMatrix:
    """Invertible R with A R = (I_m | 0)."""
    if A.rows > A.cols:
        raise TooManyTerms(f"m={A.rows} exceeds n={A.cols}")
    if gf2.rank(A) < A.rows:
        raise RankDeficient(f"rank {gf2.rank(A)} < m={A.rows}")
    return gf2.invert(gf2.complete_to_basis(A))


def _qubit_plus_prob(p: np.ndarray, n: int, j: int) -> float:
    idx = np.arange(1 << n)
    return float(p[((idx >> (n - 1 - j)) & 1) == 0].sum())


def snap_to_grid(two_theta: float, q: int) -> int:
    """k in [0, q) whose 2*(2 pi k / q) is circularly closest to ``two_theta``; smallest k on ties."""
    ks = np.arange(q)
    diff = np.angle(np.exp(1j * (4 * np.pi * ks / q - two_theta)))
    return int(ks[np.argmin(np.round(np.abs(diff), 12))])


def learn_angles_public_arch(A: BitMatrix, oracle: Callable[[], Statevector], shots_per_angle: int,
                             rng: np.random.Generator | None, q: int,
                             infinite_shots: bool = False) -> AngleVector:
    """Recover angles for a known architecture from copies of the state.

    ``oracle()`` returns a fresh copy. Each basis uses one call, and measuring
    it with ``shots_per_angle`` shots stands in for that many copies. With
    ``infinite_shots`` the exact Born marginals replace sampling.
    """
    R = straightening_matrix(A)
    n, m = A.cols, A.rows
    marg = {}
    for basis in ("x_basis", "y_basis"):
        state = apply_linear_permutation(oracle(), R)
        if infinite_shots:
            p = probabilities(state, basis)
        else:
            p = measure(state, basis, rng, shots_per_angle) / shots_per_angle
        marg[basis] = [_qubit_plus_prob(p, n, j) for j in range(m)]
    ks = []
    for px, py in zip(marg["x_basis"], marg["y_basis"]):
        ks.append(snap_to_grid(float(np.arctan2(1 - 2 * py, 2 * px - 1)), q))
    return AngleVector(q, tuple(ks))


class BruteForceResult(NamedTuple):
    instance: HpsInstance
    fidelity: float
    candidates: int


def enumerate_architectures(n: int, m: int, arch_mode: str = "uniform"):
    """All m x n matrices in row-lexicographic order, optionally only full rank."""
    mask = (1 << n) - 1
    for code in range(1 << (n * m)):
        rows = [(code >> (n * (m - 1 - i))) & mask for i in range(m)]
        A = BitMatrix.from_row_ints(rows, n) if m else BitMatrix.zeros(0, n)
        if arch_mode == "full_rank" and gf2.rank(A) != min(m, n):
            continue
        yield rows, A


def brute_force_hypothesis(truth: Statevector, n: int, m: int, q: int, arch_mode: str = "uniform",
                           guard_log2: int = BRUTE_FORCE_GUARD_LOG2) -> BruteForceResult:
    """Exhaustive maximum-fidelity key over all (A, k); first maximum in enumeration order wins."""
    if truth.n != n:
        raise DimensionMismatch(f"state on {truth.n} qubits, search on {n}")
    if n * m + m * np.log2(q) > guard_log2:
        raise TooLarge(f"2^(nm) q^m exceeds 2^{guard_log2}")
    idx = np.arange(1 << n)
    K = np.array(list(itertools.product(range(q), repeat=m)), dtype=np.int64).reshape(q**m, m)
    roots = _roots(q)
    best_f, best, count = -1.0, None, 0
    for rows, A in enumerate_architectures(n, m, arch_mode):
        signs = 1 - 2 * parity(np.array(rows, dtype=np.int64).reshape(m, 1) & idx[None, :]).astype(np.int64)
        cands = roots[np.mod(K @ signs, 2 * q)] * 2 ** (-n / 2)
        fids = np.abs(cands.conj() @ truth.amps) ** 2
        j = int(np.argmax(fids))
        count += len(fids)
        if fids[j] > best_f + 1e-12:
            best_f, best = float(fids[j]), HpsInstance(A, AngleVector(q, tuple(int(v) for v in K[j])))
    if best is None:
        raise TooLarge("empty search space")
    return BruteForceResult(best, min(best_f, 1.0), count)


class Advantage(NamedTuple):
    advantage: float
    stderr: float
    p_hps: float
    p_haar: float


Statistic = Callable[[Sequence[Statevector], np.random.Generator], bool]


def distinguisher_harness(ensemble: EnsembleSpec, t_copies: int, statistic: Statistic, trials: int,
                          rng: np.random.Generator) -> Advantage:
    """|P(1 | phase state) - P(1 | Haar state)| with binomial standard error."""
    hps = haar = 0
    for _ in range(trials):
        s = build_statevector(sample_instance(ensemble, rng))
        hps += bool(statistic([s] * t_copies, rng))
        h = haar_random_state(ensemble.n, rng)
        haar += bool(statistic([h] * t_copies, rng))
    p1, p0 = hps / trials, haar / trials
    se = float(np.sqrt(p1 * (1 - p1) / trials + p0 * (1 - p0) / trials))
    return Advantage(abs(p1 - p0), se, p1, p0)


def swap_test_statistic(states: Sequence[Statevector], rng: np.random.Generator) -> bool:
    """Swap test on the first two copies; True when the ancilla reads 0 (symmetric)."""
    a, b = states[0], states[1]
    p0 = (1 + abs(a.vdot(b)) ** 2) / 2
    return bool(rng.random() < p0)


def x_all_zeros_statistic(states: Sequence[Statevector], rng: np.random.Generator) -> bool:
    """One X-basis shot on the first copy; True when every qubit reads +."""
    return bool(measure(states[0], "x_basis", rng, 1)[0] == 1)


def constant_statistic(states: Sequence[Statevector], rng: np.random.Generator) -> bool:
    return True
