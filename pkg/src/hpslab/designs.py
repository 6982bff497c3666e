"""Exact and Monte-Carlo checks of the t-design behaviour of phase states.

A single random term exp(i theta Z^a), with a uniform in {0,1}^n and theta
uniform, has a diagonal t-th moment operator. Its entry at the tuple pair
(x, x') is

    E_a E_theta exp(i theta f(a)),  f(a) = sum_j (-1)^{<a,x_j>} - (-1)^{<a,x'_j>}.

This equals Pr_a[f(a) = 0] for continuous angles, or Pr_a[f(a) = 0 mod q]
for theta on the q-point grid. Terms are independent, so m terms raise each
entry to the m-th power. The second-largest entry (the largest over pairs
that are not permutations of each other) is the spectral gap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (EnsembleSpec, Statevector, _roots, inner_product, parity,
                   phase_table, sample_instance)
from .errors import TooLarge

GAP_GUARD_LOG2 = 30
ENUM_GUARD_LOG2 = 20
MOMENT_DIM_GUARD_LOG2 = 8
EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class MomentReport:
    value: float
    stderr: float
    method: str
    params: dict
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")
        if self.method == "exact" and self.stderr != 0:
            raise ValueError("exact reports carry zero stderr")

    def to_dict(self) -> dict:
        from . import __version__
        d = asdict(self)
        d["version"] = __version__
        return d


def _chi(n: int) -> np.ndarray:
    """chi[a, x] = (-1)^{<a, x>}."""
    idx = np.arange(1 << n)
    return 1 - 2 * parity(idx[:, None] & idx[None, :]).astype(np.int64)


def _is_zero(f: np.ndarray, q: int | None) -> np.ndarray:
    return f == 0 if q is None else np.mod(f, q) == 0


def canonical_pair(xs: Sequence[int], xs_prime: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Cancel strings shared by both tuples (with multiplicity), then sort each side."""
    left, right = list(xs), list(xs_prime)
    for v in list(left):
        if v in right:
            left.remove(v)
            right.remove(v)
    return tuple(sorted(left)), tuple(sorted(right))


def equivalent(xs: Sequence[int], xs_prime: Sequence[int]) -> bool:
    """True when one tuple is a permutation of the other."""
    return sorted(xs) == sorted(xs_prime)


def moment_entry(n: int, xs: Sequence[int], xs_prime: Sequence[int], q: int | None = None) -> Fraction:
    """Exact single-term moment entry; strings are integers in [0, 2^n)."""
    chi = _chi(n)
    f = chi[:, list(xs)].sum(axis=1) - chi[:, list(xs_prime)].sum(axis=1)
    return Fraction(int(_is_zero(f, q).sum()), 1 << n)


def _guard_gap(n: int, t: int):
    if 2 * n * t + n > GAP_GUARD_LOG2:
        raise TooLarge(f"2^(2nt+n) = 2^{2 * n * t + n} exceeds 2^{GAP_GUARD_LOG2}")


def moment_operator_diagonal(n: int, t: int, q: int | None = None) -> dict[tuple[tuple[int, ...], tuple[int, ...]], Fraction]:
    """All diagonal entries, keyed by ordered tuple pairs (x, x')."""
    _guard_gap(n, t)
    chi = _chi(n)
    tuples = list(itertools.product(range(1 << n), repeat=t))
    S = chi[:, np.array(tuples, dtype=np.int64).reshape(len(tuples), t)].sum(axis=2).T
    out = {}
    den = 1 << n
    for i, xs in enumerate(tuples):
        counts = _is_zero(S[i][None, :] - S, q).sum(axis=1)
        for j, xp in enumerate(tuples):
            out[(xs, xp)] = Fraction(int(counts[j]), den)
    return out


def spectral_gap(n: int, t: int, q: int | None = None) -> MomentReport:
    """Largest entry over non-equivalent pairs; ``q=None`` means continuous angles."""
    _guard_gap(n, t)
    chi = _chi(n)
    reps = list(itertools.combinations_with_replacement(range(1 << n), t))
    S = chi[:, np.array(reps, dtype=np.int64).reshape(len(reps), t)].sum(axis=2).T
    best, arg = -1, None
    for i in range(len(reps)):
        counts = _is_zero(S[i][None, :] - S, q).sum(axis=1)
        counts[i] = -1
        j = int(np.argmax(counts))
        if counts[j] > best:
            best, arg = int(counts[j]), (reps[i], reps[j])
    if arg is None:
        exact = Fraction(0)
    else:
        exact = Fraction(best, 1 << n)
    return MomentReport(float(exact), 0.0, "exact", {"n": n, "t": t, "q": q if q is not None else "continuous"},
                        {"exact": str(exact), "argmax": [list(arg[0]), list(arg[1])] if arg else None,
                         "bound": 1 - 1 / (2 * t)})


def sufficient_m(n: int, t: int, epsilon: float) -> int:
    """ceil(2t (2nt + ln(1/epsilon))), natural logarithm."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    return math.ceil(2 * t * (2 * n * t + math.log(1 / epsilon)))


def amplification_holds(n: int, t: int, epsilon: float, m: int) -> bool:
    """(1 - 1/(2t))^m 2^(2nt) <= epsilon in exact rational arithmetic."""
    eps = Fraction(str(epsilon))
    return (1 - Fraction(1, 2 * t)) ** m * 2 ** (2 * n * t) <= eps


def haar_moment(d: int, t: int) -> np.ndarray:
    """Pi_sym / binom(d + t - 1, t) on (C^d)^{(x) t}."""
    D = d**t
    idx = np.array(list(itertools.product(range(d), repeat=t)), dtype=np.int64).reshape(D, t)
    weights = d ** np.arange(t - 1, -1, -1)
    P = np.zeros((D, D))
    for perm in itertools.permutations(range(t)):
        P[idx[:, list(perm)] @ weights, np.arange(D)] += 1
    P /= math.factorial(t)
    return P / math.comb(d + t - 1, t)


def trace_norm(H: np.ndarray) -> float:
    lam = np.linalg.eigvalsh(H)
    lam[np.abs(lam) < EIG_FLOOR] = 0.0
    return float(np.abs(lam).sum())


def _moment_product(n: int, m: int, q: int | None, t: int) -> np.ndarray:
    chi = _chi(n)
    d = 1 << n
    tuples = np.array(list(itertools.product(range(d), repeat=t)), dtype=np.int64).reshape(d**t, t)
    S = chi[:, tuples].sum(axis=2).T
    rho = np.empty((d**t, d**t))
    for i in range(d**t):
        rho[i] = _is_zero(S[i][None, :] - S, q).mean(axis=1)
    return rho**m / d**t


def _moment_enumerate(n: int, m: int, q: int, t: int) -> np.ndarray:
    d = 1 << n
    idx = np.arange(d)
    K = np.array(list(itertools.product(range(q), repeat=m)), dtype=np.int64).reshape(q**m, m)
    roots = _roots(q)
    rho = np.zeros((d**t, d**t), dtype=np.complex128)
    total = 0
    for code in range(1 << (n * m)):
        rows = np.array([(code >> (n * (m - 1 - i))) & ((1 << n) - 1) for i in range(m)], dtype=np.int64)
        signs = 1 - 2 * parity(rows[:, None] & idx[None, :]).astype(np.int64)
        psi = roots[np.mod(K @ signs, 2 * q)] / np.sqrt(d)
        big = psi
        for _ in range(t - 1):
            big = np.einsum("bi,bj->bij", big, psi).reshape(len(psi), -1)
        rho += big.T @ big.conj()
        total += len(psi)
    return rho / total


def state_design_distance_exact(n: int, m: int, q: int | None, t: int, method: str = "product") -> MomentReport:
    """Trace distance between the ensemble's t-th moment and the Haar moment.

    ``method="product"`` uses independence of terms (entry^m); ``"enumerate"``
    averages over every key explicitly and is limited to 2^(nm) q^m <= 2^20.
    """
    if n * t > MOMENT_DIM_GUARD_LOG2:
        raise TooLarge(f"moment dimension 2^{n * t} exceeds 2^{MOMENT_DIM_GUARD_LOG2}")
    if method == "product":
        rho = _moment_product(n, m, q, t)
    elif method == "enumerate":
        if q is None:
            raise ValueError("enumeration needs a finite q")
        if n * m + m * math.log2(q) > ENUM_GUARD_LOG2:
            raise TooLarge(f"2^(nm) q^m exceeds 2^{ENUM_GUARD_LOG2}")
        rho = _moment_enumerate(n, m, q, t)
    else:
        raise ValueError(f"unknown method {method!r}")
    dist = trace_norm(rho - haar_moment(1 << n, t))
    return MomentReport(dist, 0.0, "exact", {"n": n, "m": m, "q": q if q is not None else "continuous", "t": t},
                        {"method": method, "bound_eps_plus": 4 * t * t / 2**n})


def _mean_report(vals: np.ndarray, params: dict, extra: dict | None = None) -> MomentReport:
    se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return MomentReport(float(vals.mean()), se, "monte_carlo", params, extra or {})


def frame_potential_mc(spec: EnsembleSpec, t: int, samples: int, rng: np.random.Generator,
                       seed: int | None = None) -> MomentReport:
    """Estimate E |<Phi|Phi'>|^(2t) over independent key pairs."""
    if samples < 2:
        raise ValueError("need at least two samples")
    vals = np.empty(samples)
    for i in range(samples):
        a = sample_instance(spec, rng)
        b = sample_instance(spec, rng)
        vals[i] = abs(inner_product(a, b)) ** (2 * t)
    return _mean_report(vals, {"n": spec.n, "m": spec.m, "q": spec.q, "t": t, "samples": samples, "seed": seed},
                        {"haar": 1 / math.comb(2**spec.n + t - 1, t)})


def overlap_tail_probe(n: int, m: int, q: int, t: int, target: Statevector, trials: int,
                       rng: np.random.Generator, threshold: float | None = None) -> float:
    """Fraction of sampled keys with |<target|Phi>|^2 >= threshold (default 2^(-n/8))."""
    if threshold is None:
        threshold = 2 ** (-n / 8)
    spec = EnsembleSpec(n, m, q)
    roots = _roots(q)
    hits = 0
    for _ in range(trials):
        inst = sample_instance(spec, rng)
        amps = roots[phase_table(inst.arch, inst.angles)] * 2 ** (-n / 2)
        hits += abs(np.vdot(target.amps, amps)) ** 2 >= threshold
    return hits / trials
