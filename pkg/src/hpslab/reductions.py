"""Re-randomization of keys and the hidden-ensemble embedding sampler.

* Architecture: A -> A R with R uniform in GL(n, Z2). The relabeling
  |x> -> |R^{-1} x> maps the old state onto the new one.
* Angles: k -> k + pad (mod q). The pad is a uniform one-time pad, applied as
  an extra diagonal.
* Embedding: M = P [[A, 0], [B, C]] R. The rows of P X are X[perm], B is
  k x n, C is k x l, and R is uniform in GL(n + l, Z2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import gf2
from .core import AngleVector, HpsInstance
from .gf2 import BitMatrix


def rerandomize_architecture(inst: HpsInstance, rng: np.random.Generator,
                             R: BitMatrix | None = None) -> tuple[HpsInstance, BitMatrix]:
    """Return ``(A R, theta)`` and ``R``; pass ``R`` to fix the randomizer."""
    if R is None:
        R = gf2.sample_gl(inst.n, rng)
    return HpsInstance(inst.arch @ R, inst.angles), R


def pull_back_architecture(answer: HpsInstance, R: BitMatrix) -> HpsInstance:
    """Map a key for the re-randomized instance back to the original basis."""
    return HpsInstance(answer.arch @ gf2.invert(R), answer.angles)


def rerandomize_angles(inst: HpsInstance, rng: np.random.Generator,
                       pad: AngleVector | None = None) -> tuple[HpsInstance, AngleVector]:
    if pad is None:
        pad = AngleVector(inst.q, tuple(rng.integers(0, inst.q, size=inst.m).tolist()))
    return HpsInstance(inst.arch, inst.angles + pad), pad


@dataclass(frozen=True)
class EmbeddingSpec:
    k: int
    l: int
    base: HpsInstance

    def __post_init__(self):
        if self.k < 0 or self.l < 0:
            raise ValueError("k and l must be non-negative")


class Embedding(NamedTuple):
    M: BitMatrix
    perm: np.ndarray
    R: BitMatrix
    extra_angles: AngleVector
    inst: HpsInstance
    BC: BitMatrix


def hidden_ensemble_embed(spec: EmbeddingSpec, rng: np.random.Generator, *,
                          perm: Sequence[int] | None = None, R: BitMatrix | None = None,
                          BC: BitMatrix | None = None,
                          extra_angles: AngleVector | None = None) -> Embedding:
    """Sample the embedding; keyword arguments pin the individual secrets.

    The returned key's state equals
    U_R exp(i sum_j phi_j Z^{(B|C)_j}) (|Phi_theta^A> (x) |+^l>).
    """
    base, k, l = spec.base, spec.k, spec.l
    m, n = base.m, base.n
    if BC is None:
        BC = gf2.sample_uniform(k, n + l, rng)
    if extra_angles is None:
        extra_angles = AngleVector(base.q, tuple(rng.integers(0, base.q, size=k).tolist()))
    if perm is None:
        perm = rng.permutation(m + k)
    perm = np.asarray(perm, dtype=np.int64)
    if R is None:
        R = gf2.sample_gl(n + l, rng)
    top = np.hstack([base.arch.bits(), np.zeros((m, l), dtype=np.uint8)])
    X = np.vstack([top, BC.bits()]).reshape(m + k, n + l)
    M = BitMatrix.from_bits(X[perm]) @ R
    angles = AngleVector(base.q, base.angles.ks + extra_angles.ks).permuted(perm)
    return Embedding(M, perm, R, extra_angles, HpsInstance(M, angles), BC)


class TwoSampleResult(NamedTuple):
    mean_a: float
    mean_b: float
    difference: float
    stderr: float
    p_value: float


def two_sample_discriminator(sample_a: Callable[[np.random.Generator], object],
                             sample_b: Callable[[np.random.Generator], object],
                             statistic: Callable[[object], float], draws: int,
                             rng: np.random.Generator, permutations: int = 1000) -> TwoSampleResult:
    """Compare a scalar statistic on two samplers with a permutation test."""
    a = np.array([statistic(sample_a(rng)) for _ in range(draws)], dtype=float)
    b = np.array([statistic(sample_b(rng)) for _ in range(draws)], dtype=float)
    diff = a.mean() - b.mean()
    se = float(np.sqrt(a.var(ddof=1) / draws + b.var(ddof=1) / draws)) if draws > 1 else float("inf")
    pooled = np.concatenate([a, b])
    hits = 0
    for _ in range(permutations):
        rng.shuffle(pooled)
        hits += abs(pooled[:draws].mean() - pooled[draws:].mean()) >= abs(diff) - 1e-15
    return TwoSampleResult(float(a.mean()), float(b.mean()), float(diff), se, (hits + 1) / (permutations + 1))
