import itertools

import numpy as np
import pytest

from hpslab import gf2
from hpslab.attacks import (brute_force_hypothesis, constant_statistic, distinguisher_harness,
                            enumerate_architectures, learn_angles_public_arch, snap_to_grid,
                            straightening_matrix, swap_test_statistic, x_all_zeros_statistic)
from hpslab.core import (AngleVector, EnsembleSpec, HpsInstance, build_statevector, fidelity_verify,
                         haar_random_state, sample_instance)
from hpslab.errors import DimensionMismatch, RankDeficient, TooLarge, TooManyTerms
from hpslab.gf2 import BitMatrix


def test_straightening_matrix():
    rng = np.random.default_rng(0)
    for m in range(0, 6):
        A = gf2.sample_full_rank(m, 6, rng)
        R = straightening_matrix(A)
        target = np.hstack([np.eye(m, dtype=np.uint8), np.zeros((m, 6 - m), np.uint8)])
        assert np.array_equal((A @ R).bits(), target)
    with pytest.raises(TooManyTerms):
        straightening_matrix(gf2.sample_uniform(4, 3, rng))
    with pytest.raises(RankDeficient):
        straightening_matrix(BitMatrix.from_strings(["110", "110"]))


def test_snap_to_grid():
    for q in (4, 8, 16):
        for k in range(q):
            two_theta = float(np.angle(np.exp(4j * np.pi * k / q)))
            j = snap_to_grid(two_theta + 0.01, q)
            assert (2 * j - 2 * k) % q == 0
    assert snap_to_grid(0.0, 8) == 0
    assert snap_to_grid(np.pi, 4) == 1


def test_learner_zero_angles():
    rng = np.random.default_rng(1)
    A = gf2.sample_full_rank(3, 5, rng)
    inst = HpsInstance(A, AngleVector.zeros(8, 3))
    got = learn_angles_public_arch(A, lambda: build_statevector(inst), 2000, rng, 8)
    assert fidelity_verify(HpsInstance(A, got), inst).accept


def test_learner_infinite_shots_full_grid():
    rng = np.random.default_rng(2)
    A = gf2.sample_full_rank(3, 4, rng)
    for ks in itertools.product(range(8), repeat=3):
        inst = HpsInstance(A, AngleVector(8, ks))
        got = learn_angles_public_arch(A, lambda: build_statevector(inst), 0, None, 8, infinite_shots=True)
        assert fidelity_verify(HpsInstance(A, got), inst).accept
        assert all((a - b) % 4 == 0 for a, b in zip(got.ks, ks))


def test_learner_sampled_mode():
    rng = np.random.default_rng(3)
    wins = 0
    for _ in range(100):
        inst = sample_instance(EnsembleSpec(6, 4, 8, "full_rank"), rng)
        got = learn_angles_public_arch(inst.arch, lambda: build_statevector(inst), 10_000, rng, 8)
        wins += fidelity_verify(HpsInstance(inst.arch, got), inst).accept
    assert wins >= 99


def test_learner_preconditions():
    rng = np.random.default_rng(4)
    with pytest.raises(TooManyTerms):
        learn_angles_public_arch(gf2.sample_uniform(4, 3, rng), lambda: None, 10, rng, 8)


def test_enumerate_architectures():
    all_ = list(enumerate_architectures(2, 2))
    assert len(all_) == 16
    assert all_[0][0] == [0, 0] and all_[-1][0] == [3, 3]
    assert len(list(enumerate_architectures(2, 2, "full_rank"))) == gf2.gl_size(2)
    assert len(list(enumerate_architectures(3, 0))) == 1


def test_brute_force_recovers_key():
    rng = np.random.default_rng(5)
    for _ in range(10):
        inst = sample_instance(EnsembleSpec(2, 2, 4), rng)
        res = brute_force_hypothesis(build_statevector(inst), 2, 2, 4)
        assert res.fidelity == pytest.approx(1.0)
        assert fidelity_verify(res.instance, inst).accept
        assert res.candidates == 16 * 16


def test_brute_force_first_maximum_wins():
    # the all-zero key is first in enumeration order and reproduces |+>|+>
    inst = HpsInstance.make(["00", "00"], [0, 0], q=4)
    res = brute_force_hypothesis(build_statevector(inst), 2, 2, 4)
    assert res.instance == inst


def test_brute_force_haar_and_inclusion_monotone():
    rng = np.random.default_rng(6)
    fids = []
    for _ in range(20):
        h = haar_random_state(2, rng)
        full = brute_force_hypothesis(h, 2, 2, 4)
        sub = brute_force_hypothesis(h, 2, 2, 4, arch_mode="full_rank")
        smaller = brute_force_hypothesis(h, 2, 1, 4)
        assert sub.fidelity <= full.fidelity + 1e-12
        assert smaller.fidelity <= full.fidelity + 1e-12
        fids.append(full.fidelity)
    assert max(fids) < 1
    with pytest.raises(TooLarge):
        brute_force_hypothesis(haar_random_state(4, rng), 4, 5, 8)
    with pytest.raises(DimensionMismatch):
        brute_force_hypothesis(haar_random_state(3, rng), 2, 1, 4)


def test_distinguisher_constant_and_swap():
    rng = np.random.default_rng(7)
    adv = distinguisher_harness(EnsembleSpec(4, 20, 8), 2, constant_statistic, 200, rng)
    assert adv.advantage == 0
    adv = distinguisher_harness(EnsembleSpec(4, 20, 8), 2, swap_test_statistic, 300, rng)
    assert adv.advantage <= 3 * adv.stderr + 1e-12


def test_distinguisher_x_basis_on_plus_state():
    rng = np.random.default_rng(8)
    adv = distinguisher_harness(EnsembleSpec(6, 0, 8), 1, x_all_zeros_statistic, 300, rng)
    assert adv.p_hps == 1.0
    assert adv.advantage > 0.9
