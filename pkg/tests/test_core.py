import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from hpslab import gf2
from hpslab.core import (AngleVector, EnsembleSpec, HpsInstance, Statevector, apply_diagonal,
                         apply_linear_permutation, apply_pauli_z_mask, build_statevector, canonicalize,
                         fidelity_verify, haar_random_state, inner_product, measure, phase_at,
                         phase_table, probabilities, sample_instance, walsh_hadamard)
from hpslab.errors import DimensionMismatch, SingularMatrix, TooManyQubits
from hpslab.gf2 import BitMatrix

from oracles import dense_state, kron_all, H


def random_instance(rng, n, m, q):
    return sample_instance(EnsembleSpec(n, m, q), rng)


def test_angle_vector_contract():
    a = AngleVector(8, (1, 7))
    assert (a + AngleVector(8, (7, 2))).ks == (0, 1)
    assert np.allclose(a.thetas(), [np.pi / 4, 7 * np.pi / 4])
    with pytest.raises(ValueError):
        AngleVector(4, (4,))
    with pytest.raises(DimensionMismatch):
        HpsInstance(BitMatrix.identity(2), AngleVector(4, (1,)))


def test_instance_json_roundtrip():
    inst = HpsInstance.make(["0101", "1100"], [3, 5], q=8)
    assert HpsInstance.from_json(inst.to_json()) == inst
    assert inst.to_dict() == {"n": 4, "m": 2, "q": 8, "arch": ["0101", "1100"], "ks": [3, 5]}


def test_phase_at_examples():
    empty = HpsInstance(BitMatrix.zeros(0, 3), AngleVector(5, ()))
    assert all(phase_at(empty, [a, b, c]) == 0 for a in (0, 1) for b in (0, 1) for c in (0, 1))
    one = HpsInstance.make(["1"], [1], q=4)
    assert phase_at(one, [0]) == 1
    assert phase_at(one, [1]) == 7
    two = HpsInstance.make(["11"], [1], q=8)
    assert phase_at(two, "00") == 1
    assert phase_at(two, "01") == 15
    with pytest.raises(DimensionMismatch):
        phase_at(two, [1])


def test_phase_table_matches_pointwise():
    rng = np.random.default_rng(0)
    inst = random_instance(rng, 5, 9, 7)
    table = phase_table(inst.arch, inst.angles)
    for x in range(32):
        bits = [(x >> (4 - j)) & 1 for j in range(5)]
        assert table[x] == phase_at(inst, bits)


def test_walsh_hadamard_definition():
    rng = np.random.default_rng(1)
    v = rng.integers(-5, 5, 16)
    direct = [sum(v[a] * (-1) ** bin(a & x).count("1") for a in range(16)) for x in range(16)]
    assert walsh_hadamard(v).tolist() == direct


def test_build_statevector_examples():
    plus = build_statevector(HpsInstance(BitMatrix.zeros(0, 2), AngleVector(3, ())))
    assert np.allclose(plus.amps, 0.5)
    s = build_statevector(HpsInstance.make(["1"], [1], q=4))
    assert np.allclose(s.amps, np.array([1j, -1j]) / np.sqrt(2), atol=1e-12)
    s = build_statevector(random_instance(np.random.default_rng(2), 6, 10, 16))
    assert abs(s.norm() - 1) < 1e-12


@pytest.mark.parametrize("n,m,q", [(1, 3, 4), (3, 5, 8), (4, 2, 5), (5, 12, 16)])
def test_build_statevector_matches_dense_expm(n, m, q):
    rng = np.random.default_rng(n * 100 + m)
    inst = random_instance(rng, n, m, q)
    ref = dense_state(inst.arch.to_strings(), list(inst.angles.ks), q, n)
    assert np.allclose(build_statevector(inst).amps, ref, atol=1e-10)


def test_statevector_cap():
    with pytest.raises(TooManyQubits):
        build_statevector(HpsInstance(BitMatrix.zeros(0, 21), AngleVector(2, ())))
    with pytest.raises(TooManyQubits):
        haar_random_state(21, np.random.default_rng(0))


def test_phase_recovery_from_amplitudes():
    rng = np.random.default_rng(3)
    for _ in range(20):
        inst = random_instance(rng, 6, 8, 8)
        s = build_statevector(inst)
        ang = np.angle(s.amps / s.amps[0])
        table = phase_table(inst.arch, inst.angles)
        expected = 2 * np.pi * (table - table[0]) / inst.q
        err = np.angle(np.exp(1j * (ang - expected)))
        assert np.max(np.abs(err)) < 1e-9
        assert np.allclose(np.abs(s.amps), 2 ** (-3), atol=1e-10)


def test_inner_product_examples():
    rng = np.random.default_rng(4)
    a = random_instance(rng, 7, 9, 8)
    assert abs(inner_product(a, a) - 1) < 1e-10
    # theta = 0 vs theta = pi/2 on one qubit: overlap cos(pi/2) = 0
    z = HpsInstance.make(["1"], [0], q=4)
    assert abs(inner_product(z, HpsInstance.make(["1"], [1], q=4))) < 1e-10
    # theta = pi is -1 times the identity, a global sign
    assert abs(inner_product(z, HpsInstance.make(["1"], [2], q=4)) + 1) < 1e-10


def test_inner_product_matches_vdot_and_conjugates():
    rng = np.random.default_rng(5)
    for n in (1, 4, 9, 17):
        a, b = random_instance(rng, n, 2 * n, 8), random_instance(rng, n, n + 3, 8)
        ref = np.vdot(build_statevector(a).amps, build_statevector(b).amps)
        assert abs(inner_product(a, b) - ref) < 1e-10
        assert abs(inner_product(a, b) - np.conj(inner_product(b, a))) < 1e-12
    with pytest.raises(DimensionMismatch):
        inner_product(random_instance(rng, 2, 1, 4), random_instance(rng, 3, 1, 4))


def test_inner_product_mixed_modulus():
    a = HpsInstance.make(["1"], [1], q=4)
    b = HpsInstance.make(["1"], [2], q=8)
    assert abs(inner_product(a, b) - 1) < 1e-12


def test_inner_product_random_pairs_mean():
    rng = np.random.default_rng(6)
    vals = np.array([abs(inner_product(random_instance(rng, 10, 40, 8), random_instance(rng, 10, 40, 8))) ** 2
                     for _ in range(3000)])
    se = vals.std(ddof=1) / np.sqrt(len(vals))
    assert abs(vals.mean() - 2**-10) < 3 * se + 1e-6


def test_fidelity_verify():
    rng = np.random.default_rng(7)
    a = random_instance(rng, 5, 6, 8)
    v = fidelity_verify(a, a)
    assert v.accept and abs(v.fidelity - 1) < 1e-12
    perm = rng.permutation(6)
    b = HpsInstance(a.arch.take_rows(perm), a.angles.permuted(perm))
    assert fidelity_verify(b, a).accept
    v = fidelity_verify(HpsInstance.make(["1"], [0], q=4), HpsInstance.make(["1"], [1], q=4))
    assert not v.accept and v.fidelity < 1e-20


def test_fidelity_verify_probabilistic_mode():
    a = HpsInstance.make(["1"], [0], q=8)
    b = HpsInstance.make(["1"], [1], q=8)
    f = fidelity_verify(a, b).fidelity
    rng = np.random.default_rng(8)
    acc = np.mean([fidelity_verify(a, b, rng).accept for _ in range(10_000)])
    assert abs(acc - f) < 4 * np.sqrt(f * (1 - f) / 10_000)


def test_duplicate_rows_cancelling_verify():
    a = HpsInstance.make(["110"], [3], q=8)
    b = HpsInstance.make(["110", "011", "011"], [3, 2, 6], q=8)
    assert fidelity_verify(b, a).accept


def test_apply_diagonal():
    rng = np.random.default_rng(9)
    inst = random_instance(rng, 5, 7, 8)
    s = build_statevector(inst)
    assert np.array_equal(apply_diagonal(s, inst.arch, AngleVector.zeros(8, 7)).amps, s.amps)
    phi = AngleVector(8, tuple(rng.integers(0, 8, 7).tolist()))
    out = apply_diagonal(s, inst.arch, phi)
    assert np.allclose(out.amps, build_statevector(HpsInstance(inst.arch, inst.angles + phi)).amps, atol=1e-12)
    assert abs(out.norm() - 1) < 1e-12
    with pytest.raises(DimensionMismatch):
        apply_diagonal(s, BitMatrix.identity(4), AngleVector.zeros(8, 4))


def test_apply_pauli_z_mask():
    rng = np.random.default_rng(10)
    s = haar_random_state(4, rng)
    assert np.array_equal(apply_pauli_z_mask(s, [0, 0, 0, 0]).amps, s.amps)
    assert np.allclose(apply_pauli_z_mask(apply_pauli_z_mask(s, [1, 0, 1, 1]), [1, 0, 1, 1]).amps, s.amps)
    out = apply_pauli_z_mask(Statevector.plus(2), [1, 0])
    assert np.allclose(out.amps, [0.5, 0.5, -0.5, -0.5])
    assert np.allclose(out.amps, kron_all([H, H]) @ np.eye(4)[2])
    with pytest.raises(DimensionMismatch):
        apply_pauli_z_mask(s, [1])


def test_apply_linear_permutation():
    rng = np.random.default_rng(11)
    s = haar_random_state(4, rng)
    assert np.array_equal(apply_linear_permutation(s, BitMatrix.identity(4)).amps, s.amps)
    R = gf2.sample_gl(4, rng)
    assert np.allclose(apply_linear_permutation(Statevector.plus(4), R).amps, 0.25)
    with pytest.raises(SingularMatrix):
        apply_linear_permutation(s, BitMatrix.from_strings(["1000", "1000", "0010", "0001"]))


def test_linear_permutation_moves_basis_states():
    rng = np.random.default_rng(12)
    R = gf2.sample_gl(3, rng)
    Rinv = gf2.invert(R)
    for x in range(8):
        bits = [(x >> (2 - j)) & 1 for j in range(3)]
        y = int("".join(map(str, gf2.matvec(Rinv, bits))), 2)
        out = apply_linear_permutation(Statevector.basis(3, x), R)
        assert out.amps[y] == 1


def test_conjugation_identity_architecture():
    rng = np.random.default_rng(13)
    for _ in range(50):
        n = int(rng.integers(1, 9))
        inst = random_instance(rng, n, int(rng.integers(0, 2 * n + 1)), 8)
        R = gf2.sample_gl(n, rng)
        lhs = apply_linear_permutation(build_statevector(inst), R)
        rhs = build_statevector(HpsInstance(inst.arch @ R, inst.angles))
        assert np.linalg.norm(lhs.amps - rhs.amps) <= 1e-9


def test_measure_examples():
    rng = np.random.default_rng(14)
    counts = measure(Statevector.plus(3), "computational", rng, 10_000)
    assert counts.sum() == 10_000
    assert chisquare(counts).pvalue > 1e-3
    assert measure(Statevector.plus(3), "x_basis", rng, 100)[0] == 100
    for k in range(8):
        s = build_statevector(HpsInstance.make(["1"], [k], q=8))
        theta = 2 * np.pi * k / 8
        p = measure(s, "x_basis", rng, 10_000)[0] / 10_000
        assert abs(p - np.cos(theta) ** 2) < 4 * np.sqrt(0.25 / 10_000)
        py = probabilities(s, "y_basis")[0]
        assert abs(py - (1 - np.sin(2 * theta)) / 2) < 1e-12
    with pytest.raises(ValueError):
        measure(Statevector.plus(1), "x_basis", rng, 0)


def test_sample_instance_modes():
    rng = np.random.default_rng(15)
    A = BitMatrix.from_strings(["101", "011"])
    th = AngleVector(4, (1, 3))
    inst = sample_instance(EnsembleSpec(3, 2, 4, "fixed", "fixed", A, th), rng)
    assert inst == HpsInstance(A, th)
    ks = np.array([sample_instance(EnsembleSpec(2, 1, 8), rng).angles.ks[0] for _ in range(10_000)])
    assert chisquare(np.bincount(ks, minlength=8)).pvalue > 1e-3
    for _ in range(200):
        assert gf2.rank(sample_instance(EnsembleSpec(4, 6, 8, "full_rank"), rng).arch) == 4
    with pytest.raises(DimensionMismatch):
        EnsembleSpec(3, 2, 4, "fixed", arch=BitMatrix.identity(3))


def test_haar_random_state():
    rng = np.random.default_rng(16)
    assert abs(haar_random_state(6, rng).norm() - 1) < 1e-12
    n = 5
    ov = np.array([abs(haar_random_state(n, rng).vdot(haar_random_state(n, rng))) ** 2 for _ in range(4000)])
    assert abs(ov.mean() - 2**-n) < 4 * ov.std() / np.sqrt(len(ov))
    a0 = np.array([abs(haar_random_state(n, rng).amps[0]) ** 2 for _ in range(4000)])
    assert abs(a0.mean() - 2**-n) < 4 * a0.std() / np.sqrt(len(a0))


def test_statevector_bytes_roundtrip():
    s = haar_random_state(3, np.random.default_rng(17))
    data = s.to_bytes()
    assert len(data) == 16 * 8
    assert np.array_equal(Statevector.from_bytes(3, data).amps, s.amps)
    assert np.frombuffer(data[:8], "<f8")[0] == s.amps[0].real


def test_canonicalize_preserves_state():
    rng = np.random.default_rng(18)
    for _ in range(50):
        inst = random_instance(rng, 3, 8, 8)
        c = canonicalize(inst)
        assert fidelity_verify(c, inst).accept
        assert c.m <= inst.m
        assert c.arch.row_ints() == sorted(set(c.arch.row_ints()))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10), st.sampled_from([2, 3, 4, 8, 16]), st.integers(0, 2**32 - 1))
def test_one_time_pad_exact_in_phase_integers(n, m, q, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, m, q)
    phi = AngleVector(q, tuple(rng.integers(0, q, m).tolist()))
    lhs = phase_table(inst.arch, inst.angles + phi)
    rhs = phase_table(inst.arch, inst.angles) + phase_table(inst.arch, phi)
    assert np.array_equal(np.mod(lhs, q), np.mod(rhs, q))
    s = build_statevector(inst)
    assert np.allclose(np.abs(s.amps), 2 ** (-n / 2), atol=1e-10)
