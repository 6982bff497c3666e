"""Desk-scale simulations of protocols built on phase states.

* One-way state generator: key -> |Phi_key>, verified by projecting onto |Phi_key'>.
* Trapdoor function: eval state |xi> = U|+^n>, image Z^x |xi> = U H^n |x>, so
  applying U^dag and then H^n gives back |x> exactly.
* Public-key encryption: the public key is a stock of eval-state copies, each
  usable once; encryption is the trapdoor evaluation on one copy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attacks import brute_force_hypothesis
from .core import (EnsembleSpec, HpsInstance, Statevector, apply_diagonal, apply_pauli_z_mask,
                   bits_to_int, build_statevector, hadamard_all, int_to_bits, sample_instance)
from .errors import DimensionMismatch, PublicKeyExhausted


def owsg_keygen(n: int, m: int, q: int, rng: np.random.Generator) -> HpsInstance:
    return sample_instance(EnsembleSpec(n, m, q), rng)


def owsg_stategen(key: HpsInstance) -> Statevector:
    return build_statevector(key)


def owsg_verify(key: HpsInstance, state: Statevector, rng: np.random.Generator | None = None) -> bool:
    """Project ``state`` onto |Phi_key>; threshold mode when ``rng`` is None."""
    if key.n != state.n:
        raise DimensionMismatch(f"key on {key.n} qubits, state on {state.n}")
    f = min(1.0, abs(build_statevector(key).vdot(state)) ** 2)
    if rng is None:
        return f >= 1 - 1e-9
    return bool(rng.random() < f)


@dataclass(frozen=True)
class Trapdoor:
    td: HpsInstance


@dataclass(frozen=True)
class CipherState:
    state: Statevector
    n: int
    q: int

    def header(self) -> dict:
        return {"n": self.n, "q": self.q, **self.state.header()}


def qtf_gen_trap(n: int, m: int, q: int, rng: np.random.Generator) -> Trapdoor:
    return Trapdoor(sample_instance(EnsembleSpec(n, m, q), rng))


def qtf_gen_eval(td: Trapdoor) -> Statevector:
    return build_statevector(td.td)


def qtf_eval(eval_state: Statevector, x, q: int = 0) -> CipherState:
    return CipherState(apply_pauli_z_mask(eval_state, x), eval_state.n, q)


def qtf_invert(td: Trapdoor, c: CipherState, rng: np.random.Generator | None = None) -> np.ndarray:
    """Undo the diagonal, apply H^n and read out the computational basis.

    With ``rng`` the readout is sampled; otherwise the most likely outcome is
    returned (for a matching trapdoor the outcome is certain either way).
    """
    inst = td.td
    if c.state.n != inst.n:
        raise DimensionMismatch(f"ciphertext on {c.state.n} qubits, trapdoor on {inst.n}")
    undone = apply_diagonal(c.state, inst.arch, -inst.angles)
    p = np.abs(hadamard_all(undone.amps)) ** 2
    p /= p.sum()
    out = int(rng.choice(p.size, p=p)) if rng is not None else int(np.argmax(p))
    return int_to_bits(out, inst.n)


@dataclass
class PublicKeyCopy:
    state: Statevector
    consumed: bool = False


@dataclass
class PublicKey:
    """A stock of single-use public-key copies."""

    copies: list[PublicKeyCopy] = field(default_factory=list)
    q: int = 0

    def remaining(self) -> int:
        return sum(not c.consumed for c in self.copies)

    def take(self) -> PublicKeyCopy:
        for c in self.copies:
            if not c.consumed:
                return c
        raise PublicKeyExhausted("all public-key copies have been used")


def pke_keygen(n: int, m: int, q: int, copies: int, rng: np.random.Generator) -> tuple[Trapdoor, PublicKey]:
    sk = qtf_gen_trap(n, m, q, rng)
    ev = qtf_gen_eval(sk)
    return sk, PublicKey([PublicKeyCopy(ev) for _ in range(copies)], q)


def pke_encrypt(pk: PublicKey | PublicKeyCopy, message) -> CipherState:
    """Encrypt with one unused copy; the copy is consumed."""
    copy = pk.take() if isinstance(pk, PublicKey) else pk
    if copy.consumed:
        raise PublicKeyExhausted("this public-key copy was already used")
    copy.consumed = True
    return qtf_eval(copy.state, message, pk.q if isinstance(pk, PublicKey) else 0)


def pke_decrypt(sk: Trapdoor, c: CipherState) -> np.ndarray:
    return qtf_invert(sk, c)


def eavesdrop_demo(n: int, m: int, q: int, message, rng: np.random.Generator, copies: int = 2) -> dict:
    """Eve spends one public-key copy on brute force, then decrypts Bob's ciphertext."""
    sk, pk = pke_keygen(n, m, q, copies, rng)
    stolen = pk.take()
    stolen.consumed = True
    recovered = brute_force_hypothesis(stolen.state, n, m, q)
    c = pke_encrypt(pk, message)
    eve = qtf_invert(Trapdoor(recovered.instance), c)
    bob = pke_decrypt(sk, c)
    msg = np.asarray([int(b) for b in message], dtype=np.uint8)
    return {
        "secret_key": sk.td.to_dict(),
        "recovered_key": recovered.instance.to_dict(),
        "recovered_fidelity": recovered.fidelity,
        "message": "".join(map(str, msg)),
        "bob_decrypts": "".join(map(str, bob)),
        "eve_decrypts": "".join(map(str, eve)),
        "eve_success": bool(np.array_equal(eve, msg)),
        "bob_success": bool(np.array_equal(bob, msg)),
        "copies_left": pk.remaining(),
        "message_int": bits_to_int(msg),
    }
