"""Command-line entry point: ``hpslab <command> ...``.

Exit codes: 0 success, 1 domain error, 2 usage error. Instance-consuming
commands accept a bare instance JSON or any JSON object with an
``"instance"`` field, so ``gen | compile | entropy`` pipes work.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import HpsError

CSV_SCHEMA = "# hpslab-csv schema=1"


class UsageError(Exception):
    pass


def _rng(args) -> np.random.Generator:
    if getattr(args, "seed", None) is None:
        raise UsageError(f"{args.command}: --seed is required for stochastic commands")
    return np.random.default_rng(args.seed)


def _read_json(path: str | None) -> dict:
    text = sys.stdin.read() if path in (None, "-") else Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"input is not valid JSON: {e}") from None


def _read_instance(path: str | None):
    from .core import HpsInstance
    d = _read_json(path)
    if "instance" in d:
        d = d["instance"]
    try:
        return HpsInstance.from_dict(d)
    except KeyError as e:
        raise UsageError(f"instance JSON lacks field {e}") from None


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _report(rep, args) -> dict:
    d = rep.to_dict()
    d["seed"] = getattr(args, "seed", None)
    d["samples"] = getattr(args, "samples", None)
    return d


def _emit_csv(columns: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    buf.write(f"{CSV_SCHEMA} version={__version__} columns={','.join(columns)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    sys.stdout.write(buf.getvalue())


def _bits_arg(text: str, n: int) -> list[int]:
    if len(text) != n or any(c not in "01" for c in text):
        raise UsageError(f"expected a {n}-bit string, got {text!r}")
    return [int(c) for c in text]


def _q_arg(text: str):
    return None if text == "continuous" else int(text)


# --- commands -----------------------------------------------------------------


def cmd_gen(args):
    from .core import EnsembleSpec, sample_instance
    inst = sample_instance(EnsembleSpec(args.n, args.m, args.q, arch_mode=args.arch_mode), _rng(args))
    _emit(inst.to_dict())


def cmd_compile(args):
    from .compiler import compile as compile_circuit, gate_counts, to_text
    inst = _read_instance(args.input)
    circ = compile_circuit(inst)
    text = to_text(circ)
    if args.circuit_out:
        Path(args.circuit_out).write_text(text)
    if args.format == "text":
        sys.stdout.write(text)
        sys.stderr.write(json.dumps(gate_counts(circ), sort_keys=True) + "\n")
    else:
        _emit({"instance": inst.to_dict(), "gate_counts": gate_counts(circ), "circuit": text})


def cmd_rerandomize(args):
    from .reductions import (EmbeddingSpec, hidden_ensemble_embed, rerandomize_angles,
                             rerandomize_architecture)
    inst = _read_instance(args.input)
    rng = _rng(args)
    if args.mode == "arch":
        new, R = rerandomize_architecture(inst, rng)
        secrets = {"R": R.to_strings()}
    elif args.mode == "angles":
        new, pad = rerandomize_angles(inst, rng)
        secrets = {"pad": list(pad.ks)}
    else:
        emb = hidden_ensemble_embed(EmbeddingSpec(args.k, args.l, inst), rng)
        new = emb.inst
        secrets = {"R": emb.R.to_strings(), "perm": emb.perm.tolist(), "BC": emb.BC.to_strings(),
                   "extra_ks": list(emb.extra_angles.ks), "k": args.k, "l": args.l}
    if args.secrets_out:
        Path(args.secrets_out).write_text(json.dumps(secrets, sort_keys=True) + "\n")
    _emit({"instance": new.to_dict(), "secrets": secrets, "mode": args.mode, "seed": args.seed})


def cmd_gap(args):
    from .designs import spectral_gap
    q = _q_arg(args.q)
    if args.sweep:
        rows = []
        for n in range(1, args.n + 1):
            for t in range(1, args.t + 1):
                r = spectral_gap(n, t, q)
                rows.append([n, "", args.q, t, repr(r.value), 0.0, ""])
        _emit_csv(["n", "m", "q", "t", "value", "stderr", "seed"], rows)
    else:
        _emit(_report(spectral_gap(args.n, args.t, q), args))


def cmd_design_distance(args):
    from .designs import state_design_distance_exact, sufficient_m
    q = _q_arg(args.q)
    if args.sweep:
        ms = [int(v) for v in args.sweep.split(",")]
        rows = [[args.n, m, args.q, args.t, repr(state_design_distance_exact(args.n, m, q, args.t).value), 0.0, ""]
                for m in ms]
        _emit_csv(["n", "m", "q", "t", "value", "stderr", "seed"], rows)
        return
    m = args.m if args.m is not None else sufficient_m(args.n, args.t, args.epsilon)
    _emit(_report(state_design_distance_exact(args.n, m, q, args.t, method=args.method), args))


def cmd_frame_potential(args):
    from .core import EnsembleSpec
    from .designs import frame_potential_mc, sufficient_m
    m = args.m if args.m is not None else sufficient_m(args.n, args.t, args.epsilon)
    rep = frame_potential_mc(EnsembleSpec(args.n, m, args.q), args.t, args.samples, _rng(args), seed=args.seed)
    _emit(_report(rep, args))


def cmd_entropy(args):
    from .core import EnsembleSpec, sample_instance
    from .entanglement import entropy_bounds
    if args.sweep:
        rng = _rng(args)
        rows = []
        for n in [int(v) for v in args.n_list.split(",")]:
            for m in [int(v) for v in args.m_list.split(",")]:
                vals = [entropy_bounds(sample_instance(EnsembleSpec(n, m, args.q), rng)).entropy
                        for _ in range(args.samples)]
                se = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
                rows.append([n, m, args.q, "", repr(float(np.mean(vals))), repr(se), args.seed])
        _emit_csv(["n", "m", "q", "t", "value", "stderr", "seed"], rows)
        return
    inst = _read_instance(args.input)
    b = entropy_bounds(inst)
    _emit({"n": inst.n, "m": inst.m, "entropy": b.entropy, "lower": b.lower, "upper": b.upper,
           "rank": b.rank, "structural": b.structural, "version": __version__})


def _load_state(args, inst):
    from .core import Statevector, build_statevector
    if args.state:
        header = json.loads(Path(args.state + ".json").read_text())
        return Statevector.from_bytes(int(header["n"]), Path(args.state).read_bytes())
    return build_statevector(inst)


def cmd_attack(args):
    from .attacks import brute_force_hypothesis, learn_angles_public_arch
    from .core import HpsInstance, build_statevector, fidelity_verify
    inst = _read_instance(args.input) if (args.input or not args.state) else None
    if args.public_arch:
        if inst is None:
            raise UsageError("--public-arch needs the instance (its architecture is public)")
        rng = None if args.infinite_shots else _rng(args)
        truth = build_statevector(inst)
        ks = learn_angles_public_arch(inst.arch, lambda: truth, args.shots, rng, inst.q,
                                      infinite_shots=args.infinite_shots)
        found = HpsInstance(inst.arch, ks)
        v = fidelity_verify(found, inst)
        _emit({"recovered": found.to_dict(), "fidelity": v.fidelity, "accept": v.accept,
               "shots": args.shots, "seed": args.seed, "version": __version__})
    else:
        state = _load_state(args, inst)
        n = state.n
        m = args.m if args.m is not None else (inst.m if inst else None)
        q = args.q if args.q is not None else (inst.q if inst else None)
        if m is None or q is None:
            raise UsageError("--brute-force on a raw state needs --m and --q")
        res = brute_force_hypothesis(state, n, m, q, arch_mode=args.arch_mode)
        _emit({"recovered": res.instance.to_dict(), "fidelity": res.fidelity, "candidates": res.candidates,
               "version": __version__})


def cmd_qtf(args):
    from .protocols import qtf_eval, qtf_gen_eval, qtf_gen_trap, qtf_invert
    rng = _rng(args)
    td = qtf_gen_trap(args.n, args.m, args.q, rng)
    x = _bits_arg(args.x, args.n) if args.x else rng.integers(0, 2, args.n).tolist()
    c = qtf_eval(qtf_gen_eval(td), x, args.q)
    if args.ciphertext_out:
        Path(args.ciphertext_out).write_bytes(c.state.to_bytes())
        Path(args.ciphertext_out + ".json").write_text(json.dumps(c.header(), sort_keys=True) + "\n")
    y = qtf_invert(td, c)
    _emit({"trapdoor": td.td.to_dict(), "x": "".join(map(str, x)), "inverted": "".join(map(str, y)),
           "success": list(map(int, x)) == y.tolist(), "seed": args.seed, "version": __version__})


def cmd_pke(args):
    from .protocols import eavesdrop_demo, pke_decrypt, pke_encrypt, pke_keygen
    rng = _rng(args)
    msg = _bits_arg(args.message, args.n) if args.message else rng.integers(0, 2, args.n).tolist()
    if args.eavesdrop:
        out = eavesdrop_demo(args.n, args.m, args.q, msg, rng, copies=max(args.copies, 2))
    else:
        sk, pk = pke_keygen(args.n, args.m, args.q, args.copies, rng)
        c = pke_encrypt(pk, msg)
        if args.ciphertext_out:
            Path(args.ciphertext_out).write_bytes(c.state.to_bytes())
            Path(args.ciphertext_out + ".json").write_text(json.dumps(c.header(), sort_keys=True) + "\n")
        dec = pke_decrypt(sk, c)
        out = {"secret_key": sk.td.to_dict(), "message": "".join(map(str, msg)),
               "decrypted": "".join(map(str, dec)), "success": dec.tolist() == list(msg),
               "copies_left": pk.remaining()}
    out.update({"seed": args.seed, "version": __version__})
    _emit(out)


def cmd_pru(args):
    from .pru import first_moment_distance, unitary_frame_potential
    rng = _rng(args)
    if args.sweep:
        rows = []
        for L in [int(v) for v in args.sweep.split(",")]:
            r = first_moment_distance(args.n, args.m, args.q, L, args.samples, rng, ideal=args.ideal)
            rows.append([args.n, r.params["m"], args.q, L, repr(r.value), repr(r.stderr), args.seed])
        _emit_csv(["n", "m", "q", "layers", "value", "stderr", "seed"], rows)
        return
    if args.probe == "first-moment":
        rep = first_moment_distance(args.n, args.m, args.q, args.layers, args.samples, rng,
                                    ideal=args.ideal, seed=args.seed)
    else:
        rep = unitary_frame_potential(args.n, args.m, args.q, args.layers, args.t, args.samples, rng,
                                      ideal=args.ideal, seed=args.seed)
    _emit(_report(rep, args))


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hpslab", description="Hamiltonian phase state toolkit")
    p.add_argument("--version", action="version", version=f"hpslab {__version__}")
    p.add_argument("--threads", type=int, default=None,
                   help="cap on numerical worker threads (fallback: HPS_LAB_THREADS)")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = cmd("gen", cmd_gen, "sample an instance")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--arch-mode", choices=["uniform", "full_rank"], default="uniform")

    sp = cmd("compile", cmd_compile, "compile an instance to H/RZ/CNOT gates")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--format", choices=["json", "text"], default="json")
    sp.add_argument("--circuit-out")

    sp = cmd("rerandomize", cmd_rerandomize, "re-randomize an instance")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--mode", choices=["arch", "angles", "embed"], required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--l", type=int, default=0)
    sp.add_argument("--secrets-out")

    sp = cmd("gap", cmd_gap, "exact spectral gap of one random term")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--q", default="continuous")
    sp.add_argument("--sweep", action="store_true", help="CSV over all n' <= n, t' <= t")

    sp = cmd("design-distance", cmd_design_distance, "exact state-design trace distance")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--q", default="8")
    sp.add_argument("--m", type=int)
    sp.add_argument("--epsilon", type=float, default=0.05)
    sp.add_argument("--method", choices=["product", "enumerate"], default="product")
    sp.add_argument("--sweep", help="comma-separated m values; emits CSV")

    sp = cmd("frame-potential", cmd_frame_potential, "Monte-Carlo state frame potential")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=int, default=1)
    sp.add_argument("--q", type=int, default=8)
    sp.add_argument("--m", type=int)
    sp.add_argument("--epsilon", type=float, default=0.01)
    sp.add_argument("--samples", type=int, default=10000)
    sp.add_argument("--seed", type=int)

    sp = cmd("entropy", cmd_entropy, "half/half entanglement entropy and bounds")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--sweep", action="store_true")
    sp.add_argument("--n-list", default="4,8")
    sp.add_argument("--m-list", default="2,4,8")
    sp.add_argument("--q", type=int, default=8)
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int)

    sp = cmd("attack", cmd_attack, "key-recovery attacks")
    mode = sp.add_mutually_exclusive_group(required=True)
    mode.add_argument("--public-arch", action="store_true")
    mode.add_argument("--brute-force", action="store_true")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--state", help="raw statevector file (with <file>.json header)")
    sp.add_argument("--shots", type=int, default=10000)
    sp.add_argument("--infinite-shots", action="store_true")
    sp.add_argument("--m", type=int)
    sp.add_argument("--q", type=int)
    sp.add_argument("--arch-mode", choices=["uniform", "full_rank"], default="uniform")
    sp.add_argument("--seed", type=int)

    sp = cmd("qtf", cmd_qtf, "trapdoor-function demo")
    sp.add_argument("action", choices=["demo"])
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--m", type=int, default=8)
    sp.add_argument("--q", type=int, default=8)
    sp.add_argument("--x")
    sp.add_argument("--ciphertext-out")
    sp.add_argument("--seed", type=int)

    sp = cmd("pke", cmd_pke, "public-key encryption demo")
    sp.add_argument("action", choices=["demo"])
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--m", type=int, default=8)
    sp.add_argument("--q", type=int, default=8)
    sp.add_argument("--copies", type=int, default=3)
    sp.add_argument("--message")
    sp.add_argument("--eavesdrop", action="store_true")
    sp.add_argument("--ciphertext-out")
    sp.add_argument("--seed", type=int)

    sp = cmd("pru", cmd_pru, "layered-unitary moment probes")
    sp.add_argument("action", choices=["probe"])
    sp.add_argument("--probe", choices=["frame-potential", "first-moment"], default="frame-potential")
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--m", type=int)
    sp.add_argument("--q", type=int, default=16)
    sp.add_argument("--layers", type=int, default=6)
    sp.add_argument("--t", type=int, default=1)
    sp.add_argument("--samples", type=int, default=10000)
    sp.add_argument("--ideal", action="store_true")
    sp.add_argument("--sweep", help="comma-separated layer counts; first-moment CSV")
    sp.add_argument("--seed", type=int)
    return p


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("HPS_LAB_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"HPS_LAB_THREADS must be an integer, got {env!r}") from None
    return None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        threads = _threads(args)
        if threads is not None and threads < 1:
            raise UsageError("--threads must be positive")
        from threadpoolctl import threadpool_limits
        with threadpool_limits(limits=threads):
            args.func(args)
    except UsageError as e:
        sys.stderr.write(f"hpslab {args.command}: usage error: {e}\n")
        return 2
    except (HpsError, ValueError, OSError) as e:
        sys.stderr.write(f"hpslab {args.command}: {type(e).__name__}: {e}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
