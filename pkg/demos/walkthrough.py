"""A guided run through the compiler on the circuits in demos/circuits.

    python demos/walkthrough.py

Three stories: a polynomial that looks zero over its own field but is not,
a zero circuit turned into a CNF with a checked refutation, and a tampered
certificate being caught.
"""
from __future__ import annotations

import pathlib

from ipscomp.circuit import evaluate, parse_netlist
from ipscomp.errors import VerificationFailed
from ipscomp.field import FieldMap
from ipscomp.pipeline import certify, choose_field, compile_cnf, map_circuit, sat_check, verify_bundle
from ipscomp.pit import pit, pit_exact

HERE = pathlib.Path(__file__).parent / "circuits"


def load(name: str):
    return parse_netlist((HERE / name).read_text())


def heading(text: str) -> None:
    print(f"\n== {text}")


def frobenius() -> None:
    heading("x^3 - x over F_3")
    C = load("frobenius_f3.alg")
    F = C.field
    values = [evaluate(C, {"x": a})[0] for a in F.elements()]
    print(f"values on every point of F_3: {values}")
    print(f"exact identity test: {pit_exact(C).result}")
    sel = choose_field(C)
    K = sel.target
    print(f"compiler works over {K} (degree {K.degree}) so that sampling can see the difference")
    CK = map_circuit(C, FieldMap(F, K), K)
    v = pit(CK, exact=False, seed=3)
    print(f"randomized test over K: {v.result} with witness x = {v.witness}")
    comp = compile_cnf(C)
    print(f"CNF has {comp.cnf.num_vars} variables and {len(comp.cnf.clauses)} clauses; "
          f"satisfiable: {sat_check(comp.cnf) is not None}")


def certified_zero() -> str:
    heading("(x + y)^2 - x^2 - 2xy - y^2 over Q")
    C = load("square_q.alg")
    print(f"exact identity test: {pit_exact(C).result}")
    bundle = certify(C, seed=7)
    comp = bundle.compiled
    print(f"compiled over {comp.K}: {comp.cnf.num_vars} variables, {len(comp.cnf.clauses)} clauses")
    print(f"refutation checked by {bundle.report.combined.method} identity testing: "
          f"accepted={bundle.report.accepted}")
    text = bundle.to_text()
    print("bundle sections: " + ", ".join(bundle.sections))
    print(f"independent re-check of the written bundle: accepted={verify_bundle(text).accepted}")
    return text


def tampering(text: str) -> None:
    heading("editing one clause of the bundle")
    lines = text.splitlines()
    start = lines.index("[cnf]")
    for i in range(start + 1, len(lines)):
        if lines[i] and lines[i][0] in "-123456789":
            lines[i] = lines[i].replace("-", "", 1) if lines[i].startswith("-") else "-" + lines[i]
            print(f"flipped the first literal of line {i + 1}: {lines[i]!r}")
            break
    try:
        verify_bundle("\n".join(lines) + "\n")
        print("accepted (unexpected)")
    except VerificationFailed as exc:
        print(f"rejected at stage {exc.stage!r}: {exc}")


if __name__ == "__main__":
    frobenius()
    tampering(certified_zero())
