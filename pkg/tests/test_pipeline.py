import random

import pytest

from ipscomp.boolean import Cnf
from ipscomp.errors import Malformed, SourceNotZero, VerificationFailed
from ipscomp.field import Q, make_field, select_field
from ipscomp.ips import IPSCert, verify
from ipscomp.pipeline import (build_refutation, certify, choose_field, compile_cnf, dpll, parse_bundle,
                              refutation_axioms, sat_check, variety_bundle, verify_bundle)
from ipscomp.pit import pit_exact
from ipscomp.randcirc import random_bool, random_circuit
from ipscomp.boolean import tseitin
from conftest import circ
from mutations import cnf_mutations

F2, F3 = make_field(2), make_field(3)


def commute(F):
    # x*y - y*(1*x + 0*y): the detour keeps the builder from folding it to a constant
    return circ(F, lambda b, x, y: b.sub(b.mul(x, y), b.mul(y, b.lin([(1, x), (0, y)]))), ["x", "y"])


@pytest.fixture(scope="module")
def bundle_text():
    return certify(commute(F2), seed=7).to_text()


def test_compile_is_deterministic():
    a, b = compile_cnf(commute(F3), 5), compile_cnf(commute(F3), 5)
    assert a.cnf == b.cnf


@pytest.mark.parametrize("C", [commute(F2), commute(F3), commute(make_field(5)), commute(Q)], ids=str)
def test_refutation_for_zero_circuits(C):
    comp = compile_cnf(C)
    assert sat_check(comp.cnf) is None
    R = build_refutation(comp)
    assert verify(R).accepted


def test_nonzero_circuit_gives_satisfiable_cnf_and_no_refutation():
    C = circ(F3, lambda b, x, y: b.mul(x, y), ["x", "y"])
    comp = compile_cnf(C)
    assert sat_check(comp.cnf) is not None
    with pytest.raises(SourceNotZero):
        build_refutation(comp)
    with pytest.raises(SourceNotZero):
        certify(C)


def test_frobenius_is_not_refuted():
    C = circ(F3, lambda b, x: b.sub(b.mul(b.mul(x, x), x), x), ["x"])
    comp = compile_cnf(C)
    assert comp.K.order > 3
    assert sat_check(comp.cnf) is not None


def test_rational_source_avoids_bad_primes():
    # 30*x*y vanishes mod 2, 3 and 5; the chosen prime must keep it nonzero
    C = circ(Q, lambda b, x, y: b.scale(30, b.mul(x, y)), ["x", "y"])
    sel = choose_field(C)
    assert sel.target.char not in (2, 3, 5)
    assert sat_check(compile_cnf(C).cnf) is not None


def test_rational_source_retries_past_a_killing_prime():
    # 143 = (7 + 4)(7 + 6) uses only 3-bit constants, so the first candidates are 11 and 13
    def f(b, x, y):
        c = b.mul(b.add(b.const(7), b.const(4)), b.add(b.const(7), b.const(6)))
        return b.mul(c, b.mul(x, y))
    C = circ(Q, f, ["x", "y"])
    first = select_field(C).target.char
    assert first in (11, 13)
    sel = choose_field(C)
    assert sel.target.char > first and 143 % sel.target.char
    assert sat_check(compile_cnf(C).cnf) is not None


def test_refutation_rejects_tampered_axioms():
    comp = compile_cnf(commute(F2))
    R = build_refutation(comp)
    cnf = comp.cnf
    fewer = Cnf(cnf.num_vars, cnf.clauses[1:] + cnf.clauses[:1], cnf.var_names)
    axioms = tuple(refutation_axioms(fewer, comp.K))
    assert not verify(IPSCert(R.cert, axioms, R.target)).accepted


def test_bundle_roundtrip_and_determinism(bundle_text):
    assert certify(commute(F2), seed=7).to_text() == bundle_text
    rep = verify_bundle(bundle_text)
    assert rep.accepted
    assert verify_bundle(parse_bundle(bundle_text), seed=99).accepted


@pytest.mark.parametrize("name,mutate", cnf_mutations(), ids=[n for n, _ in cnf_mutations()])
def test_mutated_bundles_rejected(bundle_text, name, mutate):
    with pytest.raises((VerificationFailed, Malformed)):
        verify_bundle(mutate(bundle_text))


@pytest.mark.parametrize("text", ["", "[cnf]\n", "[manifest]\nversion 9\nmode cnf\n",
                                  "[manifest]\nversion 1\nmode cnf\n[field]\nx\n", "junk\n[manifest]\n"])
def test_malformed_bundles(text):
    with pytest.raises(Malformed):
        verify_bundle(text)


def test_variety_bundle():
    B = variety_bundle(commute(Q))
    assert B.mode == "variety"
    text = B.to_text()
    assert "[cnf]" not in text
    assert verify_bundle(text).accepted
    with pytest.raises(SourceNotZero):
        variety_bundle(circ(Q, lambda b: b.const(1), []))
    zero = circ(Q, lambda b: b.const(0), [])
    assert verify_bundle(certify(zero, mode="variety").to_text()).accepted


@pytest.mark.parametrize("seed", range(25))
def test_sat_check_agrees_with_dpll(seed):
    rng = random.Random(seed)
    phi = random_bool(rng, rng.randint(2, 12), rng.randint(3, 25))
    cnf = tseitin(phi).cnf
    a = sat_check(cnf)
    b = dpll(cnf)
    assert (a is None) == (b is None)
    for m in (a, b):
        if m is not None:
            assert cnf.evaluate(m)
    assert (sat_check(cnf, exhaustive_limit=0) is None) == (a is None)


def test_dpll_budget():
    phi = random_bool(random.Random(3), 12, 40)
    with pytest.raises(TimeoutError):
        dpll(tseitin(phi).cnf, budget=1)


@pytest.mark.parametrize("seed", range(12))
def test_random_suite_slice(seed):
    rng = random.Random(seed)
    F = [F2, F3, make_field(5), Q][seed % 4]
    C, _ = random_circuit(rng, F, max_gates=8)
    comp = compile_cnf(C)
    assert (sat_check(comp.cnf) is None) == pit_exact(C).is_zero
