import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ipscomp.boolean import boolean_axiom
from ipscomp.circuit import Builder
from ipscomp.errors import ArityMismatch, AxiomListMismatch, IndexOutOfRange
from ipscomp.field import Q, make_field
from ipscomp.ips import (Deriv, DerivCtx, bool_square_cert, cert_add, cert_axiom, cert_from_text, cert_scale,
                         cert_to_text, cert_zero, verify)
from ipscomp.randcirc import random_bool
from conftest import circ

F5 = make_field(5)
NAMES = ("x", "y")


def axioms(F=F5):
    return (boolean_axiom(F, "x"), circ(F, lambda b, x, y: b.sub(b.mul(x, y), b.const(1)), ["x", "y"]))


def test_axiom_and_zero_certs_verify():
    A = axioms()
    assert verify(cert_zero(F5, NAMES, A), backend="exact").accepted
    for i in (1, 2):
        r = verify(cert_axiom(i, F5, NAMES, A), backend="exact")
        assert r.accepted and r.record().startswith("verification=OK")
    with pytest.raises(IndexOutOfRange):
        cert_axiom(3, F5, NAMES, A)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 2), st.integers(0, 4)), min_size=1, max_size=5), st.integers(0, 3))
def test_linear_combinations_stay_valid(terms, poly_seed):
    A = axioms()
    acc = cert_zero(F5, NAMES, A)
    for i, c in terms:
        acc = cert_add(acc, cert_scale(cert_axiom(i, F5, NAMES, A), c))
    coef = circ(F5, lambda b, x, y: b.add(b.mul(x, x), b.const(poly_seed)), ["x", "y"])
    acc = cert_scale(acc, coef)
    exact = verify(acc, backend="exact")
    rnd = verify(acc, backend="randomized", seed=poly_seed)
    assert exact.accepted and rnd.accepted


def test_mismatched_contexts_rejected():
    A = axioms()
    with pytest.raises(AxiomListMismatch):
        cert_add(cert_axiom(1, F5, NAMES, A), cert_axiom(1, F5, NAMES, A[:1]))


def _bad_cert(kind):
    ctx = DerivCtx(F5, NAMES, axioms())
    b = ctx.b
    d = ctx.axiom(0)
    if kind == "ideal":  # certificate not in the ideal: cert(x, 0) = x
        d = Deriv(b.add(d.cert, b.input("x")), b.add(d.target, b.input("x")))
    else:  # target claims one more than derived
        d = Deriv(d.cert, b.add(d.target, b.one()))
    return ctx.finish(d)


@pytest.mark.parametrize("backend", ["exact", "randomized", "auto"])
def test_failure_stages(backend):
    r = verify(_bad_cert("ideal"), backend=backend)
    assert not r.accepted and r.failed_stage == "ideal_check"
    r = verify(_bad_cert("subst"), backend=backend)
    assert not r.accepted and r.failed_stage == "subst_check"
    assert r.record() == "verification=FAILED stage=subst_check"


def test_unknown_backend():
    with pytest.raises(ValueError):
        verify(cert_zero(F5, NAMES, axioms()), backend="magic")


def test_target_with_unknown_variable():
    good = cert_axiom(1, F5, NAMES, axioms())
    b = Builder(F5)
    t = b.build([b.input("w")], ["w"])
    with pytest.raises(ArityMismatch):
        verify(type(good)(good.cert, good.axioms, t))


def test_text_roundtrip():
    A = axioms(Q)
    c = cert_add(cert_axiom(1, Q, NAMES, A), cert_scale(cert_axiom(2, Q, NAMES, A), Fraction(-3, 7)))
    text = cert_to_text(c)
    back = cert_from_text(text)
    assert cert_to_text(back) == text
    assert verify(back, backend="exact").accepted


@pytest.mark.parametrize("seed", range(25))
def test_bool_square_certs(seed):
    rng = random.Random(seed)
    phi = random_bool(rng, rng.randint(1, 5), rng.randint(1, 10))
    F = make_field(rng.choice([2, 3, 7]))
    assert verify(bool_square_cert(phi, F), backend="exact").accepted


def test_randomized_report_bounds():
    c = cert_axiom(2, F5, NAMES, axioms())
    r = verify(c, backend="randomized", error_bound=Fraction(1, 2 ** 40), seed=3)
    assert r.accepted
    for v in (r.ideal_check, r.subst_check, r.combined):
        assert v.bound <= Fraction(1, 2 ** 40)
