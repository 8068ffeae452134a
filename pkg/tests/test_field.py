import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ipscomp.errors import NotIrreducible, NotPrime
from ipscomp.field import (Q, FieldMap, extension_of, find_embedding, find_irreducible, find_prime_above,
                           is_irreducible, is_prime, make_field, parse_field, select_field)
from conftest import circ, ext


def test_is_prime_matches_sympy():
    for n in range(-5, 3000):
        assert is_prime(n) == sympy.isprime(n), n
    big = [2 ** 61 - 1, 2 ** 89 - 1, 2 ** 64 + 1, 3317044064679887385961981, 2 ** 127 - 1]
    for n in big:
        assert is_prime(n) == sympy.isprime(n)


def test_find_prime_above_lands_in_bertrand_interval():
    for bound in [1, 2, 14, 100, 10 ** 12]:
        for seed in range(3):
            q = find_prime_above(bound, seed)
            assert sympy.isprime(q) and bound < q <= 2 * bound
    with pytest.raises(ValueError):
        find_prime_above(0)


def test_irreducibility_against_sympy():
    x = sympy.symbols("x")
    rng = random.Random(0)
    for p in (2, 3, 5):
        for deg in (2, 3, 4):
            for _ in range(15):
                coeffs = [rng.randrange(p) for _ in range(deg)] + [1]  # low first, monic
                poly = sympy.Poly(list(reversed(coeffs)), x, modulus=p)
                assert is_irreducible(p, coeffs) == poly.is_irreducible, (p, coeffs)


def test_find_irreducible_deterministic():
    for p, e in [(2, 3), (3, 2), (5, 3), (7, 2)]:
        f = find_irreducible(p, e, seed=3)
        assert f == find_irreducible(p, e, seed=3)
        assert is_irreducible(p, f)


def test_make_field_rejects_bad_input():
    with pytest.raises(NotPrime):
        make_field(4)
    with pytest.raises(NotIrreducible):
        make_field(2, 2, (1, 0, 1))  # x^2 + 1 = (x + 1)^2 over F_2


def test_text_roundtrip():
    for F in [Q, make_field(2), make_field(7), ext(3, 3), ext(2, 4)]:
        assert parse_field(F.to_text()) == F


def test_element_counts():
    for p, e in [(2, 3), (3, 2), (5, 1)]:
        F = ext(p, e) if e > 1 else make_field(p)
        assert F.order == p ** e
        assert len(set(F.elements())) == p ** e


FIELDS = [ext(2, 3), ext(3, 2), ext(5, 2), make_field(7)]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FIELDS), st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_field_axioms(F, sa, sb, sc):
    a, b, c = (F.random_element(random.Random(s)) for s in (sa, sb, sc))
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    assert F.mul(a, b) == F.mul(b, a)
    assert F.add(a, F.neg(a)) == F.zero()
    if not F.is_zero(a):
        assert F.mul(a, F.inv(a)) == F.one()
    assert F.pow(a, F.order) == a  # Frobenius fixes F_q


def test_rational_field():
    assert Q.is_rational and not Q.is_finite
    assert Q.mul(Fraction(2, 3), Q.inv(Fraction(2, 3))) == 1


@pytest.mark.parametrize("src,tgt", [((2, 1), (2, 4)), ((2, 2), (2, 4)), ((3, 1), (3, 3))])
def test_embedding_is_homomorphism(src, tgt):
    S, T = (ext(p, e) if e > 1 else make_field(p) for p, e in (src, tgt))
    m = FieldMap(S, T, find_embedding(S, T))
    els = list(S.elements())
    for a in els:
        for b in els:
            assert m(S.mul(a, b)) == T.mul(m(a), m(b))
            assert m(S.add(a, b)) == T.add(m(a), m(b))


def test_extension_of_contains_base():
    L, gamma = extension_of(make_field(3), 2, seed=1)
    assert L.char == 3 and L.degree == 2


def test_select_field_large_enough():
    C = circ(make_field(3), lambda b, x: b.sub(b.mul(b.mul(x, x), x), x), ["x"])
    sel = select_field(C, seed=0)
    assert sel.target.char == 3 and sel.target.degree >= 2
    Cq = circ(Q, lambda b, x, y: b.sub(b.mul(x, y), b.mul(y, x)), ["x", "y"])
    selq = select_field(Cq)
    assert selq.source == Q and selq.target.is_finite and is_prime(selq.target.char)
