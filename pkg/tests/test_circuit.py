import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ipscomp.circuit import (AlgCircuit, Builder, depth, evaluate, expand, expand_flint, parse_netlist,
                             proddepth, sdeg, substitute, to_netlist, validate, wires)
from ipscomp.errors import BadArity, CapExceeded, Cyclic, NonConstantDenominator, NonInvertibleDenominator, ParseError
from ipscomp.field import Q, make_field
from ipscomp.randcirc import random_circuit
from conftest import SMALL_FIELDS, circ, ext


def to_sympy(C: AlgCircuit):
    syms = {n: sympy.Symbol(n) for n in C.all_inputs()}
    vals = []
    for g in C.gates:
        k = g[0]
        if k == "input":
            vals.append(syms[g[1]])
        elif k == "const":
            vals.append(sympy.Rational(g[1].numerator, g[1].denominator) if C.field.is_rational else sympy.Integer(g[1]))
        elif k == "lin":
            vals.append(sum((_sc(C, c) * vals[j] for c, j in g[1]), sympy.Integer(0)))
        elif k == "mul":
            vals.append(vals[g[1]] * vals[g[2]])
        else:
            v = vals[g[1]]
            vals.append(sympy.mod_inverse(int(v), C.field.char) if C.field.is_finite else 1 / v)
    return [sympy.expand(vals[o]) for o in C.outputs], [syms[n] for n in C.all_inputs()]


def _sc(C, c):
    return sympy.Rational(c.numerator, c.denominator) if C.field.is_rational else sympy.Integer(c)


def sympy_terms(C):
    (e,), gens = to_sympy(C)
    if not gens:
        gens = [sympy.Symbol("_dummy")]
    p = C.field.char
    poly = sympy.Poly(e, *gens, domain="QQ")
    out = {}
    for mono, c in poly.terms():
        if p:
            c = int(c.p * pow(int(c.q), -1, p)) % p
        if c == 0:
            continue
        out[mono[:len(C.all_inputs())]] = c
    return out


@pytest.mark.parametrize("seed", range(40))
def test_expand_matches_sympy(seed):
    rng = random.Random(seed)
    F = SMALL_FIELDS[seed % 4]
    C, _ = random_circuit(rng, F, max_gates=10)
    (P,) = expand(C)
    mine = {e: (Fraction(c) if F.is_rational else int(c)) for e, c in P.items()}
    assert mine == sympy_terms(C)


@pytest.mark.parametrize("seed", range(40))
def test_flint_expansion_agrees(seed):
    rng = random.Random(100 + seed)
    F = SMALL_FIELDS[seed % 4]
    C, _ = random_circuit(rng, F, max_gates=12)
    (P,) = expand(C)
    (R,) = expand_flint(C)
    assert len(P) == len(R)
    assert P.is_zero() == R.is_zero()


def test_flint_skips_extension_fields():
    K = ext(3, 2)
    C = circ(K, lambda b, x: b.mul(x, x), ["x"])
    assert expand_flint(C) is None
    (P,) = expand(C)
    assert P.degree() == 2


def test_expand_caps():
    F = make_field(5)

    def big(b, *xs):
        acc = b.add(*xs)
        for _ in range(6):
            acc = b.mul(acc, acc)
        return acc

    C = circ(F, big, ["a", "b", "c", "d"])
    with pytest.raises(CapExceeded):
        expand(C, degree_cap=20)
    with pytest.raises(CapExceeded):
        expand(C, term_cap=50)
    with pytest.raises(CapExceeded):
        expand_flint(C, term_cap=50)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from(SMALL_FIELDS + [ext(2, 3)]))
def test_netlist_roundtrip(seed, F):
    rng = random.Random(seed)
    C, _ = random_circuit(rng, F)
    text = to_netlist(C)
    D = parse_netlist(text)
    assert to_netlist(D) == text
    pt = {n: F.random_element(rng) if F.is_finite else Fraction(rng.randint(-9, 9), rng.randint(1, 5))
          for n in C.all_inputs()}
    assert evaluate(C, pt) == evaluate(D, pt)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_evaluation_matches_expansion(seed):
    rng = random.Random(seed)
    F = ext(3, 2)
    C, _ = random_circuit(rng, F)
    (P,) = expand(C)
    pt = [F.random_element(rng) for _ in C.all_inputs()]
    assert evaluate(C, dict(zip(C.all_inputs(), pt))) == [P.evaluate(pt)]


def test_builder_hash_conses():
    b = Builder(make_field(7))
    x, y = b.input("x"), b.input("y")
    assert b.mul(x, y) == b.mul(x, y)
    assert b.input("x") == x


def test_measures():
    F = make_field(5)
    C = circ(F, lambda b, x, y, z: b.add(b.mul(x, y), z), ["x", "y", "z"])
    assert depth(C) == 2
    assert proddepth(C) == 1
    assert sdeg(C) == 2
    assert wires(C) == 4


def test_rational_inverse_constant():
    C = circ(Q, lambda b, x: b.mul(b.inv(b.const(Fraction(3))), x), ["x"])
    assert evaluate(C, {"x": Fraction(6)}) == [Fraction(2)]


def test_validate_rejects_malformed():
    F = make_field(3)
    with pytest.raises(Cyclic):
        validate(AlgCircuit(F, (("input", "x"), ("mul", 0, 2), ("mul", 0, 0)), (1,), ("x",)))
    with pytest.raises(BadArity):
        validate(AlgCircuit(F, (("input", "x"), ("mul", 0)), (1,), ("x",)))
    with pytest.raises(NonConstantDenominator):
        validate(AlgCircuit(F, (("input", "x"), ("inv", 0)), (1,), ("x",)))
    with pytest.raises(NonInvertibleDenominator):
        validate(AlgCircuit(F, (("const", 0), ("inv", 0)), (1,), ()))
    with pytest.raises(BadArity):
        validate(AlgCircuit(F, (("input", "x"),), (3,), ("x",)))


@pytest.mark.parametrize("text,line", [
    ("field F 3\ninput x\nmul %1 x\noutput %1\n", 3),
    ("field F 3\ninput x\nmul %1 x y\noutput %1\n", 3),
    ("input x\n", 1),
    ("field F 3\ninput x\ninput x\noutput x\n", 3),
    ("field F 4\n", 1),
    ("field F 3\ninput x\nfrob %1 x\noutput %1\n", 3),
    ("field F 3\n# comment\n\ninput x\nlin %1 2x\noutput %1\n", 5),
])
def test_parse_errors_cite_lines(text, line):
    with pytest.raises(ParseError) as exc:
        parse_netlist(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_parse_missing_output():
    with pytest.raises(ParseError):
        parse_netlist("field F 3\ninput x\n")


def test_substitute():
    F = make_field(7)
    C = circ(F, lambda b, x, y: b.mul(x, y), ["x", "y"])
    D = circ(F, lambda b, u: b.add(u, b.const(1)), ["u"])
    S = substitute(C, {"x": D})
    assert evaluate(S, {"u": 2, "y": 3}) == [F.coerce(9)]
