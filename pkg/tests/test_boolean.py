import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from ipscomp.boolean import (BoolBuilder, Cnf, alg_translate, cert_circuit_from_cnf, cert_clauses_from_cnf,
                             cert_cnf_from_clauses, eval_bool, parse_dimacs, truth_tables, tseitin, validate_bool)
from ipscomp.circuit import compile_native
from ipscomp.errors import IndexOutOfRange, ParseError
from ipscomp.field import make_field
from ipscomp.ips import verify
from ipscomp.pipeline import sat_check
from ipscomp.randcirc import random_bool

TALLY = {"not": 1, "and": 4, "or": 7}


def assignments(n):
    return itertools.product((0, 1), repeat=n)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 8), st.integers(1, 16))
def test_truth_tables_match_direct_evaluation(seed, n, g):
    phi = random_bool(random.Random(seed), n, g)
    validate_bool(phi)
    t, _ = truth_tables(phi)
    for a, bits in enumerate(assignments(n)):
        asg = {v: (a >> k) & 1 for k, v in enumerate(phi.var_names)}
        assert (t[phi.output] >> a) & 1 == eval_bool(phi, asg)[0]


@pytest.mark.parametrize("seed", range(30))
def test_alg_agrees_on_boolean_points(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 10)
    phi = random_bool(rng, n, rng.randint(1, 20))
    F = make_field(rng.choice([2, 3, 5, 7]))
    run = compile_native(alg_translate(phi, F))
    t, _ = truth_tables(phi)
    for a in range(1 << n):
        asg = {v: F.to_native(F.coerce((a >> k) & 1)) for k, v in enumerate(phi.var_names)}
        assert F.from_native(run(asg)[0]) == F.coerce((t[phi.output] >> a) & 1)


@pytest.mark.parametrize("seed", range(30))
def test_tseitin_equisatisfiable(seed):
    rng = random.Random(1000 + seed)
    n = rng.randint(1, 10)
    phi = random_bool(rng, n, rng.randint(1, 20))
    t, _ = truth_tables(phi)
    tr = tseitin(phi)
    model = sat_check(tr.cnf)
    assert (model is not None) == (t[phi.output] != 0)
    if model is not None:
        asg = {v: model[k + 1] for k, v in enumerate(phi.var_names)}
        assert eval_bool(phi, asg)[0] == 1


@pytest.mark.parametrize("seed", range(30))
def test_circuit_from_cnf_cert_and_tallies(seed):
    rng = random.Random(2000 + seed)
    phi = random_bool(rng, rng.randint(1, 10), rng.randint(1, 16))
    stats = {}
    R = cert_circuit_from_cnf(phi, make_field(rng.choice([2, 3, 5])), stats=stats)
    assert verify(R, backend="exact").accepted
    for kind, counts in stats.items():
        assert max(counts) <= TALLY[kind]


def test_single_input_formula():
    bb = BoolBuilder()
    phi = bb.build([bb.input("x")], ["x"])
    assert verify(cert_circuit_from_cnf(phi, make_field(2)), backend="exact").accepted


def test_clause_certs_on_small_cnfs():
    F = make_field(3)
    cnf = Cnf(1, ((1,), (-1,)), ("x",))
    assert verify(cert_cnf_from_clauses(cnf, F), backend="exact").accepted
    cnf2 = Cnf(2, ((1, 2), (-1,)), ("x", "y"))
    for i in range(2):
        assert verify(cert_clauses_from_cnf(cnf2, i, F), backend="exact").accepted
    with pytest.raises(IndexOutOfRange):
        cert_clauses_from_cnf(cnf2, 2, F)


@pytest.mark.parametrize("seed", range(10))
def test_clause_certs_on_tseitin_cnfs(seed):
    rng = random.Random(3000 + seed)
    phi = random_bool(rng, rng.randint(1, 4), rng.randint(1, 5))
    cnf = tseitin(phi).cnf
    F = make_field(5)
    assert verify(cert_cnf_from_clauses(cnf, F)).accepted
    i = rng.randrange(len(cnf.clauses))
    assert verify(cert_clauses_from_cnf(cnf, i, F)).accepted


def test_dimacs_roundtrip_and_errors():
    phi = random_bool(random.Random(4), 4, 8)
    cnf = tseitin(phi).cnf
    assert parse_dimacs(cnf.to_dimacs()) == cnf
    for bad, line in [("1 0\n", 1), ("p cnf 1 1\n2 0\n", 2), ("p cnf 1 1\nx 0\n", 2)]:
        with pytest.raises(ParseError) as exc:
            parse_dimacs(bad)
        assert exc.value.line == line
    with pytest.raises(ParseError):
        parse_dimacs("p cnf 2 2\n1 0\n")


def test_builder_folding_keeps_semantics():
    bb = BoolBuilder()
    x = bb.input("x")
    assert bb.and_(x, bb.TRUE) == x and bb.or_(x, bb.FALSE) == x
    assert bb.and_(x, bb.FALSE) == bb.FALSE and bb.or_(x, bb.TRUE) == bb.TRUE
    m = bb.mux(x, bb.TRUE, bb.FALSE)
    phi = bb.build([m], ["x"])
    assert [eval_bool(phi, {"x": v})[0] for v in (0, 1)] == [0, 1]
