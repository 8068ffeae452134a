import random

import pytest

from ipscomp.circuit import Builder
from ipscomp.field import Q, find_irreducible, make_field


@pytest.fixture
def rng():
    return random.Random(1234)


def circ(F, fn, names):
    """Build a one-output circuit: ``fn(b, *inputs)`` returns the output gate."""
    b = Builder(F)
    xs = [b.input(n) for n in names]
    return b.build([fn(b, *xs)], names)


SMALL_FIELDS = [make_field(2), make_field(3), make_field(5), Q]


def ext(p, e, seed=0):
    return make_field(p, e, find_irreducible(p, e, seed))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
