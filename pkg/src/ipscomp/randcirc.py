"""Seeded random circuits for property tests and benchmarks.

Besides plain random circuits the generator plants identities (so that a
good share of instances compute the zero polynomial) and Frobenius-style
circuits ``x^q - x`` that vanish on F_q without being zero.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .circuit import AlgCircuit, Builder
from .field import FieldDesc

KINDS = ("random", "commute", "distribute", "square", "inverse", "frobenius", "cancel")
# plain random circuits are mostly nonzero; weight them so both verdicts are common
WEIGHTS = (6, 1, 1, 1, 1, 1, 1)


def _const(rng: random.Random, F: FieldDesc, bits: int):
    if F.is_rational:
        num = rng.randint(-(2 ** bits - 1), 2 ** bits - 1)
        den = rng.randint(1, 2 ** bits - 1) if rng.random() < 0.3 else 1
        return Fraction(num, den)
    return F.coerce(rng.randrange(F.char))


def _leaf(rng, b, xs, F, bits):
    if rng.random() < 0.8:
        return b.input(rng.choice(xs))
    return b.const(_const(rng, F, bits))


def _expr(rng, b, xs, F, bits, size):
    """Random expression with about ``size`` internal gates."""
    pool = [b.input(x) for x in xs]
    for _ in range(size):
        r = rng.random()
        a = rng.choice(pool)
        c = rng.choice(pool) if rng.random() < 0.85 else _leaf(rng, b, xs, F, bits)
        if r < 0.45:
            g = b.mul(a, c)
        else:
            g = b.lin([(_const(rng, F, bits) or 1, a), (_const(rng, F, bits), c)])
        pool.append(g)
    return pool[-1]


def random_circuit(rng: random.Random, F: FieldDesc, max_gates: int = 12, max_vars: int = 4,
                   const_bits: int = 4, kind: str | None = None) -> tuple[AlgCircuit, str]:
    """A circuit with at most ``max_gates`` gates (inputs included) and its kind."""
    for _ in range(200):
        k = kind or rng.choices(KINDS, WEIGHTS)[0]
        n = rng.randint(1, max_vars)
        xs = [f"x{i}" for i in range(n)]
        b = Builder(F)
        for x in xs:
            b.input(x)
        budget = max(1, max_gates - n - 3)
        if k == "random":
            out = _expr(rng, b, xs, F, const_bits, rng.randint(1, budget + 2))
        elif k == "commute":
            u = _expr(rng, b, xs, F, const_bits, rng.randint(0, budget // 3))
            v = _expr(rng, b, xs, F, const_bits, rng.randint(0, budget // 3))
            out = b.sub(b.mul(u, v), b.mul(v, u))
        elif k == "distribute":
            u, v, w = (b.input(rng.choice(xs)) for _ in range(3))
            c = _const(rng, F, const_bits)
            out = b.lin([(1, b.mul(b.lin([(1, u), (c, v)]), w)), (-1, b.mul(u, w)), (F.neg(c), b.mul(v, w))])
        elif k == "square":
            u, v = (_expr(rng, b, xs, F, const_bits, rng.randint(0, 1)) for _ in range(2))
            s = b.add(u, v)
            out = b.lin([(1, b.mul(s, s)), (-1, b.mul(u, u)), (-2, b.mul(u, v)), (-1, b.mul(v, v))])
        elif k == "inverse":
            c = _const(rng, F, const_bits)
            if F.is_zero(F.coerce(c)):
                continue
            u = _expr(rng, b, xs, F, const_bits, rng.randint(0, budget // 2))
            cc = b.const(c)
            out = b.sub(b.mul(b.mul(b.inv(cc), cc), u), u)
        elif k == "frobenius":
            if F.is_rational:
                continue
            x = b.input(xs[0])
            acc = x
            for _ in range(F.char - 1):
                acc = b.mul(acc, x)
            out = b.sub(acc, x)
        else:  # cancel: u - u after a detour through a scaled copy
            u = _expr(rng, b, xs, F, const_bits, rng.randint(0, budget // 2))
            c = _const(rng, F, const_bits)
            if F.is_zero(F.coerce(c)):
                c = 1
            out = b.lin([(c, u), (F.neg(F.coerce(c)), u)]) if rng.random() < 0.5 else b.sub(b.lin([(c, u)]), b.lin([(c, u)]))
        C = b.build([out], xs)
        if len(C.gates) <= max_gates:
            return C, k
    raise RuntimeError("could not draw a circuit within the gate budget")


def suite(seed: int, count: int, fields, **kw) -> list:
    """``count`` circuits cycling through ``fields``: list of (C, kind)."""
    rng = random.Random(seed)
    return [random_circuit(rng, fields[i % len(fields)], **kw) for i in range(count)]


def random_bool(rng: random.Random, n_inputs: int, n_gates: int):
    """Random fan-in-2 Boolean circuit over ``x0..``; output is the last gate."""
    from .boolean import BoolBuilder

    bb = BoolBuilder()
    names = [f"x{i}" for i in range(n_inputs)]
    pool = [bb.input(n) for n in names]
    for _ in range(n_gates):
        r = rng.random()
        a, c = rng.choice(pool), rng.choice(pool)
        if r < 0.25:
            g = bb.not_(a)
        elif r < 0.6:
            g = bb.and_(a, c)
        else:
            g = bb.or_(a, c)
        pool.append(g)
    return bb.build([pool[-1]], names)
