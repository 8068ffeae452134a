"""Polynomial identity testing: exact (via expansion) and randomized
(Schwartz-Zippel sampling with an exact rational error bound)."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .circuit import DEGREE_CAP, TERM_CAP, AlgCircuit, compile_native, expand, expand_flint, sdeg
from .errors import CapExceeded
from .field import FieldDesc, FieldMap, ceil_log, extension_of

ZERO = "ZERO"
NONZERO = "NONZERO"
ZERO_WITH_BOUND = "ZERO_WITH_ERROR_BOUND"

EXHAUSTIVE_LIMIT = 10_000


def bound_exponent(bound: Fraction) -> int:
    """Largest ``k`` with ``bound <= 2^-k`` (0 for bounds of at least 1/2)."""
    if bound <= 0:
        return 10 ** 6
    k = (bound.denominator // bound.numerator).bit_length() - 1
    return max(k, 0)


@dataclass(frozen=True)
class PitVerdict:
    result: str
    method: str
    sample_field: FieldDesc | None = None
    trials: int = 0
    bound: Fraction | None = None
    witness: dict | None = dc_field(default=None, compare=False)

    @property
    def is_zero(self) -> bool:
        return self.result != NONZERO

    def record(self) -> str:
        parts = [f"verdict={'NONZERO' if self.result == NONZERO else 'ZERO'}", f"method={self.method}"]
        if self.bound is not None:
            parts.append(f"error_bound<=2^-{bound_exponent(self.bound)}")
        if self.trials:
            parts.append(f"trials={self.trials}")
        if self.sample_field is not None:
            parts.append(f"field=[{self.sample_field.to_text()}]")
        if self.witness is not None:
            F = self.sample_field
            w = ";".join(f"{k}={F.format_elem(v)}" for k, v in self.witness.items())
            parts.append(f"witness={w}")
        return " ".join(parts)


def _nonzero_at(C: AlgCircuit, run, target: FieldDesc, point: dict) -> bool:
    nat = {k: target.to_native(v) for k, v in point.items()}
    return any(v != 0 for v in run(nat))


def pit_exact(C: AlgCircuit, degree_cap: int = DEGREE_CAP, term_cap: int = TERM_CAP, seed: int = 0) -> PitVerdict:
    """Decide ``C == 0`` by expansion; a nonzero answer carries a witness
    checked by direct circuit evaluation."""
    fast = expand_flint(C, degree_cap, term_cap)
    if fast is not None:
        if all(p.is_zero() for p in fast):
            return PitVerdict(ZERO, "exact", C.field)
        deg = max(p.total_degree() for p in fast)
    else:
        polys = expand(C, degree_cap, term_cap)
        if all(p.is_zero() for p in polys):
            return PitVerdict(ZERO, "exact", C.field)
        deg = max(p.degree() for p in polys)
    names = C.all_inputs()
    F = C.field
    rng = random.Random(seed)
    if F.is_rational:
        run = compile_native(C, F)
        # a nonzero polynomial of degree d vanishes on at most half of {0..2d}^n
        for _ in range(400):
            pt = {n: Fraction(rng.randint(0, 2 * deg)) for n in names}
            if _nonzero_at(C, run, F, pt):
                return PitVerdict(NONZERO, "exact", F, witness=pt)
        for combo in itertools.product(range(deg + 1), repeat=len(names)):  # pragma: no cover
            pt = {n: Fraction(v) for n, v in zip(names, combo)}
            if _nonzero_at(C, run, F, pt):
                return PitVerdict(NONZERO, "exact", F, witness=pt)
        raise AssertionError("nonzero polynomial without witness")  # pragma: no cover
    if F.order ** len(names) <= EXHAUSTIVE_LIMIT:
        run = compile_native(C, F)
        for combo in itertools.product(list(F.elements()), repeat=len(names)):
            pt = dict(zip(names, combo))
            if _nonzero_at(C, run, F, pt):
                return PitVerdict(NONZERO, "exact", F, witness=pt)
    # vanishes on the base field (or too many points): move to an extension
    m = ceil_log(F.order, 2 * deg + 1) + 1
    L, gamma = extension_of(F, m, seed)
    fmap = FieldMap(F, L, gamma)
    run = compile_native(C, L, fmap)
    for _ in range(400):
        pt = {n: L.random_element(rng) for n in names}
        if _nonzero_at(C, run, L, pt):
            return PitVerdict(NONZERO, "exact", L, witness=pt)
    raise AssertionError("nonzero polynomial without witness")  # pragma: no cover


def sample_setup(C: AlgCircuit, seed: int = 0, d: int | None = None):
    """Sample space for randomized PIT: ``(field, fmap, sampler, |S|)``.

    ``sampler(rng)`` draws one element of ``S``.
    """
    F = C.field
    d = sdeg(C) if d is None else d
    if F.is_rational:
        top = 2 * d
        return F, FieldMap(F, F), (lambda rng: Fraction(rng.randint(0, top))), top + 1
    if F.order >= 2 * d:
        return F, FieldMap(F, F), F.random_element, F.order
    m = ceil_log(F.order, d) + 1
    L, gamma = extension_of(F, m, seed)
    return L, FieldMap(F, L, gamma), L.random_element, L.order


def trials_needed(d: int, size: int, error_bound: Fraction) -> int:
    per = Fraction(d, size)
    if per >= 1:
        raise ValueError("sample set no larger than the degree")
    t, acc = 1, per
    while acc > error_bound:
        acc *= per
        t += 1
    return t


def pit_randomized(C: AlgCircuit, error_bound=Fraction(1, 2 ** 30), seed: int = 0) -> PitVerdict:
    """Schwartz-Zippel: repeat independent trials until
    ``(sdeg/|S|)^trials <= error_bound``; any nonzero evaluation is final."""
    error_bound = Fraction(error_bound)
    d = sdeg(C)
    L, fmap, sampler, size = sample_setup(C, seed, d)
    t = trials_needed(d, size, error_bound)
    run = compile_native(C, L, fmap)
    names = C.all_inputs()
    for k in range(t):
        rng = random.Random(f"{seed}/{k}")
        pt = {n: sampler(rng) for n in names}
        if _nonzero_at(C, run, L, pt):
            return PitVerdict(NONZERO, "randomized", L, k + 1, witness=pt)
    return PitVerdict(ZERO_WITH_BOUND, "randomized", L, t, Fraction(d, size) ** t)


def pit(C: AlgCircuit, exact: bool | None = None, error_bound=Fraction(1, 2 ** 30), seed: int = 0,
        degree_cap: int = DEGREE_CAP, term_cap: int = TERM_CAP) -> PitVerdict:
    """Exact when asked (or when ``exact is None`` and expansion fits the
    caps), randomized otherwise."""
    if exact or exact is None:
        try:
            return pit_exact(C, degree_cap, term_cap, seed)
        except CapExceeded:
            if exact:
                raise
    return pit_randomized(C, error_bound, seed)


def false_zero_rate(C: AlgCircuit, sample: list, trials: int, seed: int = 0) -> float:
    """Fraction of uniform draws from ``sample`` (per variable) at which the
    circuit evaluates to zero."""
    run = compile_native(C)
    F = C.field
    rng = random.Random(seed)
    names = C.all_inputs()
    cache: dict = {}
    zeros = 0
    for _ in range(trials):
        key = tuple(rng.choice(sample) for _ in names)
        if key not in cache:
            nat = {n: F.to_native(F.coerce(v)) for n, v in zip(names, key)}
            cache[key] = all(v == 0 for v in run(nat))
        zeros += cache[key]
    return zeros / trials
