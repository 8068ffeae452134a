"""Exact arithmetic over F_p, F_{p^e} and Q, plus prime / irreducible search
and the choice of a field large enough for identity testing.

Element representations are plain Python values so they hash and compare
cheaply:

* ``Q``         -> ``fractions.Fraction``
* ``F_p``       -> ``int`` in ``range(p)``
* ``F_{p^e}``   -> ``tuple`` of ``e`` residues, power basis ``1, t, ..., t^{e-1}``

Heavy evaluation work goes through a *native* backend (python-flint types),
reachable with :meth:`FieldDesc.to_native` / :meth:`FieldDesc.from_native`.
"""
from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterator

import flint

from .errors import (
    DegreeMismatch,
    DivisionByZero,
    FieldMismatch,
    NotIrreducible,
    NotPrime,
    ParseError,
    UnmappableConstant,
    UnsupportedField,
)

# ---------------------------------------------------------------- primality

MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
# The first 13 prime bases are a proven witness set below this bound.
MR_DETERMINISTIC_LIMIT = 3317044064679887385961981


def _mr_round(n: int, d: int, s: int, a: int) -> bool:
    x = pow(a, d, n)
    if x in (1, n - 1):
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int, rounds: int = 40, seed: int = 0) -> bool:
    """Miller-Rabin.

    Deterministic for ``n < MR_DETERMINISTIC_LIMIT``; above it the fixed bases
    are followed by ``rounds`` seeded random bases, so a composite slips
    through with probability at most ``4**-rounds``.
    """
    if n < 2:
        return False
    for q in MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if not all(_mr_round(n, d, s, a) for a in MR_BASES):
        return False
    if n < MR_DETERMINISTIC_LIMIT:
        return True
    rng = random.Random(seed ^ n)
    return all(_mr_round(n, d, s, rng.randrange(2, n - 1)) for _ in range(rounds))


def find_prime_above(bound: int, seed: int = 0) -> int:
    """A prime ``p`` with ``bound < p <= 2*bound``.

    Candidates are random bit strings of the right length with the leading
    bit set (seeded); after a fixed budget we scan upward, which Bertrand's
    postulate guarantees will succeed inside the interval.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    lo, hi = bound + 1, 2 * bound
    rng = random.Random(seed)
    budget = 16 * max(1, hi.bit_length()) ** 2
    for _ in range(budget):
        c = rng.randint(lo, hi)
        if is_prime(c):
            return c
    for c in range(lo, hi + 1):
        if is_prime(c):
            return c
    raise AssertionError("Bertrand interval without a prime")  # pragma: no cover


# --------------------------------------------------------- irreducibility

def _prime_factors(n: int) -> list[int]:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(p: int, coeffs) -> bool:
    """Rabin's test for a monic polynomial (coefficients low to high) over F_p.

    f of degree e is irreducible iff x^(p^e) = x mod f and
    gcd(x^(p^(e/r)) - x, f) = 1 for every prime r | e.
    """
    coeffs = [c % p for c in coeffs]
    e = len(coeffs) - 1
    if e < 1:
        return False
    if e == 1:
        return True
    R = flint.fmpz_mod_poly_ctx(p)
    f = R(coeffs)
    x = R([0, 1])

    def frob(k):
        # x^(p^k) mod f by k successive p-th powers
        y = x
        for _ in range(k):
            y = y.pow_mod(p, f)
        return y

    if frob(e) != x % f:
        return False
    for r in _prime_factors(e):
        g = (frob(e // r) - x).gcd(f)
        if g.degree() != 0:
            return False
    return True


def find_irreducible(p: int, e: int, seed: int = 0) -> tuple[int, ...]:
    """Monic irreducible polynomial of degree ``e`` over ``F_p``, low to high."""
    if e < 2:
        raise DegreeMismatch(f"extension degree must be >= 2, got {e}")
    if not is_prime(p):
        raise NotPrime(p)
    rng = random.Random((seed << 20) ^ (p * 1000003 + e))
    for _ in range(40 * e + 40):
        cand = [rng.randrange(p) for _ in range(e)] + [1]
        if cand[0] == 0:
            continue
        if is_irreducible(p, cand):
            return tuple(cand)
    for tail in itertools.product(range(p), repeat=e):
        cand = list(tail) + [1]
        if is_irreducible(p, cand):
            return tuple(cand)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


# ------------------------------------------------------------ descriptors

@functools.lru_cache(maxsize=256)
def _flint_ctx(char: int, degree: int, modulus: tuple | None):
    if degree == 1:
        if char < (1 << 62):
            return ("nmod", char)
        return ("fmpz_mod", flint.fmpz_mod_ctx(char))
    R = flint.fmpz_mod_poly_ctx(char)
    return ("fq", flint.fq_default_ctx(char, degree, "t", modulus=R(list(modulus))))


@dataclass(frozen=True)
class FieldDesc:
    """A prime field, an extension ``F_p[t]/(f)``, or the rationals.

    ``modulus`` is stored low-to-high and monic (length ``degree + 1``).
    Construct through :func:`make_field` so the invariants are checked.
    """

    char: int
    degree: int = 1
    modulus: tuple | None = dc_field(default=None)

    # -- basic facts
    @property
    def is_rational(self) -> bool:
        return self.char == 0

    @property
    def is_finite(self) -> bool:
        return self.char > 0

    @property
    def order(self) -> int | None:
        return self.char ** self.degree if self.char else None

    def prime_field(self) -> "FieldDesc":
        return FieldDesc(self.char, 1, None)

    # -- elements
    def zero(self):
        if self.char == 0:
            return Fraction(0)
        return 0 if self.degree == 1 else (0,) * self.degree

    def one(self):
        return self.from_int(1)

    def from_int(self, n: int):
        if self.char == 0:
            return Fraction(n)
        if self.degree == 1:
            return n % self.char
        return (n % self.char,) + (0,) * (self.degree - 1)

    def from_fraction(self, q) -> object:
        """Image of a rational under the canonical map Q -> this field."""
        q = Fraction(q)
        if self.char == 0:
            return q
        if q.denominator % self.char == 0:
            raise UnmappableConstant(f"{q} has denominator divisible by {self.char}")
        v = q.numerator * pow(q.denominator, -1, self.char) % self.char
        return self.from_int(v)

    def gen(self):
        if self.degree == 1:
            raise DegreeMismatch("prime field has no generator t")
        return (0, 1) + (0,) * (self.degree - 2)

    def coerce(self, a):
        """Validate / normalise a raw value into this field's representation."""
        if self.char == 0:
            if isinstance(a, (int, Fraction)):
                return Fraction(a)
            raise FieldMismatch(f"{a!r} is not rational")
        if self.degree == 1:
            if isinstance(a, Fraction):
                return self.from_fraction(a)
            if isinstance(a, int):
                return a % self.char
            raise FieldMismatch(f"{a!r} is not an F_{self.char} residue")
        if isinstance(a, int):
            return self.from_int(a)
        a = tuple(a)
        if len(a) != self.degree:
            raise FieldMismatch(f"expected {self.degree} coordinates, got {len(a)}")
        return tuple(int(c) % self.char for c in a)

    def is_zero(self, a) -> bool:
        return a == self.zero()

    def add(self, a, b):
        if self.char == 0:
            return a + b
        if self.degree == 1:
            return (a + b) % self.char
        return tuple((x + y) % self.char for x, y in zip(a, b))

    def neg(self, a):
        if self.char == 0:
            return -a
        if self.degree == 1:
            return -a % self.char
        return tuple(-x % self.char for x in a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.char == 0:
            return a * b
        if self.degree == 1:
            return a * b % self.char
        return self.from_native(self.to_native(a) * self.to_native(b))

    def inv(self, a):
        if self.is_zero(a):
            raise DivisionByZero("inverse of zero")
        if self.char == 0:
            return 1 / a
        if self.degree == 1:
            return pow(a, -1, self.char)
        return self.from_native(self.to_native(a).inverse())

    def pow(self, a, k: int):
        if k < 0:
            return self.pow(self.inv(a), -k)
        if self.char == 0:
            return a ** k
        if self.degree == 1:
            return pow(a, k, self.char)
        return self.from_native(self.to_native(a) ** k)

    def elements(self) -> Iterator:
        if self.char == 0:
            raise UnsupportedField("Q is infinite")
        if self.degree == 1:
            yield from range(self.char)
        else:
            for c in itertools.product(range(self.char), repeat=self.degree):
                yield tuple(reversed(c))

    def random_element(self, rng: random.Random):
        if self.char == 0:
            raise UnsupportedField("no uniform distribution on Q")
        if self.degree == 1:
            return rng.randrange(self.char)
        return tuple(rng.randrange(self.char) for _ in range(self.degree))

    # -- native backend
    def native_kind(self):
        if self.char == 0:
            return ("q", None)
        return _flint_ctx(self.char, self.degree, self.modulus)

    def to_native(self, a):
        kind, ctx = self.native_kind()
        if kind == "q":
            return Fraction(a)
        if kind == "nmod":
            return flint.nmod(a, ctx)
        if kind == "fmpz_mod":
            return ctx(a)
        return ctx(list(a))

    def from_native(self, x):
        kind, ctx = self.native_kind()
        if kind == "q":
            return x
        if kind in ("nmod", "fmpz_mod"):
            return int(x)
        lst = [int(c) for c in x.to_list()][: self.degree]
        return tuple(lst + [0] * (self.degree - len(lst)))

    # -- text
    def to_text(self) -> str:
        if self.char == 0:
            return "Q"
        if self.degree == 1:
            return f"F {self.char}"
        hi_lo = ",".join(str(c) for c in reversed(self.modulus))
        return f"F {self.char}^{self.degree} / {hi_lo}"

    def format_elem(self, a) -> str:
        if self.char == 0:
            a = Fraction(a)
            return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
        if self.degree == 1:
            return str(a)
        return ",".join(str(c) for c in a)

    def parse_elem(self, text: str):
        text = text.strip()
        try:
            if self.char == 0:
                return Fraction(text)
            if "," in text:
                return self.coerce(tuple(int(c) for c in text.split(",")))
            if "/" in text:
                return self.from_fraction(Fraction(text))
            return self.from_int(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad field element {text!r}: {exc}") from None

    def __str__(self) -> str:
        return self.to_text()


Q = FieldDesc(0, 1, None)


def make_field(characteristic: int, ext_degree: int = 1, modulus_poly=None) -> FieldDesc:
    """Validated field descriptor.

    ``modulus_poly`` is given low-to-high; it must be present exactly when the
    field is a proper extension of a prime field.
    """
    if characteristic == 0:
        if ext_degree != 1 or modulus_poly is not None:
            raise DegreeMismatch("Q takes no extension data")
        return Q
    if not is_prime(characteristic):
        raise NotPrime(characteristic)
    if ext_degree < 1:
        raise DegreeMismatch(f"ext_degree {ext_degree} < 1")
    if ext_degree == 1:
        if modulus_poly is not None:
            raise DegreeMismatch("prime field takes no modulus")
        return FieldDesc(characteristic, 1, None)
    if modulus_poly is None:
        raise DegreeMismatch("extension needs a modulus polynomial")
    m = tuple(int(c) % characteristic for c in modulus_poly)
    if len(m) != ext_degree + 1:
        raise DegreeMismatch(f"modulus has degree {len(m) - 1}, expected {ext_degree}")
    if m[-1] != 1:
        raise NotIrreducible("modulus must be monic")
    if not is_irreducible(characteristic, m):
        raise NotIrreducible(f"{m} is reducible over F_{characteristic}")
    return FieldDesc(characteristic, ext_degree, m)


def parse_field(text: str) -> FieldDesc:
    """Inverse of :meth:`FieldDesc.to_text`."""
    s = text.strip()
    if s == "Q":
        return Q
    try:
        if not s.startswith("F"):
            raise ValueError
        body = s[1:].strip()
        if "/" in body:
            head, mod = body.split("/", 1)
            p, e = head.strip().split("^")
            coeffs = [int(c) for c in mod.split(",")]
            return make_field(int(p), int(e), tuple(reversed(coeffs)))
        if "^" in body:
            raise ValueError("extension without modulus")
        return make_field(int(body))
    except ValueError as exc:
        raise ParseError(f"bad field description {text!r} {exc}".strip()) from None


def extension_of(base: FieldDesc, m: int, seed: int = 0) -> tuple[FieldDesc, object]:
    """A degree-``m`` extension ``L`` of the finite field ``base``.

    Returns ``(L, gamma)`` where ``gamma`` is the image in ``L`` of the
    generator of ``base`` (``None`` when ``base`` is prime).
    """
    if not base.is_finite:
        raise UnsupportedField("extensions only of finite fields")
    if m == 1:
        return base, (base.gen() if base.degree > 1 else None)
    e = base.degree * m
    L = make_field(base.char, e, find_irreducible(base.char, e, seed))
    if base.degree == 1:
        return L, None
    return L, find_embedding(base, L)


def find_embedding(src: FieldDesc, tgt: FieldDesc):
    """Image of ``src``'s generator under some embedding into ``tgt``."""
    if src.char != tgt.char or tgt.degree % src.degree:
        raise FieldMismatch(f"{src} does not embed in {tgt}")
    if src.degree == 1:
        return None  # prime fields embed uniquely
    kind, ctx = tgt.native_kind()
    if kind != "fq":
        raise FieldMismatch("target must be a proper extension")
    P = flint.fq_default_poly_ctx(ctx)
    roots = P([ctx(c) for c in src.modulus]).roots()
    images = sorted(tgt.from_native(r) for r, _ in roots)
    if not images:
        raise FieldMismatch(f"{src} has no embedding in {tgt}")  # pragma: no cover
    return images[0]


class FieldMap:
    """Ring homomorphism from ``source`` into ``target``.

    Q -> F_p reduces fractions (raising :class:`UnmappableConstant`), and a
    finite field maps into an extension via the recorded generator image.
    """

    def __init__(self, source: FieldDesc, target: FieldDesc, gen_image=None):
        self.source, self.target, self.gen_image = source, target, gen_image
        if source == target:
            self._kind = "id"
        elif source.is_rational:
            self._kind = "q"
        elif source.char != target.char:
            raise FieldMismatch(f"no map {source} -> {target}")
        elif source.degree == 1:
            self._kind = "prime"
        else:
            if gen_image is None:
                self.gen_image = find_embedding(source, target)
            self._kind = "ext"
            powers = [target.one()]
            for _ in range(source.degree - 1):
                powers.append(target.mul(powers[-1], self.gen_image))
            self._powers = powers

    def __call__(self, a):
        if self._kind == "id":
            return a
        if self._kind == "q":
            return self.target.from_fraction(a)
        if self._kind == "prime":
            return self.target.from_int(a)
        acc = self.target.zero()
        for c, pw in zip(a, self._powers):
            if c:
                acc = self.target.add(acc, self.target.mul(self.target.from_int(c), pw))
        return acc


# ------------------------------------------------------------ FieldElem

@dataclass(frozen=True)
class FieldElem:
    """A value tagged with its field; operators refuse to mix fields."""

    field: FieldDesc
    value: object

    def _chk(self, other):
        if not isinstance(other, FieldElem):
            return FieldElem(self.field, self.field.coerce(other))
        if other.field != self.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")
        return other

    def __add__(self, o):
        o = self._chk(o)
        return FieldElem(self.field, self.field.add(self.value, o.value))

    def __sub__(self, o):
        o = self._chk(o)
        return FieldElem(self.field, self.field.sub(self.value, o.value))

    def __mul__(self, o):
        o = self._chk(o)
        return FieldElem(self.field, self.field.mul(self.value, o.value))

    def __neg__(self):
        return FieldElem(self.field, self.field.neg(self.value))

    def __pow__(self, k):
        return FieldElem(self.field, self.field.pow(self.value, k))

    def inv(self):
        return FieldElem(self.field, self.field.inv(self.value))

    def __str__(self):
        return self.field.format_elem(self.value)


def arith(op: str, a: FieldElem, b=None) -> FieldElem:
    """Dispatch ``add|sub|mul|inv|pow`` on tagged elements."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inv()
    if op == "pow":
        return a ** int(b)
    raise ValueError(f"unknown op {op!r}")


# ------------------------------------------------------- field selection

@dataclass(frozen=True)
class FieldSelection:
    """Outcome of :func:`select_field`.

    ``rationale`` is ``("PrimeAboveBound", bound)`` for a rational source or
    ``("ExtensionDegree", e)`` for a finite one.  ``gen_image`` embeds a
    non-prime finite source into the target.
    """

    source: FieldDesc
    target: FieldDesc
    rationale: tuple
    gen_image: object = None

    def field_map(self) -> FieldMap:
        return FieldMap(self.source, self.target, self.gen_image)


def ceil_log(q: int, n: int) -> int:
    """Smallest k >= 0 with q**k >= n."""
    k, acc = 0, 1
    while acc < n:
        acc *= q
        k += 1
    return k


def constant_bitsize(C) -> int:
    """Largest bit length among numerators and denominators of C's constants."""
    s = 0
    for g in C.gates:
        vals = []
        if g[0] == "const":
            vals.append(g[1])
        elif g[0] == "lin":
            vals.extend(c for c, _ in g[1])
        for v in vals:
            v = Fraction(v)
            s = max(s, abs(v.numerator).bit_length(), v.denominator.bit_length())
    return s


def select_field(C, seed: int = 0, bitsize: int | None = None) -> FieldSelection:
    """Pick a field on which the polynomial of ``C`` is nonzero as a function
    whenever it is nonzero as a polynomial.

    Over Q we reduce modulo a prime ``p`` in ``(B, 2B]`` with
    ``B = max(2^s, sdeg)``; ``s`` defaults to :func:`constant_bitsize`.
    Over ``F_q`` we extend by degree ``ceil(log_q sdeg) + 1``.
    """
    from .circuit import sdeg

    d = sdeg(C)
    F = C.field
    if F.is_rational:
        s = constant_bitsize(C) if bitsize is None else bitsize
        bound = max(2 ** s, d)
        p = find_prime_above(bound, seed)
        return FieldSelection(F, make_field(p), ("PrimeAboveBound", bound))
    if F.is_finite:
        q = F.order
        e = ceil_log(q, d) + 1
        L, gamma = extension_of(F, e, seed)
        return FieldSelection(F, L, ("ExtensionDegree", e), gamma)
    raise UnsupportedField(str(F))  # pragma: no cover
