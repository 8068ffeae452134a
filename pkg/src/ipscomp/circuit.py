"""Algebraic circuits: a DAG of input / constant / linear-combination /
product / inversion gates over a :class:`~ipscomp.field.FieldDesc`.

Gates are plain tuples, referenced by their index in ``AlgCircuit.gates``::

    ("input", name)
    ("const", value)
    ("lin", ((coef, gate_id), ...))      # empty tuple is the zero polynomial
    ("mul", a, b)
    ("inv", a)                           # a must be syntactically constant

Inputs whose names appear in ``placeholders`` form the y-block of an IPS
certificate; all other inputs must be listed in ``var_names``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import (
    BadArity,
    CapExceeded,
    Cyclic,
    IpsError,
    NonConstantDenominator,
    NonInvertibleDenominator,
    ParseError,
)
from .field import FieldDesc, FieldMap, parse_field

# default expansion caps for exact identity testing
DEGREE_CAP = 4096
TERM_CAP = 200_000


@dataclass(frozen=True)
class AlgCircuit:
    field: FieldDesc
    gates: tuple
    outputs: tuple
    var_names: tuple
    placeholders: tuple = ()

    @property
    def output(self) -> int:
        if len(self.outputs) != 1:
            raise BadArity(f"circuit has {len(self.outputs)} outputs")
        return self.outputs[0]

    def all_inputs(self) -> tuple:
        return self.var_names + self.placeholders

    def __len__(self) -> int:
        return len(self.gates)


# ----------------------------------------------------------------- builder

class Builder:
    """Incremental, hash-consed circuit construction.

    Identical gates are shared, inputs are deduplicated by name, and a
    single-term ``1*g`` linear combination collapses to ``g``.  No algebraic
    simplification happens beyond that.
    """

    def __init__(self, field: FieldDesc):
        self.field = field
        self.gates: list = []
        self._index: dict = {}
        self._inputs: dict = {}
        self._placeholders: list = []

    def _add(self, g) -> int:
        i = self._index.get(g)
        if i is None:
            i = len(self.gates)
            self.gates.append(g)
            self._index[g] = i
        return i

    # leaves
    def input(self, name: str) -> int:
        i = self._inputs.get(name)
        if i is None:
            i = self._add(("input", name))
            self._inputs[name] = i
        return i

    def placeholder(self, name: str) -> int:
        if name not in self._inputs:
            self._placeholders.append(name)
        return self.input(name)

    def const(self, v) -> int:
        return self._add(("const", self.field.coerce(v)))

    def zero(self) -> int:
        return self._add(("lin", ()))

    def one(self) -> int:
        return self.const(1)

    # internal nodes
    def lin(self, terms: Iterable) -> int:
        F = self.field
        acc: dict = {}
        for c, g in terms:
            c = F.coerce(c)
            acc[g] = F.add(acc[g], c) if g in acc else c
        items = tuple(sorted((g, c) for g, c in acc.items() if not F.is_zero(c)))
        if len(items) == 1 and items[0][1] == F.one():
            return items[0][0]
        return self._add(("lin", tuple((c, g) for g, c in items)))

    def add(self, *gs: int) -> int:
        return self.lin((1, g) for g in gs)

    def sub(self, a: int, b: int) -> int:
        return self.lin([(1, a), (-1, b)])

    def neg(self, a: int) -> int:
        return self.lin([(-1, a)])

    def scale(self, c, a: int) -> int:
        return self.lin([(c, a)])

    def one_minus(self, a: int) -> int:
        return self.lin([(1, self.one()), (-1, a)])

    def mul(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        return self._add(("mul", a, b))

    def prod(self, gs: Sequence[int]) -> int:
        """Balanced product tree (the empty product is 1)."""
        gs = list(gs)
        if not gs:
            return self.one()
        while len(gs) > 1:
            nxt = [self.mul(gs[k], gs[k + 1]) for k in range(0, len(gs) - 1, 2)]
            if len(gs) % 2:
                nxt.append(gs[-1])
            gs = nxt
        return gs[0]

    def inv(self, a: int) -> int:
        return self._add(("inv", a))

    # splicing
    def splice(self, C: AlgCircuit, subst: dict | None = None, fmap: Callable | None = None) -> list[int]:
        """Copy ``C`` into this builder; returns the ids of its outputs.

        ``subst`` maps input names to gate ids already in this builder; other
        inputs are created by name (placeholders stay placeholders).
        ``fmap`` maps constants of ``C.field`` into this builder's field.
        """
        subst = subst or {}
        ph = set(C.placeholders)
        m: list = [None] * len(C.gates)
        conv = fmap if fmap is not None else (lambda v: v)
        for i, g in enumerate(C.gates):
            k = g[0]
            if k == "input":
                name = g[1]
                if name in subst:
                    m[i] = subst[name]
                elif name in ph:
                    m[i] = self.placeholder(name)
                else:
                    m[i] = self.input(name)
            elif k == "const":
                m[i] = self.const(conv(g[1]))
            elif k == "lin":
                m[i] = self.lin((conv(c), m[j]) for c, j in g[1])
            elif k == "mul":
                m[i] = self.mul(m[g[1]], m[g[2]])
            else:
                m[i] = self.inv(m[g[1]])
        return [m[o] for o in C.outputs]

    def build(self, outputs: Sequence[int], var_names: Sequence[str] | None = None,
              placeholders: Sequence[str] | None = None) -> AlgCircuit:
        """Freeze into an :class:`AlgCircuit`.

        Declared inputs come first (x-block, then y-block) followed by the
        gates reachable from ``outputs`` in construction order.
        """
        ph = tuple(self._placeholders if placeholders is None else placeholders)
        phs = set(ph)
        if var_names is None:
            var_names = [g[1] for g in self.gates if g[0] == "input" and g[1] not in phs]
        var_names = tuple(var_names)
        reach = set()
        stack = list(outputs)
        while stack:
            i = stack.pop()
            if i in reach:
                continue
            reach.add(i)
            stack.extend(_children(self.gates[i]))
        for i in reach:
            g = self.gates[i]
            if g[0] == "input" and g[1] not in phs and g[1] not in var_names:
                raise BadArity(f"input {g[1]!r} not declared")
        new_gates: list = []
        remap: dict = {}
        for name in var_names + ph:
            remap_key = self._inputs.get(name)
            nid = len(new_gates)
            new_gates.append(("input", name))
            if remap_key is not None:
                remap[remap_key] = nid
        for i in sorted(reach):
            if i in remap:
                continue
            new_gates.append(_relabel(self.gates[i], remap))
            remap[i] = len(new_gates) - 1
        return AlgCircuit(self.field, tuple(new_gates), tuple(remap[o] for o in outputs),
                          var_names, ph)


def _children(g) -> tuple:
    k = g[0]
    if k == "lin":
        return tuple(j for _, j in g[1])
    if k == "mul":
        return (g[1], g[2])
    if k == "inv":
        return (g[1],)
    return ()


def _relabel(g, m):
    k = g[0]
    if k == "lin":
        return ("lin", tuple((c, m[j]) for c, j in g[1]))
    if k == "mul":
        a, b = m[g[1]], m[g[2]]
        return ("mul", min(a, b), max(a, b))
    if k == "inv":
        return ("inv", m[g[1]])
    return g


children = _children


def single(field: FieldDesc, fn: Callable[[Builder], int], var_names: Sequence[str] = (),
           placeholders: Sequence[str] = ()) -> AlgCircuit:
    """Build a one-output circuit with ``fn(builder) -> output id``."""
    b = Builder(field)
    for v in var_names:
        b.input(v)
    for y in placeholders:
        b.placeholder(y)
    out = fn(b)
    return b.build([out], var_names, placeholders)


# -------------------------------------------------------------- validation

def constant_mask(C: AlgCircuit) -> list[bool]:
    """``True`` for gates whose cone contains no input."""
    mask = []
    for g in C.gates:
        if g[0] == "input":
            mask.append(False)
        else:
            mask.append(all(mask[j] for j in _children(g)))
    return mask


def validate(C: AlgCircuit) -> None:
    """Raise if any structural invariant of ``C`` fails."""
    known = set(C.all_inputs())
    if len(known) != len(C.var_names) + len(C.placeholders):
        raise BadArity("duplicate input names")
    seen_inputs = set()
    for i, g in enumerate(C.gates):
        k = g[0]
        if k == "input":
            if len(g) != 2:
                raise BadArity(f"gate {i}")
            if g[1] not in known:
                raise BadArity(f"undeclared input {g[1]!r}")
            if g[1] in seen_inputs:
                raise BadArity(f"input {g[1]!r} appears twice")
            seen_inputs.add(g[1])
        elif k == "const":
            if len(g) != 2:
                raise BadArity(f"gate {i}")
            C.field.coerce(g[1])
        elif k == "lin":
            if len(g) != 2:
                raise BadArity(f"gate {i}")
        elif k == "mul":
            if len(g) != 3:
                raise BadArity(f"mul gate {i} needs fan-in 2")
        elif k == "inv":
            if len(g) != 2:
                raise BadArity(f"inv gate {i} needs fan-in 1")
        else:
            raise BadArity(f"unknown gate kind {k!r}")
        for j in _children(g):
            if not (0 <= j < i):
                raise Cyclic(f"gate {i} references {j}")
    for o in C.outputs:
        if not (0 <= o < len(C.gates)):
            raise BadArity(f"output {o} out of range")
    mask = constant_mask(C)
    vals = None
    for i, g in enumerate(C.gates):
        if g[0] == "inv":
            if not mask[g[1]]:
                raise NonConstantDenominator(f"inv gate {i}")
            if vals is None:
                vals = _constant_values(C, mask)
            if C.field.is_zero(vals[g[1]]):
                raise NonInvertibleDenominator(f"inv gate {i}")


def _constant_values(C, mask):
    F = C.field
    vals: list = [None] * len(C.gates)
    for i, g in enumerate(C.gates):
        if not mask[i]:
            continue
        k = g[0]
        if k == "const":
            vals[i] = g[1]
        elif k == "lin":
            acc = F.zero()
            for c, j in g[1]:
                acc = F.add(acc, F.mul(c, vals[j]))
            vals[i] = acc
        elif k == "mul":
            vals[i] = F.mul(vals[g[1]], vals[g[2]])
        elif k == "inv":
            if F.is_zero(vals[g[1]]):
                raise NonInvertibleDenominator(f"inv gate {i}")
            vals[i] = F.inv(vals[g[1]])
    return vals


# -------------------------------------------------------------- evaluation

def compile_native(C: AlgCircuit, target: FieldDesc | None = None, fmap: Callable | None = None):
    """Return ``run(values) -> outputs`` working on native field values.

    ``values`` is a mapping from input name to a native element of
    ``target``.  Constants are mapped once, up front.
    """
    target = target or C.field
    if fmap is None:
        fmap = FieldMap(C.field, target)
    to_n = target.to_native
    one_src = C.field.one()
    mone_src = C.field.neg(one_src)
    zero_n = to_n(target.zero())
    prog = []
    for g in C.gates:
        k = g[0]
        if k == "input":
            prog.append((0, g[1]))
        elif k == "const":
            prog.append((1, to_n(fmap(g[1]))))
        elif k == "lin":
            terms = []
            for c, j in g[1]:
                if c == one_src:
                    terms.append((1, None, j))
                elif c == mone_src:
                    terms.append((-1, None, j))
                else:
                    terms.append((0, to_n(fmap(c)), j))
            prog.append((2, tuple(terms)))
        elif k == "mul":
            prog.append((3, g[1], g[2]))
        else:
            prog.append((4, g[1]))
    outs = C.outputs
    kind = target.native_kind()[0]

    def inverse(x):
        if x == 0:
            raise NonInvertibleDenominator("inverse of zero during evaluation")
        if kind == "fq":
            return x.inverse()
        return 1 / x

    def run(values):
        v = [None] * len(prog)
        for i, op in enumerate(prog):
            t = op[0]
            if t == 3:
                v[i] = v[op[1]] * v[op[2]]
            elif t == 2:
                acc = zero_n
                for s, c, j in op[1]:
                    if s == 1:
                        acc = acc + v[j]
                    elif s == -1:
                        acc = acc - v[j]
                    else:
                        acc = acc + c * v[j]
                v[i] = acc
            elif t == 0:
                v[i] = values[op[1]]
            elif t == 1:
                v[i] = op[1]
            else:
                v[i] = inverse(v[op[1]])
        return [v[o] for o in outs]

    return run


def evaluate(C: AlgCircuit, assignment: dict, target: FieldDesc | None = None,
             fmap: Callable | None = None) -> list:
    """Evaluate every output of ``C`` at ``assignment`` (name -> element of
    ``target``).  Constants are carried to ``target`` by the canonical map;
    a rational constant whose denominator vanishes raises
    :class:`UnmappableConstant`."""
    target = target or C.field
    run = compile_native(C, target, fmap)
    nat = {k: target.to_native(target.coerce(v)) for k, v in assignment.items()}
    missing = [n for n in C.all_inputs() if n not in nat]
    if missing:
        raise BadArity(f"no value for inputs {missing}")
    return [target.from_native(x) for x in run(nat)]


# ---------------------------------------------------------------- measures

def sdeg(C: AlgCircuit, per_gate: bool = False):
    d: list = []
    for g in C.gates:
        k = g[0]
        if k in ("input", "const"):
            d.append(1)
        elif k == "lin":
            d.append(max((d[j] for _, j in g[1]), default=1))
        elif k == "mul":
            d.append(d[g[1]] + d[g[2]])
        else:
            d.append(d[g[1]])
    if per_gate:
        return d
    return max((d[o] for o in C.outputs), default=1)


def depth(C: AlgCircuit) -> int:
    dp: list = []
    for g in C.gates:
        dp.append(max((dp[j] + 1 for j in _children(g)), default=0))
    return max((dp[o] for o in C.outputs), default=0)


def proddepth(C: AlgCircuit) -> int:
    dp: list = []
    for g in C.gates:
        base = max((dp[j] for j in _children(g)), default=0)
        dp.append(base + (1 if g[0] == "mul" else 0))
    return max((dp[o] for o in C.outputs), default=0)


def wires(C: AlgCircuit) -> int:
    return sum(len(_children(g)) for g in C.gates)


def measures(C: AlgCircuit) -> dict:
    return {
        "wires": wires(C),
        "gates": len(C.gates),
        "depth": depth(C),
        "proddepth": proddepth(C),
        "sdeg": sdeg(C),
        "bitsize": 8 * len(to_netlist(C).encode()),
    }


# ------------------------------------------------------------------ expand

class SparsePoly(dict):
    """``{exponent tuple: nonzero coefficient}`` over a fixed variable order."""

    def __init__(self, field: FieldDesc, nvars: int, data=None):
        super().__init__(data or {})
        self.field = field
        self.nvars = nvars

    def degree(self) -> int:
        return max((sum(e) for e in self), default=-1)

    def is_zero(self) -> bool:
        return not self

    def evaluate(self, point: Sequence):
        F = self.field
        acc = F.zero()
        for e, c in self.items():
            t = c
            for x, k in zip(point, e):
                if k:
                    t = F.mul(t, F.pow(x, k))
            acc = F.add(acc, t)
        return acc


def _padd(F, a: dict, b: dict, cb=None) -> dict:
    out = dict(a)
    for e, c in b.items():
        if cb is not None:
            c = F.mul(cb, c)
        if e in out:
            s = F.add(out[e], c)
            if F.is_zero(s):
                del out[e]
            else:
                out[e] = s
        elif not F.is_zero(c):
            out[e] = c
    return out


def _pmul(F, a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            c = F.mul(ca, cb)
            if e in out:
                s = F.add(out[e], c)
                if F.is_zero(s):
                    del out[e]
                else:
                    out[e] = s
            else:
                out[e] = c
    return out


def expand(C: AlgCircuit, degree_cap: int = DEGREE_CAP, term_cap: int = TERM_CAP,
           variables: Sequence[str] | None = None) -> list[SparsePoly]:
    """Exact sparse expansion of every output.

    Variables are ordered as ``variables`` (default ``C.all_inputs()``).
    Raises :class:`CapExceeded` when an intermediate polynomial has degree
    above ``degree_cap`` or more than ``term_cap`` terms, or when the total
    work (term products times variable count) exceeds ``100 * term_cap``.
    """
    F = C.field
    names = tuple(variables) if variables is not None else C.all_inputs()
    pos = {n: k for k, n in enumerate(names)}
    n = len(names)
    zero_e = (0,) * n
    sd = sdeg(C, per_gate=True)
    needed = _needed(C)
    polys: list = [None] * len(C.gates)
    work = 0
    for i, g in enumerate(C.gates):
        if not needed[i]:
            continue
        k = g[0]
        if k == "input":
            e = [0] * n
            e[pos[g[1]]] = 1
            p = {tuple(e): F.one()}
        elif k == "const":
            p = {} if F.is_zero(g[1]) else {zero_e: g[1]}
        elif k == "lin":
            p = {}
            for c, j in g[1]:
                p = _padd(F, p, polys[j], c)
        elif k == "mul":
            a, b = polys[g[1]], polys[g[2]]
            work += len(a) * len(b) * max(n, 20)
            if work > 100 * term_cap:
                raise CapExceeded(f"expansion work above {100 * term_cap} exponent operations at gate {i}")
            p = _pmul(F, a, b)
        else:
            src = polys[g[1]]
            if any(e != zero_e for e in src):
                raise NonConstantDenominator(f"inv gate {i}")
            c = src.get(zero_e, F.zero())
            if F.is_zero(c):
                raise NonInvertibleDenominator(f"inv gate {i}")
            p = {zero_e: F.inv(c)}
        if len(p) > term_cap:
            raise CapExceeded(f"{len(p)} terms at gate {i}")
        if p and sd[i] > degree_cap and max(sum(e) for e in p) > degree_cap:
            raise CapExceeded(f"degree above {degree_cap} at gate {i}")
        polys[i] = p
    return [SparsePoly(F, n, polys[o]) for o in C.outputs]


def _flint_ring(F: FieldDesc, names):
    import flint

    names = tuple(names)
    if F.is_rational:
        ctx = flint.fmpq_mpoly_ctx.get(names)
        return ctx, lambda c: flint.fmpq(Fraction(c).numerator, Fraction(c).denominator)
    if F.degree != 1:
        return None
    if F.char < 2 ** 63:
        ctx = flint.nmod_mpoly_ctx.get(names, modulus=F.char)
    else:
        ctx = flint.fmpz_mod_mpoly_ctx.get(names, modulus=F.char)
    return ctx, int


def expand_flint(C: AlgCircuit, degree_cap: int = DEGREE_CAP, term_cap: int = TERM_CAP,
                 variables: Sequence[str] | None = None):
    """Expansion into python-flint multivariate polynomials.

    Returns ``None`` over extension fields (no flint type); raises
    :class:`CapExceeded` on the same caps as :func:`expand`.
    """
    F = C.field
    names = tuple(variables) if variables is not None else C.all_inputs()
    ring = _flint_ring(F, names)
    if ring is None:
        return None
    ctx, conv = ring
    gens = ctx.gens()
    pos = {n: k for k, n in enumerate(names)}
    needed = _needed(C)
    polys: list = [None] * len(C.gates)
    for i, g in enumerate(C.gates):
        if not needed[i]:
            continue
        k = g[0]
        if k == "input":
            p = gens[pos[g[1]]]
        elif k == "const":
            p = ctx.constant(conv(g[1]))
        elif k == "lin":
            p = ctx.constant(0)
            for c, j in g[1]:
                p = p + conv(c) * polys[j]
        elif k == "mul":
            a, b = polys[g[1]], polys[g[2]]
            # flint stores a full exponent vector per term: bound the product's footprint
            if len(a) * len(b) * max(8, len(names)) > 20000 * term_cap:
                raise CapExceeded(f"product of {len(a)} x {len(b)} terms at gate {i}")
            p = a * b
        else:
            src = polys[g[1]]
            if src.total_degree() > 0:
                raise NonConstantDenominator(f"inv gate {i}")
            if src.is_zero():
                raise NonInvertibleDenominator(f"inv gate {i}")
            c = src.coeffs()[0]
            p = ctx.constant(1 / c if F.is_rational else pow(int(c), -1, F.char))
        if len(p) > term_cap:
            raise CapExceeded(f"{len(p)} terms at gate {i}")
        if p.total_degree() > degree_cap:
            raise CapExceeded(f"degree above {degree_cap} at gate {i}")
        polys[i] = p
    return [polys[o] for o in C.outputs]


def _needed(C):
    need = [False] * len(C.gates)
    for o in C.outputs:
        need[o] = True
    for i in range(len(C.gates) - 1, -1, -1):
        if need[i]:
            for j in _children(C.gates[i]):
                need[j] = True
    return need


# ----------------------------------------------------------------- netlist

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\[\]]*$")


def to_netlist(C: AlgCircuit) -> str:
    """Canonical text form: one gate per line, internal gates named ``%i``."""
    F = C.field
    names: list = []
    lines = [f"field {F.to_text()}"]
    ph = set(C.placeholders)
    for i, g in enumerate(C.gates):
        k = g[0]
        if k == "input":
            names.append(g[1])
            lines.append(("placeholder " if g[1] in ph else "input ") + g[1])
            continue
        nm = f"%{i}"
        names.append(nm)
        if k == "const":
            lines.append(f"const {nm} {F.format_elem(g[1])}")
        elif k == "lin":
            terms = " + ".join(f"{F.format_elem(c)}*{names[j]}" for c, j in g[1])
            lines.append(f"lin {nm} {terms}".rstrip())
        elif k == "mul":
            lines.append(f"mul {nm} {names[g[1]]} {names[g[2]]}")
        else:
            lines.append(f"inv {nm} {names[g[1]]}")
    # declared but absent inputs never happen: build() always emits them
    lines.append("output " + " ".join(names[o] for o in C.outputs))
    return "\n".join(lines) + "\n"


def parse_netlist(text: str, field: FieldDesc | None = None) -> AlgCircuit:
    """Parse the netlist format; errors carry 1-based line numbers."""
    F = field
    gates: list = []
    sym: dict = {}
    var_names: list = []
    placeholders: list = []
    outputs = None

    def ref(tok, ln):
        if tok not in sym:
            raise ParseError(f"unknown reference {tok!r}", ln)
        return sym[tok]

    def define(name, g, ln):
        if name in sym:
            raise ParseError(f"duplicate name {name!r}", ln)
        sym[name] = len(gates)
        gates.append(g)

    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0]
        try:
            if kw == "field":
                if gates:
                    raise ParseError("field must precede gates", ln)
                try:
                    F = parse_field(line[len("field"):])
                except IpsError as exc:
                    raise ParseError(str(exc), ln) from None
            elif F is None:
                raise ParseError("missing field line", ln)
            elif kw in ("input", "placeholder"):
                if len(parts) != 2 or not _NAME_RE.match(parts[1]):
                    raise ParseError(f"bad {kw} line", ln)
                define(parts[1], ("input", parts[1]), ln)
                (placeholders if kw == "placeholder" else var_names).append(parts[1])
            elif kw == "const":
                if len(parts) != 3:
                    raise ParseError("const takes a name and a value", ln)
                define(parts[1], ("const", F.parse_elem(parts[2])), ln)
            elif kw == "lin":
                if len(parts) < 2:
                    raise ParseError("lin needs a name", ln)
                terms = []
                for tok in parts[2:]:
                    if tok == "+":
                        continue
                    if "*" not in tok:
                        raise ParseError(f"bad term {tok!r}", ln)
                    c, r = tok.rsplit("*", 1)
                    terms.append((F.parse_elem(c), ref(r, ln)))
                define(parts[1], ("lin", tuple(terms)), ln)
            elif kw == "mul":
                if len(parts) != 4:
                    raise ParseError("mul takes exactly two arguments", ln)
                a, b = ref(parts[2], ln), ref(parts[3], ln)
                define(parts[1], ("mul", min(a, b), max(a, b)), ln)
            elif kw == "inv":
                if len(parts) != 3:
                    raise ParseError("inv takes exactly one argument", ln)
                define(parts[1], ("inv", ref(parts[2], ln)), ln)
            elif kw == "output":
                if outputs is not None:
                    raise ParseError("second output line", ln)
                outputs = tuple(ref(t, ln) for t in parts[1:])
            else:
                raise ParseError(f"unknown keyword {kw!r}", ln)
        except ParseError as exc:
            if exc.line is None:
                raise ParseError(str(exc), ln) from None
            raise
    if F is None:
        raise ParseError("missing field line")
    if outputs is None:
        raise ParseError("missing output line")
    C = AlgCircuit(F, tuple(gates), outputs, tuple(var_names), tuple(placeholders))
    validate(C)
    return C


def substitute(C: AlgCircuit, subst: dict[str, AlgCircuit], var_names: Sequence[str] | None = None) -> AlgCircuit:
    """Replace named inputs of ``C`` by single-output circuits."""
    b = Builder(C.field)
    m = {}
    for name, D in subst.items():
        m[name] = b.splice(D)[0]
    outs = b.splice(C, m)
    if var_names is None:
        seen = []
        for g in b.gates:
            if g[0] == "input" and g[1] not in b._placeholders and g[1] not in seen:
                seen.append(g[1])
        var_names = seen
    return b.build(outs, var_names)

