"""Gate-by-gate encoding of an algebraic circuit as a system of degree <= 2
equations, and IPS refutations of that system when the circuit is zero."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .circuit import AlgCircuit, Builder, _constant_values, constant_mask, compile_native, parse_netlist, to_netlist
from .errors import CircuitError, MultiOutput, ParseError, UnknownGate
from .field import FieldDesc
from .ips import Deriv, DerivCtx, IPSCert


@dataclass(frozen=True)
class EquationSystem:
    field: FieldDesc
    equations: tuple          # AlgCircuits over var_names, each "= 0"
    gate_vars: dict           # gate id -> variable name
    z_var: str
    source: AlgCircuit
    var_names: tuple          # x-block, then gate variables, then z
    eq_of_gate: dict          # gate id -> index into equations

    @property
    def last(self) -> int:
        return len(self.equations) - 1

    def to_text(self) -> str:
        out = ["vars"]
        out += [f"{i} {n}" for i, n in sorted(self.gate_vars.items())]
        out.append(f"z {self.z_var}")
        out.append("equations")
        for k, eq in enumerate(self.equations):
            out.append(f"equation {k}")
            out.append(to_netlist(eq).rstrip("\n"))
        return "\n".join(out) + "\n"


def _prefixes(names):
    taken = set(names)
    gp = "g"
    while any(re.fullmatch(re.escape(gp) + r"\d+", n) for n in taken):
        gp = "_" + gp
    z = "z"
    while z in taken:
        z = "_" + z
    return gp, z


def encode(C: AlgCircuit) -> EquationSystem:
    """One equation per gate plus ``1 - z*g_C``."""
    if len(C.outputs) != 1:
        raise MultiOutput(f"circuit has {len(C.outputs)} outputs")
    F = C.field
    gp, z = _prefixes(C.var_names)
    gv = {i: f"{gp}{i}" for i in range(len(C.gates))}
    names = tuple(C.var_names) + tuple(gv[i] for i in range(len(C.gates))) + (z,)
    eqs = []
    eq_of = {}
    for i, g in enumerate(C.gates):
        b = Builder(F)
        for n in names:
            b.input(n)
        G = b.input(gv[i])
        k = g[0]
        if k == "input":
            e = b.sub(G, b.input(g[1]))
        elif k == "const":
            e = b.sub(G, b.const(g[1]))
        elif k == "lin":
            e = b.sub(G, b.lin((c, b.input(gv[j])) for c, j in g[1]))
        elif k == "mul":
            e = b.sub(G, b.mul(b.input(gv[g[1]]), b.input(gv[g[2]])))
        elif k == "inv":
            e = b.sub(b.mul(G, b.input(gv[g[1]])), b.one())
        else:
            raise UnknownGate(k)
        eq_of[i] = len(eqs)
        eqs.append(b.build([e], names))
    b = Builder(F)
    for n in names:
        b.input(n)
    eqs.append(b.build([b.one_minus(b.mul(b.input(z), b.input(gv[C.output])))], names))
    return EquationSystem(F, tuple(eqs), gv, z, C, names, eq_of)


def system_from_text(text: str, source: AlgCircuit) -> EquationSystem:
    """Inverse of :meth:`EquationSystem.to_text` (the source is supplied)."""
    lines = text.splitlines()
    if not lines or lines[0] != "vars":
        raise ParseError("expected 'vars'", 1)
    gv = {}
    z = None
    k = 1
    while k < len(lines) and lines[k] != "equations":
        a, _, n = lines[k].partition(" ")
        if a == "z":
            z = n
        else:
            try:
                gv[int(a)] = n
            except ValueError:
                raise ParseError(f"bad vars line {lines[k]!r}", k + 1) from None
        k += 1
    chunks: list = []
    for ln in range(k + 1, len(lines)):
        if lines[ln].startswith("equation "):
            chunks.append([])
        elif chunks:
            chunks[-1].append(lines[ln])
        else:
            raise ParseError("content before first equation", ln + 1)
    eqs = tuple(parse_netlist("\n".join(c)) for c in chunks)
    names = eqs[0].var_names if eqs else ()
    return EquationSystem(source.field, eqs, gv, z, source, names, {i: i for i in range(len(gv))})


def solutions_bijection_check(C: AlgCircuit, S: FieldDesc, limit: int = 2_000_000):
    """Count inputs where ``C`` is invertible and common zeros of ``F_C`` over
    the finite field ``S`` by enumeration; returns ``None`` on agreement (and
    injective projection) or a description of the mismatch."""
    E = encode(C)
    from .field import FieldMap

    fmap = FieldMap(C.field, S)
    elems = list(S.elements())
    n = len(C.var_names)
    run = compile_native(C, S, fmap)
    inv_count = 0
    for pt in itertools.product(elems, repeat=n):
        v = run({k: S.to_native(a) for k, a in zip(C.var_names, pt)})[0]
        if v != 0:
            inv_count += 1
    N = len(E.var_names)
    if len(elems) ** N > limit:
        raise ValueError(f"{len(elems)}^{N} candidate points exceed the limit")
    runs = [compile_native(eq, S, fmap) for eq in E.equations]
    sols = []
    for pt in itertools.product(elems, repeat=N):
        nat = {k: S.to_native(a) for k, a in zip(E.var_names, pt)}
        if all(r(nat)[0] == 0 for r in runs):
            sols.append(pt)
    proj = {s[:n] for s in sols}
    if len(sols) != inv_count:
        return f"{inv_count} invertible inputs but {len(sols)} solutions"
    if len(proj) != len(sols):
        return "projection to x is not injective"
    return None


# ------------------------------------------------------------- derivations

def _side_copy(b: Builder, C: AlgCircuit) -> list:
    """Per-gate ids of ``C`` rebuilt in ``b`` (inputs by name)."""
    m: list = []
    for g in C.gates:
        k = g[0]
        if k == "input":
            m.append(b.input(g[1]))
        elif k == "const":
            m.append(b.const(g[1]))
        elif k == "lin":
            m.append(b.lin((c, m[j]) for c, j in g[1]))
        elif k == "mul":
            m.append(b.mul(m[g[1]], m[g[2]]))
        else:
            m.append(b.inv(m[g[1]]))
    return m


def _gate_derivs(ctx: DerivCtx, E: EquationSystem, upto: int | None = None) -> dict:
    C = E.source
    F = C.field
    b = ctx.b
    f = _side_copy(b, C)
    mask = constant_mask(C)
    cv = None
    D: dict = {}
    last = len(C.gates) if upto is None else upto + 1
    for i in range(last):
        g = C.gates[i]
        k = g[0]
        y = ctx.axiom(E.eq_of_gate[i])
        G = b.input(E.gate_vars[i])
        tgt = b.sub(G, f[i])
        if k in ("input", "const"):
            d = y
        elif k == "lin":
            d = ctx.lin([(1, y)] + [(c, D[j]) for c, j in g[1]])
        elif k == "mul":
            u, w = g[1], g[2]
            d = ctx.add(y, ctx.mul_derivs(D[u], D[w]), ctx.mulg(f[w], D[u]), ctx.mulg(f[u], D[w]))
        elif k == "inv":
            if not mask[g[1]]:
                raise CircuitError(f"inversion of a non-constant at gate {i}")
            if cv is None:
                cv = _constant_values(C, mask)
            ci = F.inv(cv[g[1]])
            d = ctx.lin([(ci, y), (F.neg(ci), ctx.mulg(G, D[g[1]]))])
        else:
            raise UnknownGate(k)
        D[i] = ctx.retarget(d, tgt)
    return D


def derive_gate_cert(C: AlgCircuit, E: EquationSystem, v: int) -> IPSCert:
    """Derive ``g_v - f_v(x)`` from the equations of ``E``."""
    if not 0 <= v < len(C.gates):
        raise UnknownGate(f"gate {v}")
    ctx = DerivCtx(C.field, E.var_names, E.equations)
    D = _gate_derivs(ctx, E, v)
    return ctx.finish(D[v])


DISTRIBUTE_LIMIT = 32


def refute_variety(C: AlgCircuit, form: str = "compact", E: EquationSystem | None = None) -> IPSCert:
    """Derivation of 1 from ``F_C`` (valid when ``C`` is the zero polynomial).

    ``form="literal"`` is ``z * (derivation of g_C - f_C) + y_last``.
    ``form="compact"`` keeps, for every gate, a short list of terms whose
    sum ``A_v`` satisfies ``A_v(y=0) = f_v`` and ``A_v(y=F) = g_v``.  Products
    are distributed over the lists (up to ``DISTRIBUTE_LIMIT`` terms) so a
    term of gate ``v`` has depth at most ``depth(v)`` unless a list had to be
    summed first; the result is ``y_last + sum_t z * t``.
    """
    E = E or encode(C)
    ctx = DerivCtx(C.field, E.var_names, E.equations)
    b = ctx.b
    z = b.input(E.z_var)
    last = ctx.axiom(E.last)
    if form == "literal":
        D = _gate_derivs(ctx, E)
        d = ctx.add(ctx.mulg(z, D[C.output]), last)
        return ctx.finish(ctx.retarget(d, b.one()))
    if form != "compact":
        raise ValueError(f"unknown form {form!r}")
    F = C.field
    mask = constant_mask(C)
    cv = None
    one = b.one()
    T: dict = {}           # gate -> [(coef, gate)], the sum of which is A_v

    def merge(terms):
        acc: dict = {}
        for c, g in terms:
            acc[g] = F.add(acc.get(g, F.zero()), F.coerce(c))
        return [(c, g) for g, c in acc.items() if not F.is_zero(c)]

    def mat(terms):
        if len(terms) == 1:
            return terms
        return [(1, b.lin(terms))]

    def times(g, h):
        if g == one:
            return h
        if h == one:
            return g
        return b.mul(g, h)

    def product(tu, tw):
        # distribute while the term lists stay short; otherwise sum the longer side first
        while len(tu) * len(tw) > DISTRIBUTE_LIMIT:
            if len(tu) >= len(tw):
                tu = mat(tu)
            else:
                tw = mat(tw)
        return merge((F.mul(F.coerce(cu), F.coerce(cw)), times(gu, gw)) for cu, gu in tu for cw, gw in tw)

    for i, g in enumerate(C.gates):
        k = g[0]
        y = ctx.y[E.eq_of_gate[i]]
        G = b.input(E.gate_vars[i])
        if k == "input":
            T[i] = [(1, G)]
        elif k == "const":
            T[i] = merge([(g[1], one), (1, y)])
        elif k == "lin":
            terms = [(1, y)]
            for c, j in g[1]:
                terms.extend((F.mul(F.coerce(c), F.coerce(cc)), t) for cc, t in T[j])
            T[i] = [(1, b.lin(merge(terms)))]
        elif k == "mul":
            T[i] = merge(product(T[g[1]], T[g[2]]) + [(1, y)])
        elif k == "inv":
            if cv is None:
                cv = _constant_values(C, mask)
            cu = cv[g[1]]
            ci = F.inv(cu)
            # A_v = 1/c + (1/c) y_v - (1/c) g_v (A_u - c)
            du = merge(T[g[1]] + [(F.neg(cu), one)])
            T[i] = merge([(ci, one), (ci, y)] + [(F.neg(F.mul(ci, F.coerce(c))), t)
                                                  for c, t in product([(1, G)], du)])
        else:
            raise UnknownGate(k)
    terms = [(1, last.cert)] + [(c, times(z, t)) for c, t in T[C.output]]
    cert = b.lin(merge(terms))
    return ctx.finish(Deriv(cert, b.one()))
