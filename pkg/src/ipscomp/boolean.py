"""Boolean circuits, their algebraic translation, the Tseitin reduction to
CNF, and the IPS derivations linking clauses, CNFs and circuits."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .circuit import AlgCircuit, Builder
from .errors import BadArity, IndexOutOfRange, ParseError
from .field import FieldDesc

# gate tuples: ("input", name) ("const", 0|1) ("not", a) ("and", a, b) ("or", a, b)


@dataclass(frozen=True)
class BoolCircuit:
    gates: tuple
    outputs: tuple
    var_names: tuple

    @property
    def output(self) -> int:
        if len(self.outputs) != 1:
            raise BadArity(f"{len(self.outputs)} outputs")
        return self.outputs[0]

    def __len__(self):
        return len(self.gates)


def bchildren(g) -> tuple:
    k = g[0]
    if k == "not":
        return (g[1],)
    if k in ("and", "or"):
        return (g[1], g[2])
    return ()


class BoolBuilder:
    """Hash-consed Boolean circuit construction with constant folding.

    Folding only uses ``x AND 1 = x``, ``x AND 0 = 0``, ``x OR 0 = x``,
    ``x OR 1 = 1`` and negation of constants; each of these leaves the
    algebraic translation unchanged as a polynomial.
    """

    def __init__(self):
        self.gates: list = []
        self._index: dict = {}
        self._inputs: dict = {}
        self.FALSE = self._add(("const", 0))
        self.TRUE = self._add(("const", 1))

    def _add(self, g) -> int:
        i = self._index.get(g)
        if i is None:
            i = len(self.gates)
            self.gates.append(g)
            self._index[g] = i
        return i

    def input(self, name: str) -> int:
        i = self._inputs.get(name)
        if i is None:
            i = self._add(("input", name))
            self._inputs[name] = i
        return i

    def const(self, v) -> int:
        return self.TRUE if v else self.FALSE

    def is_const(self, a: int):
        g = self.gates[a]
        return g[1] if g[0] == "const" else None

    def not_(self, a: int) -> int:
        c = self.is_const(a)
        if c is not None:
            return self.const(1 - c)
        return self._add(("not", a))

    def and_(self, a: int, b: int) -> int:
        ca, cb = self.is_const(a), self.is_const(b)
        if ca == 0 or cb == 0:
            return self.FALSE
        if ca == 1:
            return b
        if cb == 1:
            return a
        return self._add(("and", a, b))

    def or_(self, a: int, b: int) -> int:
        ca, cb = self.is_const(a), self.is_const(b)
        if ca == 1 or cb == 1:
            return self.TRUE
        if ca == 0:
            return b
        if cb == 0:
            return a
        return self._add(("or", a, b))

    def xor(self, a: int, b: int) -> int:
        return self.and_(self.or_(a, b), self.not_(self.and_(a, b)))

    def mux(self, s: int, a: int, b: int) -> int:
        """``(s AND a) OR (NOT s AND b)``."""
        return self.or_(self.and_(s, a), self.and_(self.not_(s), b))

    def or_many(self, xs: Sequence[int]) -> int:
        acc = self.FALSE
        for x in xs:
            acc = self.or_(acc, x)
        return acc

    def and_many(self, xs: Sequence[int]) -> int:
        acc = self.TRUE
        for x in xs:
            acc = self.and_(acc, x)
        return acc

    def splice(self, phi: BoolCircuit, subst: dict | None = None) -> list[int]:
        subst = subst or {}
        m: list = []
        for g in phi.gates:
            k = g[0]
            if k == "input":
                m.append(subst[g[1]] if g[1] in subst else self.input(g[1]))
            elif k == "const":
                m.append(self.const(g[1]))
            elif k == "not":
                m.append(self.not_(m[g[1]]))
            elif k == "and":
                m.append(self.and_(m[g[1]], m[g[2]]))
            else:
                m.append(self.or_(m[g[1]], m[g[2]]))
        return [m[o] for o in phi.outputs]

    def build(self, outputs: Sequence[int], var_names: Sequence[str] | None = None) -> BoolCircuit:
        if var_names is None:
            var_names = [g[1] for g in self.gates if g[0] == "input"]
        var_names = tuple(var_names)
        reach: set = set()
        stack = list(outputs)
        while stack:
            i = stack.pop()
            if i not in reach:
                reach.add(i)
                stack.extend(bchildren(self.gates[i]))
        new: list = []
        remap: dict = {}
        for name in var_names:
            new.append(("input", name))
            if name in self._inputs:
                remap[self._inputs[name]] = len(new) - 1
        for i in sorted(reach):
            if i in remap:
                continue
            g = self.gates[i]
            if g[0] == "input":
                raise BadArity(f"input {g[1]!r} not declared")
            if g[0] == "not":
                g = ("not", remap[g[1]])
            elif g[0] in ("and", "or"):
                g = (g[0], remap[g[1]], remap[g[2]])
            new.append(g)
            remap[i] = len(new) - 1
        return BoolCircuit(tuple(new), tuple(remap[o] for o in outputs), var_names)


def validate_bool(phi: BoolCircuit) -> None:
    names = set()
    for i, g in enumerate(phi.gates):
        k = g[0]
        if k == "input":
            if g[1] not in phi.var_names or g[1] in names:
                raise BadArity(f"bad input gate {g[1]!r}")
            names.add(g[1])
        elif k == "const":
            if g[1] not in (0, 1):
                raise BadArity("constant must be 0 or 1")
        elif k == "not":
            if len(g) != 2:
                raise BadArity(f"not gate {i}")
        elif k in ("and", "or"):
            if len(g) != 3:
                raise BadArity(f"{k} gate {i}")
        else:
            raise BadArity(f"unknown kind {k!r}")
        for j in bchildren(g):
            if not 0 <= j < i:
                raise BadArity(f"gate {i} references {j}")


# ---------------------------------------------------------------- evaluation

def eval_bool(phi, assignment: dict, outputs: Sequence[int] | None = None) -> list[int]:
    v: list = []
    for g in phi.gates:
        k = g[0]
        if k == "input":
            v.append(int(bool(assignment[g[1]])) if g[1] in assignment else 0)
        elif k == "const":
            v.append(g[1])
        elif k == "not":
            v.append(1 - v[g[1]])
        elif k == "and":
            v.append(v[g[1]] & v[g[2]])
        else:
            v.append(v[g[1]] | v[g[2]])
    outs = phi.outputs if outputs is None else outputs
    return [v[o] for o in outs]


def truth_tables(phi, var_order: Sequence[str] | None = None) -> tuple[list[int], int]:
    """Bit-parallel evaluation on all ``2^n`` assignments.

    Returns ``(tables, n)`` where ``tables[g]`` is an int whose bit ``a`` is
    the value of gate ``g`` under assignment index ``a`` (variable ``k`` of
    ``var_order`` takes the value ``(a >> k) & 1``).
    """
    order = list(var_order if var_order is not None else phi.var_names)
    n = len(order)
    full = (1 << (1 << n)) - 1
    col = {}
    for k, name in enumerate(order):
        block = (1 << (1 << k)) - 1  # 2^k ones
        pattern = 0
        period = 1 << (k + 1)
        reps = (1 << n) // period
        unit = block << (1 << k)
        for r in range(reps):
            pattern |= unit << (r * period)
        col[name] = pattern
    t: list = []
    for g in phi.gates:
        k = g[0]
        if k == "input":
            t.append(col.get(g[1], 0))
        elif k == "const":
            t.append(full if g[1] else 0)
        elif k == "not":
            t.append(full ^ t[g[1]])
        elif k == "and":
            t.append(t[g[1]] & t[g[2]])
        else:
            t.append(t[g[1]] | t[g[2]])
    return t, n


# ---------------------------------------------------------- algebraic side

class AlgMap:
    """Memoised translation of Boolean gates into an algebraic builder.

    ``alg(x) = x``, ``alg(NOT a) = 1 - a``, ``alg(a AND b) = a*b``,
    ``alg(a OR b) = 1 - (1-a)(1-b)``.  ``subst`` maps Boolean input names to
    algebraic gate ids (default: same-named algebraic inputs).
    """

    def __init__(self, builder: Builder, bgates, subst: dict | None = None):
        self.b = builder
        self.bgates = bgates
        self.subst = subst or {}
        self.memo: dict = {}

    def __call__(self, i: int) -> int:
        m = self.memo
        if i in m:
            return m[i]
        stack = [i]
        gates = self.bgates
        b = self.b
        while stack:
            j = stack[-1]
            if j in m:
                stack.pop()
                continue
            g = gates[j]
            pend = [c for c in bchildren(g) if c not in m]
            if pend:
                stack.extend(pend)
                continue
            stack.pop()
            k = g[0]
            if k == "input":
                m[j] = self.subst[g[1]] if g[1] in self.subst else b.input(g[1])
            elif k == "const":
                m[j] = b.one() if g[1] else b.zero()
            elif k == "not":
                m[j] = b.one_minus(m[g[1]])
            elif k == "and":
                m[j] = b.mul(m[g[1]], m[g[2]])
            else:
                m[j] = b.one_minus(b.mul(b.one_minus(m[g[1]]), b.one_minus(m[g[2]])))
        return m[i]

    def neg(self, i: int) -> int:
        """``1 - alg(gate)``, reusing the gate already built for OR parents."""
        return self.b.one_minus(self(i))


def alg_translate(phi: BoolCircuit, field: FieldDesc) -> AlgCircuit:
    b = Builder(field)
    for v in phi.var_names:
        b.input(v)
    am = AlgMap(b, phi.gates)
    outs = [am(o) for o in phi.outputs]
    return b.build(outs, phi.var_names)


# ---------------------------------------------------------------------- CNF

@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple          # tuple of tuples of nonzero ints (DIMACS literals)
    var_names: tuple        # index k-1 names variable k

    def to_dimacs(self) -> str:
        lines = [f"c {k} {n}" for k, n in enumerate(self.var_names, 1)]
        lines.append(f"p cnf {self.num_vars} {len(self.clauses)}")
        lines.extend(" ".join(str(l) for l in cl) + " 0" for cl in self.clauses)
        return "\n".join(lines) + "\n"

    def evaluate(self, model: dict) -> bool:
        """``model`` maps variable index -> 0/1."""
        return all(any((model.get(abs(l), 0) == 1) == (l > 0) for l in cl) for cl in self.clauses)


def parse_dimacs(text: str) -> Cnf:
    names: dict = {}
    clauses: list = []
    header = None
    cur: list = []
    for ln, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("c"):
            parts = s.split()
            if len(parts) == 3 and parts[1].isdigit():
                names[int(parts[1])] = parts[2]
            continue
        if s.startswith("p"):
            parts = s.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("bad header", ln)
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise ParseError("clause before header", ln)
        for tok in s.split():
            try:
                v = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", ln) from None
            if v == 0:
                clauses.append(tuple(cur))
                cur = []
            else:
                if abs(v) > header[0]:
                    raise ParseError(f"literal {v} out of range", ln)
                cur.append(v)
    if header is None:
        raise ParseError("missing header")
    if cur:
        raise ParseError("unterminated clause")
    if len(clauses) != header[1]:
        raise ParseError(f"header promises {header[1]} clauses, found {len(clauses)}")
    var_names = tuple(names.get(k, f"v{k}") for k in range(1, header[0] + 1))
    return Cnf(header[0], tuple(clauses), var_names)


@dataclass(frozen=True)
class TseitinResult:
    cnf: Cnf
    gate_var: dict           # gate id -> DIMACS variable
    gate_clauses: dict       # gate id -> tuple of clause indices
    unit_clause: int         # index of the output unit clause


def tseitin(phi: BoolCircuit, prefix: str = "t", var_index: dict | None = None,
            first_var: int | None = None) -> TseitinResult:
    """Clause-per-gate reduction; inputs are numbered first, then gates.

    ``var_index`` lets several circuits share input variables; gate variables
    are then numbered from ``first_var`` on and named ``<prefix><gate>``.
    """
    out = phi.output
    names: list = []
    gv: dict = {}
    if var_index is None:
        var_index = {}
        for n in phi.var_names:
            var_index[n] = len(var_index) + 1
            names.append(n)
    nxt = first_var if first_var is not None else len(var_index) + 1
    for i, g in enumerate(phi.gates):
        if g[0] == "input":
            gv[i] = var_index[g[1]]
        else:
            gv[i] = nxt
            names.append(f"{prefix}{i}")
            nxt += 1
    clauses: list = []
    per_gate: dict = {}
    for i, g in enumerate(phi.gates):
        k = g[0]
        x = gv[i]
        start = len(clauses)
        if k == "const":
            clauses.append((x,) if g[1] else (-x,))
        elif k == "not":
            h = gv[g[1]]
            clauses += [(x, h), (-x, -h)]
        elif k == "and":
            h, kk = gv[g[1]], gv[g[2]]
            clauses += [(-x, h), (-x, kk), (x, -h, -kk)]
        elif k == "or":
            h, kk = gv[g[1]], gv[g[2]]
            clauses += [(-x, h, kk), (x, -h), (x, -kk)]
        if len(clauses) > start:
            per_gate[i] = tuple(range(start, len(clauses)))
    clauses.append((gv[out],))
    total = nxt - 1
    cnf = Cnf(total, tuple(clauses), tuple(names))
    return TseitinResult(cnf, gv, per_gate, len(clauses) - 1)


def clause_poly(b: Builder, clause: Sequence[int], var_gate) -> int:
    """``1 - alg(clause) = prod over literals of (1 - alg(lit))``.

    ``var_gate(k)`` returns the algebraic gate of DIMACS variable ``k``.
    """
    fs = []
    for l in clause:
        x = var_gate(abs(l))
        fs.append(b.one_minus(x) if l > 0 else x)
    return b.prod(fs)


def clause_axioms(cnf: Cnf, field: FieldDesc) -> list[AlgCircuit]:
    out = []
    for cl in cnf.clauses:
        b = Builder(field)
        names = [cnf.var_names[abs(l) - 1] for l in cl]
        uniq = list(dict.fromkeys(names))
        g = clause_poly(b, cl, lambda k: b.input(cnf.var_names[k - 1]))
        out.append(b.build([g], uniq))
    return out


def boolean_axiom(field: FieldDesc, name: str) -> AlgCircuit:
    b = Builder(field)
    x = b.input(name)
    return b.build([b.sub(b.mul(x, x), x)], [name])


def cnf_as_bool(cnf: Cnf) -> BoolCircuit:
    """The CNF as a single-output Boolean formula (clauses ANDed in order)."""
    bb = BoolBuilder()
    for n in cnf.var_names:
        bb.input(n)
    cls = []
    for cl in cnf.clauses:
        lits = [bb.input(cnf.var_names[abs(l) - 1]) if l > 0 else bb.not_(bb.input(cnf.var_names[abs(l) - 1]))
                for l in cl]
        cls.append(bb.or_many(lits) if lits else bb.FALSE)
    return bb.build([bb.and_many(cls)], cnf.var_names)


def clause_bool(cnf: Cnf, i: int) -> BoolCircuit:
    bb = BoolBuilder()
    for n in cnf.var_names:
        bb.input(n)
    cl = cnf.clauses[i]
    lits = [bb.input(cnf.var_names[abs(l) - 1]) if l > 0 else bb.not_(bb.input(cnf.var_names[abs(l) - 1]))
            for l in cl]
    return bb.build([bb.or_many(lits)], cnf.var_names)


# -------------------------------------------------------------- certificates

def cert_cnf_from_clauses(cnf: Cnf, field: FieldDesc):
    """Derive ``1 - alg(phi)`` from the clause polynomials ``1 - alg(k_i)``
    with the certificate ``1 - prod(1 - y_i)``."""
    from .ips import Deriv, DerivCtx

    ctx = DerivCtx(field, cnf.var_names, clause_axioms(cnf, field))
    b = ctx.b
    cert = b.one_minus(b.prod([b.one_minus(y) for y in ctx.y]))
    phi = cnf_as_bool(cnf)
    am = AlgMap(b, phi.gates)
    target = b.one_minus(am(phi.output))
    return ctx.finish(Deriv(cert, target))


def cert_clauses_from_cnf(cnf: Cnf, i: int, field: FieldDesc):
    """Derive clause ``i``'s polynomial ``1 - alg(k_i)`` from ``1 - alg(phi)``
    plus Boolean axioms:  ``(1 - A_i) y0 - C1 * prod_{j != i} A_j`` with
    ``C1`` deriving ``A_i^2 - A_i``."""
    from .ips import DerivCtx

    if not 0 <= i < len(cnf.clauses):
        raise IndexOutOfRange(f"clause {i} of {len(cnf.clauses)}")
    phi = cnf_as_bool(cnf)
    b0 = Builder(field)
    am0 = AlgMap(b0, phi.gates)
    top = b0.one_minus(am0(phi.output))
    ax0 = b0.build([top], cnf.var_names)
    ctx = DerivCtx(field, cnf.var_names, [ax0])
    ctx.add_boolean_axioms(cnf.var_names)
    b = ctx.b
    kappa = [clause_bool(cnf, j) for j in range(len(cnf.clauses))]
    A = []
    for kb in kappa:
        am = AlgMap(b, kb.gates)
        A.append(am(kb.output))
    sq = ctx.bool_square(kappa[i], kappa[i].output)
    rest = b.prod([A[j] for j in range(len(A)) if j != i])
    y0 = ctx.axiom(0)
    d = ctx.lin([(1, ctx.mulg(b.one_minus(A[i]), y0)), (-1, ctx.mulg(rest, sq))])
    return ctx.finish(ctx.retarget(d, b.one_minus(A[i])))


def cert_circuit_from_cnf(phi: BoolCircuit, field: FieldDesc, tseitin_result: TseitinResult | None = None,
                          stats: dict | None = None):
    """Derive ``1 - alg(phi)`` from the clause polynomials of ``tseitin(phi)``
    (plus Boolean axioms), one small combination per gate."""
    from .ips import DerivCtx

    tr = tseitin_result or tseitin(phi)
    cnf = tr.cnf
    ctx = DerivCtx(field, cnf.var_names, clause_axioms(cnf, field))
    ctx.add_boolean_axioms(cnf.var_names)
    d = circuit_from_cnf_in(ctx, phi, tr, stats=stats, input_subst=None)
    return ctx.finish(d)


def circuit_from_cnf_in(ctx, phi: BoolCircuit, tr: TseitinResult, clause_offset: int = 0,
                        stats: dict | None = None, input_subst: dict | None = None,
                        var_gate=None):
    """Per-gate derivations of ``x_g - alg(phi_g)`` inside ``ctx``; returns a
    derivation of ``1 - alg(phi)``.

    Clause ``c`` of ``tr.cnf`` is axiom ``clause_offset + c`` of ``ctx``.
    ``var_gate(k)`` maps a DIMACS variable to its algebraic input gate.
    """
    b = ctx.b
    names = tr.cnf.var_names
    if var_gate is None:
        def var_gate(k):
            return b.input(names[k - 1])
    am = AlgMap(b, phi.gates, input_subst)
    D: dict = {}
    X = {i: var_gate(v) for i, v in tr.gate_var.items()}

    def ax(i, j):
        return ctx.axiom(clause_offset + tr.gate_clauses[i][j])

    for i, g in enumerate(phi.gates):
        k = g[0]
        before = len(b.gates)
        if k == "input":
            D[i] = ctx.retarget(ctx.zero(), b.sub(X[i], am(i)))
            continue
        tgt = b.sub(X[i], am(i))
        if k == "const":
            d = ctx.scale(-1, ax(i, 0)) if g[1] else ax(i, 0)
            D[i] = ctx.retarget(d, tgt)
            continue
        if k == "not":
            h = g[1]
            d = ctx.lin([(-1, ax(i, 0)), (1, ax(i, 1)), (-1, D[h])])
        elif k == "and":
            h, kk = g[1], g[2]
            d = ctx.lin([(-1, ax(i, 2)), (1, ctx.mulg(X[kk], ax(i, 0))), (1, ax(i, 1)),
                         (1, ctx.mulg(X[kk], D[h])), (1, ctx.mulg(am(h), D[kk]))])
        else:
            h, kk = g[1], g[2]
            omk = b.one_minus(X[kk])
            d = ctx.lin([(1, ax(i, 0)), (-1, ctx.mulg(omk, ax(i, 1))), (-1, ax(i, 2)),
                         (1, ctx.mulg(omk, D[h])), (1, ctx.mulg(am.neg(h), D[kk]))])
        if stats is not None:
            stats.setdefault(k, []).append(ctx.cert_gates_added(before, d))
        D[i] = ctx.retarget(d, tgt)
    out = phi.output
    unit = ctx.axiom(clause_offset + tr.unit_clause)
    return ctx.retarget(ctx.lin([(1, unit), (1, D[out])]), b.one_minus(am(out)))
