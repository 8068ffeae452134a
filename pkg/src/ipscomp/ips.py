"""IPS certificates: representation, verification by PIT, derivation
contexts, Boolean-axiom helpers and the composition combinators."""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .circuit import DEGREE_CAP, TERM_CAP, AlgCircuit, Builder, children, compile_native, expand, sdeg, to_netlist, parse_netlist
from .errors import (
    ArityMismatch,
    AxiomListMismatch,
    CapExceeded,
    FieldMismatch,
    IpsError,
    ParseError,
    WidthMismatch,
)
from .field import FieldDesc
from .pit import NONZERO, ZERO_WITH_BOUND, PitVerdict, pit_exact, sample_setup, trials_needed


# ------------------------------------------------------------ certificates

def axioms_key(axioms: Sequence[AlgCircuit]) -> str:
    h = hashlib.sha256()
    for a in axioms:
        h.update(to_netlist(a).encode())
        h.update(b"\x00")
    return h.hexdigest()


@dataclass(frozen=True)
class IPSCert:
    """``cert(x, y)`` with ``cert(x, 0) = 0`` and ``cert(x, F(x)) = target(x)``."""

    cert: AlgCircuit
    axioms: tuple
    target: AlgCircuit

    def __post_init__(self):
        if len(self.cert.placeholders) != len(self.axioms):
            raise ArityMismatch(f"{len(self.cert.placeholders)} placeholders for {len(self.axioms)} axioms")
        F = self.cert.field
        for c in (self.target, *self.axioms):
            if c.field != F:
                raise FieldMismatch("certificate circuits over different fields")

    @property
    def field(self) -> FieldDesc:
        return self.cert.field

    @property
    def var_names(self) -> tuple:
        return self.cert.var_names

    @property
    def key(self) -> str:
        return axioms_key(self.axioms)

    def size(self) -> int:
        return len(self.cert.gates)


# ------------------------------------------------------------ verification

@dataclass(frozen=True)
class VerifyReport:
    ideal_check: PitVerdict
    subst_check: PitVerdict
    combined: PitVerdict

    @property
    def accepted(self) -> bool:
        return self.ideal_check.is_zero and self.subst_check.is_zero

    @property
    def failed_stage(self) -> str | None:
        if not self.ideal_check.is_zero:
            return "ideal_check"
        if not self.subst_check.is_zero:
            return "subst_check"
        return None

    def record(self) -> str:
        if self.accepted:
            return "verification=OK " + self.combined.record()
        return f"verification=FAILED stage={self.failed_stage}"

    def lines(self) -> list[str]:
        return [f"ideal_check {self.ideal_check.record()}",
                f"subst_check {self.subst_check.record()}",
                f"combined {self.combined.record()}"]


def _fresh(names, base):
    taken = set(names)
    k = 0
    cand = base
    while cand in taken:
        k += 1
        cand = f"{base}_{k}"
    return cand


def check_circuits(cert: IPSCert) -> tuple[AlgCircuit, AlgCircuit, AlgCircuit]:
    """``C(x, 0)``, ``C(x, F(x)) - G(x)`` and ``z1*C(x,0) + z2*(C(x,F(x)) - G(x))``."""
    F = cert.field
    C = cert.cert
    xs = C.var_names
    z1 = _fresh(C.all_inputs(), "__z1")
    z2 = _fresh(C.all_inputs() + (z1,), "__z2")

    def ideal(b):
        zero = b.zero()
        return b.splice(C, {y: zero for y in C.placeholders})[0]

    def subst(b):
        sub = {}
        for y, ax in zip(C.placeholders, cert.axioms):
            sub[y] = b.splice(ax)[0]
        val = b.splice(C, sub)[0]
        return b.sub(val, b.splice(cert.target)[0])

    b1 = Builder(F)
    for v in xs:
        b1.input(v)
    c_ideal = b1.build([ideal(b1)], xs, ())
    b2 = Builder(F)
    for v in xs:
        b2.input(v)
    c_sub = b2.build([subst(b2)], xs, ())
    b3 = Builder(F)
    for v in xs:
        b3.input(v)
    o = b3.add(b3.mul(b3.input(z1), ideal(b3)), b3.mul(b3.input(z2), subst(b3)))
    c_comb = b3.build([o], xs + (z1, z2), ())
    return c_ideal, c_sub, c_comb


def _check_wellformed(cert: IPSCert):
    C = cert.cert
    xs = set(C.var_names)
    for ax in cert.axioms:
        extra = set(ax.all_inputs()) - xs
        if extra:
            raise ArityMismatch(f"axiom uses undeclared variables {sorted(extra)}")
    extra = set(cert.target.all_inputs()) - xs
    if extra:
        raise ArityMismatch(f"target uses undeclared variables {sorted(extra)}")


EXACT_SIZE_LIMIT = 20000


def verify(cert: IPSCert, backend: str = "auto", error_bound=Fraction(1, 2 ** 30), seed: int = 0,
           degree_cap: int = DEGREE_CAP, term_cap: int = TERM_CAP) -> VerifyReport:
    """Run PIT on ``C(x,0)``, on ``C(x,F(x)) - G(x)`` and on the combined
    circuit with two fresh variables.

    ``backend`` is ``"exact"``, ``"randomized"`` or ``"auto"`` (exact when the
    expansion fits the caps, randomized otherwise).  The randomized backend
    evaluates all three circuits at shared sample points; each verdict still
    carries its own degree-based error bound.
    """
    _check_wellformed(cert)
    if backend not in ("exact", "auto", "randomized"):
        raise ValueError(f"unknown backend {backend!r}")
    size = len(cert.cert.gates) + sum(len(a.gates) for a in cert.axioms)
    # cheap pre-cap: large certificates go straight to the randomized backend
    if backend == "exact" or (backend == "auto" and size <= EXACT_SIZE_LIMIT):
        try:
            circs = check_circuits(cert)
            vs = [pit_exact(c, degree_cap, term_cap, seed) for c in circs]
            return VerifyReport(*vs)
        except CapExceeded:
            if backend == "exact":
                raise
    return VerifyReport(*_randomized_shared(cert, Fraction(error_bound), seed))


def _randomized_shared(cert, error_bound, seed):
    """All three checks evaluated at shared points of one compiled circuit."""
    F = cert.field
    C = cert.cert
    b = Builder(F)
    for v in C.var_names:
        b.input(v)
    zero = b.zero()
    o1 = b.splice(C, {y: zero for y in C.placeholders})[0]
    sub = {y: b.splice(ax)[0] for y, ax in zip(C.placeholders, cert.axioms)}
    o2 = b.sub(b.splice(C, sub)[0], b.splice(cert.target)[0])
    both = b.build([o1, o2], C.var_names, ())
    per = sdeg(both, per_gate=True)
    d1, d2 = per[both.outputs[0]], per[both.outputs[1]]
    degs = [d1, d2, 1 + max(d1, d2)]
    L, fmap, sampler, size = sample_setup(both, seed, degs[2])
    trials = [trials_needed(max(d, 1), size, error_bound) for d in degs]
    run = compile_native(both, L, fmap)
    z1 = _fresh(C.all_inputs(), "__z1")
    z2 = _fresh(C.all_inputs() + (z1,), "__z2")
    first_bad = [None, None, None]
    for k in range(max(trials)):
        rng = random.Random(f"{seed}/{k}")
        pt = {n: sampler(rng) for n in C.var_names}
        zv = {z1: sampler(rng), z2: sampler(rng)}
        nat = {n: L.to_native(v) for n, v in pt.items()}
        a, c = run(nat)
        comb = L.to_native(zv[z1]) * a + L.to_native(zv[z2]) * c
        for idx, val, point in ((0, a, pt), (1, c, pt), (2, comb, {**pt, **zv})):
            if first_bad[idx] is None and k < trials[idx] and val != 0:
                first_bad[idx] = (k + 1, point)
        if all(x is not None for x in first_bad):
            break
    out = []
    for idx in range(3):
        d = degs[idx]
        if first_bad[idx] is not None:
            k, point = first_bad[idx]
            out.append(PitVerdict(NONZERO, "randomized", L, k, witness=point))
        else:
            t = trials[idx]
            out.append(PitVerdict(ZERO_WITH_BOUND, "randomized", L, t, Fraction(d, size) ** t))
    return out


# ---------------------------------------------------------- derivations

class Deriv(NamedTuple):
    """A derivation inside a :class:`DerivCtx`: the certificate gate and the
    gate of the polynomial it derives."""

    cert: int
    target: int


class DerivCtx:
    """Shared builder in which derivations are combined.

    All certificates produced from one context share its x-block, its
    y-block and its axiom list.  Axioms may be appended while deriving.
    """

    def __init__(self, field: FieldDesc, var_names: Sequence[str], axioms: Sequence[AlgCircuit] = (),
                 y_prefix: str | None = None):
        self.field = field
        self.b = Builder(field)
        self.var_names = tuple(var_names)
        for v in self.var_names:
            self.b.input(v)
        taken = set(self.var_names)
        if y_prefix is None:
            y_prefix = "y"
            while any(n.startswith(y_prefix) and n[len(y_prefix):].isdigit() for n in taken):
                y_prefix = "_" + y_prefix
        self.y_prefix = y_prefix
        self.axioms: list = []
        self.y: list = []
        self._ax_index: dict = {}
        self._ax_target: dict = {}
        self._bool_ax: dict = {}
        self._algmaps: dict = {}
        self._bsq: dict = {}
        self._gadgets: dict = {}
        self._zero = self.b.zero()
        for a in axioms:
            self.add_axiom(a, dedupe=False)

    # axioms
    def add_axiom(self, circ: AlgCircuit, dedupe: bool = True) -> int:
        if circ.field != self.field:
            raise FieldMismatch("axiom over a different field")
        if dedupe and circ in self._ax_index:
            return self._ax_index[circ]
        i = len(self.axioms)
        self.axioms.append(circ)
        self._ax_index.setdefault(circ, i)
        self.y.append(self.b.placeholder(f"{self.y_prefix}{i + 1}"))
        return i

    def add_boolean_axioms(self, names: Sequence[str]) -> None:
        for n in names:
            self.bool_axiom(n)

    def bool_axiom(self, name: str) -> Deriv:
        i = self._bool_ax.get(name)
        if i is None:
            from .boolean import boolean_axiom

            i = self.add_axiom(boolean_axiom(self.field, name), dedupe=False)
            self._bool_ax[name] = i
        return self.axiom(i)

    def axiom(self, i: int) -> Deriv:
        t = self._ax_target.get(i)
        if t is None:
            t = self.b.splice(self.axioms[i])[0]
            self._ax_target[i] = t
        return Deriv(self.y[i], t)

    # linear algebra of derivations
    def zero(self) -> Deriv:
        return Deriv(self._zero, self._zero)

    def lin(self, terms) -> Deriv:
        terms = [(c, d) for c, d in terms if d.cert != self._zero or d.target != self._zero]
        cert = self.b.lin((c, d.cert) for c, d in terms if d.cert != self._zero)
        tgt = self.b.lin((c, d.target) for c, d in terms)
        return Deriv(cert, tgt)

    def add(self, *ds: Deriv) -> Deriv:
        return self.lin((1, d) for d in ds)

    def sub(self, a: Deriv, b: Deriv) -> Deriv:
        return self.lin([(1, a), (-1, b)])

    def scale(self, c, d: Deriv) -> Deriv:
        """Multiply by a field constant."""
        return self.lin([(c, d)])

    def mulg(self, g: int, d: Deriv) -> Deriv:
        """Multiply by the polynomial computed at gate ``g`` of the builder."""
        if d.cert == self._zero:
            return Deriv(self._zero, self.b.mul(g, d.target))
        return Deriv(self.b.mul(g, d.cert), self.b.mul(g, d.target))

    def mul_derivs(self, a: Deriv, b: Deriv) -> Deriv:
        """Product of two derivations (still in the ideal generated by y)."""
        if a.cert == self._zero or b.cert == self._zero:
            return Deriv(self._zero, self.b.mul(a.target, b.target))
        return Deriv(self.b.mul(a.cert, b.cert), self.b.mul(a.target, b.target))

    def retarget(self, d: Deriv, target: int) -> Deriv:
        """Same certificate, target restated as a polynomially equal circuit."""
        return Deriv(d.cert, target)

    def finish(self, d: Deriv, var_names: Sequence[str] | None = None) -> IPSCert:
        names = self.var_names if var_names is None else tuple(var_names)
        ph = tuple(f"{self.y_prefix}{i + 1}" for i in range(len(self.axioms)))
        cert = self.b.build([d.cert], names, ph)
        target = self.b.build([d.target], names, ())
        return IPSCert(cert, tuple(self.axioms), target)

    def cert_gates_added(self, before: int, d: Deriv) -> int:
        """Gates with id >= ``before`` reachable from ``d.cert`` through new gates."""
        seen = set()
        stack = [d.cert]
        gates = self.b.gates
        while stack:
            i = stack.pop()
            if i < before or i in seen:
                continue
            seen.add(i)
            stack.extend(children(gates[i]))
        return len(seen)

    # importing other certificates
    def import_cert(self, C: IPSCert, xmap: dict | None = None, ymap: Sequence[Deriv] | None = None,
                    fmap=None) -> Deriv:
        """Splice ``C`` with x-inputs renamed through ``xmap`` (name -> gate)
        and placeholder ``j`` replaced by ``ymap[j]``'s certificate.

        Without ``ymap`` each axiom of ``C`` is matched to (or added as) an
        axiom of this context; this is only sound when ``xmap`` is the identity.
        """
        xmap = dict(xmap or {})
        if ymap is None:
            if any(self.b.input(n) != g for n, g in xmap.items() if n in self.var_names):
                raise AxiomListMismatch("axioms cannot be matched through a substitution")
            ymap = [self.axiom(self.add_axiom(_map_field(a, self.field, fmap))) for a in C.axioms]
        if len(ymap) != len(C.axioms):
            raise ArityMismatch(f"{len(ymap)} derivations for {len(C.axioms)} axioms")
        sub = dict(xmap)
        for y, d in zip(C.cert.placeholders, ymap):
            sub[y] = d.cert
        cert = self.b.splice(C.cert, sub, fmap)[0]
        target = self.b.splice(C.target, xmap, fmap)[0]
        return Deriv(cert, target)

    # Boolean circuits
    def algmap(self, phi, subst: dict | None = None):
        from .boolean import AlgMap

        gates = phi.gates
        key = (id(gates), tuple(sorted((subst or {}).items())))
        hit = self._algmaps.get(key)
        if hit is None:
            hit = (phi, AlgMap(self.b, gates, subst))
            self._algmaps[key] = hit
        return hit[1]

    def bool_square(self, phi, gate: int, hyp=None) -> Deriv:
        """Derivation of ``alg(g)^2 - alg(g)`` from Boolean axioms on the inputs.

        ``hyp(name)`` may supply the derivation for an input (default: the
        Boolean axiom of that variable).
        """
        from .boolean import bchildren

        am = self.algmap(phi)
        memo = self._bsq.setdefault(id(phi.gates), {})
        gates = phi.gates
        b = self.b
        stack = [gate]
        while stack:
            j = stack[-1]
            if j in memo:
                stack.pop()
                continue
            g = gates[j]
            pend = [c for c in bchildren(g) if c not in memo]
            if pend:
                stack.extend(pend)
                continue
            stack.pop()
            k = g[0]
            A = am(j)
            tgt = b.sub(b.mul(A, A), A)
            if k == "input":
                d = hyp(g[1]) if hyp is not None else self.bool_axiom(g[1])
            elif k == "const":
                d = self.zero()
            elif k == "not":
                d = memo[g[1]]
            elif k == "and":
                a, c = am(g[1]), am(g[2])
                d = self.add(self.mulg(b.mul(c, c), memo[g[1]]), self.mulg(a, memo[g[2]]))
            else:
                a1, c1 = am.neg(g[1]), am.neg(g[2])
                d = self.add(self.mulg(b.mul(c1, c1), memo[g[1]]), self.mulg(a1, memo[g[2]]))
            memo[j] = self.retarget(d, tgt)
        return memo[gate]

    def poly_gate(self, poly: dict, args: Sequence[int]) -> int:
        """Build a sparse polynomial ``{exponent tuple: coeff}`` at gates ``args``."""
        b = self.b
        terms = []
        for e, c in sorted(poly.items()):
            fs = []
            for v, k in enumerate(e):
                fs.extend([args[v]] * k)
            terms.append((c, b.prod(fs)))
        return b.lin(terms)

    def gadget(self, key, make, args: Sequence[int], bb, weights: Sequence, arg_weights: Sequence,
               const=0):
        """Derive a small Boolean identity at concrete signals.

        ``make(bb, ins) -> outs`` builds the gadget in Boolean builder ``bb``.
        The claim is that ``sum w_o alg(out_o) + sum u_a alg(arg_a) + const``
        vanishes on every Boolean input; it is checked once per gadget shape
        by multilinear reduction, and the quotients give the derivation
        ``sum_a q_a(args) * (arg_a^2 - arg_a)``.  Returns ``(outs, deriv)``.
        """
        outs = make(bb, list(args))
        pattern = tuple(bb.is_const(a) for a in args)
        ck = (key, pattern, tuple(weights), tuple(arg_weights), const)
        quot = self._gadgets.get(ck)
        if quot is None:
            quot = _gadget_quotients(self.field, make, pattern, weights, arg_weights, const)
            self._gadgets[ck] = quot
        am = self.algmap(bb)
        b = self.b
        A = [am(a) for a in args]
        tgt = b.lin([(w, am(o)) for w, o in zip(weights, outs)] + [(u, a) for u, a in zip(arg_weights, A)]
                    + ([(const, b.one())] if const else []))
        var_args = [k for k, c in enumerate(pattern) if c is None]
        parts = []
        for v, q in quot.items():
            coef = self.poly_gate(q, [A[k] for k in var_args])
            parts.append((1, self.mulg(coef, self.bool_square(bb, args[var_args[v]]))))
        d = self.lin(parts) if parts else self.zero()
        return outs, self.retarget(d, tgt)


def _map_field(circ: AlgCircuit, field: FieldDesc, fmap):
    if circ.field == field:
        return circ
    b = Builder(field)
    for v in circ.var_names:
        b.input(v)
    out = b.splice(circ, None, fmap)
    return b.build(out, circ.var_names, circ.placeholders)


# ----------------------------------------------------- multilinear reduction

def ml_reduce(F: FieldDesc, poly: dict, nvars: int):
    """Reduce modulo ``v^2 - v``: returns ``(remainder, quotients)`` with
    ``poly = remainder + sum_v quotients[v] * (v^2 - v)``."""
    work = dict(poly)
    rem: dict = {}
    quot: dict = {}
    while work:
        e, c = work.popitem()
        if F.is_zero(c):
            continue
        v = next((k for k, x in enumerate(e) if x >= 2), None)
        if v is None:
            rem[e] = F.add(rem[e], c) if e in rem else c
            continue
        low = list(e)
        low[v] -= 2
        q = quot.setdefault(v, {})
        t = tuple(low)
        q[t] = F.add(q[t], c) if t in q else c
        low[v] += 1
        t = tuple(low)
        work[t] = F.add(work[t], c) if t in work else c
    rem = {e: c for e, c in rem.items() if not F.is_zero(c)}
    quot = {v: {e: c for e, c in q.items() if not F.is_zero(c)} for v, q in quot.items()}
    return rem, {v: q for v, q in quot.items() if q}


def _gadget_quotients(F, make, pattern, weights, arg_weights, const):
    from .boolean import AlgMap, BoolBuilder

    bb = BoolBuilder()
    ins = []
    nv = 0
    for c in pattern:
        if c is None:
            ins.append(bb.input(f"v{nv}"))
            nv += 1
        else:
            ins.append(bb.const(c))
    outs = make(bb, ins)
    b = Builder(F)
    names = [f"v{k}" for k in range(nv)]
    for n in names:
        b.input(n)
    am = AlgMap(b, bb.gates)
    g = b.lin([(w, am(o)) for w, o in zip(weights, outs)] + [(u, am(a)) for u, a in zip(arg_weights, ins)]
              + ([(const, b.one())] if const else []))
    poly = expand(b.build([g], names), degree_cap=10 ** 6, term_cap=10 ** 6)[0]
    rem, quot = ml_reduce(F, dict(poly), nv)
    if rem:
        raise IpsError(f"gadget identity fails on the Boolean cube: remainder {rem}")
    return quot


# --------------------------------------------------------- combinators

def _same_context(a: IPSCert, b: IPSCert):
    if a.field != b.field:
        raise FieldMismatch("certificates over different fields")
    if a.key != b.key:
        raise AxiomListMismatch("certificates use different axiom lists")
    if a.var_names != b.var_names:
        raise AxiomListMismatch("certificates use different variables")


def _ctx_for(cert: IPSCert) -> DerivCtx:
    return DerivCtx(cert.field, cert.var_names, cert.axioms, y_prefix=_prefix_of(cert))


def _prefix_of(cert: IPSCert):
    if not cert.cert.placeholders:
        return None
    p = cert.cert.placeholders[0]
    return p[:-1]


def cert_zero(field: FieldDesc, var_names: Sequence[str], axioms: Sequence[AlgCircuit]) -> IPSCert:
    ctx = DerivCtx(field, var_names, axioms)
    return ctx.finish(ctx.zero())


def cert_axiom(i: int, field: FieldDesc, var_names: Sequence[str], axioms: Sequence[AlgCircuit]) -> IPSCert:
    """The placeholder ``y_i`` (1-based) targeting axiom ``i``."""
    from .errors import IndexOutOfRange

    if not 1 <= i <= len(axioms):
        raise IndexOutOfRange(f"axiom {i} of {len(axioms)}")
    ctx = DerivCtx(field, var_names, axioms)
    return ctx.finish(ctx.axiom(i - 1))


def cert_add(a: IPSCert, b: IPSCert) -> IPSCert:
    _same_context(a, b)
    ctx = _ctx_for(a)
    return ctx.finish(ctx.add(ctx.import_cert(a), ctx.import_cert(b)))


def cert_scale(a: IPSCert, coef) -> IPSCert:
    """Multiply by a constant or by a single-output coefficient circuit."""
    ctx = _ctx_for(a)
    d = ctx.import_cert(a)
    if isinstance(coef, AlgCircuit):
        if coef.field != a.field:
            raise FieldMismatch("coefficient over a different field")
        extra = set(coef.all_inputs()) - set(a.var_names)
        if extra:
            raise ArityMismatch(f"coefficient uses {sorted(extra)}")
        g = ctx.b.splice(coef)[0]
        return ctx.finish(ctx.mulg(g, d))
    return ctx.finish(ctx.scale(coef, d))


# -------------------------------------------------- Boolean square helper

def bool_square_cert(phi, field: FieldDesc, output: int | None = None) -> IPSCert:
    """Derive ``alg(phi)^2 - alg(phi)`` from the Boolean axioms of phi's inputs."""
    ctx = DerivCtx(field, phi.var_names)
    ctx.add_boolean_axioms(phi.var_names)
    g = phi.output if output is None else output
    return ctx.finish(ctx.bool_square(phi, g))


# ----------------------------------------------------------- composition

def boolean_axiom_names(cert: IPSCert) -> list:
    """For each axiom, the variable it is the Boolean axiom of (or ``None``)."""
    from .boolean import boolean_axiom

    out = []
    for ax in cert.axioms:
        hit = None
        if len(ax.var_names) == 1 and ax == boolean_axiom(cert.field, ax.var_names[0]):
            hit = ax.var_names[0]
        out.append(hit)
    return out


def substitute_bool(ctx: DerivCtx, cert: IPSCert, phi, outputs: Sequence[int]) -> Deriv:
    """Inside ``ctx``: ``cert`` with its i-th x-variable replaced by
    ``alg(phi.outputs[i])``; Boolean axioms become ``bool_square`` derivations
    and any other axiom becomes a new axiom of ``ctx`` (substituted)."""
    if len(cert.var_names) != len(outputs):
        raise WidthMismatch(f"{len(cert.var_names)} variables, {len(outputs)} signals")
    am = ctx.algmap(phi)
    xmap = {v: am(o) for v, o in zip(cert.var_names, outputs)}
    pos = {v: k for k, v in enumerate(cert.var_names)}
    ymap = []
    for ax, name in zip(cert.axioms, boolean_axiom_names(cert)):
        if name is not None:
            ymap.append(ctx.bool_square(phi, outputs[pos[name]]))
        else:
            b = Builder(ctx.field)
            for v in ctx.var_names:
                b.input(v)
            from .boolean import AlgMap

            m = AlgMap(b, phi.gates)
            sub = {v: m(o) for v, o in zip(cert.var_names, outputs)}
            circ = b.build(b.splice(ax, sub), ctx.var_names)
            ymap.append(ctx.axiom(ctx.add_axiom(circ)))
    return ctx.import_cert(cert, xmap, ymap)


def compose(F: IPSCert, G: IPSCert, D) -> IPSCert:
    """``J(x, y) = F(D(x), H(x, y)) + G(x, y)``.

    ``F`` derives ``VAL_p(C(x)) - VAL_p(x)``, ``G`` derives
    ``VAL_p(D(x)) - VAL_p(x)`` (both from Boolean axioms on the same ``b``
    bits) and ``D`` is a Boolean circuit with ``b`` inputs and ``b`` outputs.
    ``H`` are the Boolean-square derivations for D's outputs.  The result
    derives ``VAL_p(C(D(x))) - VAL_p(x)``.
    """
    b = len(G.var_names)
    if len(F.var_names) != b or len(D.var_names) != b or len(D.outputs) != b:
        raise WidthMismatch(f"widths F={len(F.var_names)} G={b} D={len(D.var_names)}->{len(D.outputs)}")
    if tuple(D.var_names) != tuple(G.var_names):
        raise WidthMismatch("D and G must share input names")
    if F.field != G.field:
        raise FieldMismatch("F and G over different fields")
    ctx = DerivCtx(G.field, G.var_names, G.axioms, y_prefix=_prefix_of(G))
    g = ctx.import_cert(G)
    f = substitute_bool(ctx, F, D, list(D.outputs))
    return ctx.finish(ctx.add(f, g))


def compose_bool(C, D):
    """The Boolean circuit ``C(D(x))`` (C's inputs fed by D's outputs in order)."""
    from .boolean import BoolBuilder

    bb = BoolBuilder()
    for v in D.var_names:
        bb.input(v)
    mid = bb.splice(D)
    outs = bb.splice(C, dict(zip(C.var_names, mid)))
    return bb.build(outs, D.var_names)


COMPOSE_POLY_C = 16


def chain_compose(certs: Sequence[IPSCert], circuits: Sequence) -> IPSCert:
    """Left fold of :func:`compose`.

    ``certs[i]`` derives ``VAL_p(circuits[i](x)) - VAL_p(x)``; circuits are
    applied in list order.  Asserts the size bound
    ``sum |t_i| + k * c * s`` with ``s`` the total circuit size.
    """
    if len(certs) < 2 or len(certs) != len(circuits):
        raise WidthMismatch("need k >= 2 matching certificates and circuits")
    J = certs[0]
    D = circuits[0]
    for t, C in zip(certs[1:], circuits[1:]):
        J = compose(t, J, D)
        D = compose_bool(C, D)
    k = len(certs)
    s = sum(len(c.gates) for c in circuits)
    bound = sum(c.size() for c in certs) + k * COMPOSE_POLY_C * s
    assert J.size() <= bound, (J.size(), bound)
    return J


# ------------------------------------------------------------ text format

def cert_to_text(cert: IPSCert) -> str:
    parts = ["[cert]", to_netlist(cert.cert).rstrip("\n"), "[target]", to_netlist(cert.target).rstrip("\n")]
    for i, ax in enumerate(cert.axioms, 1):
        parts.append(f"[axiom {i}]")
        parts.append(to_netlist(ax).rstrip("\n"))
    return "\n".join(parts) + "\n"


def cert_from_text(text: str) -> IPSCert:
    sections: list = []
    cur = None
    for ln, line in enumerate(text.splitlines(), 1):
        if line.startswith("[") and line.endswith("]"):
            cur = [line[1:-1], [], ln]
            sections.append(cur)
        elif cur is None:
            if line.strip():
                raise ParseError("content before first section", ln)
        else:
            cur[1].append(line)
    names = [s[0] for s in sections]
    if names[:2] != ["cert", "target"]:
        raise ParseError("expected [cert] then [target]")
    circs = []
    for name, lines, ln in sections:
        try:
            circs.append(parse_netlist("\n".join(lines)))
        except ParseError as e:
            raise ParseError(f"in section [{name}]: {e}", ln + (e.line or 0)) from None
    for k, (name, _, ln) in enumerate(sections[2:], 1):
        if name != f"axiom {k}":
            raise ParseError(f"unexpected section [{name}]", ln)
    return IPSCert(circs[0], tuple(circs[2:]), circs[1])
