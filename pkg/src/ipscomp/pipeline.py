"""From an algebraic circuit to an unsatisfiable CNF with an IPS refutation.

Stages: field selection, gate encoding over K, lowering to F_p, bit
extraction (BIT_p), negation and Tseitin translation.  The refutation is
assembled in the opposite order inside one derivation context.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .bitblast import Blaster
from .boolean import (
    BoolBuilder,
    BoolCircuit,
    Cnf,
    TseitinResult,
    boolean_axiom,
    circuit_from_cnf_in,
    clause_axioms,
    parse_dimacs,
    tseitin,
)
from .circuit import AlgCircuit, Builder, parse_netlist, to_netlist
from .errors import Malformed, ParseError, SourceNotZero, VerificationFailed
from .field import FieldDesc, FieldMap, FieldSelection, find_prime_above, make_field, parse_field, select_field
from .gateenc import EquationSystem, encode, refute_variety
from .ips import Deriv, DerivCtx, IPSCert, VerifyReport, verify
from .pit import pit
from .vectorize import VecContext, var_coords, vec_circuit

VERSION = "1"


# ----------------------------------------------------------------- stages

@dataclass
class Block:
    """One negated equation coordinate: ``NOT(OR(bits + overflow))``."""

    eq: int
    coord: int
    bits: list
    overflow: list
    leaves: list
    tree: dict                  # internal OR node -> (left, right)
    top: int                    # OR signal (or a constant)
    out: int                    # NOT(top)
    phi: BoolCircuit | None = None
    tr: TseitinResult | None = None
    clause_offset: int = 0


@dataclass
class Compiled:
    source: AlgCircuit
    selection: FieldSelection
    K: FieldDesc
    CK: AlgCircuit
    E: EquationSystem
    vctx: VecContext
    V: list
    bb: BoolBuilder
    var_bits: dict
    blocks: list
    cnf: Cnf
    seed: int = 0

    @property
    def p(self) -> int:
        return self.K.char


def map_circuit(C: AlgCircuit, fmap: FieldMap, target: FieldDesc) -> AlgCircuit:
    b = Builder(target)
    for v in C.var_names:
        b.input(v)
    return b.build(b.splice(C, None, fmap), C.var_names)


def choose_field(C: AlgCircuit, seed: int = 0) -> FieldSelection:
    """``select_field``, moving to the next prime over Q when the reduction
    modulo the chosen prime would kill a nonzero polynomial."""
    sel = select_field(C, seed)
    if not C.field.is_rational:
        return sel
    over_q = pit(C, exact=None, seed=seed)
    if over_q.is_zero:
        return sel
    while True:
        CK = map_circuit(C, sel.field_map(), sel.target)
        if not pit(CK, exact=None, seed=seed).is_zero:
            return sel
        p = find_prime_above(sel.target.char, seed)
        sel = FieldSelection(C.field, make_field(p), ("PrimeAboveBound", sel.target.char))


def _or_tree(bb: BoolBuilder, leaves):
    tree: dict = {}
    layer = list(leaves)
    if not layer:
        return bb.FALSE, tree
    while len(layer) > 1:
        nxt = []
        for k in range(0, len(layer) - 1, 2):
            g = bb.or_(layer[k], layer[k + 1])
            tree.setdefault(g, (layer[k], layer[k + 1]))
            nxt.append(g)
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0], tree


def compile_cnf(C: AlgCircuit, seed: int = 0) -> Compiled:
    """Steps 1-5: field, equations, lowering, bit extraction, CNF."""
    from .circuit import validate

    validate(C)
    sel = choose_field(C, seed)
    K = sel.target
    CK = map_circuit(C, sel.field_map(), K)
    E = encode(CK)
    vctx = VecContext(K)
    e = vctx.e
    p = K.char
    bp = p.bit_length()
    V = [vec_circuit(vctx, eq) for eq in E.equations]
    bb = BoolBuilder()
    var_bits: dict = {}
    names: list = []
    for v in E.var_names:
        for c in var_coords(v, e):
            ns = [f"{c}.{j}" for j in range(bp)]
            var_bits[c] = [bb.input(n) for n in ns]
            names.extend(ns)
    blocks = []
    for i, Vi in enumerate(V):
        for j in range(e):
            bl = Blaster(p, bb)
            bits, _ = bl.bit_p(Vi, var_bits, output=Vi.outputs[j])
            leaves = []
            for s in list(bits) + bl.overflow:
                if bb.is_const(s) != 0 and s not in leaves:
                    leaves.append(s)
            if any(bb.is_const(s) == 1 for s in leaves):
                top, tree = bb.TRUE, {}
            else:
                top, tree = _or_tree(bb, leaves)
            blocks.append(Block(i, j, list(bits), list(bl.overflow), leaves, tree, top, bb.not_(top)))
    index = {n: k for k, n in enumerate(names, 1)}
    nxt = len(names) + 1
    clauses: list = []
    all_names = list(names)
    for k, blk in enumerate(blocks):
        phi = bb.build([blk.out], names)
        tr = tseitin(phi, prefix=f"t{k}_", var_index=index, first_var=nxt)
        blk.phi, blk.tr, blk.clause_offset = phi, tr, len(clauses)
        all_names.extend(tr.cnf.var_names)
        nxt = tr.cnf.num_vars + 1
        clauses.extend(tr.cnf.clauses)
    cnf = Cnf(nxt - 1, tuple(clauses), tuple(all_names))
    return Compiled(C, sel, K, CK, E, vctx, V, bb, var_bits, blocks, cnf, seed)


# ----------------------------------------------------------- refutation

def refutation_axioms(cnf: Cnf, K: FieldDesc) -> list:
    """Clause polynomials followed by the Boolean axiom of every variable."""
    return clause_axioms(cnf, K) + [boolean_axiom(K, n) for n in cnf.var_names]


def split_or(ctx: DerivCtx, bb: BoolBuilder, top: int, tree: dict, d_top: Deriv, leaves) -> dict:
    """From a derivation of ``alg(top)`` derive ``alg(leaf)`` for each leaf.

    For ``O = u OR v``: ``U = U*O - (1-V)(U^2-U)`` (and symmetrically).
    """
    am = ctx.algmap(bb)
    b = ctx.b
    out: dict = {}
    if bb.is_const(top) == 1:
        for s in leaves:
            out[s] = ctx.retarget(ctx.mulg(am(s), d_top), am(s))
        return out
    stack = [(top, d_top)]
    while stack:
        s, d = stack.pop()
        if s not in tree:
            out[s] = d
            continue
        u, v = tree[s]
        U, Vv = am(u), am(v)
        du = ctx.sub(ctx.mulg(U, d), ctx.mulg(b.one_minus(Vv), ctx.bool_square(bb, u)))
        dv = ctx.sub(ctx.mulg(Vv, d), ctx.mulg(b.one_minus(U), ctx.bool_square(bb, v)))
        stack.append((u, ctx.retarget(du, U)))
        stack.append((v, ctx.retarget(dv, Vv)))
    return out


def build_refutation(comp: Compiled, check_source: bool = True) -> IPSCert:
    """Derive 1 from the clause polynomials of the CNF plus Boolean axioms."""
    if check_source and not pit(comp.CK, exact=None, seed=comp.seed).is_zero:
        raise SourceNotZero("the source circuit is not the zero polynomial")
    K, bb, p = comp.K, comp.bb, comp.p
    cnf = comp.cnf
    names = cnf.var_names
    ctx = DerivCtx(K, names, clause_axioms(cnf, K))
    ctx.add_boolean_axioms(names)
    b = ctx.b
    am = ctx.algmap(bb)

    def var_gate(k):
        return b.input(names[k - 1])

    e = comp.vctx.e
    coord_d: dict = {}
    for blk in comp.blocks:
        d = circuit_from_cnf_in(ctx, blk.phi, blk.tr, clause_offset=blk.clause_offset, var_gate=var_gate)
        d_top = ctx.retarget(d, am(blk.top))
        leaf_d = split_or(ctx, bb, blk.top, blk.tree, d_top, blk.leaves) if blk.leaves else {}
        bl = Blaster(p, bb, ctx, overflow=lambda s, L=leaf_d: L[s])
        Vi = comp.V[blk.eq]
        bits, d_bv = bl.bit_p(Vi, comp.var_bits, output=Vi.outputs[blk.coord])
        assert bits == blk.bits
        parts = [(1, d_bv)]
        for j, s in enumerate(bits):
            if bb.is_const(s) != 0:
                parts.append((pow(2, j, p), leaf_d[s]))
        coord_d[(blk.eq, blk.coord)] = ctx.lin(parts)
    # field-side value of every K-variable
    basis = comp.vctx.basis
    xhat = {}
    for v in comp.E.var_names:
        coords = []
        for c in var_coords(v, e):
            coords.append(b.lin((pow(2, j, p), b.input(n)) for j, n in enumerate(_bit_names(c, p))))
        xhat[v] = b.lin(zip(basis, coords))
    eq_d = []
    for i, eq in enumerate(comp.E.equations):
        d = ctx.lin((basis[j], coord_d[(i, j)]) for j in range(e))
        tgt = b.splice(eq, xhat)[0]
        eq_d.append(ctx.retarget(d, tgt))
    R = refute_variety(comp.CK, E=comp.E)
    d = ctx.import_cert(R, xhat, eq_d)
    return ctx.finish(ctx.retarget(d, b.one()))


def _bit_names(coord: str, p: int) -> list:
    return [f"{coord}.{j}" for j in range(p.bit_length())]


# --------------------------------------------------------------- bundles

SECTIONS = ("manifest", "field", "circuit", "equations", "vectorized", "boolean", "cnf", "refutation",
            "transcript")


@dataclass
class CertBundle:
    mode: str
    sections: dict = dc_field(default_factory=dict)
    compiled: Compiled | None = None
    refutation: IPSCert | None = None
    report: VerifyReport | None = None

    def to_text(self) -> str:
        body = {k: v.rstrip("\n") for k, v in self.sections.items() if k != "manifest"}
        lines = [f"version {VERSION}", f"mode {self.mode}"]
        for k in SECTIONS[1:]:
            if k in body:
                lines.append(f"{k} {hashlib.sha256(body[k].encode()).hexdigest()}")
        out = ["[manifest]", *lines]
        for k in SECTIONS[1:]:
            if k in body:
                out.append(f"[{k}]")
                out.append(body[k].rstrip("\n"))
        return "\n".join(out) + "\n"


def bool_to_text(bb: BoolBuilder, outputs) -> str:
    """Gate list of the Boolean layer: ``<id> input|const|not|and|or ...``."""
    phi = bb.build(list(outputs))
    lines = []
    for i, g in enumerate(phi.gates):
        lines.append(f"{i} " + " ".join(str(x) for x in g))
    lines.append("outputs " + " ".join(str(o) for o in phi.outputs))
    return "\n".join(lines)


def _sections_common(C: AlgCircuit, K: FieldDesc, rationale: str) -> dict:
    return {
        "field": f"source {C.field.to_text()}\ntarget {K.to_text()}\nrationale {rationale}",
        "circuit": to_netlist(C),
    }


def _transcript(report: VerifyReport, backend: str, seed: int) -> str:
    return "\n".join([f"backend {backend}", f"seed {seed}", *report.lines(), report.record()])


def compiled_sections(comp: Compiled) -> dict:
    """Bundle sections that follow deterministically from the circuit and seed."""
    sec = _sections_common(comp.source, comp.K, " ".join(str(x) for x in comp.selection.rationale))
    sec["equations"] = comp.E.to_text()
    sec["vectorized"] = "\n".join(f"equation {i}\n" + to_netlist(v).rstrip("\n") for i, v in enumerate(comp.V))
    blocks = [f"block {k} eq {blk.eq} coord {blk.coord} clauses {blk.clause_offset} {len(blk.tr.cnf.clauses)}"
              for k, blk in enumerate(comp.blocks)]
    sec["boolean"] = "\n".join(blocks) + "\n" + bool_to_text(comp.bb, [blk.out for blk in comp.blocks])
    sec["cnf"] = comp.cnf.to_dimacs()
    return sec


def certify(C: AlgCircuit, mode: str = "cnf", seed: int = 0, backend: str = "auto",
            error_bound=Fraction(1, 2 ** 30)) -> CertBundle:
    """Compile, refute and verify; returns the full bundle."""
    if mode == "variety":
        return variety_bundle(C, seed, backend, error_bound)
    if mode != "cnf":
        raise ValueError(f"unknown mode {mode!r}")
    comp = compile_cnf(C, seed)
    R = build_refutation(comp)
    rep = verify(R, backend=backend, error_bound=error_bound, seed=seed)
    sec = compiled_sections(comp)
    sec["refutation"] = to_netlist(R.cert)
    sec["transcript"] = _transcript(rep, backend, seed)
    bundle = CertBundle("cnf", sec, comp, R, rep)
    if not rep.accepted:
        raise VerificationFailed(rep.failed_stage, "fresh refutation rejected")
    return bundle


def variety_bundle(C: AlgCircuit, seed: int = 0, backend: str = "auto",
                   error_bound=Fraction(1, 2 ** 30)) -> CertBundle:
    """Equation system of ``C`` and its direct refutation (no CNF layers)."""
    if not pit(C, exact=None, seed=seed).is_zero:
        raise SourceNotZero("the source circuit is not the zero polynomial")
    E = encode(C)
    R = refute_variety(C, E=E)
    rep = verify(R, backend=backend, error_bound=error_bound, seed=seed)
    sec = _sections_common(C, C.field, "none")
    sec["equations"] = E.to_text()
    sec["refutation"] = to_netlist(R.cert)
    sec["transcript"] = _transcript(rep, backend, seed)
    if not rep.accepted:
        raise VerificationFailed(rep.failed_stage, "fresh refutation rejected")
    return CertBundle("variety", sec, None, R, rep)


def parse_bundle(text: str) -> CertBundle:
    sections: dict = {}
    cur = None
    for ln, line in enumerate(text.splitlines(), 1):
        if line.startswith("[") and line.endswith("]"):
            cur = line[1:-1]
            if cur not in SECTIONS or cur in sections:
                raise Malformed(f"line {ln}: unexpected section [{cur}]")
            sections[cur] = []
        elif cur is None:
            raise Malformed(f"line {ln}: content before [manifest]")
        else:
            sections[cur].append(line)
    sections = {k: "\n".join(v) for k, v in sections.items()}
    if "manifest" not in sections:
        raise Malformed("missing [manifest]")
    man = dict(l.split(" ", 1) for l in sections["manifest"].splitlines() if " " in l)
    mode = man.get("mode")
    if mode not in ("cnf", "variety") or man.get("version") != VERSION:
        raise Malformed("bad manifest header")
    need = ["field", "circuit", "equations", "refutation", "transcript"]
    if mode == "cnf":
        need += ["vectorized", "boolean", "cnf"]
    for k in need:
        if k not in sections:
            raise Malformed(f"missing [{k}]")
    return CertBundle(mode, sections)


def _check_manifest(bundle: CertBundle):
    man = dict(l.split(" ", 1) for l in bundle.sections["manifest"].splitlines() if " " in l)
    for k, v in bundle.sections.items():
        if k == "manifest":
            continue
        h = hashlib.sha256(v.encode()).hexdigest()
        if man.get(k) != h:
            raise VerificationFailed("manifest", f"hash mismatch in [{k}]")
    for k in man:
        if k in SECTIONS and k not in bundle.sections:
            raise VerificationFailed("manifest", f"[{k}] listed but absent")


def verify_bundle(bundle: CertBundle | str, backend: str = "auto", error_bound=Fraction(1, 2 ** 30),
                  seed: int | None = None) -> VerifyReport:
    """Rebuild the axiom list from the bundle, verify the stored refutation
    (target 1) and compare with the recorded transcript."""
    if isinstance(bundle, str):
        bundle = parse_bundle(bundle)
    sec = bundle.sections
    _check_manifest(bundle)
    try:
        flines = dict(l.split(" ", 1) for l in sec["field"].splitlines())
        K = parse_field(flines["target"])
        src = parse_field(flines["source"])
        C = parse_netlist(sec["circuit"])
        cert = parse_netlist(sec["refutation"])
        tlines = sec["transcript"].splitlines()
        rec_seed = int(tlines[1].split()[1])
    except (ParseError, KeyError, ValueError, IndexError) as exc:
        raise Malformed(f"unreadable bundle: {exc}") from None
    if C.field != src or cert.field != K:
        raise VerificationFailed("field", "field sections disagree with circuits")
    # the derived sections must be exactly what the circuit compiles to
    if bundle.mode == "cnf":
        expect = compiled_sections(compile_cnf(C, rec_seed))
    else:
        expect = {"equations": encode(C).to_text(), **_sections_common(C, C.field, "none")}
    for k, v in expect.items():
        if v.rstrip("\n") != sec[k].rstrip("\n"):
            raise VerificationFailed("compile", f"[{k}] does not match the recompiled circuit")
    seed = rec_seed if seed is None else seed
    if bundle.mode == "cnf":
        try:
            cnf = parse_dimacs(sec["cnf"])
        except ParseError as exc:
            raise Malformed(f"bad cnf: {exc}") from None
        axioms = refutation_axioms(cnf, K)
        xs = cnf.var_names
    else:
        E = encode(C)
        axioms = list(E.equations)
        xs = E.var_names
    if tuple(cert.var_names) != tuple(xs) or len(cert.placeholders) != len(axioms):
        raise VerificationFailed("axioms", "refutation does not match the axiom list")
    b = Builder(K)
    target = b.build([b.one()], xs)
    R = IPSCert(cert, tuple(axioms), target)
    rep = verify(R, backend=backend, error_bound=error_bound, seed=seed)
    if not rep.accepted:
        raise VerificationFailed(rep.failed_stage, "refutation rejected")
    if seed == rec_seed and backend == tlines[0].split()[1]:
        if _transcript(rep, backend, seed) != sec["transcript"]:
            raise VerificationFailed("transcript", "recorded transcript differs from re-run")
    return rep


# ------------------------------------------------------------- SAT check

def sat_check(cnf: Cnf, exhaustive_limit: int = 22, budget: int | None = None):
    """Model (dict var -> 0/1) or ``None`` if unsatisfiable.

    Exhaustive enumeration for small instances, otherwise a CDCL solver;
    ``budget`` bounds the conflicts (raises ``TimeoutError`` when hit).
    """
    n = cnf.num_vars
    if n <= exhaustive_limit:
        for bits in itertools.product((0, 1), repeat=n):
            model = {k + 1: v for k, v in enumerate(bits)}
            if cnf.evaluate(model):
                return model
        return None
    from pysat.solvers import Solver

    with Solver(name="cadical153", bootstrap_with=[list(c) for c in cnf.clauses]) as s:
        if budget is not None:
            s.conf_budget(budget)
            res = s.solve_limited()
            if res is None:
                raise TimeoutError("SAT budget exhausted")
        else:
            res = s.solve()
        if not res:
            return None
        return {abs(l): int(l > 0) for l in s.get_model()}


def dpll(cnf: Cnf, budget: int = 1_000_000):
    """Small unit-propagating backtracking search (fallback without a solver)."""
    clauses = [list(c) for c in cnf.clauses]
    steps = [0]

    def solve(assign):
        steps[0] += 1
        if steps[0] > budget:
            raise TimeoutError("DPLL budget exhausted")
        assign = dict(assign)
        while True:
            unit = None
            for c in clauses:
                vals = [assign.get(abs(l)) for l in c]
                if any(v is not None and (v == 1) == (l > 0) for v, l in zip(vals, c)):
                    continue
                free = [l for v, l in zip(vals, c) if v is None]
                if not free:
                    return None
                if len(free) == 1:
                    unit = free[0]
                    break
            if unit is None:
                break
            assign[abs(unit)] = int(unit > 0)
        for v in range(1, cnf.num_vars + 1):
            if v not in assign:
                for val in (0, 1):
                    r = solve({**assign, v: val})
                    if r is not None:
                        return r
                return None
        return assign

    return solve({})
