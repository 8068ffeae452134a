"""Binary arithmetic as Boolean circuits, the mod-p layer built on it, and
IPS derivations tying bit-level values back to field values.

Bit vectors are lists of signal ids in a :class:`BoolBuilder`, low-order
bit first.  :class:`Blaster` builds circuits and, when given a
:class:`~ipscomp.ips.DerivCtx`, the matching derivations at the same time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .boolean import BoolBuilder, BoolCircuit, bchildren
from .circuit import AlgCircuit, Builder, constant_mask, _constant_values
from .errors import IpsError, UnsupportedGate, WidthMismatch, WidthOverflow, WrongCharacteristic
from .field import FieldDesc, make_field
from .ips import Deriv, DerivCtx, IPSCert, chain_compose, ml_reduce


@dataclass(frozen=True)
class BitContext:
    p: int

    @property
    def b_p(self) -> int:
        return self.p.bit_length()

    @property
    def sum_width(self) -> int:
        return self.b_p + 1

    @property
    def prod_width(self) -> int:
        return 2 * self.b_p

    def field(self) -> FieldDesc:
        return make_field(self.p)


@dataclass(frozen=True)
class BitVectorCircuit:
    circuit: BoolCircuit
    signed: bool = False

    @property
    def width(self) -> int:
        return len(self.circuit.outputs)

    def value(self, assignment: dict) -> int:
        from .boolean import eval_bool

        bits = eval_bool(self.circuit, assignment)
        v = sum(bit << j for j, bit in enumerate(bits))
        if self.signed and bits and bits[-1]:
            v -= 1 << len(bits)
        return v


def int_bits(n: int, width: int) -> list[int]:
    """Two's-complement bits of ``n`` (low first)."""
    if not -(1 << max(width - 1, 0)) <= n < (1 << width) or (n < 0 and width == 0):
        raise WidthOverflow(f"{n} does not fit in {width} bits")
    n %= 1 << width
    return [(n >> j) & 1 for j in range(width)]


def _full_adder(bb: BoolBuilder, ins):
    a, b, c = ins
    t = bb.xor(a, b)
    s = bb.xor(t, c)
    c2 = bb.or_(bb.and_(a, b), bb.and_(c, t))
    return [s, c2]


class Blaster:
    """Builds arithmetic bit circuits inside ``bb``.

    With ``dctx`` set, every operation also returns a derivation in that
    context; otherwise the derivation slot is ``None``.

    ``overflow`` controls how the bits cut off by REM's final truncation
    are handled in derivations: ``"ml"`` derives ``alg(bit)`` from Boolean
    axioms by per-gate multilinearisation (exponential in the REM input
    width), or a callable ``signal -> Deriv`` supplying the derivation.
    Overflow signals are always collected in ``self.overflow``.
    """

    ML_MAX = 10

    def __init__(self, p: int, bb: BoolBuilder | None = None, dctx: DerivCtx | None = None,
                 overflow="ml"):
        self.p = p
        self.ctx = BitContext(p)
        self.bb = bb if bb is not None else BoolBuilder()
        self.dctx = dctx
        self.overflow_mode = overflow
        self.overflow: list = []
        if dctx is not None:
            F = dctx.field
            if F.char != p:
                raise WrongCharacteristic(f"derivations over characteristic {F.char}, p={p}")

    # helpers
    def const_bits(self, n: int, width: int) -> list:
        return [self.bb.const(v) for v in int_bits(n, width)]

    def alg(self, s: int) -> int:
        return self.dctx.algmap(self.bb)(s)

    def val(self, bits: Sequence[int]) -> int:
        """VAL_p of a bit vector as a gate of the derivation builder."""
        b = self.dctx.b
        return b.lin([(pow(2, j, self.p), self.alg(s)) for j, s in enumerate(bits)])

    def square(self, s: int) -> Deriv:
        return self.dctx.bool_square(self.bb, s)

    def _pad(self, bits, w):
        return list(bits) + [self.bb.FALSE] * (w - len(bits))

    # ADD
    def add(self, A: Sequence[int], B: Sequence[int]):
        """Unsigned ripple-carry sum, ``max(|A|,|B|) + 1`` bits."""
        w = max(len(A), len(B))
        A, B = self._pad(A, w), self._pad(B, w)
        bb = self.bb
        c = bb.FALSE
        out = []
        parts = []
        for j in range(w):
            if self.dctx is None:
                s, c2 = _full_adder(bb, [A[j], B[j], c])
            else:
                (s, c2), d = self.dctx.gadget("fa", _full_adder, [A[j], B[j], c], bb, (1, 2), (-1, -1, -1))
                parts.append((pow(2, j, self.p), d))
            out.append(s)
            c = c2
        out.append(c)
        if self.dctx is None:
            return out, None
        d = self.dctx.lin(parts) if parts else self.dctx.zero()
        tgt = self.dctx.b.lin([(1, self.val(out)), (-1, self.val(A)), (-1, self.val(B))])
        return out, self.dctx.retarget(d, tgt)

    # PROD
    def prod(self, A: Sequence[int], B: Sequence[int]):
        """Shift-and-add product, ``|A| + |B|`` bits."""
        bb = self.bb
        la, lb = len(A), len(B)
        acc = None
        parts = []
        for j in range(lb):
            row = [bb.FALSE] * j + [bb.and_(a, B[j]) for a in A]
            if acc is None:
                acc = row
                continue
            acc, d = self.add(acc, row)
            if d is not None:
                parts.append((1, d))
        acc = self._pad(acc, la + lb)[: la + lb]
        if self.dctx is None:
            return acc, None
        d = self.dctx.lin(parts) if parts else self.dctx.zero()
        b = self.dctx.b
        tgt = b.sub(self.val(acc), b.mul(self.val(A), self.val(B)))
        return acc, self.dctx.retarget(d, tgt)

    # SUBPROD and LT
    def subprod(self, X: Sequence[int], i: int):
        """``VAL(X) - 2^i p`` in two's complement, width ``W`` (sign bit on top).

        Adds ``0X`` to the constant ``PROD(BIT(-2^i), BIT(p))`` kept to ``W``
        bits.  Returns ``(bits, W, raw sum with carry, derivation)``.
        """
        T = (1 << i) * self.p
        W = max(len(X), T.bit_length()) + 1
        negpow = self.const_bits(-(1 << i), W)
        pbits = self.const_bits(self.p, W)
        kappa, _ = Blaster(self.p, self.bb).prod(negpow, pbits)
        kappa = kappa[:W]
        raw, d = self.add(self._pad(X, W), kappa)
        return raw[:W], W, raw, d

    def lt(self, X: Sequence[int], i: int) -> int:
        """1 iff ``VAL(X) < 2^i p``."""
        T = (1 << i) * self.p
        if T >= 1 << len(X):
            return self.bb.TRUE
        bits, W, _, _ = Blaster(self.p, self.bb).subprod(X, i)
        return bits[W - 1]

    # REM
    def rem_iteration(self, X: Sequence[int], k: int):
        """One conditional subtraction of ``2^k p``; ``None`` when it is a no-op."""
        b = len(X)
        T = (1 << k) * self.p
        if T >= 1 << b:
            return None
        raw, W, full, dA = self.subprod(X, k)
        assert W == b + 1
        psi = raw[b]
        phi = raw[:b]
        bb = self.bb
        new = [bb.mux(psi, X[j], phi[j]) for j in range(b)]
        if self.dctx is None:
            return new, None
        ctx = self.dctx
        B = ctx.b
        two_b = pow(2, b, self.p)
        apsi = self.alg(psi)
        delta = B.lin([(1, self.val(phi)), (-1, self.val(X)), (-two_b, apsi)])
        dA = ctx.retarget(dA, delta)
        chi = B.lin([(pow(2, j, self.p), B.mul(self.alg(X[j]), self.alg(phi[j]))) for j in range(b)])
        coef = B.lin([(1, chi), (-two_b, B.one())])
        d = ctx.add(ctx.mulg(B.one_minus(apsi), dA), ctx.mulg(coef, self.square(psi)))
        return new, ctx.retarget(d, B.sub(self.val(new), self.val(X)))

    def rem(self, X: Sequence[int]):
        """Reduce mod p: ``b`` iterations (thresholds ``2^{b-1}p .. p``), then
        truncation to ``b_p`` bits."""
        X0 = list(X)
        X = list(X)
        b = len(X)
        parts = []
        for k in range(b - 1, -1, -1):
            r = self.rem_iteration(X, k)
            if r is None:
                continue
            X, d = r
            if d is not None:
                parts.append((1, d))
        bp = self.ctx.b_p
        out = self._pad(X[:bp], bp)
        over = [s for s in X[bp:] if self.bb.is_const(s) != 0]
        self.overflow.extend(over)
        if self.dctx is None:
            return out, None
        ctx = self.dctx
        for j in range(bp, len(X)):
            s = X[j]
            if self.bb.is_const(s) == 0:
                continue
            parts.append((-pow(2, j, self.p), self._overflow_deriv(s, X0)))
        d = ctx.lin(parts) if parts else ctx.zero()
        return out, ctx.retarget(d, ctx.b.sub(self.val(out), self.val(X0)))

    def _overflow_deriv(self, s: int, leaves) -> Deriv:
        if callable(self.overflow_mode):
            return self.overflow_mode(s)
        if self.overflow_mode != "ml":
            raise ValueError(f"unknown overflow mode {self.overflow_mode!r}")
        d, ml = ml_deriv(self.dctx, self.bb, leaves, s, self.ML_MAX)
        if ml:
            raise IpsError("REM overflow bit is not identically zero on the cube")
        return self.dctx.retarget(d, self.alg(s))

    # mod-p arithmetic
    def add_p(self, A, B):
        S, d1 = self.add(A, B)
        R, d2 = self.rem(S)
        if self.dctx is None:
            return R, None
        ctx = self.dctx
        tgt = ctx.b.lin([(1, self.val(R)), (-1, self.val(A)), (-1, self.val(B))])
        return R, ctx.retarget(ctx.add(d1, d2), tgt)

    def prod_p(self, A, B):
        P, d1 = self.prod(A, B)
        R, d2 = self.rem(P)
        if self.dctx is None:
            return R, None
        ctx = self.dctx
        tgt = ctx.b.sub(self.val(R), ctx.b.mul(self.val(A), self.val(B)))
        return R, ctx.retarget(ctx.add(d1, d2), tgt)

    # BIT_p
    def bit_p(self, F: AlgCircuit, var_bits: dict, fhat: dict | None = None, output: int | None = None):
        """Bits of every needed gate of ``F`` (single output unless
        ``output`` is given).

        ``var_bits`` maps F's variable names to bit vectors.  With a
        derivation context, ``fhat`` maps F's variable names to derivation
        gates standing for the field-side value (default ``VAL_p`` of the
        bits) and the result carries a derivation of
        ``F(fhat) - VAL_p(BIT_p(F))``.
        """
        Fd = F.field
        if Fd.char != self.p or Fd.degree != 1:
            raise WrongCharacteristic(f"BIT_p needs a circuit over F_{self.p}")
        out = F.output if output is None else output
        mask = constant_mask(F)
        cvals = _constant_values(F, mask)
        bp = self.ctx.b_p
        bits: dict = {}
        der: dict = {}
        fv: dict = {}
        ctx = self.dctx
        B = ctx.b if ctx is not None else None
        need = _cone(F, out)
        for i, g in enumerate(F.gates):
            if i not in need:
                continue
            k = g[0]
            if mask[i]:
                a = int(cvals[i])
                bits[i] = self.const_bits(a, bp)
                if ctx is not None:
                    fv[i] = B.const(a)
                    der[i] = ctx.retarget(ctx.zero(), B.sub(fv[i], self.val(bits[i])))
                continue
            if k == "input":
                bits[i] = list(var_bits[g[1]])
                if len(bits[i]) != bp:
                    raise WidthMismatch(f"{g[1]} has {len(bits[i])} bits, expected {bp}")
                if ctx is not None:
                    fv[i] = fhat[g[1]] if fhat and g[1] in fhat else self.val(bits[i])
                    der[i] = ctx.retarget(ctx.zero(), B.sub(fv[i], self.val(bits[i])))
            elif k == "lin":
                terms = []
                for c, u in g[1]:
                    c = int(c)
                    if c == 1:
                        terms.append((bits[u], der.get(u)))
                    else:
                        P, dp = self.prod_p(self.const_bits(c, bp), bits[u])
                        dt = None
                        if ctx is not None:
                            dt = ctx.sub(ctx.scale(c, der[u]), dp)
                        terms.append((P, dt))
                if not terms:
                    terms = [(self.const_bits(0, bp), ctx.zero() if ctx else None)]
                while len(terms) > 1:
                    nxt = []
                    for t in range(0, len(terms) - 1, 2):
                        (X1, d1), (X2, d2) = terms[t], terms[t + 1]
                        S, ds = self.add_p(X1, X2)
                        nxt.append((S, ctx.add(d1, d2, ctx.scale(-1, ds)) if ctx else None))
                    if len(terms) % 2:
                        nxt.append(terms[-1])
                    terms = nxt
                bits[i] = terms[0][0]
                if ctx is not None:
                    fv[i] = B.lin((c, fv[u]) for c, u in g[1])
                    der[i] = ctx.retarget(terms[0][1], B.sub(fv[i], self.val(bits[i])))
            elif k == "mul":
                u, w = g[1], g[2]
                P, dp = self.prod_p(bits[u], bits[w])
                bits[i] = P
                if ctx is not None:
                    fv[i] = B.mul(fv[u], fv[w])
                    d = ctx.add(ctx.mulg(fv[w], der[u]), ctx.mulg(self.val(bits[u]), der[w]),
                                ctx.scale(-1, dp))
                    der[i] = ctx.retarget(d, B.sub(fv[i], self.val(P)))
            else:
                raise UnsupportedGate(f"inversion of a non-constant at gate {i}")
        return bits[out], (der[out] if ctx is not None else None)


def _cone(C: AlgCircuit, out: int) -> set:
    from .circuit import children

    seen = set()
    stack = [out]
    while stack:
        i = stack.pop()
        if i not in seen:
            seen.add(i)
            stack.extend(children(C.gates[i]))
    return seen


# ------------------------------------------------------ multilinear closure

def ml_deriv(ctx: DerivCtx, bb: BoolBuilder, leaves: Sequence[int], signal: int, max_leaves: int = 10):
    """Derivation of ``alg(signal) - ML(signal)`` from Boolean axioms, where
    ``ML`` is the multilinear polynomial in ``alg(leaves)`` agreeing with the
    signal on the cube.  Returns ``(deriv, ml)`` with ``ml`` a dict
    ``exponent tuple -> coeff`` (empty when the signal is constantly 0).

    Every gate between ``signal`` and the leaves gets its own step; the cost
    is exponential in the number of leaves.
    """
    n = len(leaves)
    if n > max_leaves:
        raise IpsError(f"multilinear closure over {n} leaves exceeds {max_leaves}")
    F = ctx.field
    B = ctx.b
    am = ctx.algmap(bb)
    leafpos = {s: k for k, s in enumerate(leaves)}
    largs = [am(s) for s in leaves]
    H = [None] * n
    memo_key = ("ml", id(bb.gates), tuple(leaves))
    memo = ctx._gadgets.setdefault(memo_key, {})
    gates = bb.gates
    one = F.one()
    zero_e = (0,) * n

    def hk(k):
        if H[k] is None:
            H[k] = ctx.bool_square(bb, leaves[k])
        return H[k]

    def mlgate(poly):
        return ctx.poly_gate(poly, largs) if poly else B.zero()

    def mul_reduce(P, Q):
        prod: dict = {}
        for e1, c1 in P.items():
            for e2, c2 in Q.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = F.mul(c1, c2)
                prod[e] = F.add(prod[e], c) if e in prod else c
        return ml_reduce(F, prod, n)

    def one_minus(P):
        out = {e: F.neg(c) for e, c in P.items()}
        c = F.add(out.get(zero_e, F.zero()), one)
        if F.is_zero(c):
            out.pop(zero_e, None)
        else:
            out[zero_e] = c
        return out

    stack = [signal]
    while stack:
        j = stack[-1]
        if j in memo:
            stack.pop()
            continue
        if j in leafpos:
            e = [0] * n
            e[leafpos[j]] = 1
            memo[j] = ({tuple(e): one}, ctx.zero())
            stack.pop()
            continue
        g = gates[j]
        if g[0] == "input":
            raise IpsError(f"signal depends on input {g[1]!r} outside the leaf set")
        pend = [c for c in bchildren(g) if c not in memo]
        if pend:
            stack.extend(pend)
            continue
        stack.pop()
        k = g[0]
        if k == "const":
            memo[j] = ({zero_e: one} if g[1] else {}, ctx.zero())
        elif k == "not":
            P, d = memo[g[1]]
            memo[j] = (one_minus(P), ctx.scale(-1, d))
        else:
            (Pa, da), (Pb, db) = memo[g[1]], memo[g[2]]
            if k == "and":
                A = am(g[1])
                rem, quot = mul_reduce(Pa, Pb)
                parts = [(1, ctx.mulg(A, db)), (1, ctx.mulg(mlgate(Pb), da))]
                parts += [(1, ctx.mulg(ctx.poly_gate(q, largs), hk(v))) for v, q in quot.items()]
                memo[j] = (rem, ctx.lin(parts))
            else:
                A1 = am.neg(g[1])
                Pa1, Pb1 = one_minus(Pa), one_minus(Pb)
                rem, quot = mul_reduce(Pa1, Pb1)
                parts = [(1, ctx.mulg(A1, db)), (1, ctx.mulg(mlgate(Pb1), da))]
                parts += [(-1, ctx.mulg(ctx.poly_gate(q, largs), hk(v))) for v, q in quot.items()]
                memo[j] = (one_minus(rem), ctx.lin(parts))
    P, d = memo[signal]
    return ctx.retarget(d, B.sub(am(signal), mlgate(P))), P


# -------------------------------------------------------- public circuits

def _names(prefix: str, w: int) -> list:
    return [f"{prefix}{j}" for j in range(w)]


def _vector(bb, outs, names, signed=False) -> BitVectorCircuit:
    return BitVectorCircuit(bb.build(outs, names), signed)


def add_circuit(b: int) -> BitVectorCircuit:
    """Ripple-carry adder on inputs ``a0..``, ``c0..`` (b bits each), b+1 outputs."""
    bb = BoolBuilder()
    A = [bb.input(n) for n in _names("a", b)]
    B = [bb.input(n) for n in _names("c", b)]
    out, _ = Blaster(2, bb).add(A, B)
    return _vector(bb, out, _names("a", b) + _names("c", b))


def prod_circuit(b: int) -> BitVectorCircuit:
    bb = BoolBuilder()
    A = [bb.input(n) for n in _names("a", b)]
    B = [bb.input(n) for n in _names("c", b)]
    out, _ = Blaster(2, bb).prod(A, B)
    return _vector(bb, out, _names("a", b) + _names("c", b))


def bit_const(n: int, width: int) -> BitVectorCircuit:
    bb = BoolBuilder()
    return _vector(bb, [bb.const(v) for v in int_bits(n, width)], [], signed=n < 0)


def val_plus(names: Sequence[str] | int, field: FieldDesc) -> AlgCircuit:
    """``sum 2^j x_j`` as one linear gate."""
    if isinstance(names, int):
        names = _names("x", names)
    b = Builder(field)
    xs = [b.input(n) for n in names]
    return b.build([b.lin((2 ** j, x) for j, x in enumerate(xs))], names)


def val_p(ctx: BitContext, names: Sequence[str] | int, field: FieldDesc | None = None) -> AlgCircuit:
    """``sum (2^j mod p) x_j`` over a field of characteristic p."""
    field = field or ctx.field()
    if field.char != ctx.p:
        raise WrongCharacteristic(f"VAL_p with p={ctx.p} over characteristic {field.char}")
    if isinstance(names, int):
        names = _names("x", names)
    b = Builder(field)
    xs = [b.input(n) for n in names]
    return b.build([b.lin((pow(2, j, ctx.p), x) for j, x in enumerate(xs))], names)


def lt_circuit(ctx: BitContext, i: int, b: int) -> BoolCircuit:
    bb = BoolBuilder()
    X = [bb.input(n) for n in _names("x", b)]
    return bb.build([Blaster(ctx.p, bb).lt(X, i)], _names("x", b))


def subprod(ctx: BitContext, b: int, i: int) -> BitVectorCircuit:
    bb = BoolBuilder()
    X = [bb.input(n) for n in _names("x", b)]
    bits, _, _, _ = Blaster(ctx.p, bb).subprod(X, i)
    return _vector(bb, bits, _names("x", b), signed=True)


def rem_p(ctx: BitContext, b: int) -> BitVectorCircuit:
    bb = BoolBuilder()
    X = [bb.input(n) for n in _names("x", b)]
    out, _ = Blaster(ctx.p, bb).rem(X)
    return _vector(bb, out, _names("x", b))


def add_p(ctx: BitContext) -> BitVectorCircuit:
    bp = ctx.b_p
    bb = BoolBuilder()
    A = [bb.input(n) for n in _names("a", bp)]
    B = [bb.input(n) for n in _names("c", bp)]
    out, _ = Blaster(ctx.p, bb).add_p(A, B)
    return _vector(bb, out, _names("a", bp) + _names("c", bp))


def prod_p(ctx: BitContext) -> BitVectorCircuit:
    bp = ctx.b_p
    bb = BoolBuilder()
    A = [bb.input(n) for n in _names("a", bp)]
    B = [bb.input(n) for n in _names("c", bp)]
    out, _ = Blaster(ctx.p, bb).prod_p(A, B)
    return _vector(bb, out, _names("a", bp) + _names("c", bp))


# ------------------------------------------------------------ certificates

def _bit_ctx(ctx: BitContext, names, field):
    field = field or ctx.field()
    if field.char != ctx.p:
        raise WrongCharacteristic(f"p={ctx.p} over characteristic {field.char}")
    d = DerivCtx(field, names)
    d.add_boolean_axioms(names)
    return d


def _binop_cert(ctx: BitContext, op: str, field=None) -> IPSCert:
    bp = ctx.b_p
    names = _names("a", bp) + _names("c", bp)
    d = _bit_ctx(ctx, names, field)
    bb = BoolBuilder()
    A = [bb.input(n) for n in names[:bp]]
    B = [bb.input(n) for n in names[bp:]]
    bl = Blaster(ctx.p, bb, d)
    _, der = getattr(bl, op)(A, B)
    return d.finish(der)


def add_p_cert(ctx: BitContext, field: FieldDesc | None = None) -> IPSCert:
    """Derives ``VAL_p(ADD_p(a, c)) - VAL_p(a) - VAL_p(c)``."""
    return _binop_cert(ctx, "add_p", field)


def prod_p_cert(ctx: BitContext, field: FieldDesc | None = None) -> IPSCert:
    """Derives ``VAL_p(PROD_p(a, c)) - VAL_p(a) * VAL_p(c)``."""
    return _binop_cert(ctx, "prod_p", field)


def rem_iteration_circuit(ctx: BitContext, b: int, k: int) -> BoolCircuit | None:
    bb = BoolBuilder()
    names = _names("x", b)
    X = [bb.input(n) for n in names]
    r = Blaster(ctx.p, bb).rem_iteration(X, k)
    return None if r is None else bb.build(r[0], names)


def rem_iteration_cert(ctx: BitContext, b: int, k: int, field: FieldDesc | None = None) -> IPSCert | None:
    names = _names("x", b)
    d = _bit_ctx(ctx, names, field)
    bb = BoolBuilder()
    X = [bb.input(n) for n in names]
    r = Blaster(ctx.p, bb, d).rem_iteration(X, k)
    return None if r is None else d.finish(r[1])


def rem_p_cert(ctx: BitContext, b: int, field: FieldDesc | None = None, method: str = "direct") -> IPSCert:
    """Derives ``VAL_p(REM_p(x)) - VAL_p(x)`` from Boolean axioms on ``b`` bits.

    ``method="direct"`` builds everything in one context;
    ``method="compose"`` derives each iteration on its own and chains them
    with :func:`~ipscomp.ips.chain_compose` before adding the truncation step.
    """
    names = _names("x", b)
    if method == "direct":
        d = _bit_ctx(ctx, names, field)
        bb = BoolBuilder()
        X = [bb.input(n) for n in names]
        _, der = Blaster(ctx.p, bb, d).rem(X)
        return d.finish(der)
    if method != "compose":
        raise ValueError(f"unknown method {method!r}")
    ks = [k for k in range(b - 1, -1, -1) if (1 << k) * ctx.p < (1 << b)]
    certs = [rem_iteration_cert(ctx, b, k, field) for k in ks]
    circs = [rem_iteration_circuit(ctx, b, k) for k in ks]
    d = _bit_ctx(ctx, names, field)
    bb = BoolBuilder()
    X = [bb.input(n) for n in names]
    bl = Blaster(ctx.p, bb, d)
    if len(certs) >= 2:
        J = chain_compose(certs, circs)
        dj = d.import_cert(J)
    elif certs:
        dj = d.import_cert(certs[0])
    else:
        dj = d.zero()
    cur = X
    for C in circs:
        cur = bb.splice(C, dict(zip(C.var_names, cur)))
    bp = ctx.b_p
    parts = [(1, dj)]
    for j in range(bp, b):
        s = cur[j]
        if bb.is_const(s) == 0:
            continue
        parts.append((-pow(2, j, ctx.p), bl._overflow_deriv(s, X)))
    out = bl._pad(cur[:bp], bp)
    der = d.lin(parts)
    return d.finish(d.retarget(der, d.b.sub(bl.val(out), bl.val(X))))


def bit_names(F: AlgCircuit, b_p: int) -> dict:
    return {v: [f"{v}.{j}" for j in range(b_p)] for v in F.var_names}


def bit_p_operator(ctx: BitContext, F: AlgCircuit) -> BitVectorCircuit:
    """BIT_p of a single-output circuit over F_p; input ``v`` becomes bits
    ``v.0 .. v.(b_p-1)``."""
    names = bit_names(F, ctx.b_p)
    bb = BoolBuilder()
    vb = {v: [bb.input(n) for n in ns] for v, ns in names.items()}
    out, _ = Blaster(ctx.p, bb).bit_p(F, vb)
    flat = [n for v in F.var_names for n in names[v]]
    return _vector(bb, out, flat)


def binary_value_cert(ctx: BitContext, F: AlgCircuit, field: FieldDesc | None = None,
                      overflow="ml") -> IPSCert:
    """Derives ``F(VAL_p(BIT_p(x))) - VAL_p(BIT_p(F))`` from Boolean axioms."""
    names = bit_names(F, ctx.b_p)
    flat = [n for v in F.var_names for n in names[v]]
    d = _bit_ctx(ctx, flat, field)
    bb = BoolBuilder()
    vb = {v: [bb.input(n) for n in ns] for v, ns in names.items()}
    _, der = Blaster(ctx.p, bb, d, overflow).bit_p(F, vb)
    return d.finish(der)
