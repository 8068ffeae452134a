"""Lowering circuits over K = F_{p^e} to e-output circuits over F_p via the
regular matrix representation (power basis)."""
from __future__ import annotations

from dataclasses import dataclass

from .circuit import AlgCircuit, Builder, _constant_values, constant_mask, depth, proddepth, wires
from .errors import ArityMismatch, FieldMismatch
from .field import FieldDesc, FieldMap


@dataclass(frozen=True)
class VecContext:
    K: FieldDesc

    @property
    def F(self) -> FieldDesc:
        return self.K.prime_field()

    @property
    def e(self) -> int:
        return self.K.degree

    @property
    def basis(self) -> list:
        K = self.K
        if self.e == 1:
            return [K.one()]
        return [tuple(1 if k == j else 0 for k in range(self.e)) for j in range(self.e)]

    def iota(self, a) -> tuple:
        a = self.K.coerce(a)
        return (a,) if self.e == 1 else tuple(a)

    def iota_inv(self, v) -> object:
        return v[0] % self.K.char if self.e == 1 else tuple(x % self.K.char for x in v)

    def embed(self) -> FieldMap:
        return FieldMap(self.F, self.K)


def var_coords(name: str, e: int) -> list:
    return [f"{name}.{j}" for j in range(e)]


def matrix_rep(ctx: VecContext, a) -> list:
    """``M[r][c]``: column ``c`` is ``iota(a * t^c)``."""
    K = ctx.K
    try:
        a = K.coerce(a)
    except Exception as exc:
        raise FieldMismatch(str(exc)) from None
    cols = [ctx.iota(K.mul(a, t)) for t in ctx.basis]
    return [[cols[c][r] for c in range(ctx.e)] for r in range(ctx.e)]


def _matmul(F, A, B):
    n = len(A)
    return [[sum(A[i][k] * B[k][j] for k in range(n)) % F.char for j in range(n)] for i in range(n)]


def vec_circuit(ctx: VecContext, C: AlgCircuit) -> AlgCircuit:
    """Outputs are the e coordinates of each output of ``C`` in order;
    input ``x`` becomes ``x.0 .. x.(e-1)``."""
    if C.field != ctx.K:
        raise FieldMismatch("circuit is not over the context's field")
    F, e = ctx.F, ctx.e
    b = Builder(F)
    names = [n for v in C.var_names for n in var_coords(v, e)]
    for n in names:
        b.input(n)
    mask = constant_mask(C)
    cv = None
    basis_mats = [matrix_rep(ctx, t) for t in ctx.basis]
    m: list = []
    for i, g in enumerate(C.gates):
        k = g[0]
        if k == "input":
            m.append([b.input(n) for n in var_coords(g[1], e)])
        elif k == "const":
            m.append([b.const(c) for c in ctx.iota(g[1])])
        elif k == "lin":
            mats = [(matrix_rep(ctx, c), m[j]) for c, j in g[1]]
            m.append([b.lin((M[r][col], u[col]) for M, u in mats for col in range(e)) for r in range(e)])
        elif k == "mul":
            u, w = m[g[1]], m[g[2]]
            # (L_u)[r][l] = sum_k (L_{t^k})[r][l] * u_k, then out_r = sum_l (L_u)[r][l] * w_l
            out = []
            for r in range(e):
                prods = []
                for l in range(e):
                    Lrl = b.lin((basis_mats[kk][r][l], u[kk]) for kk in range(e))
                    prods.append(b.mul(Lrl, w[l]))
                out.append(b.add(*prods))
            m.append(out)
        else:
            if cv is None:
                cv = _constant_values(C, mask)
            m.append([b.const(c) for c in ctx.iota(cv[i])])
    outs = [x for o in C.outputs for x in m[o]]
    return b.build(outs, names)


def val_circuit(ctx: VecContext, parts) -> AlgCircuit:
    """``sum_j t^j * part_j`` as one circuit over K (parts share inputs)."""
    if len(parts) != ctx.e:
        raise ArityMismatch(f"{len(parts)} parts for e={ctx.e}")
    K = ctx.K
    fmap = ctx.embed()
    names: list = []
    for P in parts:
        if P.field != ctx.F:
            raise FieldMismatch("parts must be over the prime field")
        for n in P.var_names:
            if n not in names:
                names.append(n)
    b = Builder(K)
    for n in names:
        b.input(n)
    outs = [b.splice(P, None, fmap)[0] for P in parts]
    return b.build([b.lin(zip(ctx.basis, outs))], names)


def roundtrip_circuit(ctx: VecContext, C: AlgCircuit) -> AlgCircuit:
    """``VAL(VEC(C)) - C(VAL(x))`` over K in the coordinate variables."""
    V = vec_circuit(ctx, C)
    K, e = ctx.K, ctx.e
    b = Builder(K)
    for n in V.var_names:
        b.input(n)
    vo = b.splice(V, None, ctx.embed())
    sub = {v: b.lin(zip(ctx.basis, [b.input(n) for n in var_coords(v, e)])) for v in C.var_names}
    co = b.splice(C, sub)
    outs = [b.sub(b.lin(zip(ctx.basis, vo[k * e:(k + 1) * e])), co[k]) for k in range(len(co))]
    return b.build(outs, V.var_names)


SIZE_C = 4


def assert_size_bounds(C: AlgCircuit, Cv: AlgCircuit, c: int = SIZE_C) -> dict:
    """Measure ``Cv = vec_circuit(C)`` against the lowering's size bounds."""
    e = C.field.degree
    wc, wv = wires(C), wires(Cv)
    gc, gv = len(C.gates), len(Cv.gates)
    rep = {
        "e": e,
        "wires": (wv, wc),
        "gates": (gv, gc),
        "depth": (depth(Cv), depth(C)),
        "proddepth": (proddepth(Cv), proddepth(C)),
        "wire_ratio": (wv - e * wc) / max(1, e ** 3 * gc),
        "wires_ok": wv <= e * wc + c * e ** 3 * gc,
        "gates_ok": gv <= c * e ** 3 * gc,
        "depth_ok": depth(Cv) <= 3 * depth(C),
        "proddepth_ok": proddepth(Cv) == proddepth(C),
    }
    rep["ok"] = rep["wires_ok"] and rep["gates_ok"] and rep["depth_ok"] and rep["proddepth_ok"]
    return rep
