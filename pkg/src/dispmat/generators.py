"""Compressed representations of structured matrices.

A matrix A is carried around as a pair (G, H) with L(A) = G·Hᵗ for a
displacement operator L built from polynomial families P and Q.  When L is
invertible this determines A uniquely, and everything else — reconstruction,
matrix-vector products, transposition, compression, and the transformations
that move a generator between operators — works directly on the pair without
ever forming A.

The closed-form reconstruction applies to the two *basic* operators
∇_{M_P,M_Qᵗ} and Δ_{M_P,M_Qᵗ}; the six other variants are conjugated into a
basic one by symmetrizers (to_basic), and the basic ones are conjugated into
the Toeplitz/Hankel-type operator by the multiplicative L/R transformation
(to_hankel) that the solver relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import PrimeField
from .operators import (
    STEIN,
    SYLVESTER,
    DisplacementOperator,
    SingularOperator,
    companion_apply,
    inverse_table,
    modmul_apply,
    op_invertible,
    transpose_table,
    y_apply,
    y_apply_family,
)
from .poly import (
    DimensionMismatch,
    PolyFamily,
    comb_family,
    crt_family,
    family_build,
    poly_add,
    poly_mod,
    poly_mul,
    poly_rev,
    red_family,
    red_transposed,
    trim,
)

RECONSTRUCT_LIMIT = 1 << 20


@dataclass
class Generator:
    """L-generator (G, H) of length alpha, optionally with the matrix's last
    row attached (used by the solver for partly-regular operators)."""

    G: np.ndarray
    H: np.ndarray
    operator: DisplacementOperator
    last_row: np.ndarray | None = None

    def __post_init__(self):
        f = self.field
        self.G = f.arr(self.G)
        self.H = f.arr(self.H)
        if self.G.ndim == 1:
            self.G = self.G.reshape(-1, 1)
        if self.H.ndim == 1:
            self.H = self.H.reshape(-1, 1)
        if self.G.shape[1] != self.H.shape[1]:
            raise DimensionMismatch(
                f"G has {self.G.shape[1]} columns, H has {self.H.shape[1]}")
        if self.G.shape[0] != self.operator.m or self.H.shape[0] != self.operator.n:
            raise DimensionMismatch(
                f"generator rows {self.G.shape[0]}x{self.H.shape[0]} do not match "
                f"operator format {self.operator.shape}")

    @property
    def field(self) -> PrimeField:
        return self.operator.field

    @property
    def alpha(self) -> int:
        return self.G.shape[1]

    @property
    def m(self) -> int:
        return self.operator.m

    @property
    def n(self) -> int:
        return self.operator.n


def generator_zeros(op: DisplacementOperator, alpha: int) -> Generator:
    f = op.field
    return Generator(f.zeros((op.m, alpha)), f.zeros((op.n, alpha)), op)


# ---------------------------------------------------------------------------
# the closed-form chain for basic operators


def _basic_data(gen: Generator):
    """gamma_k = crt_P(G-column blocks), eta_k = crt_Q(H-column blocks), and
    the per-block modular inverses of Q."""
    op = gen.operator
    fam_p, fam_q = op.fam_p, op.fam_q
    table = inverse_table(op)
    if table is None:
        raise SingularOperator("operator is not invertible")
    gammas = [crt_family(fam_p, fam_p.split_vector(gen.G[:, k])) for k in range(gen.alpha)]
    etas = [crt_family(fam_q, fam_q.split_vector(gen.H[:, k])) for k in range(gen.alpha)]
    return gammas, etas, table


def _basic_matvec(gen: Generator, b: np.ndarray, data=None) -> np.ndarray:
    """A·b for a basic operator, evaluated right-to-left:
    Y_Q blockwise, comb_Q, the alpha modular products (reversed coefficients
    for Stein), one reduction mod P, the subproduct-tree reduction to blocks,
    and the blockwise modular products with the inverses of Q.
    """
    op = gen.operator
    f = op.field
    fam_p, fam_q = op.fam_p, op.fam_q
    m, n = op.m, op.n
    if gen.alpha == 0:
        return f.zeros(m)
    if data is None:
        data = _basic_data(gen)
    gammas, etas, table = data
    parts = [y_apply(f, Qj, blk)
             for Qj, blk in zip(fam_q.polys, fam_q.split_vector(b))]
    c = comb_family(fam_q, parts)
    stein = op.kind == STEIN
    acc = f.zeros(0)
    for gamma, eta in zip(gammas, etas):
        d = poly_mod(f, poly_mul(f, eta, c), fam_q.product)
        lhs = poly_rev(f, gamma, m - 1) if stein else gamma
        acc = poly_add(f, acc, poly_mul(f, lhs, d))
    if stein:
        acc = poly_rev(f, acc, m + n - 2)
    acc = poly_mod(f, acc, fam_p.product)
    blocks = red_family(fam_p, acc)
    out = f.zeros(m)
    for i, (s, k, P) in enumerate(zip(fam_p.offsets, fam_p.degrees, fam_p.polys)):
        out[s: s + k] = modmul_apply(f, table[i], P, blocks[i])
    return out


# ---------------------------------------------------------------------------
# operator normalization (symmetrizer conjugation)


@dataclass
class BasicTransform:
    """Records Ã = Y_P^{e1}·A·Y_Q^{e2} so callers can undo the conjugation.

    e1 is set when the row side carried a transposed companion matrix, e2
    when the column side carried an untransposed one.
    """

    e1: bool
    e2: bool
    fam_p: PolyFamily
    fam_q: PolyFamily

    @property
    def is_identity(self) -> bool:
        return not (self.e1 or self.e2)

    def pre_apply(self, v: np.ndarray) -> np.ndarray:
        """Y_Q^{−e2}·v — feed A's input through the basic representative."""
        if self.e2:
            return y_apply_family(self.fam_q, v, inverse=True)
        return v

    def post_apply(self, w: np.ndarray) -> np.ndarray:
        """Y_P^{−e1}·w — map the basic representative's output back."""
        if self.e1:
            return y_apply_family(self.fam_p, w, inverse=True)
        return w


def to_basic(gen: Generator) -> tuple[Generator, BasicTransform]:
    """Conjugate any of the eight operator variants into the basic one of the
    same kind: Ã = Y_P^{e1}·A·Y_Q^{e2} with G̃ = Y_P^{e1}G and H̃ = Y_Q^{e2}H.
    """
    op = gen.operator
    e1 = op.transpose_p
    e2 = not op.transpose_q
    tf = BasicTransform(e1, e2, op.fam_p, op.fam_q)
    if tf.is_identity:
        return gen, tf
    f = op.field
    G, H = gen.G, gen.H
    if e1:
        G = np.stack([y_apply_family(op.fam_p, G[:, k]) for k in range(gen.alpha)],
                     axis=1) if gen.alpha else G
    if e2:
        H = np.stack([y_apply_family(op.fam_q, H[:, k]) for k in range(gen.alpha)],
                     axis=1) if gen.alpha else H
    basic_op = op.cached(
        "basic_op", lambda: DisplacementOperator(op.kind, op.fam_p, op.fam_q))
    return Generator(G, H, basic_op), tf


# ---------------------------------------------------------------------------
# public operations


def gen_matvec(gen: Generator, u: np.ndarray) -> np.ndarray:
    """A·u without materializing A."""
    if len(u) != gen.n:
        raise DimensionMismatch(f"vector length {len(u)} != {gen.n}")
    f = gen.field
    if gen.alpha == 0:
        return f.zeros(gen.m)
    basic, tf = to_basic(gen)
    return tf.post_apply(_basic_matvec(basic, tf.pre_apply(f.arr(u))))


def reconstruct_dense(gen: Generator) -> np.ndarray:
    """The unique dense A with L(A) = G·Hᵗ, as a fold of the matrix-vector
    chain over unit vectors.  Testing/CLI scale only."""
    m, n = gen.m, gen.n
    if m * n > RECONSTRUCT_LIMIT:
        raise ValueError(f"reconstruct_dense is intended for m*n <= {RECONSTRUCT_LIMIT}")
    f = gen.field
    out = f.zeros((m, n))
    if gen.alpha == 0:
        return out
    basic, tf = to_basic(gen)
    data = _basic_data(basic)
    e = f.zeros(n)
    for j in range(n):
        e[j] = 1
        out[:, j] = tf.post_apply(_basic_matvec(basic, tf.pre_apply(e), data))
        e[j] = 0
    return out


def gen_transpose(gen: Generator) -> Generator:
    """Generator of Aᵗ under the swapped operator.

    Sylvester: ∇_{Nᵗ,Mᵗ}(Aᵗ) = (−H)·Gᵗ.  Stein: Δ_{Nᵗ,Mᵗ}(Aᵗ) = H·Gᵗ.
    """
    op = gen.operator
    f = op.field
    swapped = DisplacementOperator(
        op.kind, op.fam_q, op.fam_p,
        transpose_p=not op.transpose_q, transpose_q=not op.transpose_p)
    H = gen.H if op.kind == STEIN else (f.p - gen.H) % f.p if gen.H.size else gen.H
    return Generator(f.arr(H), gen.G, swapped)


def _column_decompose(f: PrimeField, M: np.ndarray):
    """Write M = B·C with B made of M's pivot columns (full column rank) and
    C the elimination coefficients; first-nonzero pivots, lowest index wins."""
    rows, cols = M.shape
    R = np.asarray(M, dtype=object).copy()
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        src = next((i for i in range(r, rows) if int(R[i, c]) % f.p != 0), None)
        if src is None:
            continue
        if src != r:
            R[[r, src]] = R[[src, r]]
        R[r] = (R[r] * f.inv(int(R[r, c]))) % f.p
        for i in range(rows):
            if i != r and int(R[i, c]) % f.p != 0:
                R[i] = (R[i] - R[i, c] * R[r]) % f.p
        pivots.append(c)
        r += 1
    B = M[:, pivots] if pivots else M[:, :0]
    C = f.arr(R[: len(pivots), :]) if pivots else f.zeros((0, cols))
    return f.arr(B), C


def gen_compress(gen: Generator) -> Generator:
    """Equivalent generator of length exactly rank(G·Hᵗ).

    Two elimination passes: factor G = B·C and fold C into H, then the same
    on the new H; after the second pass both matrices have full column rank.
    """
    f = gen.field
    if gen.alpha == 0:
        return gen
    B, C = _column_decompose(f, gen.G)
    H1 = f.mat_mul(gen.H, C.T)
    B2, C2 = _column_decompose(f, H1)
    G2 = f.mat_mul(B, C2.T)
    return Generator(G2, B2, gen.operator, gen.last_row)


# ---------------------------------------------------------------------------
# reduction to the Toeplitz/Hankel-type operator


def hankel_operator(f: PrimeField, m: int, n: int) -> DisplacementOperator:
    """∇_{Z_{m,0}, Z_{n,1}ᵗ}: the basic Sylvester operator for ([x^m], [x^n−1])."""
    fam_p = family_build(f, [[0] * m + [1]])
    fam_q = family_build(f, [[(-1) % f.p] + [0] * (n - 1) + [1]])
    return DisplacementOperator(SYLVESTER, fam_p, fam_q)


def hankel_inverse_operator(f: PrimeField, m: int, n: int) -> DisplacementOperator:
    """∇_{Z_{n,1}ᵗ, Z_{m,0}}: where the inverse (or the solver's output
    transformation) of a ∇_{Z_{m,0},Z_{n,1}ᵗ}-structured matrix lives."""
    fam_p = family_build(f, [[(-1) % f.p] + [0] * (n - 1) + [1]])
    fam_q = family_build(f, [[0] * m + [1]])
    return DisplacementOperator(SYLVESTER, fam_p, fam_q,
                                transpose_p=True, transpose_q=False)


@dataclass
class HankelContext:
    """Closures and vectors for A′ = L·A·R (and B = A′·J for Stein).

    L = J_m·W_Pᵗ·Y_P⁻¹ and R = Y_Q⁻¹·W_Q·J_n are invertible and cheap to
    apply in any of the four orientations; t, u, r, s are the rank-one
    correction vectors of their displacement identities.
    """

    gen: Generator
    kind: str
    t: np.ndarray
    u: np.ndarray
    r: np.ndarray
    s: np.ndarray
    _cache: dict = dc_field(default_factory=dict, repr=False)

    @property
    def fam_p(self) -> PolyFamily:
        return self.gen.operator.fam_p

    @property
    def fam_q(self) -> PolyFamily:
        return self.gen.operator.fam_q

    @property
    def field(self) -> PrimeField:
        return self.gen.field

    # L = J_m W_Pᵗ Y_P⁻¹ ----------------------------------------------------
    def l_apply(self, v: np.ndarray) -> np.ndarray:
        f = self.field
        return red_transposed(self.fam_p, y_apply_family(self.fam_p, v, inverse=True))[::-1].copy()

    def l_inv(self, v: np.ndarray) -> np.ndarray:
        return y_apply_family(self.fam_p,
                              red_transposed(self.fam_p, v[::-1].copy(), inverse=True))

    def l_t(self, v: np.ndarray) -> np.ndarray:
        """Lᵗ = Y_P⁻¹·W_P·J_m."""
        f = self.field
        parts = red_family(self.fam_p, f.arr(v[::-1]))
        return y_apply_family(self.fam_p, self.fam_p.join_parts(parts), inverse=True)

    def l_inv_t(self, v: np.ndarray) -> np.ndarray:
        """L⁻ᵗ = J_m·W_P⁻¹·Y_P."""
        w = y_apply_family(self.fam_p, v)
        poly = crt_family(self.fam_p, self.fam_p.split_vector(w))
        f = self.field
        out = f.zeros(self.gen.m)
        out[: len(poly)] = poly
        return out[::-1].copy()

    # R = Y_Q⁻¹ W_Q J_n ------------------------------------------------------
    def r_apply(self, v: np.ndarray) -> np.ndarray:
        f = self.field
        parts = red_family(self.fam_q, f.arr(v[::-1]))
        return y_apply_family(self.fam_q, self.fam_q.join_parts(parts), inverse=True)

    def r_inv(self, v: np.ndarray) -> np.ndarray:
        w = y_apply_family(self.fam_q, v)
        poly = crt_family(self.fam_q, self.fam_q.split_vector(w))
        f = self.field
        out = f.zeros(self.gen.n)
        out[: len(poly)] = poly
        return out[::-1].copy()

    def r_t(self, v: np.ndarray) -> np.ndarray:
        """Rᵗ = J_n·W_Qᵗ·Y_Q⁻¹."""
        return red_transposed(self.fam_q, y_apply_family(self.fam_q, v, inverse=True))[::-1].copy()

    def r_inv_t(self, v: np.ndarray) -> np.ndarray:
        return y_apply_family(self.fam_q,
                              red_transposed(self.fam_q, v[::-1].copy(), inverse=True))


def _pad_vec(f: PrimeField, poly: np.ndarray, size: int) -> np.ndarray:
    out = f.zeros(size)
    out[: len(poly)] = poly
    return out


def _unit(f: PrimeField, size: int, idx: int) -> np.ndarray:
    e = f.zeros(size)
    e[idx] = 1
    return e


def _cols(f: PrimeField, vectors) -> np.ndarray:
    vectors = list(vectors)
    if not vectors:
        raise ValueError("no columns")
    return f.arr(np.stack(vectors, axis=1))


def to_hankel(gen: Generator) -> tuple[Generator, HankelContext]:
    """Generator of the Toeplitz/Hankel-type core of A.

    Sylvester: the core is A′ = L·A·R with
      G′ = [t | LG | LAr],  H′ = [RᵗAᵗu | RᵗH | s].
    Stein: the core is B = A′·J_n; conjugating the Stein displacement of A′
    through J_n gives the ∇-generator
      G″ = [t | LG | Z_{m,0}·LAr],  H_B = −Z_{n,1}·J_n·[−RᵗM_Q Aᵗu | RᵗH | s].
    """
    op = gen.operator
    if not op.is_basic:
        raise ValueError("to_hankel expects a basic operator; call to_basic first")
    if not op_invertible(op):
        raise SingularOperator("operator is not invertible")
    f = op.field
    m, n = op.m, op.n
    fam_p, fam_q = op.fam_p, op.fam_q

    t = _unit(f, m, 0)
    s = _unit(f, n, 0)
    # u = Y_P⁻¹ W_P m⃗ with m⃗ the low coefficients of P (P − x^m)
    mvec = _pad_vec(f, f.arr(fam_p.product[:m]), m)
    u = y_apply_family(fam_p, fam_p.join_parts(red_family(fam_p, mvec)), inverse=True)
    # r = −Y_Q⁻¹ W_Q (n⃗ + s)
    nvec = _pad_vec(f, f.arr(fam_q.product[:n]), n)
    nvec[0] = (nvec[0] + 1) % f.p
    r = y_apply_family(fam_q, fam_q.join_parts(red_family(fam_q, nvec)), inverse=True)
    r = (f.p - r) % f.p

    ctx = HankelContext(gen=gen, kind=op.kind, t=t, u=u, r=r, s=s)

    data = _basic_data(gen) if gen.alpha else None
    lg = [ctx.l_apply(gen.G[:, k]) for k in range(gen.alpha)]
    rth = [ctx.r_t(gen.H[:, k]) for k in range(gen.alpha)]
    l_a_r = ctx.l_apply(_basic_matvec(gen, r, data) if gen.alpha else f.zeros(m))
    tgen = gen_transpose(gen)
    at_u = gen_matvec(tgen, u)

    hop = hankel_operator(f, m, n)
    if op.kind == SYLVESTER:
        g_cols = [t] + lg + [l_a_r]
        h_cols = [ctx.r_t(at_u)] + rth + [s]
        return Generator(_cols(f, g_cols), _cols(f, h_cols), hop), ctx

    # Stein: shift the last G column, pre-multiply Aᵗu by M_Q, and conjugate
    # the H side through −Z_{n,1}·J_n
    z0_lar = np.concatenate([f.zeros(1), l_a_r[:-1]])
    mq_at_u = companion_apply(fam_q, at_u)
    h_cols = [(f.p - ctx.r_t(mq_at_u)) % f.p] + rth + [s]
    g_cols = [t] + lg + [z0_lar]
    hb = [(f.p - np.roll(col[::-1], 1)) % f.p for col in h_cols]
    return Generator(_cols(f, g_cols), _cols(f, hb), hop), ctx


def from_hankel_inverse(ctx: HankelContext, inv_gen: Generator) -> Generator:
    """Generator of A⁻¹ from a generator of the inverted core.

    inv_gen carries (Y, Z) = (−core⁻¹·G_core, core⁻ᵗ·H_core) under
    ∇_{Z_{m,1}ᵗ, Z_{m,0}}; the result lives under the swapped operator for
    (Q, P) — Sylvester ∇_{M_Qᵗ,M_P} or its Stein analog — and is compressed
    to length ≤ the original alpha.
    """
    f = ctx.field
    gen = ctx.gen
    m, n = gen.m, gen.n
    if m != n:
        raise DimensionMismatch("inverse unwinding requires a square matrix")
    op = gen.operator
    alpha_inv = inv_gen.alpha
    Y, Z = inv_gen.G, inv_gen.H
    inv_t = gen_transpose(inv_gen)

    core_inv_of_t = gen_matvec(inv_gen, ctx.t)
    swapped = DisplacementOperator(
        op.kind, op.fam_q, op.fam_p, transpose_p=True, transpose_q=False)

    if ctx.kind == SYLVESTER:
        # ∇_{M_Qᵗ,M_P}(A⁻¹) = [r | RY | R·A′⁻¹t]·[Lᵗ·A′⁻ᵗs | LᵗZ | u]ᵗ
        a_inv_t = core_inv_of_t
        a_invt_s = gen_matvec(inv_t, ctx.s)
        g_cols = [ctx.r] + [ctx.r_apply(Y[:, k]) for k in range(alpha_inv)] + \
                 [ctx.r_apply(a_inv_t)]
        h_cols = [ctx.l_t(a_invt_s)] + [ctx.l_t(Z[:, k]) for k in range(alpha_inv)] + \
                 [ctx.u]
        out = Generator(_cols(f, g_cols), _cols(f, h_cols), swapped)
        return gen_compress(out)

    # Stein: core is B = A′·J, A′⁻¹ = J·B⁻¹ and A′⁻ᵗ = B⁻ᵗ·J.
    # Δ_{M_Qᵗ,M_P}(A⁻¹) =
    #   [R·J·Z_{m,1}·Y_B | M_Qᵗ·R·J·B⁻¹t | r]·[Lᵗ·Z_B | u | −Lᵗ·Z_{m,0}ᵗ·B⁻ᵗJs]ᵗ
    b_inv_t = core_inv_of_t
    b_invt_js = gen_matvec(inv_t, ctx.s[::-1].copy())
    g_cols = [ctx.r_apply(np.roll(Y[:, k], 1)[::-1].copy()) for k in range(alpha_inv)]
    g_cols += [companion_apply(op.fam_q, ctx.r_apply(b_inv_t[::-1].copy()), transposed=True)]
    g_cols += [ctx.r]
    z0t_bts = np.concatenate([b_invt_js[1:], f.zeros(1)])
    h_cols = [ctx.l_t(Z[:, k]) for k in range(alpha_inv)]
    h_cols += [ctx.u]
    h_cols += [(f.p - ctx.l_t(z0t_bts)) % f.p]
    out = Generator(_cols(f, g_cols), _cols(f, h_cols), swapped)
    return gen_compress(out)


# ---------------------------------------------------------------------------
# serialization


def gen_to_dict(gen: Generator) -> dict:
    from .operators import op_to_dict

    d = {
        "G": [[str(int(x)) for x in row] for row in gen.G],
        "H": [[str(int(x)) for x in row] for row in gen.H],
        "operator": op_to_dict(gen.operator),
    }
    if gen.last_row is not None:
        d["last_row"] = [str(int(x)) for x in gen.last_row]
    return d


def gen_from_dict(f: PrimeField, d: dict) -> Generator:
    from .operators import op_from_dict

    op = op_from_dict(f, d["operator"])
    G = f.arr(np.asarray([[int(x) for x in row] for row in d["G"]],
                         dtype=object).reshape(op.m, -1))
    H = f.arr(np.asarray([[int(x) for x in row] for row in d["H"]],
                         dtype=object).reshape(op.n, -1))
    last = d.get("last_row")
    return Generator(G, H, op,
                     None if last is None else f.arr([int(x) for x in last]))
