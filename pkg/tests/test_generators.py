"""Generator pairs (G, H): reconstruction, products, and the operator
transformations.  The reference route everywhere is the dense one — apply the
operator with actual companion matrices and compare against G·Hᵗ."""

import numpy as np
import pytest

from dispmat.field import get_field
from dispmat.poly import DimensionMismatch, family_build
from dispmat.operators import (
    STEIN,
    SYLVESTER,
    DisplacementOperator,
    SingularOperator,
    stein_op,
    sylvester_op,
)
from dispmat.generators import (
    Generator,
    from_hankel_inverse,
    gen_compress,
    gen_from_dict,
    gen_matvec,
    gen_to_dict,
    gen_transpose,
    generator_zeros,
    hankel_inverse_operator,
    hankel_operator,
    reconstruct_dense,
    to_basic,
    to_hankel,
)
from dispmat.oracle import (
    dense_apply_operator,
    dense_inv,
    dense_mul,
    dense_rank,
)

from conftest import rand_generator, rand_operator


def _dense_y_family(fam):
    f = fam.field
    Y = f.zeros((fam.total_degree, fam.total_degree))
    for s, k, P in zip(fam.offsets, fam.degrees, fam.polys):
        for i in range(k):
            for j in range(k):
                if i + j + 1 <= k:
                    Y[s + i, s + j] = P[i + j + 1]
    return Y


def _dense_from_closure(f, fn, size):
    e = f.zeros(size)
    cols = []
    for j in range(size):
        e[j] = 1
        cols.append(fn(e.copy()))
        e[j] = 0
    return f.arr(np.stack(cols, axis=1))


def _outer(gen):
    return dense_mul(gen.field, gen.G, gen.H.T)


# ---------------------------------------------------------------------------
# construction


def test_generator_validates_shapes(f):
    op = rand_operator(f, np.random.default_rng(0), 4, 3)
    with pytest.raises(DimensionMismatch):
        Generator(f.zeros((4, 2)), f.zeros((3, 3)), op)
    with pytest.raises(DimensionMismatch):
        Generator(f.zeros((5, 2)), f.zeros((3, 2)), op)


def test_generator_promotes_vectors_to_columns(f):
    op = rand_operator(f, np.random.default_rng(1), 4, 4)
    gen = Generator(f.arr([1, 2, 3, 4]), f.arr([5, 6, 0, 1]), op)
    assert gen.G.shape == (4, 1) and gen.H.shape == (4, 1)
    assert gen.alpha == 1


def test_generator_zeros_reconstructs_zero(f):
    op = rand_operator(f, np.random.default_rng(2), 3, 5)
    gen = generator_zeros(op, 2)
    assert not np.any(reconstruct_dense(gen))
    assert not np.any(gen_matvec(gen, f.arr([1, 2, 3, 4, 5])))


# ---------------------------------------------------------------------------
# reconstruction: closed-form chain vs dense companion arithmetic


def test_reconstruct_satisfies_displacement_equation(any_field):
    f = any_field
    rng = np.random.default_rng(7)
    for trial in range(16):
        m = int(rng.integers(1, 8))
        n = int(rng.integers(1, 8))
        op = rand_operator(f, rng, m, n)
        gen = rand_generator(f, rng, op, int(rng.integers(1, min(m, n) + 1)))
        a = reconstruct_dense(gen)
        assert np.array_equal(dense_apply_operator(op, a), _outer(gen))


def test_matvec_agrees_with_dense_product(any_field):
    f = any_field
    rng = np.random.default_rng(11)
    for _ in range(12):
        m = int(rng.integers(1, 8))
        n = int(rng.integers(1, 8))
        op = rand_operator(f, rng, m, n)
        gen = rand_generator(f, rng, op, int(rng.integers(1, min(m, n) + 1)))
        a = reconstruct_dense(gen)
        u = f.arr(rng.integers(0, f.p, n))
        want = f.mat_mul(a, u.reshape(-1, 1)).ravel()
        assert np.array_equal(gen_matvec(gen, u), want)


def test_matvec_rejects_wrong_length(f):
    op = rand_operator(f, np.random.default_rng(13), 4, 4)
    gen = rand_generator(f, np.random.default_rng(13), op, 2)
    with pytest.raises(DimensionMismatch):
        gen_matvec(gen, f.zeros(5))


# ---------------------------------------------------------------------------
# transposition, compression


def test_transpose_reconstructs_transpose(f):
    rng = np.random.default_rng(17)
    for _ in range(10):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, 7))
        op = rand_operator(f, rng, m, n)
        gen = rand_generator(f, rng, op, int(rng.integers(1, min(m, n) + 1)))
        a = reconstruct_dense(gen)
        tgen = gen_transpose(gen)
        assert tgen.operator.shape == (n, m)
        assert tgen.operator.transpose_p == (not op.transpose_q)
        assert tgen.operator.transpose_q == (not op.transpose_p)
        assert np.array_equal(reconstruct_dense(tgen), a.T)


def test_compress_reaches_exact_rank(f):
    rng = np.random.default_rng(19)
    for _ in range(10):
        m = int(rng.integers(2, 8))
        n = int(rng.integers(2, 8))
        op = rand_operator(f, rng, m, n)
        # redundant generator: pad with columns that contribute nothing
        base = rand_generator(f, rng, op, int(rng.integers(1, min(m, n) + 1)))
        G = np.concatenate([base.G, base.G[:, :1], f.zeros((m, 1))], axis=1)
        H = np.concatenate([base.H, f.zeros((n, 1)), base.H[:, :1]], axis=1)
        fat = Generator(G, H, op)
        slim = gen_compress(fat)
        assert slim.alpha == dense_rank(f, _outer(fat))
        assert np.array_equal(_outer(slim), _outer(fat))
        assert np.array_equal(reconstruct_dense(slim), reconstruct_dense(base))


def test_compress_keeps_last_row(f):
    op = rand_operator(f, np.random.default_rng(23), 4, 4)
    gen = rand_generator(f, np.random.default_rng(23), op, 2)
    row = f.arr([9, 8, 7, 6])
    fat = Generator(gen.G, gen.H, op, last_row=row)
    assert np.array_equal(gen_compress(fat).last_row, row)


# ---------------------------------------------------------------------------
# conjugation into the basic variant


def test_to_basic_is_symmetrizer_conjugation(f):
    rng = np.random.default_rng(29)
    for _ in range(10):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, 7))
        op = rand_operator(f, rng, m, n)
        gen = rand_generator(f, rng, op, int(rng.integers(1, min(m, n) + 1)))
        basic, tf = to_basic(gen)
        assert basic.operator.is_basic
        assert tf.is_identity == op.is_basic
        a = reconstruct_dense(gen)
        ab = reconstruct_dense(basic)
        yp = _dense_y_family(op.fam_p)
        yq = _dense_y_family(op.fam_q)
        want = a
        if tf.e1:
            want = dense_mul(f, yp, want)
        if tf.e2:
            want = dense_mul(f, want, yq)
        assert np.array_equal(ab, want)
        # the recorded pre/post closures undo the conjugation on products
        v = f.arr(rng.integers(0, f.p, n))
        via_basic = tf.post_apply(gen_matvec(basic, tf.pre_apply(v)))
        assert np.array_equal(via_basic, gen_matvec(gen, v))


# ---------------------------------------------------------------------------
# reduction to the Toeplitz/Hankel-type operator


def test_hankel_operator_shapes(f):
    hop = hankel_operator(f, 5, 3)
    assert hop.shape == (5, 3) and hop.is_basic and hop.kind == SYLVESTER
    assert hop.fam_p.flavor == "single_power"
    iop = hankel_inverse_operator(f, 5, 3)
    assert iop.shape == (3, 5)
    assert iop.transpose_p and not iop.transpose_q


def test_hankel_context_closures_invert_and_transpose(f):
    rng = np.random.default_rng(31)
    for _ in range(6):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, 7))
        op = rand_operator(f, rng, m, n, basic=True)
        gen = rand_generator(f, rng, op, 1)
        _, ctx = to_hankel(gen)
        vm = f.arr(rng.integers(0, f.p, m))
        vn = f.arr(rng.integers(0, f.p, n))
        assert np.array_equal(ctx.l_inv(ctx.l_apply(vm)), vm)
        assert np.array_equal(ctx.l_inv_t(ctx.l_t(vm)), vm)
        assert np.array_equal(ctx.r_inv(ctx.r_apply(vn)), vn)
        assert np.array_equal(ctx.r_inv_t(ctx.r_t(vn)), vn)
        L = _dense_from_closure(f, ctx.l_apply, m)
        Lt = _dense_from_closure(f, ctx.l_t, m)
        assert np.array_equal(Lt, L.T)
        R = _dense_from_closure(f, ctx.r_apply, n)
        Rt = _dense_from_closure(f, ctx.r_t, n)
        assert np.array_equal(Rt, R.T)


def test_to_hankel_core_satisfies_hankel_displacement(f):
    rng = np.random.default_rng(37)
    for kind in (SYLVESTER, STEIN):
        for _ in range(8):
            m = int(rng.integers(1, 7))
            n = int(rng.integers(1, 7))
            op = rand_operator(f, rng, m, n, kind=kind, basic=True)
            gen = rand_generator(f, rng, op, int(rng.integers(1, min(m, n) + 1)))
            hgen, ctx = to_hankel(gen)
            assert hgen.alpha == gen.alpha + 2
            a = reconstruct_dense(gen)
            L = _dense_from_closure(f, ctx.l_apply, m)
            R = _dense_from_closure(f, ctx.r_apply, n)
            core = dense_mul(f, dense_mul(f, L, a), R)
            if kind == STEIN:
                core = core[:, ::-1]  # B = A'·J
            hop = hankel_operator(f, m, n)
            assert np.array_equal(dense_apply_operator(hop, core), _outer(hgen))
            assert np.array_equal(reconstruct_dense(hgen), core)


def test_to_hankel_rejects_non_basic_and_singular(f):
    sq = family_build(f, [[f.p - 1, 0, 1]])
    other = family_build(f, [[f.p - 2, 0, 1]])
    skew = DisplacementOperator(SYLVESTER, sq, other, transpose_p=True)
    with pytest.raises(ValueError, match="basic"):
        to_hankel(generator_zeros(skew, 1))
    with pytest.raises(SingularOperator):
        to_hankel(generator_zeros(sylvester_op(sq, sq), 1))


def test_from_hankel_inverse_recovers_dense_inverse(f):
    rng = np.random.default_rng(41)
    done = 0
    while done < 8:
        m = int(rng.integers(2, 7))
        kind = SYLVESTER if done % 2 == 0 else STEIN
        op = rand_operator(f, rng, m, m, kind=kind, basic=True)
        gen = rand_generator(f, rng, op, int(rng.integers(1, 3)))
        a = reconstruct_dense(gen)
        if dense_rank(f, a) < m:
            continue
        hgen, ctx = to_hankel(gen)
        core = reconstruct_dense(hgen)
        core_inv = dense_inv(f, core)
        Y = (f.p - dense_mul(f, core_inv, hgen.G)) % f.p
        Z = dense_mul(f, core_inv.T, hgen.H)
        inv_gen = Generator(Y, Z, hankel_inverse_operator(f, m, m))
        out = from_hankel_inverse(ctx, inv_gen)
        assert np.array_equal(reconstruct_dense(out), dense_inv(f, a))
        assert out.operator.fam_p is op.fam_q and out.operator.fam_q is op.fam_p
        assert out.alpha <= gen.alpha + (0 if kind == SYLVESTER else 0) + 2
        done += 1


# ---------------------------------------------------------------------------
# serialization


def test_generator_dict_roundtrip(f):
    rng = np.random.default_rng(43)
    op = rand_operator(f, rng, 5, 4)
    gen = rand_generator(f, rng, op, 2)
    doc = gen_to_dict(gen)
    assert "last_row" not in doc
    back = gen_from_dict(f, doc)
    assert np.array_equal(back.G, gen.G)
    assert np.array_equal(back.H, gen.H)
    assert back.operator.kind == op.kind

    with_row = Generator(gen.G, gen.H, op, last_row=f.arr([1, 2, 3, 4]))
    back2 = gen_from_dict(f, gen_to_dict(with_row))
    assert np.array_equal(back2.last_row, with_row.last_row)
