"""Fast multiplication of a structured matrix by a dense block of vectors.

The workhorse is a balanced trilinear product: given polynomial vectors
U (entries of degree < m), V and W (degree < n), compute

    R_j = sum_k U_k · (V_k · W_j  mod  x^n)

by splitting the truncation degree in half while doubling the inner
dimension, so the work stays in square polynomial-matrix products whose
batched transforms are shared across all index pairs.  mulQ lifts the x^n
truncation to an arbitrary monic modulus with the reversed-quotient trick,
and struct_mul wires that into the reconstruction chain to multiply an
(m x n) structured matrix by beta vectors at once.
"""

from __future__ import annotations

import numpy as np

from .field import PrimeField
from .generators import Generator, _basic_data, to_basic
from .operators import STEIN, SingularOperator, modmul_apply, y_apply
from .poly import (
    comb_family,
    poly_add,
    poly_mod,
    poly_mul,
    poly_rev,
    red_family,
    series_inv,
    trim,
)
from .polymat import PolyMatrix, pm_mul

MUL_CUTOFF = 16


class PreconditionViolated(ValueError):
    """An input shape constraint (alpha <= n and friends) was broken."""


def _fixlen(f: PrimeField, a, size: int) -> np.ndarray:
    a = f.arr(a)
    if len(a) >= size:
        return a[:size]
    out = f.zeros(size)
    out[: len(a)] = a
    return out


def _stack(f: PrimeField, polys, bound: int) -> np.ndarray:
    """rows x bound coefficient array from a list of polynomials."""
    out = f.zeros((len(polys), bound))
    for i, p in enumerate(polys):
        p = f.arr(p)
        out[i, : min(len(p), bound)] = p[:bound]
    return out


def _chunk_rows(f: PrimeField, U: np.ndarray, width: int) -> np.ndarray:
    """Split each row of U (rows x m) into degree-width slices:
    returns (nchunks, rows, width) with U_k = sum_t x^{t*width} * out[t, k]."""
    rows, m = U.shape
    nchunks = -(-m // width)
    out = f.zeros((nchunks, rows, width))
    for t in range(nchunks):
        piece = U[:, t * width: (t + 1) * width]
        out[t, :, : piece.shape[1]] = piece
    return out


def _chunked_product(f: PrimeField, U: np.ndarray, M: PolyMatrix,
                     m: int, width: int) -> np.ndarray:
    """Uᵗ·M for U of shape (abar, m); M is abar x abar (or gamma x abar)
    with polynomial entries.  Returns (abar, m + M.bound − 1).

    Splitting the rows of U into width-slices keeps the transform length at
    width + bound when the entries of M are much shorter than the rows; once
    the bounds are comparable the slices only multiply the number of
    transforms, so the full-row product is taken in one round instead."""
    rows = U.shape[0]
    cols = M.data.shape[1]
    bound = M.data.shape[2]
    nchunks = -(-m // width)
    size_direct = 1 << max(1, (m + bound - 2).bit_length())
    size_chunked = 1 << max(1, (width + bound - 2).bit_length())
    work_direct = (rows + rows * cols + cols) * size_direct * size_direct.bit_length()
    work_chunked = (2 * nchunks * cols + nchunks * cols) * size_chunked * size_chunked.bit_length()
    if size_direct <= f.ntt_capacity() and work_direct < work_chunked:
        pu = f.zeros((rows, size_direct))
        pu[:, :m] = U[:, :m]
        pm = f.zeros((rows, cols, size_direct))
        pm[:, :, :bound] = M.data
        vals = np.sum(f.ntt(pu)[:, None, :] * f.ntt(pm) % f.p, axis=0) % f.p
        return f.ntt(vals, invert=True)[:, : m + bound - 1]
    uhat = _chunk_rows(f, U, width)
    out = f.zeros((cols, m + bound - 1))
    P = pm_mul(PolyMatrix(f, uhat), M)
    seg = P.data.shape[2]
    for t in range(nchunks):
        lo = t * width
        hi = min(lo + seg, m + bound - 1)
        if lo >= m + bound - 1:
            break
        out[:, lo:hi] = (out[:, lo:hi] + P.data[t, :, : hi - lo]) % f.p
    return out


def mul_rec(f: PrimeField, U: np.ndarray, V: np.ndarray, W: np.ndarray,
            m: int, nu: int, gamma: int, cutoff: int | None = None) -> np.ndarray:
    """R_j = sum_k U_k · (sum_c V_{k,c}·W_{j,c}  mod  x^nu).

    U: (abar, m); V, W: (abar, gamma, nu).  nu, gamma, and abar must be
    powers of two with gamma <= abar.  Splitting nu in half doubles gamma;
    at gamma = abar (or below the cutoff) the product is taken directly.
    Returns (abar, m + nu − 1).
    """
    if cutoff is None:
        cutoff = MUL_CUTOFF
    abar = U.shape[0]
    assert nu >= 1 and nu & (nu - 1) == 0, "nu must be a power of two"
    assert gamma >= 1 and gamma & (gamma - 1) == 0, "gamma must be a power of two"
    assert abar >= 1 and abar & (abar - 1) == 0, "abar must be a power of two"
    assert gamma <= abar, "gamma must not exceed abar"
    assert V.shape == (abar, gamma, nu) and W.shape == (abar, gamma, nu)

    width = max(1, -(-m // abar))

    if gamma == abar or nu <= cutoff:
        Wt = PolyMatrix(f, np.ascontiguousarray(W.transpose(1, 0, 2)))
        M = pm_mul(PolyMatrix(f, V), Wt, out_bound=nu)
        return _chunked_product(f, U, M, m, width)[:, : m + nu - 1]

    nu2 = nu // 2
    V0, V1 = V[:, :, :nu2], V[:, :, nu2:]
    W0, W1 = W[:, :, :nu2], W[:, :, nu2:]
    W0t = PolyMatrix(f, np.ascontiguousarray(W0.transpose(1, 0, 2)))
    M0 = pm_mul(PolyMatrix(f, np.ascontiguousarray(V0)), W0t)
    out = f.zeros((abar, m + nu - 1))
    full = _chunked_product(f, U, M0, m, width)
    out[:, : full.shape[1]] = full
    Vn = np.ascontiguousarray(np.concatenate([V0, V1], axis=1))
    Wn = np.ascontiguousarray(np.concatenate([W1, W0], axis=1))
    rec = mul_rec(f, U, Vn, Wn, m, nu2, 2 * gamma, cutoff)
    out[:, nu2: nu2 + rec.shape[1]] = (out[:, nu2: nu2 + rec.shape[1]] + rec) % f.p
    return out


def mul(f: PrimeField, U, V, W, m: int, n: int,
        cutoff: int | None = None) -> list[np.ndarray]:
    """Balanced case: len(U) = len(V) = len(W) = alpha <= n.
    Returns alpha polynomials R_j = sum_k U_k·(V_k·W_j mod x^n), each of
    length m + n − 1."""
    alpha = len(U)
    if not (len(V) == len(W) == alpha):
        raise PreconditionViolated("U, V, W must have equal length")
    if alpha == 0:
        return []
    if alpha > n:
        raise PreconditionViolated(f"alpha = {alpha} exceeds n = {n}")
    nbar = 1 << (n - 1).bit_length()
    delta = nbar - n
    abar = 1 << (alpha - 1).bit_length()
    Ub = _stack(f, list(U) + [[]] * (abar - alpha), m)
    Vb = _stack(f, list(V) + [[]] * (abar - alpha), nbar).reshape(abar, 1, nbar)
    Wsh = [np.concatenate([f.zeros(delta), f.arr(w)]) for w in W]
    Wb = _stack(f, Wsh + [[]] * (abar - alpha), nbar).reshape(abar, 1, nbar)
    R = mul_rec(f, Ub, Vb, Wb, m, nbar, 1, cutoff)
    return [R[j, delta: delta + m + n - 1].copy() for j in range(alpha)]


def _mul_any(f: PrimeField, U, V, W, m: int, n: int,
             cutoff: int | None) -> list[np.ndarray]:
    """General dispatcher: no constraint tying len(U) to len(W) or n."""
    alpha, beta = len(U), len(W)
    if beta == 0:
        return []
    if alpha == 0:
        return [f.zeros(m + n - 1) for _ in range(beta)]
    if alpha > n:
        out = [f.zeros(m + n - 1) for _ in range(beta)]
        for lo in range(0, alpha, n):
            part = _mul_any(f, U[lo: lo + n], V[lo: lo + n], W, m, n, cutoff)
            for i in range(beta):
                out[i] = (out[i] + part[i]) % f.p
        return out
    if beta > alpha:
        out = []
        for lo in range(0, beta, alpha):
            out.extend(_mul_any(f, U, V, W[lo: lo + alpha], m, n, cutoff))
        return out
    if beta < alpha:
        out = [f.zeros(m + n - 1) for _ in range(beta)]
        for lo in range(0, alpha, beta):
            Uc = list(U[lo: lo + beta]) + [[]] * max(0, lo + beta - alpha)
            Vc = list(V[lo: lo + beta]) + [[]] * max(0, lo + beta - alpha)
            part = mul(f, Uc, Vc, W, m, n, cutoff)
            for i in range(beta):
                out[i] = (out[i] + part[i]) % f.p
        return out
    return mul(f, U, V, W, m, n, cutoff)


def mul_unbalanced(f: PrimeField, U, V, W, m: int, n: int,
                   cutoff: int | None = None) -> list[np.ndarray]:
    """R_i = sum_k U_k·(V_k·W_i mod x^n) for len(W) = beta independent of
    alpha = len(U): the wide side is cut into balanced slabs."""
    if len(U) != len(V):
        raise PreconditionViolated("U and V must have equal length")
    if len(U) > n:
        raise PreconditionViolated(f"alpha = {len(U)} exceeds n = {n}")
    return _mul_any(f, U, V, W, m, n, cutoff)


def mulQ(f: PrimeField, U, V, W, Q, cutoff: int | None = None) -> list[np.ndarray]:
    """R_i = sum_k U_k·(V_k·W_i mod Q) for a monic modulus Q of degree n,
    left unreduced (length m + n − 1).

    The remainders are never formed: with T = sum_k U_k·V_k and the
    reversed-quotient product S̃ over x^{n−1},
        R_i = T·W_i − Q·rev(S̃_i).
    """
    Q = trim(f, f.arr(Q))
    n = len(Q) - 1
    if n < 1 or int(Q[-1]) != 1:
        raise PreconditionViolated("Q must be monic of degree >= 1")
    alpha, beta = len(U), len(W)
    if len(V) != alpha:
        raise PreconditionViolated("U and V must have equal length")
    if alpha > n:
        raise PreconditionViolated(f"alpha = {alpha} exceeds deg Q = {n}")
    U = [trim(f, f.arr(u)) for u in U]
    V = [poly_mod(f, f.arr(v), Q) for v in V]
    W = [poly_mod(f, f.arr(w), Q) for w in W]
    m = max([1] + [len(u) for u in U])
    out_len = m + n - 1
    if alpha == 0 or beta == 0:
        return [f.zeros(out_len) for _ in range(beta)]

    if n == 1:
        T = f.zeros(0)
        for u, v in zip(U, V):
            T = poly_add(f, T, poly_mul(f, u, v))
        return [_fixlen(f, poly_mul(f, T, w), out_len) for w in W]

    qrev_inv = series_inv(f, poly_rev(f, Q, n), n - 1)
    Ut = [poly_rev(f, u, m - 1) for u in U]
    Vt = [_fixlen(f, poly_mul(f, poly_rev(f, v, n - 1), qrev_inv), n - 1)
          for v in V]
    Wt = [_fixlen(f, poly_rev(f, w, n - 1), n - 1) for w in W]
    S = _mul_any(f, Ut, Vt, Wt, m, n - 1, cutoff)

    # Both terms of T·W_i − Q·rev(S̃_i) overshoot out_len and the tails
    # cancel exactly, so a wraparound product of size >= out_len is exact.
    # That lets one batched transform round serve every column at half the
    # linear-product length.
    size = 1 << max(1, (out_len - 1).bit_length())
    if size <= f.ntt_capacity():
        Um = f.zeros((alpha, size))
        Vm = f.zeros((alpha, size))
        for k in range(alpha):
            Um[k, : len(U[k])] = U[k]
            Vm[k, : len(V[k])] = V[k]
        vT = np.sum(f.ntt(Um) * f.ntt(Vm) % f.p, axis=0) % f.p
        Qm = f.zeros(size)
        Qm[: min(len(Q), size)] = Q[:size]
        if len(Q) > size:  # fold the modulus, it can overhang by one slot
            tail = Q[size:]
            Qm[: len(tail)] = (Qm[: len(tail)] + tail) % f.p
        vQ = f.ntt(Qm)
        Wm = f.zeros((beta, size))
        Sm = f.zeros((beta, size))
        for i, w in enumerate(W):
            Wm[i, : len(w)] = w
            sr = poly_rev(f, S[i], m + n - 3)
            Sm[i, : len(sr)] = sr
        vals = (vT * f.ntt(Wm) - vQ * f.ntt(Sm)) % f.p
        res = f.ntt(vals, invert=True)[:, :out_len]
        return [res[i].copy() for i in range(beta)]

    T = f.zeros(0)
    for u, v in zip(U, V):
        T = poly_add(f, T, poly_mul(f, u, v))
    out = []
    for i, w in enumerate(W):
        tw = poly_mul(f, T, w)
        corr = poly_mul(f, Q, poly_rev(f, S[i], m + n - 3))
        full = max(len(tw), len(corr))
        r = f.zeros(full)
        r[: len(tw)] = tw
        r[: len(corr)] = (r[: len(corr)] - f.arr(corr)) % f.p
        out.append(_fixlen(f, r, out_len))
    return out


def struct_mul(gen: Generator, B: np.ndarray,
               cutoff: int | None = None) -> np.ndarray:
    """A·B for a structured A given by its generator and a dense n x beta
    block B, sharing the polynomial transforms across all beta columns."""
    op = gen.operator
    f = op.field
    B = f.arr(B)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    if B.shape[0] != gen.n:
        raise PreconditionViolated(f"B has {B.shape[0]} rows, expected {gen.n}")
    beta = B.shape[1]
    if gen.alpha > gen.n:
        raise PreconditionViolated(
            f"generator length {gen.alpha} exceeds column format {gen.n}")
    if gen.alpha == 0 or beta == 0:
        return f.zeros((gen.m, beta))

    basic, tf = to_basic(gen)
    if not tf.is_identity:
        Bt = np.stack([tf.pre_apply(B[:, i]) for i in range(beta)], axis=1)
        out = struct_mul(basic, Bt, cutoff)
        return np.stack([tf.post_apply(out[:, i]) for i in range(beta)], axis=1)

    fam_p, fam_q = op.fam_p, op.fam_q
    m, n = op.m, op.n
    gammas, etas, table = _basic_data(basic)
    stein = op.kind == STEIN

    cols = []
    for i in range(beta):
        parts = [y_apply(f, Qj, blk)
                 for Qj, blk in zip(fam_q.polys, fam_q.split_vector(B[:, i]))]
        cols.append(comb_family(fam_q, parts))

    lhs = [poly_rev(f, g, m - 1) for g in gammas] if stein else gammas
    R = mulQ(f, lhs, etas, cols, fam_q.product, cutoff)

    out = f.zeros((m, beta))
    for i in range(beta):
        r = poly_rev(f, R[i], m + n - 2) if stein else R[i]
        r = poly_mod(f, r, fam_p.product)
        blocks = red_family(fam_p, r)
        for j, (s, k, P) in enumerate(zip(fam_p.offsets, fam_p.degrees, fam_p.polys)):
            out[s: s + k, i] = modmul_apply(f, table[j], P, blocks[j])
    return out
