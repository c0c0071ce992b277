"""Randomized inversion and linear solving for structured matrices.

Everything here works on matrices A carried as (G, H, u): a generator under
the shift operator ∇_{Z_{m,0}, Z_{n,0}ᵗ} together with A's last row u, which
pins downs the matrix where that operator alone cannot.  The entry recurrence
a[i-1, j] = (G·Hᵗ)[i, j] + a[i, j-1] makes any row or column extractable in
a few convolutions, every leading principal block inherits the generator by
plain truncation, and Schur complements inherit it by a rank-preserving
update — which is what drives the divide-and-conquer search for the largest
nonsingular leading block and, from it, inversion and solving.

Randomness enters only through two triangular Toeplitz preconditioners with
unit diagonal whose coefficients are drawn from a bounded sample set; they
put a generic-rank-profile matrix in front of the recursion with high
probability, and every returned result is exact — failure is always an
explicit status, never a wrong answer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import PrimeField
from .generators import (
    Generator,
    gen_compress,
    gen_matvec,
    gen_transpose,
    hankel_inverse_operator,
    hankel_operator,
)
from .operators import SYLVESTER, DisplacementOperator, SingularOperator
from .poly import DimensionMismatch, family_build, series_inv
from .structmul import PreconditionViolated, struct_mul

OK = "ok"
SINGULAR = "singular"
FAILURE = "failure"
NO_SOLUTION = "no_solution"


@dataclass
class LpInvResult:
    """Outcome of the leading-principal-inverse search: on success, r is the
    rank, Y = −A_r⁻¹·G[:r], Z = A_r⁻ᵗ·H[:r], and v is the first row of
    A_r⁻¹."""

    status: str
    r: int | None = None
    Y: np.ndarray | None = None
    Z: np.ndarray | None = None
    v: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.status == OK


@dataclass
class InvResult:
    status: str
    generator: Generator | None = None

    @property
    def ok(self) -> bool:
        return self.status == OK

    @property
    def Y(self) -> np.ndarray | None:
        return None if self.generator is None else self.generator.G

    @property
    def Z(self) -> np.ndarray | None:
        return None if self.generator is None else self.generator.H


@dataclass
class SolveResult:
    status: str
    x: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.status == OK


class TriangularToeplitzPreconditioner:
    """Unit lower-triangular Toeplitz matrix U(v): column j is v shifted down
    by j.  Applies and inverts in one convolution each."""

    def __init__(self, f: PrimeField, v):
        self.f = f
        self.v = f.arr(v)
        if self.v.ndim != 1 or len(self.v) == 0 or int(self.v[0]) != 1:
            raise PreconditionViolated("preconditioner vector must start with 1")
        self.m = len(self.v)
        self._winv = None

    def _inv_vector(self) -> np.ndarray:
        if self._winv is None:
            w = series_inv(self.f, self.v, self.m)
            if len(w) < self.m:
                w = np.concatenate([w, self.f.zeros(self.m - len(w))])
            self._winv = self.f.arr(w)
        return self._winv

    def apply(self, x) -> np.ndarray:
        return self.f.conv(self.v, self.f.arr(x))[: self.m]

    def apply_transpose(self, x) -> np.ndarray:
        return self.f.conv(self.v[::-1].copy(), self.f.arr(x))[self.m - 1:]

    def inverse_apply(self, x) -> np.ndarray:
        return self.f.conv(self._inv_vector(), self.f.arr(x))[: self.m]

    def inverse_transpose_apply(self, x) -> np.ndarray:
        w = self._inv_vector()
        return self.f.conv(w[::-1].copy(), self.f.arr(x))[self.m - 1:]


# ---------------------------------------------------------------------------
# small dense helpers (base cases and rank bookkeeping only)


def _dense_inv(f: PrimeField, A: np.ndarray) -> np.ndarray:
    m = A.shape[0]
    W = np.asarray(A, dtype=object).copy() % f.p
    R = np.zeros((m, m), dtype=object)
    for i in range(m):
        R[i, i] = 1
    for c in range(m):
        piv = next((i for i in range(c, m) if int(W[i, c]) % f.p != 0), None)
        if piv is None:
            raise SingularOperator("matrix is singular")
        if piv != c:
            W[[c, piv]] = W[[piv, c]]
            R[[c, piv]] = R[[piv, c]]
        inv = f.inv(int(W[c, c]))
        W[c] = (W[c] * inv) % f.p
        R[c] = (R[c] * inv) % f.p
        for i in range(m):
            if i != c and int(W[i, c]) % f.p != 0:
                t = W[i, c]
                W[i] = (W[i] - t * W[c]) % f.p
                R[i] = (R[i] - t * R[c]) % f.p
    return f.arr(R)


def _dense_solve(f: PrimeField, A: np.ndarray, b: np.ndarray):
    """One solution of A·x = b, or None."""
    m, n = A.shape
    W = np.zeros((m, n + 1), dtype=object)
    W[:, :n] = np.asarray(A, dtype=object) % f.p
    W[:, n] = np.asarray(b, dtype=object) % f.p
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = next((i for i in range(r, m) if int(W[i, c]) % f.p != 0), None)
        if piv is None:
            continue
        if piv != r:
            W[[r, piv]] = W[[piv, r]]
        W[r] = (W[r] * f.inv(int(W[r, c]))) % f.p
        for i in range(m):
            if i != r and int(W[i, c]) % f.p != 0:
                W[i] = (W[i] - W[i, c] * W[r]) % f.p
        pivots.append(c)
        r += 1
    for i in range(r, m):
        if int(W[i, n]) % f.p != 0:
            return None
    x = f.zeros(n)
    for row, c in enumerate(pivots):
        x[c] = W[row, n]
    return x


def _pair_rank(f: PrimeField, G: np.ndarray, H: np.ndarray) -> int:
    """rank(G·Hᵗ) without forming the product."""
    from .generators import _column_decompose

    if G.shape[1] == 0:
        return 0
    B1, C1 = _column_decompose(f, G)
    if B1.shape[1] == 0:
        return 0
    H1 = f.mat_mul(H, C1.T)
    B2, _ = _column_decompose(f, H1)
    return B2.shape[1]


# ---------------------------------------------------------------------------
# the (G, H, last row) representation


def densify_from_last_row(f: PrimeField, G: np.ndarray, H: np.ndarray,
                          u: np.ndarray) -> np.ndarray:
    """Rebuild A from ∇_{Z_{m,0},Z_{n,0}ᵗ}(A) = G·Hᵗ and its last row, by the
    entry recurrence a[i−1, j] = D[i, j] + a[i, j−1]."""
    m, n = G.shape[0], H.shape[0]
    D = f.mat_mul(G, H.T) if G.shape[1] else f.zeros((m, n))
    A = f.zeros((m, n))
    A[m - 1] = u
    for i in range(m - 1, 0, -1):
        A[i - 1, 0] = D[i, 0]
        if n > 1:
            A[i - 1, 1:] = (D[i, 1:] + A[i, :-1]) % f.p
    return A


def _row_of(f: PrimeField, G: np.ndarray, H: np.ndarray, u: np.ndarray,
            i: int) -> np.ndarray:
    m, n = G.shape[0], H.shape[0]
    if i == m - 1:
        return u.copy()
    acc = f.zeros(n)
    for k in range(G.shape[1]):
        c = f.conv(G[i + 1:, k], H[:, k])
        take = min(n, len(c))
        acc[:take] = (acc[:take] + c[:take]) % f.p
    shift = m - 1 - i
    if shift < n:
        acc[shift:] = (acc[shift:] + u[: n - shift]) % f.p
    return acc


def _col_of(f: PrimeField, G: np.ndarray, H: np.ndarray, u: np.ndarray,
            j: int) -> np.ndarray:
    m, n = G.shape[0], H.shape[0]
    acc = f.zeros(m)
    for k in range(G.shape[1]):
        full = f.conv(G[:, k], H[:, k])
        padded = f.zeros(m + n)
        padded[: len(full)] = full
        acc = (acc + padded[j + 1: j + 1 + m]) % f.p
        head = H[j + 1:, k]
        if len(head):
            corr = f.conv(G[:, k], head)[:m]
            acc[: len(corr)] = (acc[: len(corr)] - corr) % f.p
    start = max(0, m - 1 - j)
    if start < m:
        acc[start:] = (acc[start:] + u[j - m + 1 + start: j + 1]) % f.p
    return acc


# ---------------------------------------------------------------------------
# bordered generators of the partition blocks


def _shift_family(f: PrimeField, size: int, cyclic: bool):
    coeffs = f.zeros(size + 1)
    coeffs[size] = 1
    if cyclic:
        coeffs[0] = (f.p - 1) % f.p
    return family_build(f, [coeffs])


def _block_op(f: PrimeField, rows: int, cols: int, row_cyclic: bool,
              col_cyclic: bool) -> DisplacementOperator:
    return DisplacementOperator(SYLVESTER,
                                _shift_family(f, rows, row_cyclic),
                                _shift_family(f, cols, col_cyclic))


def _unit(f: PrimeField, size: int, idx: int) -> np.ndarray:
    e = f.zeros(size)
    e[idx] = 1
    return e


def _hstack(f: PrimeField, mats) -> np.ndarray:
    cols = [m.reshape(len(m), 1) if m.ndim == 1 else m for m in mats]
    return f.arr(np.concatenate(cols, axis=1))


def _gen_block_21(f: PrimeField, G, H, u, split: int, rows: int,
                  row_l, col_l) -> Generator:
    """A[split:split+rows, :split] under ∇_{Z_{rows,0}, Z_{split,1}ᵗ}:
    G·Hᵗ picks up −e₁·(row above)ᵗ and −(last col)·e₁ᵗ corrections."""
    Gb = _hstack(f, [G[split: split + rows],
                     (f.p - _unit(f, rows, 0)) % f.p,
                     (f.p - col_l[split: split + rows]) % f.p])
    Hb = _hstack(f, [H[:split], row_l[:split], _unit(f, split, 0)])
    return Generator(Gb, Hb, _block_op(f, rows, split, False, True))


def _gen_block_12(f: PrimeField, G, H, u, split: int, cols: int,
                  row_l, col_l) -> Generator:
    """A[:split, split:split+cols] under ∇_{Z_{split,1}, Z_{cols,0}ᵗ}."""
    Gb = _hstack(f, [G[:split], col_l[:split], _unit(f, split, 0)])
    Hb = _hstack(f, [H[split: split + cols], _unit(f, cols, 0),
                     row_l[split: split + cols]])
    return Generator(Gb, Hb, _block_op(f, split, cols, True, False))


def _gen_block_inv(f: PrimeField, Y: np.ndarray, Z: np.ndarray,
                   v: np.ndarray) -> Generator:
    """A_r⁻¹ under ∇_{Z_{r,1}ᵗ, Z_{r,0}} from the search output:
    the generator is ([Y | e_r], [Z | v])."""
    r = Y.shape[0]
    Gb = _hstack(f, [Y, _unit(f, r, r - 1)])
    Hb = _hstack(f, [Z, v])
    return Generator(Gb, Hb, hankel_inverse_operator(f, r, r))


def _apply(gen: Generator, X: np.ndarray) -> np.ndarray:
    """gen · X, compressing first whenever the bordered width exceeds the
    column format."""
    if X.ndim == 1:
        return gen_matvec(gen, X)
    if X.shape[1] == 0:
        return gen.field.zeros((gen.m, 0))
    g = gen_compress(gen) if gen.alpha > gen.n else gen
    return struct_mul(g, X)


# ---------------------------------------------------------------------------
# the recursive search for the largest nonsingular leading block


def _base_case(f: PrimeField, G, H, u):
    m, n = G.shape[0], H.shape[0]
    q = min(m, n)
    A = densify_from_last_row(f, G, H, u)
    W = np.asarray(A[:q, :q], dtype=object).copy()
    ell = q
    for k in range(q):
        if int(W[k, k]) % f.p != 0:
            inv = f.inv(int(W[k, k]))
            for i in range(k + 1, q):
                fac = (W[i, k] * inv) % f.p
                if fac:
                    W[i, k:] = (W[i, k:] - fac * W[k, k:]) % f.p
        else:
            ell = k
            break
    alpha = G.shape[1]
    if ell == 0:
        return 0, f.zeros((0, alpha)), f.zeros((0, alpha)), f.zeros(0)
    Ai = _dense_inv(f, A[:ell, :ell])
    Y = (f.p - f.mat_mul(Ai, G[:ell])) % f.p
    Z = f.mat_mul(Ai.T, H[:ell])
    v = Ai[0].copy()
    return ell, Y, Z, v


def largest_rec(f: PrimeField, G, H, u):
    """Largest ℓ with all leading k×k blocks nonsingular for k ≤ ℓ, plus
    Y = −A_ℓ⁻¹G[:ℓ], Z = A_ℓ⁻ᵗH[:ℓ], and the first row v of A_ℓ⁻¹.

    Intended for generator length ≤ min(m, n); narrower inputs fall through
    to the dense base case regardless.
    """
    G, H, u = f.arr(G), f.arr(H), f.arr(u)
    m, n = G.shape[0], H.shape[0]
    alpha = G.shape[1]
    q = min(m, n)
    if alpha == 0 or q < 2 * alpha:
        return _base_case(f, G, H, u)

    m1, n1 = (m + 1) // 2, (n + 1) // 2
    row_m1 = _row_of(f, G, H, u, m1 - 1)
    sub = largest_rec(f, G[:m1], H[:n1], row_m1[:n1])
    ell1, Y11, Z11, v11 = sub
    if ell1 < min(m1, n1):
        return sub

    ell = ell1
    row_l = row_m1 if ell - 1 == m1 - 1 else _row_of(f, G, H, u, ell - 1)
    col_l = _col_of(f, G, H, u, ell - 1)

    g21 = _gen_block_21(f, G, H, u, ell, m - ell, row_l, col_l)
    g12 = _gen_block_12(f, G, H, u, ell, n - ell, row_l, col_l)
    t12 = gen_transpose(g12)
    inv11 = _gen_block_inv(f, Y11, Z11, v11)
    inv11_t = gen_transpose(inv11)

    GS = (G[ell:] + _apply(g21, Y11)) % f.p
    HS = (H[ell:] - _apply(t12, Z11)) % f.p
    uS = (u[ell:] - gen_matvec(t12, gen_matvec(inv11_t, u[:ell]))) % f.p

    m2, n2 = m - ell, n - ell
    if m2 == 1:
        s11 = int(uS[0]) % f.p
    elif n2 == 1:
        s11 = int(f.mat_mul(GS[1:2], HS[0:1].T)[0, 0]) % f.p
    else:
        s11 = (-int(f.mat_mul(GS[0:1], HS[1:2].T)[0, 0])) % f.p
    if s11 == 0:
        return sub

    ell_s, YS, ZS, vS = largest_rec(f, GS, HS, uS)
    if ell_s == 0:
        return sub

    b12 = _gen_block_12(f, G, H, u, ell, ell_s, row_l, col_l)
    b21 = _gen_block_21(f, G, H, u, ell, ell_s, row_l, col_l)
    b12_t = gen_transpose(b12)
    b21_t = gen_transpose(b21)
    invS = _gen_block_inv(f, YS, ZS, vS)
    invS_t = gen_transpose(invS)

    Ytop = (Y11 - _apply(inv11, _apply(b12, YS))) % f.p
    Ztop = (Z11 - _apply(inv11_t, _apply(b21_t, ZS))) % f.p
    w = (f.p - gen_matvec(invS_t, gen_matvec(b12_t, v11))) % f.p
    vtop = (v11 - gen_matvec(inv11_t, gen_matvec(b21_t, w))) % f.p

    Y = f.arr(np.concatenate([Ytop, YS], axis=0))
    Z = f.arr(np.concatenate([Ztop, ZS], axis=0))
    v = f.arr(np.concatenate([vtop, w]))
    return ell + ell_s, Y, Z, v


def largest(f: PrimeField, G, H, u):
    """Pad A to the next power-of-two square before the recursive search;
    padding adds at most two generator columns, removed again on return."""
    G, H, u = f.arr(G), f.arr(H), f.arr(u)
    m, n = G.shape[0], H.shape[0]
    alpha = G.shape[1]
    p2 = 1 << (max(m, n) - 1).bit_length()

    if p2 == m == n:
        return largest_rec(f, G, H, u)

    if p2 == n > m:
        Gb = f.zeros((p2, alpha + 1))
        Gb[:m, :alpha] = G
        Gb[m, alpha] = 1
        Hb = _hstack(f, [H, u])
        ub = f.zeros(p2)
    elif p2 == m > n:
        uprime = _col_of(f, G, H, u, n - 1)
        Gb = _hstack(f, [G, (f.p - uprime) % f.p])
        Hb = f.zeros((p2, alpha + 1))
        Hb[:n, :alpha] = H
        Hb[n, alpha] = 1
        ub = f.zeros(p2)
        ub[:n] = u
    else:
        uprime = _col_of(f, G, H, u, n - 1)
        if m == n == alpha and p2 == alpha + 1:
            # one padding column can be folded into G when its extra column
            # is a combination of G's columns
            usec = _dense_solve(f, G, uprime)
            if usec is not None:
                Gb = f.zeros((p2, alpha + 1))
                Gb[:m, :alpha] = G
                Gb[m, alpha] = 1
                Hb = f.zeros((p2, alpha + 1))
                Hb[:n, :alpha] = H
                Hb[:n, alpha] = u
                Hb[m, :alpha] = (f.p - usec) % f.p
                res = largest_rec(f, Gb, Hb, f.zeros(p2))
                ell, Yb, Zb, vb = res
                return ell, Yb[:, :alpha], Zb[:, :alpha], vb
        Gb = f.zeros((p2, alpha + 2))
        Gb[:m, :alpha] = G
        Gb[m:, alpha] = _unit(f, p2 - m, 0)
        Gb[:m, alpha + 1] = (f.p - uprime) % f.p
        Hb = f.zeros((p2, alpha + 2))
        Hb[:n, :alpha] = H
        Hb[:n, alpha] = u
        Hb[n:, alpha + 1] = _unit(f, p2 - n, 0)
        ub = f.zeros(p2)

    ell, Yb, Zb, vb = largest_rec(f, Gb, Hb, ub)
    return ell, Yb[:, :alpha], Zb[:, :alpha], vb


def lp_inv(f: PrimeField, G, H, u, _enforce_width: bool = True) -> LpInvResult:
    """Rank and leading-principal inverse data when A has generic rank
    profile; Failure when the largest nonsingular leading block is smaller
    than the rank (the Schur complement test catches it)."""
    G, H, u = f.arr(G), f.arr(H), f.arr(u)
    m, n = G.shape[0], H.shape[0]
    alpha = G.shape[1]
    if _enforce_width and alpha > min(m, n):
        raise PreconditionViolated(
            f"generator length {alpha} exceeds min dimension {min(m, n)}")

    ell, Y, Z, v = largest(f, G, H, u)
    if ell == min(m, n):
        return LpInvResult(OK, ell, Y, Z, v)

    if ell == 0:
        GS, HS, uS = G, H, u
    else:
        row_l = _row_of(f, G, H, u, ell - 1)
        col_l = _col_of(f, G, H, u, ell - 1)
        g21 = _gen_block_21(f, G, H, u, ell, m - ell, row_l, col_l)
        t12 = gen_transpose(_gen_block_12(f, G, H, u, ell, n - ell, row_l, col_l))
        inv11_t = gen_transpose(_gen_block_inv(f, Y, Z, v))
        GS = (G[ell:] + _apply(g21, Y)) % f.p
        HS = (H[ell:] - _apply(t12, Z)) % f.p
        uS = (u[ell:] - gen_matvec(t12, gen_matvec(inv11_t, u[:ell]))) % f.p

    Gb = _hstack(f, [GS, _unit(f, m - ell, 0)])
    Hb = _hstack(f, [HS, uS])
    if _pair_rank(f, Gb, Hb) == 0:
        return LpInvResult(OK, ell, Y, Z, v)
    return LpInvResult(FAILURE)


# ---------------------------------------------------------------------------
# preconditioning


def precond(f: PrimeField, G, H, v1, v2):
    """Generator and last row of Ã = U(v₁)ᵗ·A·U(v₂) under
    ∇_{Z_{m,0}, Z_{n,0}ᵗ}, from a ∇_{Z_{m,0}, Z_{n,1}ᵗ}-generator of A.

    The commutator of the shift with a unit-triangular Toeplitz factor is
    rank two on each side, so the width grows by exactly four, and the first
    α columns stay U(v₁)ᵗG and U(v₂)ᵗH."""
    G, H = f.arr(G), f.arr(H)
    m, n = G.shape[0], H.shape[0]
    alpha = G.shape[1]
    u1 = TriangularToeplitzPreconditioner(f, v1)
    u2 = TriangularToeplitzPreconditioner(f, v2)
    if u1.m != m or u2.m != n:
        raise DimensionMismatch("preconditioner lengths must match the format")
    gen = Generator(G, H, hankel_operator(f, m, n))
    tgen = gen_transpose(gen)

    v1a, v2a = u1.v, u2.v
    g1 = _hstack(f, [np.concatenate([f.zeros(1), v1a[::-1][:-1]]),
                     (f.p - _unit(f, m, 0)) % f.p])
    h1 = _hstack(f, [_unit(f, m, m - 1),
                     np.concatenate([v1a[1:], f.zeros(1)])])
    g2 = _hstack(f, [np.roll(v2a, -1), (f.p - _unit(f, n, n - 1)) % f.p])
    h2 = _hstack(f, [_unit(f, n, 0),
                     np.concatenate([f.zeros(1), v2a[::-1][:-1]])])

    ag2 = np.stack([gen_matvec(gen, g2[:, k]) for k in range(2)], axis=1)
    ath1 = np.stack([gen_matvec(tgen, h1[:, k]) for k in range(2)], axis=1)

    Gt = _hstack(f, [np.stack([u1.apply_transpose(G[:, k])
                               for k in range(alpha)], axis=1) if alpha else G,
                     g1,
                     np.stack([u1.apply_transpose(ag2[:, k])
                               for k in range(2)], axis=1)])
    Ht = _hstack(f, [np.stack([u2.apply_transpose(H[:, k])
                               for k in range(alpha)], axis=1) if alpha else H,
                     np.stack([u2.apply_transpose(ath1[:, k])
                               for k in range(2)], axis=1),
                     h2])
    ut = u2.apply_transpose(gen_matvec(tgen, _unit(f, m, m - 1)))
    return f.arr(Gt), f.arr(Ht), ut


def _sample_vector(f: PrimeField, rng, size: int, bound: int) -> np.ndarray:
    out = f.zeros(size)
    out[0] = 1
    if size > 1:
        out[1:] = f.arr(rng.integers(0, bound, size - 1))
    return out


def _check_sample_bound(f: PrimeField, bound: int):
    if not 1 <= bound <= f.p:
        raise PreconditionViolated(
            f"sample set size {bound} not in [1, {f.p}]")


# ---------------------------------------------------------------------------
# public inversion / solving on the shift-operator format


def inv(f: PrimeField, G, H, sample_set_size: int | None = None,
        rng_seed: int = 0, v1=None, v2=None) -> InvResult:
    """Inverse generator of a square A given under ∇_{Z_{m,0}, Z_{m,1}ᵗ}.

    Returns ok with (−A⁻¹G, A⁻ᵗH) under ∇_{Z_{m,1}ᵗ, Z_{m,0}}, singular when
    A is detected as rank-deficient, or failure when the random
    preconditioning missed (probability < 1/2 at the default sample size).
    """
    G, H = f.arr(G), f.arr(H)
    m, n = G.shape[0], H.shape[0]
    if m != n:
        raise DimensionMismatch("inv requires a square format")
    alpha = G.shape[1]
    if alpha > m:
        raise PreconditionViolated(f"generator length {alpha} exceeds {m}")
    bound = 2 * m * (m + 1) if sample_set_size is None else sample_set_size
    bound = min(bound, f.p)
    _check_sample_bound(f, bound)
    if v1 is None or v2 is None:
        rng = np.random.Generator(np.random.Philox(key=rng_seed))
        v1 = _sample_vector(f, rng, m, bound) if v1 is None else f.arr(v1)
        v2 = _sample_vector(f, rng, m, bound) if v2 is None else f.arr(v2)
    u1 = TriangularToeplitzPreconditioner(f, v1)
    u2 = TriangularToeplitzPreconditioner(f, v2)

    Gt, Ht, ut = precond(f, G, H, v1, v2)
    res = lp_inv(f, Gt, Ht, ut, _enforce_width=False)
    if not res.ok:
        return InvResult(FAILURE)
    if res.r < m:
        return InvResult(SINGULAR)
    Y = np.stack([u2.apply(res.Y[:, k]) for k in range(alpha)],
                 axis=1) if alpha else f.zeros((m, 0))
    Z = np.stack([u1.apply(res.Z[:, k]) for k in range(alpha)],
                 axis=1) if alpha else f.zeros((m, 0))
    out = Generator(f.arr(Y), f.arr(Z), hankel_inverse_operator(f, m, m))
    return InvResult(OK, out)


def solve(f: PrimeField, G, H, b, sample_set_size: int | None = None,
          rng_seed: int = 0, v1=None, v2=None) -> SolveResult:
    """One solution of A·x = b for A given under ∇_{Z_{m,0}, Z_{n,1}ᵗ}.

    Rank-deficient consistent systems return a solution (a nonzero one when
    b = 0 and A is singular); inconsistent ones report no_solution; failure
    means the randomized rank-profile normalization missed.
    """
    G, H = f.arr(G), f.arr(H)
    b = f.arr(b)
    m, n = G.shape[0], H.shape[0]
    if len(b) != m:
        raise DimensionMismatch(f"right-hand side length {len(b)} != {m}")
    alpha = G.shape[1]
    q = min(m, n)
    if alpha > q:
        raise PreconditionViolated(f"generator length {alpha} exceeds {q}")
    bound = 2 * q * (q + 1) if sample_set_size is None else sample_set_size
    bound = min(bound, f.p)
    _check_sample_bound(f, bound)
    if v1 is None or v2 is None:
        rng = np.random.Generator(np.random.Philox(key=rng_seed))
        v1 = _sample_vector(f, rng, m, bound) if v1 is None else f.arr(v1)
        v2 = _sample_vector(f, rng, n, bound) if v2 is None else f.arr(v2)
    u1 = TriangularToeplitzPreconditioner(f, v1)
    u2 = TriangularToeplitzPreconditioner(f, v2)

    Gt, Ht, ut = precond(f, G, H, v1, v2)
    res = lp_inv(f, Gt, Ht, ut, _enforce_width=False)
    if not res.ok:
        return SolveResult(FAILURE)
    r = res.r
    bt = u1.apply_transpose(b)

    inv_r = _gen_block_inv(f, res.Y, res.Z, res.v) if r else None
    x1 = gen_matvec(inv_r, bt[:r]) if r else f.zeros(0)

    if r < m:
        if r == 0:
            resid = bt % f.p
        else:
            row_l = _row_of(f, Gt, Ht, ut, r - 1)
            col_l = _col_of(f, Gt, Ht, ut, r - 1)
            a21 = _gen_block_21(f, Gt, Ht, ut, r, m - r, row_l, col_l)
            resid = (gen_matvec(a21, x1) - bt[r:]) % f.p
        if np.any(resid != 0):
            return SolveResult(NO_SOLUTION)

    if r == n:
        xt = x1
    else:
        # a nonzero representative even when b = 0: pivot on the first
        # free column, which the rank profile makes dependent on A_r
        colr = _col_of(f, Gt, Ht, ut, r)
        tail = f.zeros(n - r)
        tail[0] = (f.p - 1) % f.p
        head = (x1 + gen_matvec(inv_r, colr[:r])) % f.p if r else f.zeros(0)
        xt = f.arr(np.concatenate([head, tail]))
    x = u2.apply(xt)
    return SolveResult(OK, x)


# ---------------------------------------------------------------------------
# arbitrary invertible operators, routed through the shift format


def _undo_basic_inverse(out: Generator, tf) -> Generator:
    """The inverse of the basic representative is conjugated back:
    A⁻¹ = Y_Q^{e2}·Ã⁻¹·Y_P^{e1}, flipping the matching transpose flags."""
    if tf.is_identity:
        return out
    from .operators import y_apply_family

    op = out.operator
    f = op.field
    G, H = out.G, out.H
    if tf.e2:
        G = np.stack([y_apply_family(tf.fam_q, G[:, k])
                      for k in range(G.shape[1])], axis=1) if G.shape[1] else G
    if tf.e1:
        H = np.stack([y_apply_family(tf.fam_p, H[:, k])
                      for k in range(H.shape[1])], axis=1) if H.shape[1] else H
    new_op = DisplacementOperator(op.kind, op.fam_p, op.fam_q,
                                  transpose_p=not tf.e2,
                                  transpose_q=tf.e1)
    return Generator(f.arr(G), f.arr(H), new_op)


def inv_generator(gen: Generator, sample_set_size: int | None = None,
                  rng_seed: int = 0, v1=None, v2=None) -> InvResult:
    """Inverse generator for any invertible displacement operator, via the
    multiplicative reduction to the shift format and back."""
    from .generators import from_hankel_inverse, to_basic, to_hankel
    from .operators import op_invertible

    op = gen.operator
    if op.m != op.n:
        raise DimensionMismatch("inv_generator requires a square format")
    if not op_invertible(op):
        raise SingularOperator("operator is not invertible")
    f = op.field
    basic, tf = to_basic(gen)
    hgen, ctx = to_hankel(basic)
    hgen = gen_compress(hgen)
    res = inv(f, hgen.G, hgen.H, sample_set_size=sample_set_size,
              rng_seed=rng_seed, v1=v1, v2=v2)
    if not res.ok:
        return res
    out = from_hankel_inverse(ctx, res.generator)
    return InvResult(OK, _undo_basic_inverse(out, tf))


def solve_generator(gen: Generator, b, sample_set_size: int | None = None,
                    rng_seed: int = 0, v1=None, v2=None) -> SolveResult:
    """Solve A·x = b for A under any invertible displacement operator."""
    from .generators import to_basic, to_hankel
    from .operators import STEIN, op_invertible, y_apply_family

    op = gen.operator
    if not op_invertible(op):
        raise SingularOperator("operator is not invertible")
    f = op.field
    b = f.arr(b)
    if len(b) != op.m:
        raise DimensionMismatch(f"right-hand side length {len(b)} != {op.m}")
    basic, tf = to_basic(gen)
    rhs = y_apply_family(op.fam_p, b) if tf.e1 else b
    hgen, ctx = to_hankel(basic)
    hgen = gen_compress(hgen)
    c = ctx.l_apply(rhs)
    res = solve(f, hgen.G, hgen.H, c, sample_set_size=sample_set_size,
                rng_seed=rng_seed, v1=v1, v2=v2)
    if not res.ok:
        return res
    y = res.x
    if op.kind == STEIN:
        y = y[::-1].copy()
    xt = ctx.r_apply(y)
    x = y_apply_family(op.fam_q, xt) if tf.e2 else xt
    return SolveResult(OK, x)
