"""Displacement operators and matrix-free application of their building blocks.

An operator is assembled from two monic, pairwise-coprime polynomial families
P (row side) and Q (column side).  The Sylvester flavor maps A to M·A − A·N
and the Stein flavor to A − M·A·N, where M and N are the block-diagonal
companion matrices of the families (optionally transposed).  Everything a
structured algorithm needs from these matrices — companion products,
multiplication-by-F maps, symmetrizer products, invertibility tests and the
per-block modular inverses of Q — is provided here without ever materializing
an m×m matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import PrimeField, get_field
from .poly import (
    DimensionMismatch,
    PolyFamily,
    as_poly,
    degree,
    family_build,
    is_zero,
    poly_divrem,
    poly_mod,
    poly_mul,
    poly_rev,
    poly_scale,
    poly_sub,
    symmetrize_apply,
    symmetrize_solve,
    trim,
    xgcd,
)

SYLVESTER = "sylvester"
STEIN = "stein"


class SingularOperator(ValueError):
    """The displacement operator is not a bijection on F^{m×n}."""


@dataclass
class DisplacementOperator:
    kind: str  # SYLVESTER or STEIN
    fam_p: PolyFamily
    fam_q: PolyFamily
    transpose_p: bool = False
    transpose_q: bool = True
    _cache: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in (SYLVESTER, STEIN):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.fam_p.field is not self.fam_q.field:
            raise DimensionMismatch("P and Q families live over different fields")

    @property
    def field(self) -> PrimeField:
        return self.fam_p.field

    @property
    def m(self) -> int:
        return self.fam_p.total_degree

    @property
    def n(self) -> int:
        return self.fam_q.total_degree

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    @property
    def is_basic(self) -> bool:
        return not self.transpose_p and self.transpose_q

    def cached(self, key, fn):
        v = self._cache.get(key)
        if v is None:
            v = fn()
            self._cache[key] = v
        return v


def sylvester_op(fam_p: PolyFamily, fam_q: PolyFamily,
                 transpose_p: bool = False, transpose_q: bool = True) -> DisplacementOperator:
    return DisplacementOperator(SYLVESTER, fam_p, fam_q, transpose_p, transpose_q)


def stein_op(fam_p: PolyFamily, fam_q: PolyFamily,
             transpose_p: bool = False, transpose_q: bool = True) -> DisplacementOperator:
    return DisplacementOperator(STEIN, fam_p, fam_q, transpose_p, transpose_q)


# ---------------------------------------------------------------------------
# companion and multiplication maps


def companion_apply(fam: PolyFamily, v: np.ndarray, transposed: bool = False) -> np.ndarray:
    """M_P·v (or M_Pᵗ·v) blockwise in O(m).

    Per block with modulus P = p_0 + ... + p_{k-1}x^{k-1} + x^k:
    M_P shifts coefficients up and folds the overflow back through -p,
    M_Pᵗ shifts down and appends -<p, v>.
    """
    f = fam.field
    if len(v) != fam.total_degree:
        raise DimensionMismatch(
            f"vector length {len(v)} != family total degree {fam.total_degree}")
    out = f.zeros(fam.total_degree)
    for s, k, P in zip(fam.offsets, fam.degrees, fam.polys):
        blk = v[s: s + k]
        low = f.arr(P[:k])
        if transposed:
            out[s: s + k - 1] = blk[1:]
            out[s + k - 1] = (-int(np.dot(low, blk) % f.p)) % f.p
        else:
            top = int(blk[k - 1])
            out[s] = (-int(low[0]) * top) % f.p
            out[s + 1: s + k] = (blk[: k - 1] - top * low[1:]) % f.p
    return out


def modmul_apply(f: PrimeField, F: np.ndarray, P: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Coefficients of F·pol(v) mod P, padded to deg P.

    v may have any length; the rectangular map M_{F,P,ℓ} = M_{F,P}·W_{P,ℓ}
    is realized by reducing pol(v) mod P first.
    """
    k = degree(P)
    r = poly_mod(f, trim(f, v), P)
    w = poly_mod(f, poly_mul(f, trim(f, F), r), P)
    out = f.zeros(k)
    out[: len(w)] = w
    return out


def modmul_apply_transposed(f: PrimeField, F: np.ndarray, P: np.ndarray,
                            v: np.ndarray) -> np.ndarray:
    """M_{F,P}ᵗ·v via the symmetrizer conjugation Y_P⁻¹·M_{F,P}·Y_P."""
    k = degree(P)
    if len(v) != k:
        raise DimensionMismatch(f"vector length {len(v)} != deg P = {k}")
    return symmetrize_solve(f, P, modmul_apply(f, F, P, symmetrize_apply(f, P, v)))


def y_apply(f: PrimeField, P: np.ndarray, v: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Product with the triangular Hankel symmetrizer of P, or its inverse."""
    if len(v) != degree(P):
        raise DimensionMismatch(f"vector length {len(v)} != deg P = {degree(P)}")
    if inverse:
        return symmetrize_solve(f, P, v)
    return symmetrize_apply(f, P, v)


def y_apply_family(fam: PolyFamily, v: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Blockwise symmetrizer product Y_P·v for a whole family."""
    f = fam.field
    if len(v) != fam.total_degree:
        raise DimensionMismatch(
            f"vector length {len(v)} != family total degree {fam.total_degree}")
    out = f.zeros(fam.total_degree)
    for s, k, P in zip(fam.offsets, fam.degrees, fam.polys):
        out[s: s + k] = y_apply(f, P, v[s: s + k], inverse)
    return out


# ---------------------------------------------------------------------------
# modular inverses of Q against the blocks of P
#
# The table holding Q⁻¹ mod P_i (Sylvester) or rev(Q)⁻¹ mod P_i (Stein) is
# what makes reconstruction and fast products possible; it exists exactly
# when the operator is invertible.  Three routes, dispatched on the verified
# family flavors:
#   1. both sides a single binomial x^k − c: closed form, no gcd at all;
#   2. P not a binomial: reduce Q down the P-tree, one small xgcd per leaf;
#   3. P = x^m − φ a binomial but Q not: invert P modulo every Q_j, CRT the
#      residues into R = P⁻¹ mod Q, and read off Q⁻¹ mod P from the exact
#      cofactor (1 − R·P)/Q.


def binomial_inverse(f: PrimeField, m: int, phi: int, n: int, psi: int):
    """1/(x^n − ψ) mod (x^m − φ), or None when the gcd is nontrivial.

    With y = x^n, g = gcd(n, m) and L = m/g one has y^L = φ^{n/g} =: ρ in
    the quotient ring, so (y − ψ)·Σ_{t<L} ψ^t y^{L−1−t} = ρ − ψ^L collapses
    to a scalar; invertibility is exactly ρ ≠ ψ^L, and the inverse is a sum
    of L distinct monomials.
    """
    import math

    g = math.gcd(n, m)
    L = m // g
    rho = f.pow(phi, n // g)
    den = (rho - f.pow(psi, L)) % f.p
    if den == 0:
        return None
    den_inv = f.inv(den)
    out = f.zeros(m)
    coeff = den_inv  # ψ^t · den⁻¹, t = 0, 1, ...
    for t in range(L):
        s = L - 1 - t
        e = n * s
        out[e % m] = (out[e % m] + coeff * f.pow(phi, e // m)) % f.p
        coeff = (coeff * psi) % f.p
    return out


def _x_pow_mod(f: PrimeField, e: int, P: np.ndarray) -> np.ndarray:
    """x^e mod P by square and multiply."""
    r = as_poly(f, [1])
    x = poly_mod(f, as_poly(f, [0, 1]), P)
    while e:
        if e & 1:
            r = poly_mod(f, poly_mul(f, r, x), P)
        e >>= 1
        x = poly_mod(f, poly_mul(f, x, x), P)
    return r


def _inverse_mod_leaves(fam_p: PolyFamily, rhs: np.ndarray):
    """rhs⁻¹ mod P_i for every block, or None if some gcd is nontrivial."""
    f = fam_p.field
    from .poly import red_family

    residues = red_family(fam_p, rhs)
    table = []
    for res, P in zip(residues, fam_p.polys):
        g, s, _ = xgcd(f, res, P)
        if degree(g) != 0:
            return None
        table.append(poly_mod(f, s, P))
    return table


def _binomial_case(f: PrimeField, fam_p: PolyFamily, fam_q: PolyFamily, stein: bool):
    (phi,) = fam_p.flavor_params
    (psi,) = fam_q.flavor_params
    m, n = fam_p.total_degree, fam_q.total_degree
    if not stein:
        w = binomial_inverse(f, m, phi, n, psi)
        return None if w is None else [w]
    # rev(x^n − ψ) = 1 − ψx^n; for ψ ≠ 0 this is −ψ·(x^n − ψ⁻¹)
    if psi == 0:
        return [as_poly(f, [1])]
    psi_inv = f.inv(psi)
    w = binomial_inverse(f, m, phi, n, psi_inv)
    if w is None:
        return None
    return [poly_scale(f, (-psi_inv) % f.p, w)]


def _converse_case(f: PrimeField, fam_p: PolyFamily, fam_q: PolyFamily):
    """P = x^m − φ, Q arbitrary: compute R = P⁻¹ mod Q blockwise, then the
    cofactor S with R·P + S·Q = 1 gives Q⁻¹ mod P = S."""
    from .poly import crt_family

    (phi,) = fam_p.flavor_params
    m = fam_p.total_degree
    parts = []
    for Qj in fam_q.polys:
        pj = poly_sub(f, _x_pow_mod(f, m, Qj), as_poly(f, [phi]))
        g, s, _ = xgcd(f, pj, Qj)
        if degree(g) != 0:
            return None
        parts.append(poly_mod(f, s, Qj))
    r = crt_family(fam_q, parts)
    one_minus_rp = poly_sub(f, as_poly(f, [1]),
                            poly_mul(f, r, fam_p.product))
    s, rem = poly_divrem(f, one_minus_rp, fam_q.product)
    assert is_zero(rem)
    return [poly_mod(f, s, fam_p.product)]


def inverse_table(op: DisplacementOperator):
    """Per-block inverses Q⁻¹ mod P_i (Sylvester) / rev(Q)⁻¹ mod P_i (Stein).

    Returns a list of coefficient vectors, one per block of P, or None when
    the operator is singular.  Cached on the operator.
    """
    def build():
        f = op.field
        fam_p, fam_q = op.fam_p, op.fam_q
        stein = op.kind == STEIN
        if fam_p.flavor == "single_power" and fam_q.flavor == "single_power":
            return _binomial_case(f, fam_p, fam_q, stein)
        rhs = fam_q.product
        if stein:
            rhs = poly_rev(f, rhs, fam_q.total_degree)
        if fam_p.flavor == "single_power":
            if stein:
                # reversed factors are neither monic nor tree-structured;
                # a single xgcd against the binomial is simplest here
                g, s, _ = xgcd(f, rhs, fam_p.product)
                if degree(g) != 0:
                    return None
                return [poly_mod(f, s, fam_p.product)]
            return _converse_case(f, fam_p, fam_q)
        return _inverse_mod_leaves(fam_p, rhs)

    table = op.cached("inverse_table", lambda: build() or "singular")
    return None if isinstance(table, str) else table


def op_invertible(op: DisplacementOperator) -> bool:
    """True iff the operator is a bijection on F^{m×n}.

    Sylvester: gcd(P, Q) = 1.  Stein: gcd(P, rev(Q)) = 1.  Transpose flags
    never matter (M_Pᵗ is similar to M_P through the symmetrizer).
    """
    return inverse_table(op) is not None


def transpose_table(op: DisplacementOperator):
    """The mirror table P⁻¹ mod Q_j (resp. rev(P)⁻¹ mod Q_j) used when the
    roles of the two families are exchanged."""
    def build():
        swapped = DisplacementOperator(op.kind, op.fam_q, op.fam_p)
        if op.kind == SYLVESTER:
            return inverse_table(swapped)
        # Stein transposition swaps (M, N) to (Nᵗ, Mᵗ); invertibility of the
        # swapped operator is gcd(Q, rev(P)) = 1, equivalent to the original.
        f = op.field
        rhs = poly_rev(f, op.fam_p.product, op.fam_p.total_degree)
        if op.fam_q.flavor == "single_power" and op.fam_p.flavor == "single_power":
            return _binomial_case(f, op.fam_q, op.fam_p, True)
        return _inverse_mod_leaves(op.fam_q, rhs)

    table = op.cached("transpose_table", lambda: build() or "singular")
    return None if isinstance(table, str) else table


# ---------------------------------------------------------------------------
# serialization


def _family_to_dict(fam: PolyFamily) -> dict:
    return {
        "flavor": fam.flavor,
        "polys": [[str(int(c)) for c in P] for P in fam.polys],
    }


def _family_from_dict(f: PrimeField, d: dict) -> PolyFamily:
    fam = family_build(f, [[int(c) for c in P] for P in d["polys"]])
    want = d.get("flavor")
    if want is not None and want != fam.flavor:
        raise ValueError(f"family tagged {want!r} but detected {fam.flavor!r}")
    return fam


def op_to_dict(op: DisplacementOperator) -> dict:
    return {
        "kind": op.kind,
        "P": _family_to_dict(op.fam_p),
        "Q": _family_to_dict(op.fam_q),
        "transpose_P": op.transpose_p,
        "transpose_Q": op.transpose_q,
    }


def op_from_dict(f: PrimeField, d: dict) -> DisplacementOperator:
    return DisplacementOperator(
        d["kind"],
        _family_from_dict(f, d["P"]),
        _family_from_dict(f, d["Q"]),
        bool(d["transpose_P"]),
        bool(d["transpose_Q"]),
    )
