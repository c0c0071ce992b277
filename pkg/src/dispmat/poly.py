"""Dense univariate polynomials over a prime field, plus the CRT toolkit
for families of pairwise-coprime monic moduli.

Representation: a polynomial is a numpy coefficient array in ascending
order, trimmed (no trailing zeros); the zero polynomial is the empty
array. All functions take the field context as first argument and return
trimmed canonical arrays.

A ``PolyFamily`` bundles monic pairwise-coprime moduli P_1..P_d with their
subproduct tree, CRT units and a detected structure flavor ("general",
"single_power" for a lone binomial x^m - phi, "geometric" when the moduli
are x - u*q^i). Reductions, Chinese remaindering, the linear-combination
map and their transposes all run through the tree in quasi-linear time,
with fast paths for the special flavors.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .field import PrimeField, ZeroInverse

__all__ = [
    "DegreeOverflow",
    "DivisionByZero",
    "BoundTooSmall",
    "NonUnitConstantTerm",
    "NotMonic",
    "NotCoprime",
    "DimensionMismatch",
    "DegeneratePoints",
    "trim",
    "as_poly",
    "is_zero",
    "degree",
    "poly_add",
    "poly_sub",
    "poly_neg",
    "poly_scale",
    "poly_shift",
    "poly_mul",
    "poly_divrem",
    "poly_mod",
    "poly_rev",
    "poly_eval",
    "series_inv",
    "xgcd",
    "poly_gcd",
    "symmetrize_apply",
    "symmetrize_solve",
    "PolyFamily",
    "family_build",
    "red_family",
    "crt_family",
    "comb_family",
    "comb_family_inv",
    "red_transposed",
    "geom_eval",
    "geom_interp",
]

# Switch from schoolbook long division to reverse/Newton division above
# this divisor degree.
DIVREM_NEWTON_THRESHOLD = 32


class DegreeOverflow(ValueError):
    """Product degree exceeds the prime's NTT capacity in strict mode."""


class DivisionByZero(ZeroDivisionError):
    """Polynomial division by the zero polynomial."""


class BoundTooSmall(ValueError):
    """rev(a, d) called with d smaller than deg(a)."""


class NonUnitConstantTerm(ValueError):
    """Power-series inversion of a series with constant term 0."""


class NotMonic(ValueError):
    def __init__(self, index: int):
        super().__init__(f"family member {index} is not monic")
        self.index = index


class NotCoprime(ValueError):
    def __init__(self, i: int, j: int):
        super().__init__(f"family members {i} and {j} share a factor")
        self.pair = (i, j)


class DimensionMismatch(ValueError):
    """Residue/part vector does not match the family's block layout."""


class DegeneratePoints(ValueError):
    """Geometric evaluation points collide (u=0, q=0, or ord(q) too small)."""


# ---------------------------------------------------------------------------
# basic arithmetic


def trim(f: PrimeField, a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    n = len(a)
    while n > 0 and int(a[n - 1]) % f.p == 0:
        n -= 1
    return f.arr(a[:n])


def as_poly(f: PrimeField, coeffs: Sequence[int]) -> np.ndarray:
    return trim(f, f.arr(list(coeffs)))


def is_zero(a: np.ndarray) -> bool:
    return len(a) == 0


def degree(a: np.ndarray) -> int:
    """Degree with the convention deg(0) = -1."""
    return len(a) - 1


def poly_add(f: PrimeField, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) < len(b):
        a, b = b, a
    out = f.arr(a)
    if len(b):
        out[: len(b)] = (out[: len(b)] + b) % f.p
    return trim(f, out)


def poly_neg(f: PrimeField, a: np.ndarray) -> np.ndarray:
    return f.arr((f.p - np.asarray(a)) % f.p) if len(a) else f.zeros(0)


def poly_sub(f: PrimeField, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return poly_add(f, a, poly_neg(f, b))


def poly_scale(f: PrimeField, c: int, a: np.ndarray) -> np.ndarray:
    c %= f.p
    if c == 0 or is_zero(a):
        return f.zeros(0)
    return trim(f, np.asarray(a) * c % f.p)


def poly_shift(f: PrimeField, a: np.ndarray, k: int) -> np.ndarray:
    """Multiply by x^k (k >= 0)."""
    if is_zero(a):
        return a
    out = f.zeros(len(a) + k)
    out[k:] = a
    return out


def poly_mul(f: PrimeField, a: np.ndarray, b: np.ndarray, strict: bool = False) -> np.ndarray:
    if is_zero(a) or is_zero(b):
        return f.zeros(0)
    need = len(a) + len(b) - 1
    size = 1 << (need - 1).bit_length()
    if strict and size > f.ntt_capacity():
        raise DegreeOverflow(
            f"product degree {need - 1} needs transform size {size} > {f.ntt_capacity()}"
        )
    return trim(f, f.conv(a, b))


def poly_rev(f: PrimeField, a: np.ndarray, d: int) -> np.ndarray:
    """Coefficient reversal rev(a, d) = x^d * a(1/x); requires d >= deg(a)."""
    if degree(a) > d:
        raise BoundTooSmall(f"rev bound {d} < degree {degree(a)}")
    out = f.zeros(d + 1)
    if len(a):
        out[d - len(a) + 1:] = np.asarray(a)[::-1]
    return trim(f, out)


def poly_eval(f: PrimeField, a: np.ndarray, x: int) -> int:
    acc = 0
    for c in reversed([int(v) for v in a]):
        acc = (acc * x + c) % f.p
    return acc


def series_inv(f: PrimeField, a: np.ndarray, k: int) -> np.ndarray:
    """First k coefficients of 1/a, by Newton iteration."""
    if k <= 0:
        return f.zeros(0)
    if is_zero(a) or int(a[0]) == 0:
        raise NonUnitConstantTerm("series has no inverse: constant term is 0")
    x = f.arr([f.inv(int(a[0]))])
    prec = 1
    while prec < k:
        prec = min(2 * prec, k)
        ax = f.conv(a[:prec], x)[:prec]
        two_minus = f.zeros(prec)
        two_minus[: len(ax)] = (f.p - ax) % f.p
        two_minus[0] = (two_minus[0] + 2) % f.p
        x = f.conv(x, two_minus)[:prec]
    return trim(f, x[:k])


_SERIES_INV_CACHE: dict = {}
_SERIES_INV_CACHE_MAX = 512


def _series_inv_cached(f: PrimeField, a: np.ndarray, k: int) -> np.ndarray:
    """series_inv with a content-keyed memo, extended on demand.

    Inverting the same series comes up thousands of times in the evaluation
    paths (fast division by a family product, by subproduct-tree nodes, by a
    block's minimal polynomial, symmetrizer solves), so the Newton result is
    cached per content and regrown when a longer prefix is requested.
    """
    a = trim(f, a)
    if a.dtype == object:
        key = (f.p, tuple(int(v) for v in a))
    else:
        key = (f.p, a.tobytes())
    hit = _SERIES_INV_CACHE.get(key)
    if hit is None or hit[0] < k:
        if len(_SERIES_INV_CACHE) >= _SERIES_INV_CACHE_MAX:
            _SERIES_INV_CACHE.clear()
        have = max(k, 2 * hit[0]) if hit else k
        hit = (have, series_inv(f, a, have))
        _SERIES_INV_CACHE[key] = hit
    return hit[1][:k]


def _divrem_school(f: PrimeField, a: np.ndarray, b: np.ndarray):
    r = f.arr(a)
    db = len(b) - 1
    q = f.zeros(len(a) - db)
    for i in range(len(a) - db - 1, -1, -1):
        c = int(r[i + db])
        if c:
            q[i] = c
            r[i: i + db] = (r[i: i + db] - c * np.asarray(b[:db])) % f.p
            r[i + db] = 0
    return q, trim(f, r[:db])


def poly_divrem(f: PrimeField, a: np.ndarray, b: np.ndarray):
    """Quotient and remainder; the divisor must have an invertible leading
    coefficient (always true over a field unless b = 0)."""
    if is_zero(b):
        raise DivisionByZero("polynomial division by zero")
    a = trim(f, a)
    b = trim(f, b)
    lc = int(b[-1])
    if lc != 1:
        ilc = f.inv(lc)
        bm = trim(f, np.asarray(b) * ilc % f.p)
        q, r = poly_divrem(f, a, bm)
        return poly_scale(f, ilc, q), r
    db = degree(b)
    if degree(a) < db:
        return f.zeros(0), a
    if db == 0:
        return a, f.zeros(0)
    n = degree(a) - db
    if db < DIVREM_NEWTON_THRESHOLD:
        return _divrem_school(f, a, b)
    ra = poly_rev(f, a, degree(a))
    rq = f.conv(ra[: n + 1], _series_inv_cached(f, poly_rev(f, b, db), n + 1))[: n + 1]
    # rev-quotient may have trailing zeros as a series; rev back at fixed bound n
    rq_full = f.zeros(n + 1)
    rq_full[: len(rq)] = rq
    q = trim(f, rq_full[::-1])
    r = poly_sub(f, a, poly_mul(f, b, q))
    assert degree(r) < db
    return q, r


def poly_mod(f: PrimeField, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return poly_divrem(f, a, b)[1]


def xgcd(f: PrimeField, a: np.ndarray, b: np.ndarray):
    """Extended Euclid: returns (g, s, t) with s*a + t*b = g and g monic
    (classical quadratic remainder sequence)."""
    r0, r1 = trim(f, a), trim(f, b)
    s0, s1 = as_poly(f, [1]), f.zeros(0)
    t0, t1 = f.zeros(0), as_poly(f, [1])
    while not is_zero(r1):
        q, r = poly_divrem(f, r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, poly_sub(f, s0, poly_mul(f, q, s1))
        t0, t1 = t1, poly_sub(f, t0, poly_mul(f, q, t1))
    if is_zero(r0):
        return r0, s0, t0
    ilc = f.inv(int(r0[-1]))
    return (poly_scale(f, ilc, r0), poly_scale(f, ilc, s0), poly_scale(f, ilc, t0))


def poly_gcd(f: PrimeField, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return xgcd(f, a, b)[0]


# ---------------------------------------------------------------------------
# triangular Hankel symmetrizer of a monic modulus
#
# For monic P of degree m the symmetrizer has (i,j) entry p_{i+j-1}
# (1-indexed, p_m = 1, p_t = 0 above m). It links multiplication matrices
# mod P to their transposes. Both the product and its inverse reduce to one
# convolution against a reversed vector.


def symmetrize_apply(f: PrimeField, P: np.ndarray, v: np.ndarray) -> np.ndarray:
    m = degree(P)
    if len(v) != m:
        raise DimensionMismatch(f"vector length {len(v)} != modulus degree {m}")
    if m == 0:
        return f.zeros(0)
    a = f.zeros(m + 1)
    a[1:] = P[1:]
    c = f.conv(a, f.arr(np.asarray(v)[::-1]))
    return f.arr(c[m: 2 * m])


def symmetrize_solve(f: PrimeField, P: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply the inverse symmetrizer: flip the vector, then multiply by the
    inverse of the unit lower-triangular Toeplitz matrix whose symbol is
    rev(P) truncated to m terms."""
    m = degree(P)
    if len(v) != m:
        raise DimensionMismatch(f"vector length {len(v)} != modulus degree {m}")
    if m == 0:
        return f.zeros(0)
    s = _series_inv_cached(f, poly_rev(f, P, m), m)
    c = f.conv(s, f.arr(np.asarray(v)[::-1]))
    return f.arr(_padded(f, c, m)[:m])


def _padded(f: PrimeField, a: np.ndarray, n: int) -> np.ndarray:
    out = f.zeros(n)
    k = min(n, len(a))
    out[:k] = a[:k]
    return out


# ---------------------------------------------------------------------------
# subproduct tree and families


@dataclass
class _TreeNode:
    poly: np.ndarray
    deg: int
    left: "_TreeNode | None" = None
    right: "_TreeNode | None" = None
    leaf: int = -1  # index of the family member at a leaf


def _build_tree(f: PrimeField, polys: list[np.ndarray], lo: int, hi: int) -> _TreeNode:
    if hi - lo == 1:
        return _TreeNode(polys[lo], degree(polys[lo]), leaf=lo)
    total = sum(degree(p) for p in polys[lo:hi])
    acc, cut = 0, lo + 1
    for i in range(lo, hi - 1):
        acc += degree(polys[i])
        cut = i + 1
        if 2 * acc >= total:
            break
    left = _build_tree(f, polys, lo, cut)
    right = _build_tree(f, polys, cut, hi)
    return _TreeNode(poly_mul(f, left.poly, right.poly), 0, left, right)


@dataclass
class PolyFamily:
    """Monic pairwise-coprime moduli with CRT infrastructure.

    flavor is one of "general", "single_power" (d = 1 and P_1 = x^m - phi;
    the constant phi may be zero), or "geometric" (all moduli linear with
    roots u, uq, uq^2, ...).
    """

    field: PrimeField
    polys: list[np.ndarray]
    degrees: list[int]
    offsets: list[int]
    total_degree: int
    product: np.ndarray
    tree: _TreeNode
    flavor: str = "general"
    flavor_params: tuple = ()
    _cache: dict = dc_field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.polys)

    def cached(self, key, fn: Callable):
        v = self._cache.get(key)
        if v is None:
            v = fn()
            self._cache[key] = v
        return v

    def split_vector(self, v: np.ndarray) -> list[np.ndarray]:
        if len(v) != self.total_degree:
            raise DimensionMismatch(
                f"vector length {len(v)} != family total degree {self.total_degree}")
        return [self.field.arr(v[s: s + d]) for s, d in zip(self.offsets, self.degrees)]

    def join_parts(self, parts: list[np.ndarray]) -> np.ndarray:
        if len(parts) != len(self.polys):
            raise DimensionMismatch(f"expected {len(self.polys)} parts, got {len(parts)}")
        out = self.field.zeros(self.total_degree)
        for s, d, part in zip(self.offsets, self.degrees, parts):
            if len(part) > d:
                raise DimensionMismatch("part exceeds its block degree")
            if len(part):
                out[s: s + len(part)] = part
        return out

    # units: E_i = (P / P_i) mod P_i and F_i = E_i^{-1} mod P_i
    def crt_units(self):
        return self.cached("units", lambda: _compute_units(self))

    def rev_product_inverse(self, k: int) -> np.ndarray:
        """series_inv(rev(P, m), k), cached at the largest precision seen."""
        have = self._cache.get("rev_inv")
        if have is None or len(have) < k:
            have = series_inv(self.field, poly_rev(self.field, self.product, self.total_degree),
                              max(k, self.total_degree))
            self._cache["rev_inv"] = have
        return have[:k]


def _detect_flavor(f: PrimeField, polys: list[np.ndarray]):
    if len(polys) == 1:
        P = polys[0]
        m = degree(P)
        if m >= 1 and all(int(c) == 0 for c in P[1:m]):
            return "single_power", (f.neg(int(P[0])),)  # P = x^m - phi
    if len(polys) >= 2 and all(degree(P) == 1 for P in polys):
        roots = [f.neg(int(P[0])) for P in polys]
        u = roots[0]
        if u != 0 and roots[1] != 0:
            q = f.mul(roots[1], f.inv(u))
            if q != 0 and all(
                roots[i] == f.mul(roots[i - 1], q) for i in range(1, len(roots))
            ):
                return "geometric", (u, q)
    return "general", ()


def family_build(f: PrimeField, polys: Sequence[Sequence[int]]) -> PolyFamily:
    """Validate moduli (monic, pairwise coprime) and assemble the family."""
    ps = [as_poly(f, p) for p in polys]
    if not ps:
        raise DimensionMismatch("empty family")
    for i, p in enumerate(ps):
        if degree(p) < 1 or int(p[-1]) != 1:
            raise NotMonic(i)
    degs = [degree(p) for p in ps]
    offs = [0] * len(ps)
    for i in range(1, len(ps)):
        offs[i] = offs[i - 1] + degs[i - 1]
    tree = _build_tree(f, ps, 0, len(ps))
    flavor, params = _detect_flavor(f, ps)
    fam = PolyFamily(
        field=f, polys=ps, degrees=degs, offsets=offs,
        total_degree=sum(degs), product=tree.poly, tree=tree,
        flavor=flavor, flavor_params=params,
    )
    fam.crt_units()  # doubles as the pairwise-coprimality check
    return fam


def _compute_units(fam: PolyFamily):
    f = fam.field
    if len(fam) == 1:
        one = as_poly(f, [1])
        return [one], [one]
    # P* = sum_i P/P_i reduces to E_i = (P/P_i) mod P_i at each leaf
    ones = [as_poly(f, [1])] * len(fam)
    p_star = comb_family(fam, ones)
    es = _reduce_down(fam, p_star)
    fs = []
    for i, (e, p) in enumerate(zip(es, fam.polys)):
        g, s, _ = xgcd(f, e, p)
        if degree(g) != 0:
            raise NotCoprime(*_find_noncoprime_pair(fam, i))
        fs.append(poly_mod(f, s, p))
    return es, fs


def _find_noncoprime_pair(fam: PolyFamily, i: int):
    f = fam.field
    for j in range(len(fam)):
        if j != i and degree(poly_gcd(f, fam.polys[i], fam.polys[j])) > 0:
            return (min(i, j), max(i, j))
    return (i, i)  # shared factor spread across several members


def _reduce_down(fam: PolyFamily, a: np.ndarray) -> list[np.ndarray]:
    out: list[np.ndarray] = [None] * len(fam)  # type: ignore[list-item]

    def walk(node: _TreeNode, r: np.ndarray):
        r = poly_mod(fam.field, r, node.poly)
        if node.leaf >= 0:
            out[node.leaf] = r
            return
        walk(node.left, r)
        walk(node.right, r)

    walk(fam.tree, a)
    return out


def red_family(fam: PolyFamily, a: np.ndarray) -> list[np.ndarray]:
    """Residues a mod P_i for all i (input of any degree)."""
    if fam.flavor == "geometric":
        u, q = fam.flavor_params
        vals = geom_eval(fam.field, a, u, q, len(fam))
        return [trim(fam.field, vals[i: i + 1]) for i in range(len(fam))]
    return _reduce_down(fam, a)


def comb_family(fam: PolyFamily, parts: list[np.ndarray]) -> np.ndarray:
    """The linear-combination map: sum_i parts_i * (P / P_i)."""
    if len(parts) != len(fam):
        raise DimensionMismatch(f"expected {len(fam)} parts, got {len(parts)}")
    f = fam.field

    def walk(node: _TreeNode):
        if node.leaf >= 0:
            part = parts[node.leaf]
            if degree(part) >= degree(node.poly) and not is_zero(part):
                raise DimensionMismatch("part degree exceeds its modulus")
            return part
        lv = walk(node.left)
        rv = walk(node.right)
        return poly_add(f, poly_mul(f, lv, node.right.poly),
                        poly_mul(f, rv, node.left.poly))

    return walk(fam.tree)


def comb_family_inv(fam: PolyFamily, a: np.ndarray) -> list[np.ndarray]:
    """Inverse of comb_family on F[x]_m: scale residues by the units F_i."""
    f = fam.field
    _, fs = fam.crt_units()
    return [poly_mod(f, poly_mul(f, r, fi), p)
            for r, fi, p in zip(_reduce_down(fam, a), fs, fam.polys)]


def crt_family(fam: PolyFamily, parts: list[np.ndarray]) -> np.ndarray:
    """Unique a in F[x]_m with a = parts_i mod P_i."""
    if len(parts) != len(fam):
        raise DimensionMismatch(f"expected {len(fam)} parts, got {len(parts)}")
    f = fam.field
    if fam.flavor == "geometric":
        u, q = fam.flavor_params
        if any(len(p) > 1 for p in parts):
            raise DimensionMismatch("part degree exceeds its modulus")
        vals = f.arr([int(p[0]) if len(p) else 0 for p in parts])
        return geom_interp(f, u, q, vals)
    if len(fam) == 1:
        return poly_mod(f, parts[0], fam.polys[0])
    _, fs = fam.crt_units()
    scaled = [poly_mod(f, poly_mul(f, part, fi), p)
              for part, fi, p in zip(parts, fs, fam.polys)]
    return comb_family(fam, scaled)


# ---------------------------------------------------------------------------
# transposed reduction
#
# The stacked-reduction matrix W maps coefficients of a in F[x]_m to the
# concatenated residues (a mod P_i)_i. Its transpose admits a generating-
# series description: the block u_i contributes the first m terms of
# N_i / rev(P_i) where N_i = (u_i * rev(P_i)) mod y^{m_i}; summing over i
# with the common denominator rev(P) lets one combine numerators up the
# subproduct tree and finish with a single series division.
#
# The inverse-transpose (the transposed CRT map) runs the tree downwards
# instead: each node passes to a child the "transposed multiplication"
# (a windowed correlation) of its vector by the co-child's product, and the
# leaves finish with a transposed multiplication-mod-P_i by the unit F_i.


def red_transposed(fam: PolyFamily, u: np.ndarray, inverse: bool = False) -> np.ndarray:
    f = fam.field
    if inverse:
        return _crt_transposed(fam, u)
    if len(u) != fam.total_degree:
        raise DimensionMismatch(
            f"vector length {len(u)} != family total degree {fam.total_degree}")

    def numerator(node: _TreeNode, blocks: np.ndarray) -> np.ndarray:
        if node.leaf >= 0:
            mi = fam.degrees[node.leaf]
            ui = blocks[:mi]
            ni = f.conv(ui, poly_rev(f, node.poly, mi))[:mi] if mi else f.zeros(0)
            return trim(f, ni)
        dl = _subtree_degree(node.left)
        nl = numerator(node.left, blocks[:dl])
        nr = numerator(node.right, blocks[dl:])
        dr = _subtree_degree(node.right)
        return poly_add(
            f,
            poly_mul(f, nl, poly_rev(f, node.right.poly, dr)),
            poly_mul(f, nr, poly_rev(f, node.left.poly, dl)),
        )

    m = fam.total_degree
    num = numerator(fam.tree, f.arr(u))
    inv = fam.rev_product_inverse(m)
    return _padded(f, f.conv(num, inv), m)


def _subtree_degree(node: _TreeNode) -> int:
    return degree(node.poly)


def _transposed_multiply(f: PrimeField, c: np.ndarray, u: np.ndarray, out_len: int) -> np.ndarray:
    """Transpose of 'multiply by the fixed polynomial c': a windowed
    correlation, (result)_k = sum_i c_i u_{k+i} for k < out_len."""
    dc = degree(c)
    corr = f.conv(poly_rev(f, c, dc), u)
    return f.arr(_padded(f, corr[dc:], out_len))


def _crt_transposed(fam: PolyFamily, u: np.ndarray) -> np.ndarray:
    f = fam.field
    if len(u) != fam.total_degree:
        raise DimensionMismatch(
            f"vector length {len(u)} != family total degree {fam.total_degree}")
    _, fs = fam.crt_units()
    out = f.zeros(fam.total_degree)

    def walk(node: _TreeNode, vec: np.ndarray):
        if node.leaf >= 0:
            i = node.leaf
            # transposed (multiply by F_i mod P_i) via the symmetrizer identity
            block = symmetrize_solve(
                f, fam.polys[i],
                _modmul(f, fs[i], fam.polys[i],
                        symmetrize_apply(f, fam.polys[i], vec)),
            )
            out[fam.offsets[i]: fam.offsets[i] + fam.degrees[i]] = _padded(
                f, block, fam.degrees[i])
            return
        dl = _subtree_degree(node.left)
        dr = _subtree_degree(node.right)
        walk(node.left, _transposed_multiply(f, node.right.poly, vec, dl))
        walk(node.right, _transposed_multiply(f, node.left.poly, vec, dr))

    walk(fam.tree, f.arr(u))
    return out


def _modmul(f: PrimeField, F: np.ndarray, P: np.ndarray, v: np.ndarray) -> np.ndarray:
    """F * pol(v) mod P as a full-length coefficient vector."""
    r = poly_mod(f, poly_mul(f, F, trim(f, v)), P)
    return _padded(f, r, degree(P))


# ---------------------------------------------------------------------------
# geometric evaluation / interpolation (chirp transforms)


def _geom_check(f: PrimeField, u: int, q: int, count: int):
    if count <= 0:
        return
    if u % f.p == 0 or q % f.p == 0:
        raise DegeneratePoints("u and q must be nonzero")
    acc = 1
    for k in range(1, count):
        acc = acc * q % f.p
        if acc == 1:
            raise DegeneratePoints(f"q has multiplicative order {k} < {count}")


def _tri_powers(f: PrimeField, q: int, n: int) -> np.ndarray:
    """T_k = q^(k(k-1)/2) for k = 0..n-1."""
    out = [1] * n
    step = 1
    for k in range(1, n):
        out[k] = out[k - 1] * step % f.p
        step = step * q % f.p
    return np.array(out, dtype=f.dtype)


def geom_eval(f: PrimeField, a: np.ndarray, u: int, q: int, count: int) -> np.ndarray:
    """Evaluate a at the points u*q^i, i = 0..count-1, via one convolution."""
    _geom_check(f, u, q, count)
    if count == 0:
        return f.zeros(0)
    if is_zero(a):
        return f.zeros(count)
    n = len(a)
    tri = _tri_powers(f, q, n + count)
    tri_inv = f.inv_array(tri[: max(n, count)])
    upow = 1
    b = f.zeros(n)
    for j in range(n):
        b[j] = int(a[j]) * upow % f.p * int(tri_inv[j]) % f.p
        upow = upow * u % f.p
    c = f.conv(f.arr(np.asarray(b)[::-1]), tri)
    vals = f.zeros(count)
    for i in range(count):
        vals[i] = int(c[i + n - 1]) * int(tri_inv[i]) % f.p
    return vals


def geom_interp(f: PrimeField, u: int, q: int, values: np.ndarray) -> np.ndarray:
    """Interpolate the polynomial of degree < n through (u*q^i, values[i]).

    Weights come from the derivative of the master polynomial at the nodes;
    the interpolant is recovered as M(x) * S(x) mod x^n where S is the
    power-series expansion of the weighted partial-fraction sum.
    """
    n = len(values)
    _geom_check(f, u, q, n)
    if n == 0:
        return f.zeros(0)

    # master polynomial M = prod (x - u q^i) by a product tree
    nodes = [as_poly(f, [f.neg(f.mul(u, f.pow(q, i))), 1]) for i in range(n)]
    while len(nodes) > 1:
        nxt = [poly_mul(f, nodes[i], nodes[i + 1]) if i + 1 < len(nodes) else nodes[i]
               for i in range(0, len(nodes), 2)]
        nodes = nxt
    master = nodes[0]

    deriv = trim(f, (np.arange(1, n + 1, dtype=np.int64) if f.dtype is np.int64
                     else np.array([k for k in range(1, n + 1)], dtype=object))
                 * np.asarray(master[1:]) % f.p)
    denom = geom_eval(f, deriv, u, q, n)
    weights = f.arr(np.asarray(values) * f.inv_array(denom) % f.p)

    # power sums sigma_s = sum_i w_i z_i^s for s = 1..n with z_i = (u q^i)^-1
    zu = f.inv(u)
    zq = f.inv(q)
    # sum_i w_i zq^{i s}: chirp with ratio zq, then scale by zu^s
    tri = _tri_powers(f, zq, 2 * n + 1)
    tri_inv = f.inv_array(tri)
    b = f.zeros(n)
    for i in range(n):
        b[i] = int(weights[i]) * int(tri_inv[i]) % f.p
    c = f.conv(f.arr(np.asarray(b)[::-1]), tri)
    series = f.zeros(n)
    zupow = zu
    for t in range(n):  # s = t + 1
        s = t + 1
        sigma = int(c[s + n - 1]) * int(tri_inv[s]) % f.p * zupow % f.p
        series[t] = (f.p - sigma) % f.p
        zupow = zupow * zu % f.p
    return trim(f, f.conv(master, series)[:n])
