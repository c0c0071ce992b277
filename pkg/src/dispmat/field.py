"""Word-size prime field arithmetic with vectorized numpy kernels.

Scalars are canonical Python ints in [0, p); bulk data lives in numpy
arrays (int64 when products of two residues fit in a signed 64-bit word,
Python-object arrays otherwise, e.g. for the 62-bit benchmark prime).
The number-theoretic transform (NTT) operates along the last axis of an
array of any shape, which lets polynomial-matrix code batch thousands of
transforms into a handful of numpy calls.
"""

from __future__ import annotations

import functools
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ZeroInverse",
    "PrimeField",
    "DEFAULT_PRIME",
    "BENCH_PRIME",
    "NAMED_PRIMES",
    "get_field",
]

# 119 * 2^23 + 1, primitive root 3; the classic FFT prime just under 2^30.
DEFAULT_PRIME = 998244353
# 1073741806 * 2^32 + 1 (62 bits, two-adicity 33, primitive root 3); used
# for large-instance benchmarks where coefficient growth matters.
BENCH_PRIME = 4611685941117976577

NAMED_PRIMES = {"default": DEFAULT_PRIME, "p62": BENCH_PRIME}

# int64 products a*b with a,b < 2^31.5 stay below 2^63; primes above this
# bound switch to exact Python-int (object dtype) arithmetic.
_INT64_SAFE_BOUND = 3_037_000_499

# below this output length, limb-split np.convolve wins over the transform
_SPLIT_CONV_CUTOFF = 1024

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class ZeroInverse(ZeroDivisionError):
    """Raised when inverting 0 (or a multiple of p)."""


def _is_probable_prime(n: int) -> bool:
    # deterministic Miller-Rabin for n < 3.3 * 10^24 with the fixed witness set
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _factorize(n: int) -> list[int]:
    """Distinct prime factors by trial division (fine for the sizes we see)."""
    out = []
    q = 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1 if q == 2 else 2
    if n > 1:
        out.append(n)
    return out


class PrimeField:
    """Arithmetic context for F_p.

    Instances are cheap to create and hashable by modulus; NTT twiddle
    tables are cached per (field, size).
    """

    def __init__(self, p: int):
        if p < 2 or not _is_probable_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        self.p = p
        self.dtype = np.int64 if p <= _INT64_SAFE_BOUND else object
        d = p - 1
        t = 0
        while d % 2 == 0:
            d //= 2
            t += 1
        self.two_adicity = t
        self._generator: int | None = {DEFAULT_PRIME: 3, BENCH_PRIME: 3}.get(p)
        self._root_cache: dict[tuple[int, bool], np.ndarray] = {}
        self._rev_cache: dict[int, np.ndarray] = {}

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("PrimeField", self.p))

    # -- scalar ops ---------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroInverse(f"0 is not invertible mod {self.p}")
        return pow(a, self.p - 2, self.p)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a % self.p, e, self.p)

    @property
    def generator(self) -> int:
        """A generator of the multiplicative group F_p^*."""
        if self._generator is None:
            factors = _factorize(self.p - 1)
            g = 2
            while True:
                if all(pow(g, (self.p - 1) // q, self.p) != 1 for q in factors):
                    self._generator = g
                    break
                g += 1
        return self._generator

    # -- array helpers ------------------------------------------------------

    def arr(self, values: Iterable[int] | np.ndarray) -> np.ndarray:
        """Canonical residue array (always a fresh copy)."""
        if self.dtype is object:
            a = np.array([int(v) % self.p for v in np.asarray(values, dtype=object).ravel()],
                         dtype=object)
            return a.reshape(np.asarray(values, dtype=object).shape)
        a = np.asarray(values)
        if a.dtype == object:
            a = np.array([int(v) for v in a.ravel()], dtype=np.int64).reshape(a.shape)
        return np.mod(a.astype(np.int64, copy=True), self.p)

    def zeros(self, shape) -> np.ndarray:
        if self.dtype is object:
            z = np.empty(shape, dtype=object)
            z[...] = 0
            return z
        return np.zeros(shape, dtype=np.int64)

    def inv_array(self, a: np.ndarray) -> np.ndarray:
        """Elementwise inverse via one modexp (prefix-product trick)."""
        flat = [int(v) for v in np.asarray(a).ravel()]
        n = len(flat)
        pref = [1] * (n + 1)
        for i, v in enumerate(flat):
            pref[i + 1] = pref[i] * v % self.p
        if pref[n] == 0:
            raise ZeroInverse("array contains a non-invertible entry")
        run = self.inv(pref[n])
        out = [0] * n
        for i in range(n - 1, -1, -1):
            out[i] = pref[i] * run % self.p
            run = run * flat[i] % self.p
        res = np.array(out, dtype=self.dtype)
        return res.reshape(np.asarray(a).shape)

    def mat_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Exact (a @ b) % p with overflow-safe accumulation blocks."""
        if self.dtype is object:
            return np.mod(np.asarray(a, dtype=object) @ np.asarray(b, dtype=object), self.p)
        k = a.shape[-1]
        # 8 summands of (p-1)^2 < 2^60 each stay below 2^63
        step = max(1, (1 << 63) // (self.p * self.p) - 1)
        if k <= step:
            return (a @ b) % self.p
        acc = (a[..., :step] @ b[..., :step, :]) % self.p
        for lo in range(step, k, step):
            acc = (acc + a[..., lo:lo + step] @ b[..., lo:lo + step, :]) % self.p
        return acc

    # -- number-theoretic transform ------------------------------------------

    def ntt_capacity(self) -> int:
        """Largest power-of-two transform length supported by this prime."""
        return 1 << self.two_adicity

    def _rev_idx(self, n: int) -> np.ndarray:
        idx = self._rev_cache.get(n)
        if idx is None:
            bits = n.bit_length() - 1
            idx = np.zeros(n, dtype=np.int64)
            for i in range(n):
                idx[i] = int(format(i, f"0{bits}b")[::-1], 2) if bits else 0
            self._rev_cache[n] = idx
        return idx

    def _twiddles(self, length: int, invert: bool) -> np.ndarray:
        key = (length, invert)
        tw = self._root_cache.get(key)
        if tw is None:
            w = self.pow(self.generator, (self.p - 1) // length)
            if invert:
                w = self.inv(w)
            half = length // 2
            pw = [1] * half
            for i in range(1, half):
                pw[i] = pw[i - 1] * w % self.p
            tw = np.array(pw, dtype=self.dtype)
            self._root_cache[key] = tw
        return tw

    def ntt(self, a: np.ndarray, invert: bool = False) -> np.ndarray:
        """In-order radix-2 NTT along the last axis (length must be a power
        of two within capacity). Works on arrays of any leading shape."""
        n = a.shape[-1]
        if n & (n - 1) or n > self.ntt_capacity():
            raise ValueError(f"transform length {n} unsupported for p={self.p}")
        out = np.array(a, dtype=self.dtype, copy=True)
        if n == 1:
            return out
        out = out[..., self._rev_idx(n)]
        length = 2
        while length <= n:
            half = length // 2
            tw = self._twiddles(length, invert)
            view = out.reshape(out.shape[:-1] + (n // length, length))
            lo = view[..., :half]
            hi = view[..., half:] * tw % self.p
            new_lo = (lo + hi) % self.p
            new_hi = (lo - hi) % self.p
            view[..., :half] = new_lo
            view[..., half:] = new_hi
            length *= 2
        if invert:
            n_inv = self.inv(n)
            out = out * n_inv % self.p
        return out

    def _conv_split16(self, a: np.ndarray, b: np.ndarray, need: int) -> np.ndarray:
        """Exact small convolution via a 16-bit limb split.

        Residues are < p <= sqrt(2**63), so every partial product fits an
        int64 and the three np.convolve calls beat the transform's per-call
        overhead on short inputs (and the Python-int fallback on any field
        whose p-1 lacks 2-adic room).
        """
        p = self.p
        a = np.asarray(a, dtype=np.int64) % p
        b = np.asarray(b, dtype=np.int64) % p
        ah, al = a >> 16, a & 0xFFFF
        bh, bl = b >> 16, b & 0xFFFF
        hh = np.convolve(ah, bh)
        ll = np.convolve(al, bl)
        mid = np.convolve(ah + al, bh + bl) - hh - ll
        s16 = (1 << 16) % p
        s32 = (1 << 32) % p
        res = ((hh % p) * s32 % p + (mid % p) * s16 % p + ll) % p
        return res[:need]

    def conv(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Linear convolution of two 1-D coefficient arrays, exactly mod p."""
        la, lb = len(a), len(b)
        if la == 0 or lb == 0:
            return self.zeros(0)
        need = la + lb - 1
        if self.dtype is not object and need <= _SPLIT_CONV_CUTOFF:
            return self._conv_split16(a, b, need)
        size = 1 << (need - 1).bit_length()
        if size <= self.ntt_capacity():
            fa = self.zeros(size)
            fb = self.zeros(size)
            fa[:la] = np.asarray(a, dtype=self.dtype) % self.p
            fb[:lb] = np.asarray(b, dtype=self.dtype) % self.p
            fa = self.ntt(fa)
            fb = self.ntt(fb)
            prod = fa * fb % self.p
            return self.ntt(prod, invert=True)[:need]
        return self._conv_exact(a, b)[:need]

    def _conv_exact(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Karatsuba/schoolbook fallback on Python ints (any size, any prime)."""
        xs = [int(v) for v in a]
        ys = [int(v) for v in b]
        res = _karatsuba(xs, ys)
        return np.array([v % self.p for v in res], dtype=self.dtype)


def _karatsuba(a: list[int], b: list[int]) -> list[int]:
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return []
    if min(n, m) <= 32:
        out = [0] * (n + m - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return out
    h = min(n, m) // 2
    a0, a1 = a[:h], a[h:]
    b0, b1 = b[:h], b[h:]
    z0 = _karatsuba(a0, b0)
    z2 = _karatsuba(a1, b1)
    s1 = [x + y for x, y in zip(a0, a1)] + list(a1[len(a0):] or a0[len(a1):])
    s2 = [x + y for x, y in zip(b0, b1)] + list(b1[len(b0):] or b0[len(b1):])
    z1 = _karatsuba(s1, s2)
    out = [0] * (n + m - 1)
    for i, v in enumerate(z0):
        out[i] += v
        out[i + h] -= v
    for i, v in enumerate(z1):
        out[i + h] += v
    for i, v in enumerate(z2):
        out[i + h] -= v
        out[i + 2 * h] += v
    return out


@functools.lru_cache(maxsize=32)
def get_field(p: int | str) -> PrimeField:
    """Shared field instance for a modulus or a named prime ('default', 'p62')."""
    if isinstance(p, str):
        try:
            p = NAMED_PRIMES[p]
        except KeyError:
            raise ValueError(f"unknown prime name {p!r}; use one of {sorted(NAMED_PRIMES)}")
    return PrimeField(int(p))
