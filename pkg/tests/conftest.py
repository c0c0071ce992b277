"""Shared randomized-instance builders for the test suite."""

import numpy as np
import pytest

from dispmat.field import BENCH_PRIME, DEFAULT_PRIME, get_field
from dispmat.generators import Generator
from dispmat.operators import STEIN, SYLVESTER, DisplacementOperator, op_invertible
from dispmat.poly import family_build

TINY_PRIME = 7


@pytest.fixture(scope="session")
def f():
    return get_field(DEFAULT_PRIME)


@pytest.fixture(scope="session", params=[DEFAULT_PRIME, TINY_PRIME],
                ids=["default", "tiny"])
def any_field(request):
    return get_field(request.param)


@pytest.fixture(scope="session")
def f62():
    return get_field(BENCH_PRIME)


def rand_monic(f, rng, deg):
    c = f.arr(rng.integers(0, f.p, size=deg + 1))
    c[deg] = 1
    return c


def rand_family(f, rng, total, max_blocks=3):
    """Random monic pairwise-coprime family of the given total degree."""
    while True:
        blocks = int(rng.integers(1, min(max_blocks, total) + 1))
        if blocks > 1:
            cuts = sorted(rng.choice(range(1, total), size=blocks - 1,
                                     replace=False).tolist())
        else:
            cuts = []
        degs = np.diff([0, *cuts, total])
        try:
            return family_build(f, [rand_monic(f, rng, int(d)) for d in degs])
        except ValueError:
            continue


def rand_operator(f, rng, m, n, kind=None, basic=False):
    """Random invertible operator; all four transpose variants unless basic."""
    while True:
        k = kind if kind is not None else (SYLVESTER, STEIN)[int(rng.integers(2))]
        tp, tq = (False, True) if basic else (bool(rng.integers(2)),
                                              bool(rng.integers(2)))
        op = DisplacementOperator(k, rand_family(f, rng, m),
                                  rand_family(f, rng, n), tp, tq)
        if op_invertible(op):
            return op


def rand_generator(f, rng, op, alpha):
    return Generator(f.arr(rng.integers(0, f.p, size=(op.m, alpha))),
                     f.arr(rng.integers(0, f.p, size=(op.n, alpha))), op)
