"""Structured matrices with small displacement rank over prime fields.

Matrices are handled through compact generators of their displacement
(Sylvester or Stein) under companion-matrix operators built from families
of pairwise-coprime monic polynomials. The package provides quasi-linear
multiplication of such matrices by dense blocks, randomized inversion and
linear-system solving, dense reference oracles, and a command-line driver.
"""

from .field import PrimeField, get_field, DEFAULT_PRIME, BENCH_PRIME, ZeroInverse

__version__ = "0.1.0"

__all__ = [
    "PrimeField",
    "get_field",
    "DEFAULT_PRIME",
    "BENCH_PRIME",
    "ZeroInverse",
    "__version__",
]
