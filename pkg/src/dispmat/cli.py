"""Command-line driver: instance generation, mul/inv/solve runs, benchmark
tables, and a simultaneous Padé-type approximation demo.

Instances travel as JSON with every field element rendered as a decimal
string (the 62-bit prime does not fit in double-precision JSON numbers).
Exit codes: 0 ok, 1 verification mismatch, 2 bad input, 3 failure tag.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import oracle
from .field import NAMED_PRIMES, PrimeField, get_field
from .generators import (
    Generator,
    gen_from_dict,
    gen_matvec,
    gen_to_dict,
    reconstruct_dense,
)
from .operators import (
    STEIN,
    SYLVESTER,
    DisplacementOperator,
    SingularOperator,
    op_invertible,
)
from .poly import (
    NotCoprime,
    PolyFamily,
    as_poly,
    degree,
    family_build,
    is_zero,
    poly_add,
    poly_gcd,
    poly_mod,
    poly_mul,
    poly_neg,
    poly_scale,
    poly_shift,
    poly_sub,
    trim,
    xgcd,
)
from .structmul import struct_mul
from .structsolve import FAILURE, NO_SOLUTION, OK, inv_generator, solve_generator

__all__ = [
    "InfeasibleSpec",
    "BadDegreeProfile",
    "InstanceFile",
    "PadeInstance",
    "draw_family",
    "draw_operator",
    "pade_generator",
    "pade_solve",
    "plant_pade",
    "cmd_gen",
    "cmd_run",
    "cmd_bench",
    "cmd_pade",
    "build_parser",
    "main",
    "EXIT_OK",
    "EXIT_VERIFY",
    "EXIT_BAD_INPUT",
    "EXIT_FAILURE",
]

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_BAD_INPUT = 2
EXIT_FAILURE = 3

# m*n cap for --verify dense cross-checks (the oracle's own generic limit).
VERIFY_LIMIT = oracle.GENERIC_SOLVE_LIMIT

_DRAW_TRIES = 64

TASKS = ("mul", "inv", "solve")
RHS_MODES = ("planted", "random", "zero", "inconsistent")
FLAVORS = ("general", "single_power", "geometric")


class InfeasibleSpec(ValueError):
    """Generation parameters that cannot be satisfied."""


class BadDegreeProfile(ValueError):
    """Padé degree bounds incompatible with the moduli."""


# ---------------------------------------------------------------------------
# JSON plumbing (decimal strings throughout)


def _mat_json(a: np.ndarray) -> list:
    return [[str(int(x)) for x in row] for row in a]


def _mat_parse(f: PrimeField, rows) -> np.ndarray:
    return f.arr(np.asarray([[int(x) for x in r] for r in rows], dtype=object))


def _vec_json(v: np.ndarray) -> list:
    return [str(int(x)) for x in v]


def _vec_parse(f: PrimeField, v) -> np.ndarray:
    return f.arr([int(x) for x in v])


def _dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _resolve_prime(spec: str) -> int:
    p = NAMED_PRIMES.get(spec)
    return int(spec) if p is None else p


@dataclass
class InstanceFile:
    """One self-contained problem instance.

    Carries the prime, the operator descriptor with flavor-tagged families,
    the generator columns, and the task payload (B for mul, b for solve).
    """

    prime: int
    seed: int
    task: str
    generator: Generator
    B: np.ndarray | None = None
    b: np.ndarray | None = None

    def to_json(self) -> str:
        doc = {"prime": str(self.prime), "seed": str(self.seed), "task": self.task}
        doc.update(gen_to_dict(self.generator))
        if self.B is not None:
            doc["B"] = _mat_json(self.B)
        if self.b is not None:
            doc["b"] = _vec_json(self.b)
        return _dump(doc)

    @staticmethod
    def from_json(text: str) -> "InstanceFile":
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ValueError("instance file is not a JSON object")
        f = get_field(int(doc["prime"]))
        gen = gen_from_dict(f, doc)
        B = _mat_parse(f, doc["B"]) if "B" in doc else None
        b = _vec_parse(f, doc["b"]) if "b" in doc else None
        return InstanceFile(f.p, int(doc.get("seed", "0")), doc.get("task", ""), gen, B, b)


@dataclass
class PadeInstance:
    """Simultaneous approximation instance: moduli P_i, residues R_{i,j},
    and per-component degree bounds n_j (solutions have deg f_j < n_j)."""

    prime: int
    seed: int
    moduli: list
    residues: list
    bounds: list

    def to_json(self) -> str:
        doc = {
            "task": "pade",
            "prime": str(self.prime),
            "seed": str(self.seed),
            "moduli": [_vec_json(P) for P in self.moduli],
            "residues": [[_vec_json(R) for R in row] for row in self.residues],
            "bounds": [str(int(n)) for n in self.bounds],
        }
        return _dump(doc)

    @staticmethod
    def from_json(text: str) -> "PadeInstance":
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ValueError("instance file is not a JSON object")
        f = get_field(int(doc["prime"]))
        moduli = [_vec_parse(f, P) for P in doc["moduli"]]
        residues = [[_vec_parse(f, R) for R in row] for row in doc["residues"]]
        bounds = [int(n) for n in doc["bounds"]]
        return PadeInstance(f.p, int(doc.get("seed", "0")), moduli, residues, bounds)


# ---------------------------------------------------------------------------
# random instance generation


def _rand_matrix(f: PrimeField, rng, rows: int, cols: int) -> np.ndarray:
    return f.arr(rng.integers(0, f.p, size=(rows, cols)))


def _rand_vector(f: PrimeField, rng, size: int) -> np.ndarray:
    return f.arr(rng.integers(0, f.p, size=size))


def _split_degrees(rng, total: int, max_blocks: int = 3) -> list[int]:
    parts = []
    left = total
    for _ in range(int(rng.integers(1, max_blocks + 1)) - 1):
        if left <= 1:
            break
        take = int(rng.integers(1, left))
        parts.append(take)
        left -= take
    parts.append(left)
    return parts


def draw_family(f: PrimeField, rng, total: int, flavor: str) -> PolyFamily:
    """Random monic family of the given total degree, per flavor."""
    if total < 1:
        raise InfeasibleSpec("family degree must be positive")
    if flavor == "single_power":
        coeffs = f.zeros(total + 1)
        coeffs[total] = 1
        coeffs[0] = f.neg(int(rng.integers(0, f.p)))
        return family_build(f, [coeffs])
    if flavor == "geometric":
        if total > f.p - 1:
            raise InfeasibleSpec(
                f"cannot place {total} distinct nonzero points mod {f.p}")
        if total == 1:
            pt = 1 + int(rng.integers(0, f.p - 1))
            return family_build(f, [[f.neg(pt), 1]])
        for _ in range(_DRAW_TRIES):
            u = 1 + int(rng.integers(0, f.p - 1))
            q = 1 + int(rng.integers(0, f.p - 1))
            pts, x = [], u
            for _ in range(total):
                pts.append(x)
                x = f.mul(x, q)
            if len(set(pts)) == total:
                return family_build(f, [[f.neg(pt), 1] for pt in pts])
        raise InfeasibleSpec(
            f"no geometric progression of length {total} found mod {f.p} "
            "(available ratios have small order)")
    if flavor != "general":
        raise InfeasibleSpec(f"unknown family flavor {flavor!r}")
    for _ in range(_DRAW_TRIES):
        degs = _split_degrees(rng, total)
        polys = []
        for k in degs:
            c = _rand_vector(f, rng, k + 1)
            c[k] = 1
            polys.append(c)
        try:
            return family_build(f, polys)
        except NotCoprime:
            continue
    raise InfeasibleSpec("could not draw a pairwise-coprime family")


def draw_operator(f: PrimeField, rng, m: int, n: int, kind: str, flavor: str,
                  transpose_p: bool, transpose_q: bool) -> DisplacementOperator:
    """Random invertible displacement operator of the given format."""
    for _ in range(_DRAW_TRIES):
        fam_p = draw_family(f, rng, m, flavor)
        fam_q = draw_family(f, rng, n, flavor)
        op = DisplacementOperator(kind, fam_p, fam_q, transpose_p, transpose_q)
        if op_invertible(op):
            return op
    raise InfeasibleSpec(
        f"no invertible {kind} operator found for flavor {flavor!r}")


def cmd_gen(args) -> int:
    f = get_field(_resolve_prime(args.prime))
    m = args.m
    n = args.n if args.n is not None else m
    alpha = args.alpha
    if m < 1 or n < 1:
        raise InfeasibleSpec("matrix format must be positive")
    if alpha < 1 or alpha > min(m, n):
        raise InfeasibleSpec(f"generator length {alpha} not in 1..min({m},{n})")
    if args.task == "inv" and m != n:
        raise InfeasibleSpec("inv instances must be square")
    rng = np.random.Generator(np.random.Philox(args.seed))
    op = draw_operator(f, rng, m, n, args.kind, args.flavor,
                       args.transpose_p, args.transpose_q)
    gen = Generator(_rand_matrix(f, rng, m, alpha), _rand_matrix(f, rng, n, alpha), op)
    B = b = None
    if args.task == "mul":
        if args.beta < 1:
            raise InfeasibleSpec("mul needs a positive block width")
        B = _rand_matrix(f, rng, n, args.beta)
    elif args.task == "solve":
        if args.rhs == "planted":
            b = gen_matvec(gen, _rand_vector(f, rng, n))
        elif args.rhs == "random":
            b = _rand_vector(f, rng, m)
        elif args.rhs == "zero":
            b = f.zeros(m)
        else:  # inconsistent
            if m <= n:
                raise InfeasibleSpec("inconsistent instances need m > n")
            if m * n > VERIFY_LIMIT:
                raise InfeasibleSpec("inconsistent instances need the dense check")
            A = reconstruct_dense(gen)
            for _ in range(_DRAW_TRIES):
                b = _rand_vector(f, rng, m)
                if oracle.dense_solve(f, A, b) is None:
                    break
            else:
                raise InfeasibleSpec("matrix has full row rank; every b is consistent")
    inst = InstanceFile(f.p, args.seed, args.task, gen, B, b)
    _emit(args, inst.to_json())
    return EXIT_OK


# ---------------------------------------------------------------------------
# running instances


def _dense_from_generator(gen: Generator) -> np.ndarray | None:
    """Oracle-side reconstruction, None when out of the brute-force range."""
    f = gen.field
    if gen.m * gen.n > VERIFY_LIMIT:
        return None
    try:
        return oracle.dense_solve_displacement(
            gen.operator, oracle.dense_mul(f, gen.G, gen.H.T))
    except (oracle.SizeLimit, SingularOperator):
        return None


def _verify_run(inst: InstanceFile, task: str, tag: str, result) -> str:
    f = inst.generator.field
    A = _dense_from_generator(inst.generator)
    if A is None or tag == FAILURE:
        return "skipped"
    if task == "mul":
        good = np.array_equal(oracle.dense_mul(f, A, inst.B), result)
    elif task == "inv":
        if tag == OK:
            Ainv = _dense_from_generator(result)
            if Ainv is None:
                return "skipped"
            eye = f.arr(np.eye(inst.generator.m, dtype=object))
            good = np.array_equal(oracle.dense_mul(f, A, Ainv), eye)
        else:  # singular
            good = oracle.dense_rank(f, A) < inst.generator.m
    else:  # solve
        if tag == OK:
            good = np.array_equal(
                oracle.dense_mul(f, A, result.reshape(-1, 1)).reshape(-1), inst.b)
        else:  # no_solution
            good = oracle.dense_solve(f, A, inst.b) is None
    return "ok" if good else "mismatch"


def cmd_run(args) -> int:
    with open(args.instance) as fh:
        inst = InstanceFile.from_json(fh.read())
    task = args.task or inst.task
    if task not in TASKS:
        raise ValueError(f"task {task!r} is not one of {TASKS}")
    seed = args.seed if args.seed is not None else inst.seed
    gen = inst.generator
    tag = OK
    result = None
    payload: dict = {}
    t0 = time.perf_counter_ns()
    if task == "mul":
        if inst.B is None:
            raise ValueError("instance carries no B block for mul")
        result = struct_mul(gen, inst.B)
        payload["product"] = _mat_json(result)
    elif task == "inv":
        res = inv_generator(gen, rng_seed=seed)
        tag = res.status
        if res.ok:
            result = res.generator
            payload["inverse_generator"] = gen_to_dict(result)
    else:
        if inst.b is None:
            raise ValueError("instance carries no right-hand side for solve")
        res = solve_generator(gen, inst.b, rng_seed=seed)
        tag = res.status
        if res.ok:
            result = res.x
            payload["x"] = _vec_json(result)
    wall_ns = time.perf_counter_ns() - t0

    verified = _verify_run(inst, task, tag, result) if args.verify else None
    doc = {
        "task": task,
        "tag": tag,
        "prime": str(gen.field.p),
        "m": gen.m,
        "n": gen.n,
        "alpha": gen.alpha,
        "seed": str(seed),
        "wall_ns": str(wall_ns),
        "verified": verified,
    }
    doc.update(payload)
    text = _dump(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    if args.json:
        sys.stdout.write(text)
    else:
        line = f"{task}: tag={tag}"
        if verified is not None:
            line += f" verified={verified}"
        print(line)
    if verified == "mismatch":
        return EXIT_VERIFY
    if tag == FAILURE:
        return EXIT_FAILURE
    return EXIT_OK


# ---------------------------------------------------------------------------
# benchmarks


def _binomial_operator(f: PrimeField, rng, m: int, n: int) -> DisplacementOperator:
    """Toeplitz-like Sylvester operator from two distinct power binomials."""
    phi1 = int(rng.integers(0, f.p))
    phi2 = int(rng.integers(0, f.p))
    while phi2 == phi1:
        phi2 = int(rng.integers(0, f.p))
    P = f.zeros(m + 1)
    P[0], P[m] = f.neg(phi1), 1
    Q = f.zeros(n + 1)
    Q[0], Q[n] = f.neg(phi2), 1
    return DisplacementOperator(SYLVESTER, family_build(f, [P]), family_build(f, [Q]))


def _bench_row(f: PrimeField, task: str, m: int, alpha: int, beta: int, seed: int):
    rng = np.random.Generator(np.random.Philox(seed))
    op = _binomial_operator(f, rng, m, m)
    gen = Generator(_rand_matrix(f, rng, m, alpha), _rand_matrix(f, rng, m, alpha), op)
    if task == "mul":
        B = _rand_matrix(f, rng, m, beta)
        t0 = time.perf_counter_ns()
        out = struct_mul(gen, B)
        wall = time.perf_counter_ns() - t0
        j = int(rng.integers(0, beta))
        good = np.array_equal(out[:, j], gen_matvec(gen, B[:, j]))
        return wall, good, beta
    if task == "inv":
        t0 = time.perf_counter_ns()
        res = inv_generator(gen, rng_seed=seed)
        wall = time.perf_counter_ns() - t0
        good = False
        if res.ok:
            r = _rand_vector(f, rng, m)
            good = np.array_equal(gen_matvec(gen, gen_matvec(res.generator, r)), r)
        return wall, good, 0
    x0 = _rand_vector(f, rng, m)
    b = gen_matvec(gen, x0)
    t0 = time.perf_counter_ns()
    res = solve_generator(gen, b, rng_seed=seed)
    wall = time.perf_counter_ns() - t0
    good = res.ok and np.array_equal(gen_matvec(gen, res.x), b)
    return wall, good, 1


def cmd_bench(args) -> int:
    f = get_field(_resolve_prime(args.prime))
    sizes = [int(s) for s in args.sizes.split(",") if s]
    alphas = [int(a) for a in args.alphas.split(",") if a]
    if not sizes or not alphas or args.reps < 1:
        raise InfeasibleSpec("empty benchmark ladder")
    rows = []
    idx = 0
    for m in sizes:
        for alpha in alphas:
            if alpha > m:
                raise InfeasibleSpec(f"generator length {alpha} exceeds size {m}")
            for _ in range(args.reps):
                seed = args.seed * 1_000_003 + idx
                idx += 1
                wall, good, beta = _bench_row(f, args.task, m, alpha, args.beta, seed)
                rows.append((args.task, m, m, alpha, beta, seed, wall,
                             "true" if good else "false"))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[4], r[5]))
    buf = sys.stdout if not args.out else open(args.out, "w", newline="")
    try:
        w = csv.writer(buf)
        w.writerow(["task", "m", "n", "alpha", "beta", "seed", "wall_ns", "verified"])
        w.writerows(rows)
    finally:
        if args.out:
            buf.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# simultaneous Padé-type approximation
#
# Unknowns are the stacked coefficients of (f_1, ..., f_alpha) with
# deg f_j < n_j; the system matrix maps them to the stacked residues of
# sum_j f_j R_{i,j} mod P_i.  Column (j, t) holds x^t R_{i,j} mod P_i, so
# under the Stein operator with Q_1 = x^N - phi all columns except the
# alpha block boundaries cancel: the generator has length exactly alpha.


def _fixed_len(f: PrimeField, a: np.ndarray, k: int) -> np.ndarray:
    out = f.zeros(k)
    out[: len(a)] = a
    return out


def _poly_modinv(f: PrimeField, a: np.ndarray, P: np.ndarray) -> np.ndarray:
    g, s, _ = xgcd(f, a, P)
    if degree(g) != 0:
        raise NotCoprime(f"polynomial is not invertible modulo a degree-"
                         f"{degree(P)} modulus")
    return poly_mod(f, s, P)


def pade_generator(fam: PolyFamily, residues, bounds: list[int], phi: int) -> Generator:
    """Length-alpha generator of the approximation matrix under the Stein
    operator paired with the single binomial x^N - phi."""
    f = fam.field
    alpha = len(bounds)
    N = sum(bounds)
    Q = f.zeros(N + 1)
    Q[0], Q[N] = f.neg(phi), 1
    op = DisplacementOperator(STEIN, fam, family_build(f, [Q]))
    red = [[poly_mod(f, as_poly(f, R), fam.polys[i]) for R in residues[i]]
           for i in range(len(fam))]
    G = f.zeros((fam.total_degree, alpha))
    H = f.zeros((N, alpha))
    pos = 0
    for j in range(alpha):
        H[pos, j] = 1
        pos += bounds[j]
        prev = j - 1 if j else alpha - 1
        for i, (s, k, P) in enumerate(zip(fam.offsets, fam.degrees, fam.polys)):
            carry = poly_shift(f, red[i][prev], bounds[prev])
            if j == 0:
                carry = poly_scale(f, phi, carry)
            G[s: s + k, j] = _fixed_len(f, poly_mod(f, poly_sub(f, red[i][j], carry), P), k)
    return Generator(G, H, op)


def _check_profile(fam: PolyFamily, residues, bounds) -> None:
    alpha = len(bounds)
    if alpha < 1 or any(n < 1 for n in bounds):
        raise BadDegreeProfile(f"degree bounds must be positive, got {bounds}")
    if len(residues) != len(fam) or any(len(row) != alpha for row in residues):
        raise BadDegreeProfile(
            f"residue table must be {len(fam)}x{alpha} to match moduli and bounds")
    if sum(bounds) < fam.total_degree:
        raise BadDegreeProfile(
            f"total bound {sum(bounds)} below the moduli degree {fam.total_degree}: "
            "the system is tall")


def _residues_vanish(fam: PolyFamily, residues, parts: list[np.ndarray]) -> bool:
    f = fam.field
    for i, P in enumerate(fam.polys):
        acc = f.zeros(0)
        for fj, R in zip(parts, residues[i]):
            acc = poly_mod(f, poly_add(f, acc, poly_mul(f, fj, R)), P)
        if not is_zero(trim(f, acc)):
            return False
    return True


def pade_solve(f: PrimeField, moduli, residues, bounds, seed: int = 0,
               retries: int = 6) -> dict:
    """Nonzero (f_1, ..., f_alpha) with sum_j f_j R_{i,j} = 0 mod P_i and
    deg f_j < n_j, or a no_solution / failure tag."""
    fam = family_build(f, moduli)
    _check_profile(fam, residues, bounds)
    m, N = fam.total_degree, sum(bounds)
    rng = np.random.Generator(np.random.Philox(seed))
    for attempt in range(1, retries + 1):
        phi = int(rng.integers(0, f.p))
        gen = pade_generator(fam, residues, bounds, phi)
        if not op_invertible(gen.operator):
            continue
        res = solve_generator(gen, f.zeros(m), rng_seed=int(rng.integers(0, 1 << 62)))
        if res.status == FAILURE:
            continue
        x = res.x
        if not np.any(x != 0):
            return {"tag": NO_SOLUTION, "attempts": attempt}
        parts = []
        pos = 0
        for n in bounds:
            parts.append(trim(f, x[pos: pos + n]))
            pos += n
        if not _residues_vanish(fam, residues, parts):
            continue
        return {"tag": OK, "f": parts, "phi": phi,
                "generator_length": gen.alpha, "attempts": attempt}
    return {"tag": FAILURE, "attempts": retries}


def plant_pade(f: PrimeField, bounds, block_degrees=None, moduli=None,
               seed: int = 0) -> PadeInstance:
    """Instance with a planted solution: draw the f_j, draw all residues but
    the first column, then solve the first column from the relation (needs
    f_1 invertible modulo every P_i)."""
    bounds = [int(n) for n in bounds]
    if not bounds or any(n < 1 for n in bounds):
        raise BadDegreeProfile(f"degree bounds must be positive, got {bounds}")
    rng = np.random.Generator(np.random.Philox(seed))
    if moduli is not None:
        fam = family_build(f, moduli)
    else:
        if not block_degrees or any(k < 1 for k in block_degrees):
            raise BadDegreeProfile("moduli degrees must be positive")
        for _ in range(_DRAW_TRIES):
            polys = []
            for k in block_degrees:
                c = _rand_vector(f, rng, k + 1)
                c[k] = 1
                polys.append(c)
            try:
                fam = family_build(f, polys)
                break
            except NotCoprime:
                continue
        else:
            raise InfeasibleSpec("could not draw pairwise-coprime moduli")
    if sum(bounds) < fam.total_degree:
        raise BadDegreeProfile(
            f"total bound {sum(bounds)} below the moduli degree {fam.total_degree}")
    for _ in range(_DRAW_TRIES):
        f1 = trim(f, _rand_vector(f, rng, bounds[0]))
        if not is_zero(f1) and degree(poly_gcd(f, f1, fam.product)) == 0:
            break
    else:
        raise InfeasibleSpec("could not plant a leading component invertible "
                             "modulo the product of moduli")
    parts = [f1] + [trim(f, _rand_vector(f, rng, n)) for n in bounds[1:]]
    residues = []
    for k, P in zip(fam.degrees, fam.polys):
        tail = [trim(f, _rand_vector(f, rng, k)) for _ in bounds[1:]]
        acc = f.zeros(0)
        for fj, R in zip(parts[1:], tail):
            acc = poly_mod(f, poly_add(f, acc, poly_mul(f, fj, R)), P)
        head = poly_mod(f, poly_mul(f, poly_neg(f, acc), _poly_modinv(f, f1, P)), P)
        residues.append([head] + tail)
    return PadeInstance(f.p, seed, [np.asarray(P) for P in fam.polys], residues, bounds)


def cmd_pade(args) -> int:
    if args.plant:
        f = get_field(_resolve_prime(args.prime))
        if args.bounds:
            bounds = [int(s) for s in args.bounds.split(",") if s]
        else:
            bounds = _near_split(args.total_degree + 1, args.alpha)
        if args.block_degrees:
            degs = [int(s) for s in args.block_degrees.split(",") if s]
        else:
            degs = _near_split(args.total_degree, args.d)
        inst = plant_pade(f, bounds, block_degrees=degs, seed=args.seed)
        _emit(args, inst.to_json())
        return EXIT_OK
    if not args.instance:
        raise ValueError("pade needs --instance FILE (or --plant)")
    with open(args.instance) as fh:
        inst = PadeInstance.from_json(fh.read())
    f = get_field(inst.prime)
    seed = args.seed if args.seed is not None else inst.seed
    out = pade_solve(f, inst.moduli, inst.residues, inst.bounds, seed=seed)
    doc = {
        "task": "pade",
        "tag": out["tag"],
        "prime": str(f.p),
        "attempts": out["attempts"],
    }
    if out["tag"] == OK:
        doc["f"] = [_vec_json(fj) for fj in out["f"]]
        doc["phi"] = str(out["phi"])
        doc["generator_length"] = out["generator_length"]
    text = _dump(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    if args.json:
        sys.stdout.write(text)
    else:
        print(f"pade: tag={out['tag']}")
    return EXIT_FAILURE if out["tag"] == FAILURE else EXIT_OK


def _near_split(total: int, parts: int) -> list[int]:
    if parts < 1 or total < parts:
        raise BadDegreeProfile(f"cannot split degree {total} into {parts} parts")
    base, extra = divmod(total, parts)
    return [base + (i < extra) for i in range(parts)]


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="dispmat",
        description="Structured matrices with small displacement rank over F_p.")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="randomness seed (default: the instance's)")
        p.add_argument("--json", action="store_true", help="JSON on stdout")
        p.add_argument("--out", help="write the result file here")
        p.add_argument("--prime", default="default",
                       help="'default', 'p62', or a prime as a decimal literal")

    g = sub.add_parser("gen", help="generate a random instance file")
    common(g)
    g.set_defaults(func=cmd_gen, seed=0)
    g.add_argument("--task", choices=TASKS, default="mul")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, default=None, help="defaults to m")
    g.add_argument("--alpha", type=int, default=2)
    g.add_argument("--beta", type=int, default=2, help="mul block width")
    g.add_argument("--kind", choices=(SYLVESTER, STEIN), default=SYLVESTER)
    g.add_argument("--flavor", choices=FLAVORS, default="general")
    g.add_argument("--transpose-p", action=argparse.BooleanOptionalAction, default=False)
    g.add_argument("--transpose-q", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("--rhs", choices=RHS_MODES, default="planted",
                   help="right-hand-side style for solve instances")

    r = sub.add_parser("run", help="run a task on an instance file")
    common(r)
    r.set_defaults(func=cmd_run)
    r.add_argument("--instance", required=True)
    r.add_argument("--task", choices=TASKS, default=None,
                   help="defaults to the instance's task field")
    r.add_argument("--verify", action="store_true",
                   help="cross-check against the dense oracle (within its limits)")

    b = sub.add_parser("bench", help="timing table as CSV")
    common(b)
    b.set_defaults(func=cmd_bench, seed=1)
    b.add_argument("--task", choices=TASKS, default="mul")
    b.add_argument("--sizes", default="256,512,1024", help="comma-separated m ladder")
    b.add_argument("--alphas", default="8", help="comma-separated generator lengths")
    b.add_argument("--beta", type=int, default=8)
    b.add_argument("--reps", type=int, default=3)

    d = sub.add_parser("pade", help="simultaneous Padé-type approximation")
    common(d)
    d.set_defaults(func=cmd_pade)
    d.add_argument("--instance", help="instance file with moduli/residues/bounds")
    d.add_argument("--plant", action="store_true",
                   help="emit a planted instance instead of solving one")
    d.add_argument("--d", type=int, default=1, help="number of moduli (plant)")
    d.add_argument("--alpha", type=int, default=2, help="number of components (plant)")
    d.add_argument("--total-degree", type=int, default=8,
                   help="total moduli degree (plant)")
    d.add_argument("--bounds", help="comma-separated degree bounds (plant)")
    d.add_argument("--block-degrees", help="comma-separated moduli degrees (plant)")
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
