"""Nullspaces of integer/rational matrices: modular screening, exact solving.

The modular rank of an integer matrix never exceeds its rational rank, so a
trivial nullspace modulo any prime certifies a trivial nullspace over Q.
Only when the modular nullspace is nontrivial do we pay for exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import flint
import numpy as np

# fixed so every run is reproducible; override per call for testing
DEFAULT_SCREEN_PRIME = 2147483587
DEFAULT_RECHECK_PRIME = 2147483563


def integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    """Clear denominators row by row (row scaling leaves the nullspace alone)."""
    out = []
    for row in rows:
        den = 1
        for v in row:
            if isinstance(v, Fraction) and v.denominator != 1:
                den = math.lcm(den, v.denominator)
        if den == 1:
            out.append([int(v) for v in row])
        else:
            out.append([int(v * den) for v in row])
    return out


def reduce_mod(value, p: int) -> int:
    """Image of an exact rational in GF(p); the denominator must be a unit."""
    if isinstance(value, Fraction):
        return value.numerator * pow(value.denominator, -1, p) % p
    return int(value) % p


@dataclass
class ModularProfile:
    prime: int
    rank: int
    pivot_rows: list[int]
    pivot_cols: list[int]
    nullspace: list[np.ndarray]

    @property
    def nullity(self) -> int:
        return len(self.nullspace)


def nullspace_mod_p(A: np.ndarray, p: int) -> ModularProfile:
    """Reduced row echelon form of ``A`` (residues in ``[0, p)``, ``p < 2**31``)."""
    A = np.array(A, dtype=np.int64) % p
    m, c = A.shape
    rows = np.arange(m)
    r = 0
    pivot_cols = []
    for col in range(c):
        if r == m:
            break
        nz = np.flatnonzero(A[r:, col])
        if nz.size == 0:
            continue
        i = r + nz[0]
        if i != r:
            A[[r, i]] = A[[i, r]]
            rows[[r, i]] = rows[[i, r]]
        A[r, col:] = A[r, col:] * pow(int(A[r, col]), -1, p) % p
        factors = A[:, col].copy()
        factors[r] = 0
        hit = np.flatnonzero(factors)
        if hit.size:
            A[hit, col:] = (A[hit, col:] - factors[hit, None] * A[r, col:] % p) % p
        pivot_cols.append(col)
        r += 1
    free = [j for j in range(c) if j not in set(pivot_cols)]
    basis = []
    for f in free:
        v = np.zeros(c, dtype=np.int64)
        v[f] = 1
        for i, pc in enumerate(pivot_cols):
            v[pc] = (-A[i, f]) % p
        basis.append(v)
    return ModularProfile(p, r, sorted(int(x) for x in rows[:r]), pivot_cols, basis)


def rank_mod_p_flint(int_rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank over GF(p) computed by FLINT; an independent route from :func:`nullspace_mod_p`."""
    m = len(int_rows)
    c = len(int_rows[0]) if m else 0
    if m == 0 or c == 0:
        return 0
    flat = [int(v) % p for row in int_rows for v in row]
    return flint.nmod_mat(m, c, flat, p).rank()


def primitive(vec: Sequence[int]) -> list[int]:
    """Divide out the content; make the first nonzero entry positive."""
    g = 0
    for v in vec:
        g = math.gcd(g, int(v))
    if g == 0:
        return [0] * len(vec)
    out = [int(v) // g for v in vec]
    lead = next(v for v in out if v)
    return out if lead > 0 else [-v for v in out]


def nullspace_exact(int_rows: Sequence[Sequence[int]], ncols: int | None = None) -> list[list[int]]:
    """Integer basis of the rational nullspace (FLINT fraction-free RREF)."""
    m = len(int_rows)
    c = ncols if ncols is not None else len(int_rows[0])
    if m == 0:
        return [[int(i == j) for i in range(c)] for j in range(c)]
    M = flint.fmpz_mat(m, c, [int(v) for row in int_rows for v in row])
    basis, nullity = M.nullspace()
    cols = []
    for j in range(nullity):
        cols.append(primitive([int(basis[i, j]) for i in range(c)]))
    return cols


def apply(int_rows: Sequence[Sequence[int]], vec: Sequence[int]) -> list[int]:
    return [sum(a * b for a, b in zip(row, vec)) for row in int_rows]


def exact_nullspace_via_screen(
    int_rows: Sequence[Sequence[int]], prime: int = DEFAULT_SCREEN_PRIME
) -> tuple[ModularProfile, list[list[int]]]:
    """Modular screen first; exact nullspace only if the screen finds one.

    The exact solve runs on the rows the modular elimination pivoted on (a
    maximal independent set mod p), and each basis vector is then checked
    against every row. A failed check means the prime was unlucky, and the
    whole matrix is solved exactly instead.
    """
    A = np.array([[v % prime for v in row] for row in int_rows], dtype=np.int64)
    profile = nullspace_mod_p(A, prime)
    if profile.nullity == 0:
        return profile, []
    c = len(int_rows[0])
    sub = [int_rows[i] for i in profile.pivot_rows]
    basis = nullspace_exact(sub, c)
    if all(not any(apply(int_rows, v)) for v in basis):
        return profile, basis
    return profile, nullspace_exact(int_rows, c)
