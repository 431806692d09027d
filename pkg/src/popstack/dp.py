"""Counting overlapping ballots (equivalently, pop-stacked permutations).

``f_{c,d}(n)`` counts overlapping ballots of [n] whose last block has minimum
``c`` and maximum ``d``; ``g_{c,d}(n)`` is its two-dimensional prefix sum.
The production path never stores ``f_{c,d}``: each level's values are folded
straight into ``g`` and every later read is a rectangle difference of ``g``.

Level ``n`` of a :class:`PrefixTable` is an ``(n+1) x (n+1)`` slab stored
*transposed*, ``S[d, c] = g_{c,d}(n)``, with row and column 0 held at zero.
Transposition makes the innermost loop of the recurrence walk contiguous
memory.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numba
import numpy as np

from .errors import ResourceError
from .rings import ZZ, IntegerRing, PrimeField

SLOW_MAX_N = 60


def binomial_table(N: int, ring=ZZ) -> np.ndarray:
    """Pascal's triangle ``C[n, k]`` for ``0 <= k <= n <= N`` as ring elements."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    table = ring.zeros((N + 1, N + 1))
    for n in range(N + 1):
        table[n, 0] = ring.one
        for k in range(1, n + 1):
            table[n, k] = ring.add(table[n - 1, k - 1], table[n - 1, k])
    return table


# ---------------------------------------------------------------------------
# Reference path: the three-case recurrence, summed term by term.


def slow_f_tables(N: int, ring=ZZ, c_eq_d_upper: str = "n") -> list:
    """``f[n][c][d]`` for ``1 <= c, d <= n <= N`` by the unaccelerated recurrence.

    ``c_eq_d_upper`` selects the upper limit of ``b`` in the ``c = d`` case:
    ``"n"`` or ``"n-1"``. Both agree because ``f_{a,n}(n-1)`` is always zero.
    """
    if not 0 <= N <= SLOW_MAX_N:
        raise ValueError(f"reference recurrence is limited to N <= {SLOW_MAX_N}, got {N}")
    if c_eq_d_upper not in ("n", "n-1"):
        raise ValueError("c_eq_d_upper must be 'n' or 'n-1'")
    binom = binomial_table(N, ring)
    f: list = [[[ring.zero]]]

    def get(n, a, b):
        if n < 1 or a < 1 or b > n or a > b:
            return ring.zero
        return f[n][a][b]

    for n in range(1, N + 1):
        level = [[ring.zero] * (n + 1) for _ in range(n + 1)]
        for c in range(1, n + 1):
            for d in range(c, n + 1):
                value = ring.one if (c == 1 and d == n) else ring.zero
                if c == d:
                    upper = n if c_eq_d_upper == "n" else n - 1
                    for a in range(1, c):
                        for b in range(c, upper + 1):
                            value = ring.add(value, get(n - 1, a, b))
                else:
                    for ell in range(d - c):
                        m = n - ell - 2
                        inner = ring.zero
                        for a in range(1, d - ell - 1):
                            for b in range(c, m + 1):
                                inner = ring.add(inner, get(m, a, b))
                        value = ring.add(value, ring.mul(binom[d - c - 1, ell], inner))
                level[c][d] = value
        f.append(level)
    return f


def count_slow_reference(N: int, ring=ZZ, c_eq_d_upper: str = "n") -> list:
    f = slow_f_tables(N, ring, c_eq_d_upper)
    out = []
    for n in range(1, N + 1):
        total = ring.zero
        for a in range(1, n + 1):
            for b in range(a, n + 1):
                total = ring.add(total, f[n][a][b])
        out.append(total)
    return out


# ---------------------------------------------------------------------------
# Production path.


def level_offsets(N: int) -> np.ndarray:
    sizes = np.array([(n + 1) ** 2 for n in range(N + 1)], dtype=np.int64)
    return np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)


class PrefixTable:
    """All levels ``g(1..N)`` of the prefix-sum tensor in one flat buffer."""

    def __init__(self, N: int, ring=ZZ):
        self.N = N
        self.ring = ring
        self.offsets = level_offsets(N)
        try:
            self.flat = ring.zeros(int(self.offsets[-1]))
        except MemoryError as exc:
            raise ResourceError(f"cannot allocate prefix table for N={N}", N=N) from exc

    def level(self, n: int) -> np.ndarray:
        """Transposed slab ``S`` with ``S[d, c] = g_{c,d}(n)`` (a view)."""
        lo, hi = self.offsets[n], self.offsets[n + 1]
        return self.flat[lo:hi].reshape(n + 1, n + 1)

    def g(self, c: int, d: int, n: int):
        if c <= 0 or d <= 0 or n <= 0:
            return self.ring.zero
        c, d = min(c, n), min(d, n)
        return self.level(n)[d, c]

    def total(self, n: int):
        return self.g(n, n, n)

    def totals(self) -> list:
        return [self.ring.to_int(self.total(n)) for n in range(1, self.N + 1)]


def _binomial_rows(N: int, ring) -> np.ndarray:
    """``rows[l, t] = C(t + l, l)``, the coefficient pattern along one source level."""
    binom = binomial_table(N, ring)
    rows = ring.zeros((N + 1, N + 1))
    for ell in range(N + 1):
        for t in range(N + 1 - ell):
            rows[ell, t] = binom[t + ell, ell]
    return rows


def _numpy_level(n, src: PrefixTable, dst: PrefixTable, rows, diff, single, min_src):
    """Fill level ``n`` of ``dst`` from older levels of ``src`` using array ops."""
    ring = dst.ring
    f = ring.zeros((n + 1, n + 1))
    if single:
        f[1, n] = ring.one
    if n >= 2 and n - 1 >= min_src:
        S = src.level(n - 1)
        cp = np.arange(n)
        f[cp + 1, cp + 1] += ring.reduce(S[n - 1, cp] - S[cp, cp])
    for ell in range(n - 2):
        m = n - 2 - ell
        if m < min_src:
            break
        S = src.level(m)
        T = ring.reduce(S[m][None, :] - S)
        shift = diff[: m + 1, : m + 1]
        B = np.where(shift >= 0, rows[ell][np.clip(shift, 0, None)], 0)
        f[1 : m + 2, 2 + ell : n + 1] += ring.reduce(T * B)
    f = ring.reduce(f)
    g = ring.reduce(np.cumsum(ring.reduce(np.cumsum(f, axis=0)), axis=1))
    dst.level(n)[...] = g.T


U = numba.uint64


# Hot loops index with unsigned integers: numba skips its negative-index
# wraparound check for them, which is what lets LLVM vectorize.
@numba.njit(cache=True, inline="always")
def _diff_into(out, src, hi, lo, span, p):
    for i in range(span):
        t = src[hi + i] - src[lo + i]
        out[i] = t + p if t < 0 else t


@numba.njit(cache=True, inline="always")
def _axpy_into(acc, base, coef, cbase, diff, span, pp):
    for i in range(span):
        a = acc[base + i] + coef[cbase + i] * diff[i]
        acc[base + i] = a - pp if a >= pp else a


@numba.njit(cache=True, nogil=True)
def _kernel_levels(N, p, rows, src, dst, off, single, min_src, block=16):
    """Prime-field version of the level recurrence, ``p < 2**31``.

    Products of two residues stay below ``p*p < 2**62``; accumulators are kept
    below ``p*p`` by a conditional subtraction instead of a division.

    Target levels are processed ``block`` at a time: every source row that is
    already final when the block starts is read once and scattered into all
    targets of the block, whose accumulator rows stay cache resident.
    """
    pp = p * p
    W = N + 1
    acc = np.zeros(block * W * W, dtype=np.int64)
    coef = rows.ravel()
    diff = np.empty(W, dtype=np.int64)
    n0 = 1
    while n0 <= N:
        nb = min(block, N - n0 + 1)
        for b in range(nb):
            for i in range((n0 + b + 1) * W):
                acc[b * W * W + i] = 0
        # sources m <= n0 - 2 are final for every target in the block
        for cp in range(n0 - 1):
            for m in range(max(cp, min_src), n0 - 1):
                o = off[m]
                hi = o + m * (m + 1) + cp
                lo = o + cp * (m + 1) + cp
                span = m + 1 - cp
                _diff_into(diff, src, U(hi), U(lo), U(span), p)
                for b in range(nb):
                    ell = n0 + b - 2 - m
                    base = b * W * W + (cp + 1) * W + cp + 2 + ell
                    _axpy_into(acc, U(base), coef, U(ell * W), diff, U(span), pp)
        for b in range(nb):
            n = n0 + b
            w = n + 1
            # sources produced inside this block
            for m in range(max(n0 - 1, min_src), n - 1):
                ell = n - 2 - m
                o = off[m]
                for cp in range(m + 1):
                    hi = o + m * (m + 1) + cp
                    lo = o + cp * (m + 1) + cp
                    base = b * W * W + (cp + 1) * W + cp + 2 + ell
                    span = m + 1 - cp
                    _diff_into(diff, src, U(hi), U(lo), U(span), p)
                    _axpy_into(acc, U(base), coef, U(ell * W), diff, U(span), pp)
            if single:
                acc[b * W * W + W + n] += 1
            if n >= 2 and n - 1 >= min_src:
                o = off[n - 1]
                for cp in range(n):
                    v = src[o + (n - 1) * n + cp] - src[o + cp * n + cp]
                    acc[b * W * W + (cp + 1) * W + cp + 1] += v + p if v < 0 else v
            o = off[n]
            for c in range(1, n + 1):
                for d in range(1, n + 1):
                    v = (
                        acc[b * W * W + c * W + d] % p
                        + dst[o + d * w + c - 1]
                        + dst[o + (d - 1) * w + c]
                        - dst[o + (d - 1) * w + c - 1]
                    )
                    dst[o + d * w + c] = v % p
        n0 += nb


def _use_kernel(ring, engine: str) -> bool:
    if engine == "auto":
        return isinstance(ring, PrimeField)
    if engine == "numba":
        if not isinstance(ring, PrimeField):
            raise ValueError("the compiled kernel only supports prime fields")
        return True
    if engine == "numpy":
        return False
    raise ValueError(f"unknown engine {engine!r}")


def _fill(N, src, dst, single, min_src, use_kernel, rows, diff):
    if use_kernel:
        _kernel_levels(N, dst.ring.modulus, rows, src.flat, dst.flat, dst.offsets, single, min_src)
    else:
        for n in range(1, N + 1):
            _numpy_level(n, src, dst, rows, diff, single, min_src)


def _tools(N, ring):
    rows = _binomial_rows(N, ring)
    idx = np.arange(N + 1)
    diff = idx[None, :] - idx[:, None]
    return rows, diff


def prefix_table(N: int, ring=ZZ, engine: str = "auto") -> PrefixTable:
    """Build the full prefix-sum tensor for all pop-stacked totals up to ``N``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    use_kernel = _use_kernel(ring, engine)
    table = PrefixTable(N, ring)
    rows, diff = _tools(N, ring)
    _fill(N, table, table, True, 1, use_kernel, rows, diff)
    return table


def count_sequence(N: int, ring=ZZ, engine: str = "auto") -> list[int]:
    """``f(1), ..., f(N)``: pop-stacked permutations of each length, in ``ring``."""
    if N <= 0:
        return []
    return prefix_table(N, ring, engine).totals()


def iter_by_runs(N: int, Kmax: int | None = None, ring=ZZ, engine: str = "auto") -> Iterator[list[int]]:
    """Yield ``[f(1,k), ..., f(N,k)]`` for ``k = 1, 2, ..., Kmax`` as each completes.

    Only the slices for ``k-1`` and ``k`` are alive at any time.
    """
    if N <= 0:
        return
    Kmax = N if Kmax is None else Kmax
    if not 1 <= Kmax <= N:
        raise ValueError(f"need 1 <= Kmax <= N, got Kmax={Kmax}, N={N}")
    use_kernel = _use_kernel(ring, engine)
    rows, diff = _tools(N, ring)
    prev = PrefixTable(N, ring)  # all zero: stands in for the k=0 slice
    for k in range(1, Kmax + 1):
        cur = PrefixTable(N, ring)
        # slice k-1 vanishes on levels below k-1
        _fill(N, prev, cur, k == 1, max(k - 1, 1), use_kernel, rows, diff)
        yield cur.totals()
        prev = cur


def count_by_runs(N: int, Kmax: int | None = None, ring=ZZ, engine: str = "auto") -> dict[int, list[int]]:
    """Column ``k`` holds ``f(1,k), ..., f(N,k)``."""
    return {k: col for k, col in enumerate(iter_by_runs(N, Kmax, ring, engine), start=1)}


def matrix_rows(by_runs: dict[int, Sequence[int]]) -> dict[int, dict[int, int]]:
    """Re-key a by-runs result as ``rows[n][k]``."""
    rows: dict[int, dict[int, int]] = {}
    for k, col in by_runs.items():
        for n, value in enumerate(col, start=1):
            rows.setdefault(n, {})[k] = value
    return rows


__all__ = [
    "IntegerRing",
    "PrimeField",
    "PrefixTable",
    "binomial_table",
    "count_by_runs",
    "count_sequence",
    "count_slow_reference",
    "iter_by_runs",
    "prefix_table",
    "slow_f_tables",
]
