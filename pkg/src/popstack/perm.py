"""Permutations, runs, the pop-stack operator and overlapping ballots.

Everything here is deliberately naive: these definitions are the trust
anchor that the counting engine is checked against.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Sequence

BRUTE_MAX_N = 12

Permutation = tuple[int, ...]
Ballot = tuple[tuple[int, ...], ...]


def as_permutation(values: Iterable[int] | str) -> Permutation:
    """Coerce ``values`` to a permutation tuple, validating it.

    Strings are read one digit per letter, so ``"617849235"`` works for n < 10.
    """
    if isinstance(values, str):
        perm = tuple(int(ch) for ch in values)
    else:
        perm = tuple(int(v) for v in values)
    if sorted(perm) != list(range(1, len(perm) + 1)):
        raise ValueError(f"not a permutation of 1..{len(perm)}: {perm}")
    return perm


@dataclass(frozen=True)
class RunDecomposition:
    """Maximal monotone factors of a permutation, as half-open index ranges."""

    perm: Permutation
    direction: str
    runs: tuple[tuple[int, int], ...]

    def factors(self) -> list[tuple[int, ...]]:
        return [self.perm[i:j] for i, j in self.runs]


def decompose_runs(p: Sequence[int], direction: str = "ascending") -> RunDecomposition:
    if direction not in ("ascending", "descending"):
        raise ValueError(f"direction must be 'ascending' or 'descending', got {direction!r}")
    perm = tuple(p)
    if not perm:
        return RunDecomposition(perm, direction, ())
    ascending = direction == "ascending"
    runs = []
    start = 0
    for i in range(1, len(perm)):
        if (perm[i - 1] < perm[i]) != ascending:
            runs.append((start, i))
            start = i
    runs.append((start, len(perm)))
    return RunDecomposition(perm, direction, tuple(runs))


def pop_stack(p: Sequence[int]) -> Permutation:
    """One pass through a pop-stack: reverse every descending run."""
    out: list[int] = []
    for run in decompose_runs(p, "descending").factors():
        out.extend(reversed(run))
    return tuple(out)


def is_identity(p: Sequence[int]) -> bool:
    return all(v == i for i, v in enumerate(p, start=1))


def is_sortable_k(p: Sequence[int], k: int) -> bool:
    if k < 0:
        raise ValueError("k must be nonnegative")
    perm = tuple(p)
    for _ in range(k):
        if is_identity(perm):
            return True
        perm = pop_stack(perm)
    return is_identity(perm)


def is_pop_stacked(p: Sequence[int]) -> bool:
    """Adjacent ascending runs R, S must satisfy min R < max S."""
    runs = decompose_runs(p, "ascending").factors()
    # within an ascending run the minimum is first and the maximum last
    return all(left[0] < right[-1] for left, right in zip(runs, runs[1:]))


def perm_to_ballot(p: Sequence[int]) -> Ballot:
    return tuple(tuple(sorted(run)) for run in decompose_runs(p, "ascending").factors())


def ballot_to_perm(b: Sequence[Iterable[int]]) -> Permutation:
    blocks = [tuple(sorted(block)) for block in b]
    for i, (left, right) in enumerate(zip(blocks, blocks[1:])):
        if not left[-1] > right[0]:
            raise ValueError(
                f"blocks {i} and {i + 1} satisfy max {left[-1]} <= min {right[0]}; "
                "not the ascending-run decomposition of any permutation"
            )
    perm = tuple(v for block in blocks for v in block)
    return as_permutation(perm)


def validate_ballot(b: Sequence[Iterable[int]]) -> Ballot:
    blocks = tuple(tuple(sorted(block)) for block in b)
    if any(not block for block in blocks):
        raise ValueError("ballot has an empty block")
    flat = sorted(v for block in blocks for v in block)
    if flat != list(range(1, len(flat) + 1)):
        raise ValueError(f"blocks do not partition 1..{len(flat)}")
    return blocks


def is_overlapping(b: Sequence[Iterable[int]]) -> bool:
    blocks = validate_ballot(b)
    return all(
        left[-1] > right[0] and left[0] < right[-1]
        for left, right in zip(blocks, blocks[1:])
    )


@dataclass
class BruteCountReport:
    n: int
    total: int = 0
    by_runs: dict[int, int] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"n {self.n}", f"total {self.total}"]
        out += [f"runs {k} {v}" for k, v in sorted(self.by_runs.items())]
        return out


def brute_count(n: int) -> BruteCountReport:
    """Count pop-stacked permutations of [n] by exhaustive enumeration."""
    if not 0 <= n <= BRUTE_MAX_N:
        raise ValueError(
            f"brute_count needs 0 <= n <= {BRUTE_MAX_N} (got {n}); use the DP engine instead"
        )
    by_runs: Counter[int] = Counter()
    for perm in permutations(range(1, n + 1)):
        if is_pop_stacked(perm):
            by_runs[len(decompose_runs(perm).runs)] += 1
    report = BruteCountReport(n, sum(by_runs.values()), dict(by_runs))
    assert report.total <= math.factorial(n)
    return report
