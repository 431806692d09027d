from itertools import permutations

import pytest

from popstack.perm import (
    BRUTE_MAX_N,
    as_permutation,
    ballot_to_perm,
    brute_count,
    decompose_runs,
    is_overlapping,
    is_pop_stacked,
    is_sortable_k,
    perm_to_ballot,
    pop_stack,
)


def runs_of(p, direction):
    return [list(r) for r in decompose_runs(as_permutation(p), direction).factors()]


def test_runs_ascending():
    assert runs_of("617849235", "ascending") == [[6], [1, 7, 8], [4, 9], [2, 3, 5]]


def test_runs_descending():
    assert runs_of("617849235", "descending") == [[6, 1], [7], [8, 4], [9, 2], [3], [5]]


def test_identity_is_one_run():
    assert runs_of(range(1, 8), "ascending") == [list(range(1, 8))]
    assert runs_of([], "ascending") == []


def test_pop_stack_examples():
    assert pop_stack(as_permutation("5321764")) == as_permutation("1235467")
    assert pop_stack(as_permutation("617849235")) == as_permutation("167482935")
    assert pop_stack(tuple(range(1, 6))) == tuple(range(1, 6))


def test_sortable():
    assert is_sortable_k((1, 2, 3), 0)
    assert is_sortable_k(as_permutation("5321764"), 2)
    assert not is_sortable_k((2, 1), 0)
    assert is_sortable_k((), 0)


def test_pop_stacked_examples():
    assert is_pop_stacked((1, 2, 3, 4))
    assert not is_pop_stacked((2, 1))
    assert is_pop_stacked(as_permutation("167482935"))
    assert is_pop_stacked(())


def test_ballots():
    assert perm_to_ballot(as_permutation("617849235")) == ((6,), (1, 7, 8), (4, 9), (2, 3, 5))
    assert ballot_to_perm([[1, 2, 3]]) == (1, 2, 3)
    assert ballot_to_perm([[6], [1, 7, 8], [4, 9], [2, 3, 5]]) == as_permutation("617849235")


def test_ballot_to_perm_rejects_mergeable_blocks():
    # {1}{2} would read as the single run 12
    with pytest.raises(ValueError):
        ballot_to_perm([[1], [2]])


def test_overlapping_examples():
    assert is_overlapping([[1, 2, 3]])
    assert is_overlapping([[2], [1, 3]])
    assert is_overlapping([[1, 3], [2]])
    assert not is_overlapping([[1], [2]])
    assert not is_overlapping([[2], [1], [3]])


@pytest.mark.parametrize("n", range(0, 8))
def test_ballot_roundtrip(n):
    for p in permutations(range(1, n + 1)):
        assert ballot_to_perm(perm_to_ballot(p)) == p


@pytest.mark.parametrize("n", range(1, 9))
def test_image_of_pop_stack_is_pop_stacked(n):
    perms = list(permutations(range(1, n + 1)))
    image = {pop_stack(p) for p in perms}
    assert image == {p for p in perms if is_pop_stacked(p)}


@pytest.mark.parametrize("n", range(1, 8))
def test_blocks_of_image_are_unions_of_descending_runs(n):
    # reversed descending runs can merge (12 -> 12 has runs {1},{2} but one block),
    # so each block is a union of consecutive runs rather than a single run
    for p in permutations(range(1, n + 1)):
        runs = [sorted(r) for r in runs_of(p, "descending")]
        blocks = perm_to_ballot(pop_stack(p))
        i = 0
        for block in blocks:
            merged = []
            while len(merged) < len(block):
                merged += runs[i]
                i += 1
            assert sorted(merged) == list(block)
        assert i == len(runs)


@pytest.mark.parametrize("n", range(1, 9))
def test_n_minus_one_passes_sort(n):
    for p in permutations(range(1, n + 1)):
        assert is_sortable_k(p, n - 1)


def test_pop_stacked_iff_overlapping_ballot():
    for p in permutations(range(1, 7)):
        assert is_pop_stacked(p) == is_overlapping(perm_to_ballot(p))


def test_brute_count_small():
    assert brute_count(1).total == 1
    assert brute_count(1).by_runs == {1: 1}
    r3 = brute_count(3)
    assert r3.total == 3
    assert r3.by_runs == {1: 1, 2: 2}
    assert "total 3" in r3.lines()


def test_brute_count_ten():
    assert brute_count(10).total == 862047


def test_brute_count_invariants():
    import math

    for n in range(2, 9):
        r = brute_count(n)
        assert sum(r.by_runs.values()) == r.total <= math.factorial(n)
        assert r.by_runs.get(n, 0) == 0


def test_brute_guard():
    with pytest.raises(ValueError, match="12"):
        brute_count(BRUTE_MAX_N + 1)
    with pytest.raises(ValueError):
        brute_count(-1)


def test_as_permutation_validates():
    with pytest.raises(ValueError):
        as_permutation([1, 1, 2])
    with pytest.raises(ValueError):
        as_permutation([0, 1])
