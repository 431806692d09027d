import math
import random

import pytest

from popstack import dp
from popstack.perm import brute_count
from popstack.rings import PrimeField

TABLE_START = [1, 1, 3, 11, 49, 263, 1653, 11877, 95991, 862047]
PRIMES = [2147483647, 1000000007, 998244353]


def test_binomials():
    C = dp.binomial_table(12)
    assert C[4, 2] == 6
    assert all(C[n, 0] == 1 and C[n, n] == 1 for n in range(13))
    Cp = dp.binomial_table(12, PrimeField(257))
    assert Cp[10, 5] == 252


def test_slow_reference_small():
    assert dp.count_slow_reference(5) == [1, 1, 3, 11, 49]


def test_slow_reference_f16():
    assert dp.count_slow_reference(16)[-1] == 2608383775171


def test_slow_reference_c_gt_d_is_zero():
    f = dp.slow_f_tables(8)
    for n in range(1, 9):
        for c in range(1, n + 1):
            for d in range(1, c):
                assert f[n][c][d] == 0


def test_c_eq_d_upper_readings_agree():
    assert dp.count_slow_reference(18, c_eq_d_upper="n") == dp.count_slow_reference(18, c_eq_d_upper="n-1")


def test_slow_reference_guard():
    with pytest.raises(ValueError):
        dp.count_slow_reference(dp.SLOW_MAX_N + 1)


def test_count_sequence_table_start():
    assert dp.count_sequence(10) == TABLE_START


def test_count_sequence_f45():
    assert dp.count_sequence(45)[-1] == 661053598808034620660440013405109251647269697650963759


def test_count_sequence_degenerate():
    assert dp.count_sequence(0) == []
    assert dp.count_sequence(1) == [1]


@pytest.mark.parametrize("engine", ["numpy", "numba"])
def test_engines_agree_mod_p(engine):
    F = PrimeField(PRIMES[0])
    big = dp.count_sequence(40)
    assert dp.count_sequence(40, F, engine) == [v % F.modulus for v in big]


def test_fast_equals_slow_over_integers():
    assert dp.count_sequence(25) == dp.count_slow_reference(25)


@pytest.mark.parametrize("p", PRIMES)
def test_fast_equals_slow_mod_p(p):
    F = PrimeField(p)
    assert dp.count_sequence(22, F) == dp.count_slow_reference(22, F)


def test_prefix_consistency():
    N = 25
    f = dp.slow_f_tables(N)
    table = dp.prefix_table(N)
    rng = random.Random(7)
    for _ in range(200):
        n = rng.randint(1, N)
        c = rng.randint(1, n)
        d = rng.randint(1, n)
        direct = sum(f[n][a][b] for a in range(1, c + 1) for b in range(1, d + 1))
        assert table.g(c, d, n) == direct


def test_prefix_clamps_and_zero_guards():
    table = dp.prefix_table(6)
    assert table.g(0, 3, 4) == 0
    assert table.g(9, 9, 4) == table.total(4) == 11


def test_bounds():
    for n, v in enumerate(dp.count_sequence(30), start=1):
        assert 0 <= v <= math.factorial(n)


def test_by_runs_examples():
    cols = dp.count_by_runs(12)
    assert cols[1] == [1] * 12
    assert cols[2][3] == 8
    assert cols[2][:10] == [0, 0, 2, 8, 22, 52, 114, 240, 494, 1004]
    assert cols[4][:10] == [0, 0, 0, 0, 0, 42, 692, 6500, 46304, 279566]
    rows = dp.matrix_rows(cols)
    assert {k: v for k, v in rows[3].items() if v} == {1: 1, 2: 2}


def test_by_runs_invariants():
    N = 30
    cols = dp.count_by_runs(N)
    totals = dp.count_sequence(N)
    for n in range(1, N + 1):
        assert sum(cols[k][n - 1] for k in cols) == totals[n - 1]
        if n >= 2:
            assert cols[n][n - 1] == 0


@pytest.mark.parametrize("n", range(1, 10))
def test_by_runs_match_brute(n):
    cols = dp.count_by_runs(9)
    brute = brute_count(n).by_runs
    assert {k: cols[k][n - 1] for k in cols if cols[k][n - 1]} == brute


def test_by_runs_streams_lazily():
    it = dp.iter_by_runs(20, 20)
    assert next(it) == [1] * 20


def test_by_runs_mod_p_matches_bigint():
    F = PrimeField(PRIMES[1])
    big = dp.count_by_runs(20, 6)
    small = dp.count_by_runs(20, 6, F)
    for k in big:
        assert small[k] == [v % F.modulus for v in big[k]]


def test_kmax_validation():
    with pytest.raises(ValueError):
        dp.count_by_runs(5, 6)


def test_ring_homomorphism():
    big = dp.count_sequence(40)
    for p in PRIMES:
        assert dp.count_sequence(40, PrimeField(p)) == [v % p for v in big]


def test_prime_field_rejects_large_modulus():
    with pytest.raises(ValueError):
        PrimeField(2**31 + 11)
