import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from popstack.errors import PreconditionError
from popstack.series import SeriesTerms, derivative, egf, mul_trunc, reciprocal, revert, transform_series


def test_egf_of_factorials():
    t = SeriesTerms([1, 1, 2, 6, 24])
    assert egf(t).coeffs == [1, 1, 1, 1, 1]


def test_reciprocal_of_geometric():
    t = SeriesTerms([1] * 8)
    assert reciprocal(t).coeffs == [1, -1, 0, 0, 0, 0, 0, 0]


def test_revert_x_plus_x2():
    t = SeriesTerms([0, 1, 1, 0, 0, 0])
    assert revert(t).coeffs == [0, 1, -1, 2, -5, 14]


def test_revert_by_composition():
    # G(F(x)) = x checked coefficientwise
    a = [0, 1, 3, -2, 5, 7, 1]
    g = revert(SeriesTerms(a)).coeffs
    n = len(a)
    total = [0] * n
    power = [1] + [0] * (n - 1)
    for gi in g:
        for i in range(n):
            total[i] += gi * power[i]
        power = mul_trunc(power, a, n)
    assert total == [0, 1] + [0] * (n - 2)


def test_transform_preconditions_name_the_transform():
    with pytest.raises(PreconditionError, match="reciprocal"):
        reciprocal(SeriesTerms([0, 1, 1]))
    with pytest.raises(PreconditionError, match="revert"):
        revert(SeriesTerms([1, 1, 1]))
    with pytest.raises(PreconditionError, match="revert"):
        revert(SeriesTerms([0, 0, 1]))
    with pytest.raises(PreconditionError, match="unknown transform"):
        transform_series(SeriesTerms([1, 1]), "log")


def test_chain():
    t = SeriesTerms([1, 1, 2, 6, 24, 120])
    out = transform_series(t, "egf,reciprocal")
    assert out.coeffs == [1, -1, 0, 0, 0, 0]
    assert out.notes[-2:] == ["egf", "reciprocal"]


def test_from_counts_records_a0():
    t = SeriesTerms.from_counts([1, 1, 3])
    assert t.coeffs == [0, 1, 1, 3]
    assert "a_0 = 0" in t.notes[0]


def test_floats_rejected():
    with pytest.raises(TypeError):
        SeriesTerms([1.5])


def test_derivative():
    assert derivative([1, 1, 1, 1], 1) == [1, 2, 3]
    assert derivative([0, 0, 0, 1], 2) == [0, 6]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=2, max_size=12).filter(lambda a: a[0] != 0))
def test_reciprocal_property(a):
    b = reciprocal(SeriesTerms(a)).coeffs
    prod = mul_trunc(a, b, len(a))
    assert prod == [1] + [0] * (len(a) - 1)


def test_exact_rationals_survive():
    t = SeriesTerms([Fraction(1, 3), 2])
    assert reciprocal(t).coeffs[:2] == [3, -18]
    assert egf(SeriesTerms([0, 0, 1])).coeffs[2] == Fraction(1, math.factorial(2))
