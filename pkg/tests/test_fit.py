import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from popstack import dp
from popstack.fit import (
    AlgebraicFit,
    DFiniteFit,
    NegativeCertificate,
    RationalFit,
    conjectured_denominator,
    factored,
    fit_algebraic,
    fit_dfinite,
    fit_from_json,
    fit_rational,
    fit_runs_family,
    fit_to_json,
    poly_product,
    recheck_certificate,
    verify_fit,
)
from popstack.series import SeriesTerms


def catalan(n):
    return [math.comb(2 * i, i) // (i + 1) for i in range(n)]


def test_geometric():
    t = SeriesTerms([2**i for i in range(20)])
    fit = fit_rational(t, 3)
    assert fit.numerator == [1]
    assert fit.denominator == [1, -2]
    assert verify_fit(fit, t)


def test_zero_series():
    fit = fit_rational(SeriesTerms([0] * 12), 3)
    assert fit.numerator == [] and fit.denominator == [1]


def test_margin_must_be_positive():
    with pytest.raises(ValueError):
        fit_rational(SeriesTerms([1] * 20), 3, margin=0)


def test_f2_column():
    cols = dp.count_by_runs(30, 2)
    fit = fit_rational(SeriesTerms.from_counts(cols[2]), 10)
    assert fit.canonical() == RationalFit([0, 0, 0, 2], poly_product([[1, -2], [1, -1], [1, -1]]), 3, 0, 0).canonical()
    assert factored(fit.denominator) == "(1 - 2*x)*(1 - x)^2"


def test_negative_when_too_few_terms():
    t = SeriesTerms([math.factorial(i) for i in range(30)])
    cert = fit_rational(t, 20)
    assert isinstance(cert, NegativeCertificate)
    assert cert.bounds == {"d": 9}
    assert recheck_certificate(cert, t)


def test_verify_rejects_wrong_fit():
    fit = RationalFit([1], [1, -2], 1, 10, 1)
    assert not verify_fit(fit, SeriesTerms([3**i for i in range(10)]))


def test_expand_roundtrip():
    t = SeriesTerms.from_counts(dp.count_by_runs(40, 3)[3])
    fit = fit_rational(t, 10)
    assert fit.expand(len(t)) == t.coeffs


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.integers(-5, 5), min_size=1, max_size=4),
    st.lists(st.integers(-5, 5), min_size=1, max_size=3),
)
def test_rational_roundtrip_property(num, tail):
    den = [1] + tail
    true = RationalFit(num, den, 0, 0, 0)
    t = SeriesTerms(true.expand(30))
    fit = fit_rational(t, 8)
    assert isinstance(fit, RationalFit)
    assert verify_fit(fit, t)
    assert fit.expand(30) == t.coeffs
    # minimality: nothing smaller verifies
    if fit.d > 0:
        assert isinstance(fit_rational(t, fit.d - 1), NegativeCertificate)


@settings(max_examples=15, deadline=None)
@given(st.fractions(min_value=-20, max_value=20).filter(lambda v: v != 0))
def test_scaling_invariance(scale):
    t = SeriesTerms.from_counts(dp.count_by_runs(30, 2)[2])
    base = fit_rational(t, 10)
    scaled = fit_rational(t.scaled(scale), 10)
    assert scaled.denominator == base.denominator
    assert scaled.numerator == [Fraction(c) * scale for c in base.numerator]


def test_catalan_algebraic():
    t = SeriesTerms(catalan(30))
    fit = fit_algebraic(t, 2, 5)
    assert isinstance(fit, AlgebraicFit)
    assert fit.m == 2 and fit.d == 1
    # 1 - F + x F^2 = 0 up to scaling
    assert fit.polys == [[1], [-1], [0, 1]]
    assert verify_fit(fit, t)


def test_rational_input_is_algebraic_degree_one():
    t = SeriesTerms([2**i for i in range(20)])
    fit = fit_algebraic(t, 3, 3)
    assert fit.m == 1


def test_factorial_dfinite():
    t = SeriesTerms([math.factorial(i) for i in range(30)])
    fit = fit_dfinite(t, 2, 4)
    assert isinstance(fit, DFiniteFit)
    # x^2 F' + (x - 1) F + 1 = 0
    assert fit.k == 1
    assert fit.polys == [[-1, 1], [0, 0, 1]]
    assert fit.inhomogeneity == [1]
    assert verify_fit(fit, t)


def test_geometric_dfinite():
    fit = fit_dfinite(SeriesTerms([1] * 30), 2, 4)
    assert fit.k == 0
    assert fit.polys == [[1, -1]] and fit.inhomogeneity == [-1]


def test_json_roundtrip():
    t = SeriesTerms(catalan(25))
    for fit in (fit_rational(SeriesTerms([2**i for i in range(20)]), 3), fit_algebraic(t, 2, 4),
                fit_dfinite(SeriesTerms([math.factorial(i) for i in range(30)]), 2, 4),
                fit_rational(t, 10)):
        back = fit_from_json(fit_to_json(fit))
        assert back == fit


def test_certificate_recheck_detects_tampering():
    t = SeriesTerms(catalan(30))
    cert = fit_rational(t, 12)
    assert isinstance(cert, NegativeCertificate)
    assert recheck_certificate(cert, t)
    # the same boundary system built from a rational series is rank deficient
    geometric = SeriesTerms([2**i for i in range(30)])
    assert not recheck_certificate(cert, geometric)


def test_conjectured_denominator():
    assert conjectured_denominator(2) == poly_product([[1, -1], [1, -1], [1, -2]])
    assert len(conjectured_denominator(4)) - 1 == 10


def test_runs_family_small():
    cols = dp.count_by_runs(60, 4)
    reports = fit_runs_family(cols, [1, 2, 3, 4, 5], 20)
    assert reports[0].fit.canonical() == "(x) / (1 - x)"
    for r in reports[1:4]:
        assert r.denominator_matches and r.numerator_degree_matches
    assert reports[3].fit.numerator == [0] * 6 + [2 * c for c in (21, -74, 5, 180, -144)]
    assert reports[2].flags and "printed" in reports[2].flags[0]
    assert reports[4].fit is None and reports[4].error


def test_runs_family_insufficient_terms():
    cols = dp.count_by_runs(12, 4)
    reports = fit_runs_family(cols, [4], 20)
    assert isinstance(reports[0].fit, NegativeCertificate) or reports[0].error
