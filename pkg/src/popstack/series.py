"""Truncated power series with exact rational coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PreconditionError

TRANSFORMS = ("egf", "reciprocal", "revert")


def _exact(value) -> Fraction | int:
    if isinstance(value, (int, Fraction)):
        return value
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"series coefficients must be exact, got {type(value).__name__}")


def _normalize(value):
    # keep integers as ints so the common case stays fast
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


@dataclass
class SeriesTerms:
    """Coefficients ``a_0 .. a_n`` of a power series, plus provenance notes.

    ``notes`` records conventions applied on the way in (for example an
    assumed ``a_0``) so they can be echoed in any output.
    """

    coeffs: list
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.coeffs = [_normalize(_exact(c)) for c in self.coeffs]

    @classmethod
    def from_counts(cls, counts: Sequence[int], a0: int = 0) -> "SeriesTerms":
        """Series ``a0 + counts[0] x + counts[1] x^2 + ...`` for a sequence indexed from 1."""
        return cls([a0, *counts], [f"a_0 = {a0} assumed (sequence starts at n = 1)"])

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    @property
    def order(self) -> int:
        """Index ``n`` of the last known coefficient."""
        return len(self.coeffs) - 1

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self.coeffs)

    def scaled(self, factor) -> "SeriesTerms":
        return SeriesTerms([c * factor for c in self.coeffs], list(self.notes))

    def truncated(self, length: int) -> "SeriesTerms":
        return SeriesTerms(self.coeffs[:length], list(self.notes))


def mul_trunc(a: Sequence, b: Sequence, length: int) -> list:
    """Product of two series, keeping ``length`` coefficients."""
    out = []
    for n in range(length):
        lo, hi = max(0, n - len(b) + 1), min(n, len(a) - 1)
        out.append(sum((a[i] * b[n - i] for i in range(lo, hi + 1)), 0))
    return out


def derivative(a: Sequence, times: int = 1) -> list:
    """Formal ``times``-th derivative; loses ``times`` coefficients off the top."""
    return [math.perm(j + times, times) * a[j + times] for j in range(len(a) - times)]


def poly_eval_series(poly: Sequence, series: Sequence, length: int) -> list:
    """Coefficients of ``poly(x) * series`` up to ``length``."""
    return mul_trunc(poly, series, length)


def egf(terms: SeriesTerms) -> SeriesTerms:
    coeffs = [Fraction(c) / math.factorial(n) for n, c in enumerate(terms.coeffs)]
    return SeriesTerms(coeffs, terms.notes + ["egf"])


def reciprocal(terms: SeriesTerms) -> SeriesTerms:
    a = terms.coeffs
    if not a or a[0] == 0:
        raise PreconditionError(
            "reciprocal needs a_0 != 0; for a sequence starting at n = 1 supply a_0 = 1 (--a0 1)"
        )
    inv0 = Fraction(1) / a[0] if not (isinstance(a[0], int) and abs(a[0]) == 1) else a[0]
    b = [inv0]
    for n in range(1, len(a)):
        b.append(-inv0 * sum(a[i] * b[n - i] for i in range(1, n + 1)))
    return SeriesTerms(b, terms.notes + ["reciprocal"])


def revert(terms: SeriesTerms) -> SeriesTerms:
    """Compositional inverse by Lagrange inversion: ``[x^n] G = [x^(n-1)] (x/F)^n / n``."""
    a = terms.coeffs
    if len(a) < 2 or a[0] != 0 or a[1] == 0:
        raise PreconditionError("revert needs a_0 = 0 and a_1 != 0 (use the default a_0 = 0)")
    length = len(a)
    h = reciprocal(SeriesTerms(a[1:])).coeffs  # x / F(x)
    out = [0]
    power = [1]
    for n in range(1, length):
        power = mul_trunc(power, h, length)
        out.append(Fraction(power[n - 1]) / n)
    return SeriesTerms(out, terms.notes + ["revert"])


def transform_series(terms: SeriesTerms, transform: str | Iterable[str]) -> SeriesTerms:
    """Apply ``egf``, ``reciprocal`` or ``revert``; a comma list or iterable chains them in order."""
    chain = transform.split(",") if isinstance(transform, str) else list(transform)
    out = terms
    for name in chain:
        name = name.strip()
        if name == "egf":
            out = egf(out)
        elif name == "reciprocal":
            out = reciprocal(out)
        elif name == "revert":
            out = revert(out)
        elif name in ("", "none", "ogf"):
            continue
        else:
            raise PreconditionError(f"unknown transform {name!r}; choose from {', '.join(TRANSFORMS)}")
    return out
