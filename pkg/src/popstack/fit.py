"""Guessing rational, algebraic and D-finite generating functions.

Every family reduces to the same question: do polynomials ``P_0..P_r`` of
degree at most ``d`` exist, not all zero, with ``sum P_i(x) B_i(x) = O(x^E)``
for known series ``B_i``? Stacking the coefficients of ``x^0..x^{E-1}`` gives
a homogeneous linear system whose columns are shifted copies of the ``B_i``.

A *chain* fixes the blocks (``m`` for algebraic, ``k`` for D-finite, a single
chain for rational) and lets ``d`` grow. The system for a smaller ``d`` is a
column subset of the one for a larger ``d``, so if the largest admissible
``d`` has only the trivial solution, the whole chain does; that boundary
system is what a :class:`NegativeCertificate` records.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import flint
import numpy as np

from . import linalg
from .series import SeriesTerms, derivative, mul_trunc

DEFAULT_MARGIN = 10


# ---------------------------------------------------------------------------
# polynomial helpers (coefficient lists, lowest degree first)


def poly_trim(p: Sequence) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_degree(p: Sequence) -> int:
    return len(poly_trim(p)) - 1


def poly_mul(a: Sequence, b: Sequence) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poly_product(factors: Sequence[Sequence]) -> list:
    out: list = [1]
    for f in factors:
        out = poly_mul(out, f)
    return out


def poly_str(p: Sequence, var: str = "x") -> str:
    p = poly_trim(p)
    if not p:
        return "0"
    parts = []
    for i, c in enumerate(p):
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{mag}*{mono}" if isinstance(mag, int) or Fraction(mag).denominator == 1 else f"({mag})*{mono}"
        else:
            body = str(mag)
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def _to_fmpq_poly(p: Sequence) -> flint.fmpq_poly:
    return flint.fmpq_poly([flint.fmpq(Fraction(c).numerator, Fraction(c).denominator) for c in p])


def _from_fmpq_poly(p: flint.fmpq_poly) -> list:
    out = []
    for c in p.coeffs():
        f = Fraction(int(c.p), int(c.q))
        out.append(f.numerator if f.denominator == 1 else f)
    return out


def _canonical_scale(polys: list[list], anchor: list) -> list[list]:
    """Scale so ``anchor``'s constant term (or lowest nonzero term) is 1."""
    lead = next((c for c in anchor if c != 0), None)
    if lead is None:
        return polys
    s = Fraction(1) / Fraction(lead)
    out = []
    for p in polys:
        q = []
        for c in p:
            v = Fraction(c) * s
            q.append(v.numerator if v.denominator == 1 else v)
        out.append(poly_trim(q))
    return out


def _coeff_strs(p: Sequence) -> list[str]:
    return [str(c) for c in p]


def _parse_coeffs(items: Sequence[str]) -> list:
    out = []
    for s in items:
        v = Fraction(s)
        out.append(v.numerator if v.denominator == 1 else v)
    return out


# ---------------------------------------------------------------------------
# fit results


@dataclass
class RationalFit:
    numerator: list
    denominator: list
    d: int
    n_terms: int
    margin: int
    family: str = "rational"

    def canonical(self) -> str:
        return f"({poly_str(self.numerator)}) / ({poly_str(self.denominator)})"

    def factored_denominator(self) -> str:
        return factored(self.denominator)

    def expand(self, length: int) -> list:
        """Power series of numerator/denominator through ``length`` coefficients."""
        q = self.denominator
        if not q or q[0] == 0:
            raise ValueError("denominator has no constant term; not a power series")
        q0 = Fraction(q[0])
        out = []
        for n in range(length):
            acc = Fraction(self.numerator[n]) if n < len(self.numerator) else Fraction(0)
            for i in range(1, min(n, len(q) - 1) + 1):
                acc -= q[i] * out[n - i]
            v = acc / q0
            out.append(v.numerator if v.denominator == 1 else v)
        return out

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "d": self.d,
            "n_terms": self.n_terms,
            "margin": self.margin,
            "numerator": _coeff_strs(self.numerator),
            "denominator": _coeff_strs(self.denominator),
            "canonical": self.canonical(),
        }


@dataclass
class AlgebraicFit:
    polys: list[list]  # p_0 .. p_m
    m: int
    d: int
    n_terms: int
    margin: int
    family: str = "algebraic"

    def canonical(self) -> str:
        return " + ".join(f"({poly_str(p)})*F^{i}" for i, p in enumerate(self.polys)) + " = 0"

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "m": self.m,
            "d": self.d,
            "n_terms": self.n_terms,
            "margin": self.margin,
            "polys": [_coeff_strs(p) for p in self.polys],
            "canonical": self.canonical(),
        }


@dataclass
class DFiniteFit:
    polys: list[list]  # p_0 .. p_k, coefficient of F^(j)
    inhomogeneity: list
    k: int
    d: int
    n_terms: int
    margin: int | None
    family: str = "dfinite"

    @property
    def leading(self) -> list:
        return self.polys[self.k]

    def canonical(self) -> str:
        terms = [f"({poly_str(p)})*F^({j})" for j, p in enumerate(self.polys)]
        terms.append(f"({poly_str(self.inhomogeneity)})")
        return " + ".join(terms) + " = 0"

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "k": self.k,
            "d": self.d,
            "n_terms": self.n_terms,
            "margin": self.margin,
            "polys": [_coeff_strs(p) for p in self.polys],
            "inhomogeneity": _coeff_strs(self.inhomogeneity),
            "canonical": self.canonical(),
        }


@dataclass
class NegativeCertificate:
    """No nontrivial solution exists within ``bounds`` given ``n_terms`` terms.

    ``boundary`` lists the largest system of every chain as
    ``(chain, d, rows, cols)``; each was found to have full column rank
    modulo ``prime``, which implies full rank over Q.
    """

    family: str
    bounds: dict
    n_terms: int
    margin: int
    prime: int
    boundary: list[tuple[int, int, int, int]] = field(default_factory=list)

    def claim(self) -> str:
        b = ", ".join(f"{k} <= {v}" for k, v in self.bounds.items())
        return f"no {self.family} relation with {b} fits the {self.n_terms} given terms"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["claim"] = self.claim()
        return out


def fit_to_json(fit) -> str:
    return json.dumps(fit.to_dict(), indent=2)


def fit_from_json(text: str):
    obj = json.loads(text)
    fam = obj["family"]
    if "claim" in obj:
        obj.pop("claim")
        obj["boundary"] = [tuple(b) for b in obj["boundary"]]
        return NegativeCertificate(**obj)
    if fam == "rational":
        return RationalFit(
            _parse_coeffs(obj["numerator"]), _parse_coeffs(obj["denominator"]),
            obj["d"], obj["n_terms"], obj["margin"],
        )
    if fam == "algebraic":
        return AlgebraicFit(
            [_parse_coeffs(p) for p in obj["polys"]], obj["m"], obj["d"], obj["n_terms"], obj["margin"]
        )
    if fam == "dfinite":
        return DFiniteFit(
            [_parse_coeffs(p) for p in obj["polys"]], _parse_coeffs(obj["inhomogeneity"]),
            obj["k"], obj["d"], obj["n_terms"], obj["margin"],
        )
    raise ValueError(f"unknown family {fam!r}")


def factored(p: Sequence) -> str:
    """Factor a rational polynomial over Z for display, e.g. ``(1 - 2*x)*(1 - x)^2``."""
    p = poly_trim(p)
    if not p:
        return "0"
    den = math.lcm(*(Fraction(c).denominator for c in p))
    content, factors = flint.fmpz_poly([int(Fraction(c) * den) for c in p]).factor()
    pieces = []
    sign = 1
    for f, e in factors:
        coeffs = [int(c) for c in f.coeffs()]
        lowest = next(c for c in coeffs if c)
        if lowest < 0:
            coeffs = [-c for c in coeffs]
            sign *= (-1) ** e
        txt = f"({poly_str(coeffs)})"
        pieces.append(txt if e == 1 else f"{txt}^{e}")
    scalar = Fraction(int(content) * sign, den)
    head = "" if scalar == 1 else f"{scalar}*"
    return head + "*".join(pieces) if pieces else str(scalar)


# ---------------------------------------------------------------------------
# the shared search


def _system(blocks: Sequence[Sequence], d: int, E: int) -> list[list]:
    """Rows ``e < E``, columns ``(i, j)`` (block-major): coefficient ``[x^e] x^j B_i``."""
    rows = []
    for e in range(E):
        row = []
        for b in blocks:
            for j in range(d + 1):
                row.append(b[e - j] if e >= j else 0)
        rows.append(row)
    return rows


def _system_mod(blocks: Sequence[Sequence[int]], d: int, E: int) -> np.ndarray:
    """:func:`_system` for residue blocks, built as an int64 array."""
    A = np.zeros((E, len(blocks) * (d + 1)), dtype=np.int64)
    for i, b in enumerate(blocks):
        col = np.asarray(list(b[:E]) + [0] * max(0, E - len(b)), dtype=np.int64)
        for j in range(min(d + 1, E)):
            A[j:, i * (d + 1) + j] = col[: E - j]
    return A


def _column_subset(nblocks: int, dmax: int, d: int) -> list[int]:
    return [i * (dmax + 1) + j for i in range(nblocks) for j in range(d + 1)]


@dataclass
class _Chain:
    key: int
    n_equations: int
    d_cap: int
    blocks_mod: Callable[[int], list[list[int]]]
    blocks_exact: Callable[[], list[list]]
    nblocks: int


def _mod_series(terms: SeriesTerms, p: int) -> list[int]:
    return [linalg.reduce_mod(c, p) for c in terms.coeffs]


def _mul_mod(a: Sequence[int], b: Sequence[int], length: int, p: int) -> list[int]:
    prod = flint.nmod_poly(list(a), p) * flint.nmod_poly(list(b), p)
    out = [int(c) for c in prod.coeffs()[:length]]
    return out + [0] * (length - len(out))


def _search(family: str, chains: Sequence[_Chain], n_terms: int, margin: int, bounds: dict, prime: int):
    """Minimal-unknowns hit over all chains, or a certificate for all of them."""
    candidates = []  # (unknowns, chain key, d, chain)
    boundary = []
    for chain in chains:
        dmax = chain.d_cap
        if dmax < 0:
            continue
        blocks = chain.blocks_mod(prime)
        A = _system_mod(blocks, dmax, chain.n_equations)
        if flint.nmod_mat(A.tolist(), prime).rank() == A.shape[1]:
            boundary.append((chain.key, dmax, chain.n_equations, A.shape[1]))
            continue
        for d in range(dmax + 1):
            cols = _column_subset(chain.nblocks, dmax, d)
            if linalg.nullspace_mod_p(A[:, cols], prime).nullity:
                candidates.append(((d + 1) * chain.nblocks, chain.key, d, chain))
                break
    candidates.sort(key=lambda c: (c[0], c[1]))
    for _, key, d, chain in candidates:
        # walk up the chain until an exact solution appears (modular hits can be spurious)
        exact_blocks = chain.blocks_exact()
        for dd in range(d, chain.d_cap + 1):
            rows = linalg.integer_rows(_system(exact_blocks, dd, chain.n_equations))
            _, basis = linalg.exact_nullspace_via_screen(rows, prime)
            if basis:
                return key, dd, basis[0]
    return NegativeCertificate(family, bounds, n_terms, margin, prime, boundary)


def _split(vec: Sequence[int], nblocks: int, d: int) -> list[list[int]]:
    return [list(vec[i * (d + 1) : (i + 1) * (d + 1)]) for i in range(nblocks)]


# ---------------------------------------------------------------------------
# families


def fit_rational(
    terms: SeriesTerms,
    d_max: int,
    margin: int = DEFAULT_MARGIN,
    prime: int = linalg.DEFAULT_SCREEN_PRIME,
):
    """Smallest ``d`` with ``q F - p = O(x^{n+1})``, ``deg p, deg q <= d``, ``2d <= n - margin``."""
    if margin < 1:
        raise ValueError("margin must be at least 1")
    n = terms.order
    if all(c == 0 for c in terms.coeffs):
        return RationalFit([], [1], 0, len(terms), margin)
    d_cap = min(d_max, (n - margin) // 2)
    if d_cap < 0:
        raise ValueError(f"{len(terms)} terms leave no admissible degree with margin {margin}")
    one = [1] + [0] * n
    chain = _Chain(
        0,
        n + 1,
        d_cap,
        lambda p: [_mod_series(terms, p), one],
        lambda: [terms.coeffs, one],
        2,
    )
    bounds = {"d": d_cap}
    found = _search("rational", [chain], len(terms), margin, bounds, prime)
    if isinstance(found, NegativeCertificate):
        return found
    _, d, vec = found
    q, minus_p = _split(vec, 2, d)
    num, den = _reduce_rational([-c for c in minus_p], q)
    return RationalFit(num, den, d, len(terms), margin)


def _reduce_rational(num: list, den: list) -> tuple[list, list]:
    P, Q = _to_fmpq_poly(num), _to_fmpq_poly(den)
    g = P.gcd(Q)
    if g.degree() > 0:
        P, Q = P // g, Q // g
    num, den = _from_fmpq_poly(P), _from_fmpq_poly(Q)
    num, den = _canonical_scale([num, den], den)
    return num, den


def fit_algebraic(
    terms: SeriesTerms,
    m_max: int,
    d_max: int,
    margin: int = DEFAULT_MARGIN,
    max_unknowns: int | None = None,
    prime: int = linalg.DEFAULT_SCREEN_PRIME,
):
    """Smallest ``(m+1)(d+1)`` with ``sum_i p_i F^i = O(x^{n+1})`` (ties: smaller ``m``)."""
    if margin < 1:
        raise ValueError("margin must be at least 1")
    n = terms.order
    E = n + 1
    cap = E - margin if max_unknowns is None else min(max_unknowns, E - margin)
    powers_mod: dict[int, list[list[int]]] = {}
    powers_exact: list[list] = [[1] + [0] * n]

    def mod_powers(m, p):
        seq = powers_mod.setdefault(p, [[1] + [0] * n])
        base = _mod_series(terms, p)
        while len(seq) <= m:
            seq.append(_mul_mod(seq[-1], base, E, p))
        return seq[: m + 1]

    def exact_powers(m):
        while len(powers_exact) <= m:
            powers_exact.append(mul_trunc(powers_exact[-1], terms.coeffs, E))
        return powers_exact[: m + 1]

    chains = []
    for m in range(1, m_max + 1):
        d_cap = min(d_max, cap // (m + 1) - 1)
        if d_cap < 0:
            break
        chains.append(
            _Chain(m, E, d_cap, lambda p, m=m: mod_powers(m, p), lambda m=m: exact_powers(m), m + 1)
        )
    bounds = {"m": m_max, "d": d_max, "(m+1)(d+1)": cap}
    found = _search("algebraic", chains, len(terms), margin, bounds, prime)
    if isinstance(found, NegativeCertificate):
        return found
    m, d, vec = found
    polys = [poly_trim(p) for p in _split(vec, m + 1, d)]
    anchor = next(p for p in reversed(polys) if p)
    polys = _canonical_scale(polys, anchor)
    return AlgebraicFit(polys, m, d, len(terms), margin)


def fit_dfinite(
    terms: SeriesTerms,
    k_max: int,
    d_max: int,
    margin: int = DEFAULT_MARGIN,
    max_unknowns: int | None = None,
    prime: int = linalg.DEFAULT_SCREEN_PRIME,
):
    """Smallest ``(k+2)(d+1)`` with ``sum_j p_j F^(j) + q = 0`` through every known term.

    The ``j``-th derivative is known through ``x^{n-j}``, so order ``k`` uses
    ``n - k + 1`` equations. Ties go to the smaller ``k``.
    """
    if margin < 1:
        raise ValueError("margin must be at least 1")
    n = terms.order
    chains = []
    for k in range(0, k_max + 1):
        E = n - k + 1
        cap = E - margin if max_unknowns is None else min(max_unknowns, E - margin)
        d_cap = min(d_max, cap // (k + 2) - 1)
        if d_cap < 0:
            continue
        unit = [1] + [0] * (E - 1)

        def mod_blocks(p, k=k, E=E, unit=unit):
            base = _mod_series(terms, p)
            blocks = []
            for j in range(k + 1):
                der = [math.perm(i + j, j) * base[i + j] % p for i in range(E)]
                blocks.append(der)
            return blocks + [unit]

        def exact_blocks(k=k, E=E, unit=unit):
            return [derivative(terms.coeffs, j)[:E] for j in range(k + 1)] + [unit]

        chains.append(_Chain(k, E, d_cap, mod_blocks, exact_blocks, k + 2))
    bounds = {"k": k_max, "d": d_max}
    if max_unknowns is not None:
        bounds["(k+2)(d+1)"] = max_unknowns
    found = _search("dfinite", chains, len(terms), margin, bounds, prime)
    if isinstance(found, NegativeCertificate):
        return found
    k, d, vec = found
    parts = [poly_trim(p) for p in _split(vec, k + 2, d)]
    anchor = next(p for p in reversed(parts[: k + 1]) if p)
    parts = _canonical_scale(parts, anchor)
    return DFiniteFit(parts[: k + 1], parts[k + 1], k, d, len(terms), margin)


# ---------------------------------------------------------------------------
# checking


def verify_fit(fit, terms: SeriesTerms) -> bool:
    """Does the fit's defining identity hold through every supplied coefficient?"""
    a = terms.coeffs
    n1 = len(a)
    if isinstance(fit, NegativeCertificate):
        return recheck_certificate(fit, terms)
    if isinstance(fit, RationalFit):
        lhs = mul_trunc(fit.denominator, a, n1)
        num = list(fit.numerator) + [0] * n1
        return all(lhs[i] == num[i] for i in range(n1))
    if isinstance(fit, AlgebraicFit):
        total = [0] * n1
        power = [1] + [0] * (n1 - 1)
        for i, p in enumerate(fit.polys):
            if i:
                power = mul_trunc(power, a, n1)
            for e, v in enumerate(mul_trunc(p, power, n1)):
                total[e] += v
        return not any(total)
    if isinstance(fit, DFiniteFit):
        E = n1 - fit.k
        if E <= 0:
            return False
        total = [0] * E
        for j, p in enumerate(fit.polys):
            for e, v in enumerate(mul_trunc(p, derivative(a, j), E)):
                total[e] += v
        for e, c in enumerate(fit.inhomogeneity[:E]):
            total[e] += c
        return not any(total)
    raise TypeError(f"cannot verify {type(fit).__name__}")


def recheck_certificate(cert: NegativeCertificate, terms: SeriesTerms, prime: int = linalg.DEFAULT_RECHECK_PRIME) -> bool:
    """Rebuild each boundary system from scratch and confirm full column rank.

    Uses a different prime and FLINT's rank routine, so nothing is shared with
    the search that produced the certificate except the system definition.
    """
    a = terms.coeffs
    n = len(a) - 1
    ok = True
    for key, d, n_eq, ncols in cert.boundary:
        if cert.family == "rational":
            blocks = [a, [1] + [0] * n]
        elif cert.family == "algebraic":
            blocks = [[1] + [0] * n]
            base = [linalg.reduce_mod(c, prime) for c in a]
            for _ in range(key):
                blocks.append(_mul_mod(blocks[-1], base, n_eq, prime))
        elif cert.family == "dfinite":
            blocks = [derivative(a, j)[:n_eq] for j in range(key + 1)] + [[1] + [0] * (n_eq - 1)]
        else:
            raise ValueError(cert.family)
        blocks = [[linalg.reduce_mod(v, prime) for v in b[:n_eq]] for b in blocks]
        rows = _system(blocks, d, n_eq)
        if len(rows[0]) != ncols or linalg.rank_mod_p_flint(rows, prime) != ncols:
            ok = False
    return ok


# ---------------------------------------------------------------------------
# the by-runs family


def conjectured_denominator(k: int) -> list[int]:
    """``prod_{i=1..k} (1 - i x)^(k - i + 1)``."""
    return poly_product([f for i in range(1, k + 1) for f in [[1, -i]] * (k - i + 1)])


# The k = 3 denominator as it circulates in print, (1-3x)(1-2x)^2(1-3x)^3.
# It disagrees with the product pattern (last factor (1-x)^3), so fits for
# k = 3 are compared against both and any mismatch is flagged.
PRINTED_DENOMINATORS = {3: poly_product([[1, -3], [1, -2], [1, -2]] + [[1, -3]] * 3)}


@dataclass
class RunsFitReport:
    k: int
    fit: RationalFit | NegativeCertificate | None
    error: str | None = None
    denominator_matches: bool = False
    numerator_degree: int | None = None
    numerator_degree_matches: bool = False
    flags: list[str] = field(default_factory=list)

    def summary(self) -> str:
        if self.fit is None or isinstance(self.fit, NegativeCertificate):
            return f"k={self.k}: no rational fit ({self.error or 'certificate'})"
        return (
            f"k={self.k}: F_k = ({poly_str(self.fit.numerator)}) / {self.fit.factored_denominator()}; "
            f"denominator pattern {'ok' if self.denominator_matches else 'DIFFERS'}, "
            f"numerator degree {self.numerator_degree} "
            f"({'=' if self.numerator_degree_matches else '!='} k(k+1)/2 = {self.k * (self.k + 1) // 2})"
            + "".join(f"\n  note: {f}" for f in self.flags)
        )


def fit_runs_family(
    count_matrix: dict[int, Sequence[int]],
    k_range: Sequence[int],
    d_max: int,
    margin: int = DEFAULT_MARGIN,
) -> list[RunsFitReport]:
    """Rational fit of ``F_k(x) = sum_n f(n, k) x^n`` for each ``k``, checked against the product pattern."""
    reports = []
    for k in k_range:
        column = count_matrix.get(k)
        if column is None:
            reports.append(RunsFitReport(k, None, f"no column for k={k}"))
            continue
        terms = SeriesTerms.from_counts(column)
        try:
            fit = fit_rational(terms, d_max, margin)
        except ValueError as exc:
            reports.append(RunsFitReport(k, None, str(exc)))
            continue
        report = RunsFitReport(k, fit)
        if isinstance(fit, RationalFit):
            report.denominator_matches = poly_trim(fit.denominator) == conjectured_denominator(k)
            report.numerator_degree = poly_degree(fit.numerator)
            report.numerator_degree_matches = report.numerator_degree == k * (k + 1) // 2
            printed = PRINTED_DENOMINATORS.get(k)
            if printed is not None and poly_trim(fit.denominator) != printed:
                report.flags.append(
                    f"fitted denominator {fit.factored_denominator()} differs from the printed "
                    f"{factored(printed)}"
                )
        reports.append(report)
    return reports
