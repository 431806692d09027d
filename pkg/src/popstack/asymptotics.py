"""Differential approximants and growth-constant estimates.

An approximant is a linear ODE ``sum_j p_j(x) F^(j)(x) (+ q(x)) = 0`` with
polynomial coefficients of degree ``d``, fitted exactly to the first terms of
a series. Singularities of its solutions sit at the roots of the leading
coefficient ``p_k``; at a simple root ``x0`` the solution behaves like
``(1 - x/x0)^g`` with ``g = k - 1 - p_{k-1}(x0) / p_k'(x0)``.

Exact rationals go in; floating point only appears when the roots of
``p_k`` are located.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import flint
import mpmath
import numpy as np

from . import linalg
from .errors import PreconditionError
from .fit import DFiniteFit, poly_trim
from .series import SeriesTerms

DEFAULT_PRECISION_BITS = 256
DEFAULT_MARGIN = 10
CLUSTER_RADIUS = 1e-3
MIN_GROWTH_TERMS = 50


class ApproximantError(ValueError):
    """No usable ODE at this ``(k, d)``; try a different configuration."""


class ConvergenceError(ArithmeticError):
    """Root refinement stalled; raise the working precision."""


@dataclass(frozen=True)
class ApproximantConfig:
    k: int
    d: int
    inhomogeneous: bool = False
    precision_bits: int = DEFAULT_PRECISION_BITS

    @property
    def unknowns(self) -> int:
        return (self.k + 1) * (self.d + 1) + (self.d + 1 if self.inhomogeneous else 0)

    @property
    def terms_needed(self) -> int:
        # one unknown is fixed by normalization; the k-th derivative eats k terms
        return self.unknowns - 1 + self.k

    def label(self) -> str:
        return f"k={self.k},d={self.d},{'inhom' if self.inhomogeneous else 'hom'}"


def largest_degree(k: int, inhomogeneous: bool, n_terms: int, margin: int = DEFAULT_MARGIN) -> int:
    """Largest ``d`` whose approximant leaves ``margin`` terms unused."""
    blocks = k + 2 if inhomogeneous else k + 1
    return (n_terms - margin - k + 1) // blocks - 1


def default_grid(
    n_terms: int, margin: int = DEFAULT_MARGIN, precision_bits: int = DEFAULT_PRECISION_BITS
) -> list[ApproximantConfig]:
    """Orders 2..4; per order two homogeneous degrees and one inhomogeneous one."""
    grid = []
    for k in (2, 3, 4):
        dh = largest_degree(k, False, n_terms, margin)
        di = largest_degree(k, True, n_terms, margin)
        for d, inh in ((dh, False), (dh - 1, False), (di, True)):
            if d >= 1:
                grid.append(ApproximantConfig(k, d, inh, precision_bits))
    return grid


def _fq(c) -> flint.fmpq:
    c = Fraction(c)
    return flint.fmpq(c.numerator, c.denominator)


def differential_approximant(egf_terms: SeriesTerms, config: ApproximantConfig) -> DFiniteFit:
    """Exact ODE matching the first ``config.terms_needed`` coefficients.

    Normalizes ``p_k(0) = 1`` to get a square system; if that system is
    singular, falls back to any nullspace vector of the homogeneous one.
    """
    k, d = config.k, config.d
    if k < 1 or d < 0:
        raise PreconditionError("approximants need k >= 1 and d >= 0")
    if config.terms_needed > len(egf_terms):
        raise PreconditionError(
            f"{config.label()} needs {config.terms_needed} terms, only {len(egf_terms)} supplied"
        )
    a = [_fq(c) for c in egf_terms.coeffs]
    ders = [a]
    for _ in range(k):
        prev = ders[-1]
        ders.append([prev[j + 1] * (j + 1) for j in range(len(prev) - 1)])
    E = config.unknowns - 1
    zero = flint.fmpq(0)
    cols = []
    for i in range(k + 1):
        for j in range(d + 1):
            cols.append([ders[i][r - j] if r >= j else zero for r in range(E)])
    if config.inhomogeneous:
        for j in range(d + 1):
            cols.append([flint.fmpq(int(r == j)) for r in range(E)])
    norm = k * (d + 1)
    others = [c for idx, c in enumerate(cols) if idx != norm]
    A = flint.fmpq_mat(E, E, [others[c][r] for r in range(E) for c in range(E)])
    b = flint.fmpq_mat(E, 1, [-cols[norm][r] for r in range(E)])
    try:
        x = A.solve(b)
        sol = [Fraction(int(x[i, 0].p), int(x[i, 0].q)) for i in range(E)]
        sol.insert(norm, Fraction(1))
    except ZeroDivisionError:
        # the series satisfies a smaller equation; any nullspace vector is an
        # annihilator, and fixed weights keep the choice reproducible
        rows = linalg.integer_rows(
            [[Fraction(int(cols[c][r].p), int(cols[c][r].q)) for c in range(len(cols))] for r in range(E)]
        )
        basis = linalg.nullspace_exact(rows, len(cols))
        if not basis:
            raise ApproximantError("only the trivial solution")
        lead = slice(k * (d + 1), (k + 1) * (d + 1))
        for shift in range(1, 4):
            sol = [Fraction(sum((i + shift) * v[c] for i, v in enumerate(basis))) for c in range(len(cols))]
            if any(sol[lead]):
                break
    parts = [sol[i * (d + 1) : (i + 1) * (d + 1)] for i in range(k + 1)]
    inh = sol[(k + 1) * (d + 1) :] if config.inhomogeneous else []
    norm_ = lambda p: [v.numerator if v.denominator == 1 else v for v in p]
    polys = [poly_trim(norm_(p)) for p in parts]
    if not polys[k]:
        raise ApproximantError("leading polynomial vanishes")
    return DFiniteFit(polys, poly_trim(norm_(inh)), k, d, config.terms_needed, None)


# ---------------------------------------------------------------------------
# roots


@dataclass
class Root:
    """A root of the leading polynomial of one approximant."""

    location: mpmath.mpc
    multiplicity: int
    exponent: mpmath.mpf | None


def _int_poly(p: Sequence) -> flint.fmpz_poly:
    den = math.lcm(*(Fraction(c).denominator for c in p))
    return flint.fmpz_poly([int(Fraction(c) * den) for c in p])


def _aberth(coeffs: Sequence[int], bits: int, max_iter: int = 200) -> list[mpmath.mpc]:
    """All roots of a squarefree integer polynomial (lowest degree first).

    Runs at the caller's working precision and stops once every correction
    is below ``2^-bits`` relative.
    """
    deg = len(coeffs) - 1
    if deg == 0:
        return []
    if deg == 1:
        return [mpmath.mpc(mpmath.mpf(-coeffs[0]) / coeffs[1])]
    big = max(abs(c) for c in coeffs)
    scaled = [float(mpmath.mpf(c) / big) for c in coeffs]
    init = np.roots(scaled[::-1])
    rng = np.random.default_rng(0)
    # eigenvalues can coincide or blow up on badly scaled input; nudge them apart
    z = []
    for r in init:
        if not np.isfinite(r):
            r = complex(rng.normal(), rng.normal())
        z.append(mpmath.mpc(r.real, r.imag) * (1 + mpmath.mpf(2) ** -40 * len(z)))
    hi = list(reversed([mpmath.mpf(c) for c in coeffs]))
    tol = mpmath.mpf(2) ** (-bits + 16)
    for _ in range(max_iter):
        worst = mpmath.mpf(0)
        for i in range(deg):
            pv, dv = mpmath.polyval(hi, z[i], derivative=True)
            if pv == 0:
                continue
            ratio = pv / dv
            s = mpmath.fsum(1 / (z[i] - z[j]) for j in range(deg) if j != i)
            step = ratio / (1 - ratio * s)
            z[i] -= step
            worst = max(worst, abs(step) / max(abs(z[i]), mpmath.mpf(1)))
        if worst < tol:
            return z
    raise ConvergenceError(f"root refinement did not converge at {bits} bits")


def _refined_roots(coeffs: Sequence[int], bits: int) -> list[mpmath.mpc]:
    # huge coefficients cancel on evaluation, so refine with guard bits and
    # escalate before giving up
    for work in (2 * bits, 4 * bits, 8 * bits):
        try:
            with mpmath.workprec(work):
                return _aberth(coeffs, bits)
        except ConvergenceError:
            continue
    raise ConvergenceError(f"root refinement did not converge at {bits} bits (tried up to {8 * bits})")


def singularities(ode: DFiniteFit, precision_bits: int = DEFAULT_PRECISION_BITS) -> list[Root]:
    """Roots of ``p_k`` with multiplicity; exponents at the simple ones."""
    lead = poly_trim(ode.leading)
    if not lead:
        raise PreconditionError("leading polynomial is zero")
    k = ode.k
    with mpmath.workprec(precision_bits):
        P = _int_poly(lead)
        content, factors = P.factor_squarefree()
        dlead = [mpmath.mpf(Fraction(c).numerator) / Fraction(c).denominator for c in lead]
        dlead = [i * c for i, c in enumerate(dlead)][1:]
        sub = ode.polys[k - 1] if k >= 1 else []
        sub_mp = [mpmath.mpf(Fraction(c).numerator) / Fraction(c).denominator for c in sub]
        out = []
        for factor, mult in factors:
            coeffs = [int(c) for c in factor.coeffs()]
            for z in _refined_roots(coeffs, precision_bits):
                if abs(z.imag) <= abs(z) * mpmath.mpf(2) ** (-precision_bits // 2):
                    z = mpmath.mpc(z.real, 0)
                exponent = None
                if mult == 1:
                    dval = mpmath.polyval(dlead[::-1], z) if dlead else mpmath.mpf(0)
                    sval = mpmath.polyval(sub_mp[::-1], z) if sub_mp else mpmath.mpf(0)
                    g = k - 1 - sval / dval
                    exponent = mpmath.re(g)
                out.append(Root(+z, mult, exponent))
        out.sort(key=lambda r: abs(r.location))
        return out


# ---------------------------------------------------------------------------
# aggregation


@dataclass
class SingularityEstimate:
    location: mpmath.mpc  # imaginary part >= 0; ``conjugate_pair`` covers the mirror
    exponent: mpmath.mpf | None
    agreed_digits: int
    exponent_digits: int
    support: list[str] = field(default_factory=list)
    conjugate_pair: bool = False
    multiple: bool = False

    @property
    def modulus(self):
        return abs(self.location)

    def describe(self, digits: int = 20) -> str:
        shown = max(self.agreed_digits + 2, 6)
        shown = min(shown, digits)
        re_ = mpmath.nstr(self.location.real, shown)
        loc = re_
        if self.conjugate_pair:
            loc += " ± " + mpmath.nstr(self.location.imag, shown) + "i"
        exp = "multiple root" if self.exponent is None else mpmath.nstr(self.exponent, max(self.exponent_digits + 2, 4))
        return f"{loc}  exponent {exp}  agreed_digits {self.agreed_digits}  support {len(self.support)}"

    def to_dict(self, digits: int = 40) -> dict:
        return {
            "real": mpmath.nstr(self.location.real, digits),
            "imag": mpmath.nstr(self.location.imag, digits),
            "conjugate_pair": self.conjugate_pair,
            "exponent": None if self.exponent is None else mpmath.nstr(self.exponent, digits),
            "agreed_digits": self.agreed_digits,
            "exponent_digits": self.exponent_digits,
            "multiple": self.multiple,
            "support": list(self.support),
        }


def _agreement(values: Sequence, centre, cap: int) -> int:
    if len(values) < 2:
        return 0
    spread = max(abs(v - centre) for v in values)
    scale = abs(centre) or mpmath.mpf(1)
    if spread == 0:
        return cap
    return max(0, min(cap, int(mpmath.floor(-mpmath.log10(spread / scale)))))


@dataclass
class AnalysisReport:
    clusters: list[SingularityEstimate]
    approximants: list[str]
    failures: list[str]
    n_terms: int
    precision_bits: int

    def quorum(self) -> int:
        return max(1, (len(self.approximants) + 1) // 2)

    def supported(self) -> list[SingularityEstimate]:
        """Clusters seen by at least half of the successful approximants."""
        return [c for c in self.clusters if len(c.support) >= self.quorum()]

    def dominant(self) -> SingularityEstimate:
        for c in self.supported():
            if not c.conjugate_pair and c.location.real > 0:
                return c
        raise ValueError("no supported positive real singularity")

    def to_dict(self, digits: int = 40) -> dict:
        return {
            "n_terms": self.n_terms,
            "precision_bits": self.precision_bits,
            "approximants": list(self.approximants),
            "failures": list(self.failures),
            "clusters": [c.to_dict(digits) for c in self.clusters],
        }


def analyze(
    egf_terms: SeriesTerms,
    config_grid: Sequence[ApproximantConfig] | None = None,
    radius: float = CLUSTER_RADIUS,
) -> AnalysisReport:
    """Run every approximant, cluster their singularities and score agreement."""
    grid = list(config_grid) if config_grid is not None else default_grid(len(egf_terms))
    if not grid:
        raise PreconditionError("empty approximant grid")
    bits = max(c.precision_bits for c in grid)
    cap = int(bits * math.log10(2))
    samples = []  # (location with im >= 0, exponent, label, multiplicity, had negative imag)
    labels, failures = [], []
    for cfg in grid:
        try:
            ode = differential_approximant(egf_terms, cfg)
            roots = singularities(ode, cfg.precision_bits)
        except (ApproximantError, ConvergenceError, PreconditionError) as exc:
            failures.append(f"{cfg.label()}: {exc}")
            continue
        labels.append(cfg.label())
        for r in roots:
            z = r.location
            if z.imag < 0:
                continue  # its conjugate is in the list as well (real coefficients)
            samples.append((z, r.exponent, cfg.label(), r.multiplicity))
    if not labels:
        raise ApproximantError("every approximant failed: " + "; ".join(failures))

    with mpmath.workprec(bits):
        samples.sort(key=lambda s: (abs(s[0]), s[0].imag))
        groups: list[list] = []
        for s in samples:
            for g in groups:
                centre = g[0][0]
                if abs(s[0] - centre) <= radius * abs(centre) and all(m[2] != s[2] for m in g):
                    g.append(s)
                    break
            else:
                groups.append([s])
        clusters = []
        for g in groups:
            locs = [m[0] for m in g]
            centre = mpmath.fsum(locs) / len(locs)
            exps = [m[1] for m in g if m[1] is not None]
            ecentre = mpmath.fsum(exps) / len(exps) if exps else None
            pair = any(abs(z.imag) > 0 for z in locs)
            if not pair:
                centre = mpmath.mpc(centre.real, 0)
            clusters.append(
                SingularityEstimate(
                    location=centre,
                    exponent=ecentre,
                    agreed_digits=_agreement(locs, centre, cap),
                    exponent_digits=_agreement(exps, ecentre, cap) if exps else 0,
                    support=[m[2] for m in g],
                    conjugate_pair=pair,
                    multiple=any(m[3] > 1 for m in g),
                )
            )
        clusters.sort(key=lambda c: (abs(c.location), c.location.imag))
    return AnalysisReport(clusters, labels, failures, len(egf_terms), bits)


# ---------------------------------------------------------------------------
# growth constants


@dataclass
class GrowthEstimate:
    mu: mpmath.mpf
    mu_inv: mpmath.mpf
    C: mpmath.mpf
    mu_digits: int
    C_digits: int
    partial: bool = False
    notes: list[str] = field(default_factory=list)

    def describe(self, digits: int = 40) -> str:
        def show(v, dg):
            return mpmath.nstr(v, max(min(dg, digits), 6))

        lines = [
            f"mu     = {show(self.mu, self.mu_digits)}  ({self.mu_digits} digits)",
            f"mu_inv = {show(self.mu_inv, self.mu_digits)}  ({self.mu_digits} digits)",
            f"C      = {show(self.C, self.C_digits)}  ({self.C_digits} digits)",
        ]
        if self.partial:
            lines.append("partial estimate: " + "; ".join(self.notes))
        return "\n".join(lines)

    def to_dict(self, digits: int = 40) -> dict:
        return {
            "mu": mpmath.nstr(self.mu, digits),
            "mu_inv": mpmath.nstr(self.mu_inv, digits),
            "C": mpmath.nstr(self.C, digits),
            "mu_digits": self.mu_digits,
            "C_digits": self.C_digits,
            "partial": self.partial,
            "notes": list(self.notes),
        }


def _tail_limit(seq: Sequence[mpmath.mpf]) -> mpmath.mpf:
    """Limit of ``c + alpha r^n`` from its last three terms (Aitken), else the last term."""
    if len(seq) < 3:
        return seq[-1]
    x0, x1, x2 = seq[-3], seq[-2], seq[-1]
    den = x2 - 2 * x1 + x0
    if den == 0 or abs(den) < abs(x2) * mpmath.eps * 1e6:
        return x2
    est = x2 - (x2 - x1) ** 2 / den
    # Aitken only helps while the corrections are shrinking
    return est if abs(est - x2) <= abs(x2 - x1) * 10 else x2


def growth_constants(
    counting_terms: SeriesTerms,
    mu,
    mu_digits: int | None = None,
    precision_bits: int = DEFAULT_PRECISION_BITS,
) -> GrowthEstimate:
    """Fit ``a_n ~ C n! mu^-n`` for raw counts ``a_n`` and a dominant singularity ``mu``.

    ``C`` is extrapolated from ``C_n = a_n mu^n / n!``; its digit count is the
    agreement with the same extrapolation after dropping the last 10% of
    terms, capped by how well ``mu`` is known.
    """
    cap = int(precision_bits * math.log10(2))
    with mpmath.workprec(precision_bits):
        mu = mpmath.mpf(mu)
        if mu <= 0:
            raise PreconditionError("mu must be positive")
        mu_digits = cap if mu_digits is None else min(mu_digits, cap)
        coeffs = counting_terms.coeffs
        idx = [n for n, c in enumerate(coeffs) if c != 0]
        if not idx:
            raise PreconditionError("all terms are zero")
        notes = []
        partial = len(idx) < MIN_GROWTH_TERMS
        if partial:
            notes.append(f"only {len(idx)} nonzero terms (< {MIN_GROWTH_TERMS}); no stability check")
        start = idx[0]
        C_n = []
        for n in range(start, len(coeffs)):
            c = Fraction(coeffs[n])
            C_n.append(mpmath.mpf(c.numerator) / c.denominator * mu**n / mpmath.factorial(n))
        full = _tail_limit(C_n)
        C_digits = 0
        if not partial:
            cut = max(3, len(C_n) - max(1, len(C_n) // 10))
            short = _tail_limit(C_n[:cut])
            C_digits = _agreement([short, full], full, cap)
            # an error e in mu moves C_n by about n e / mu relative
            n_last = len(coeffs) - 1
            mu_limited = mu_digits - int(math.ceil(math.log10(max(n_last, 1))))
            C_digits = max(0, min(C_digits, mu_limited))
        return GrowthEstimate(mu, 1 / mu, full, mu_digits, C_digits, partial, notes)


def full_report_json(report: AnalysisReport, growth: GrowthEstimate | None, digits: int = 40) -> str:
    obj = report.to_dict(digits)
    obj["growth"] = None if growth is None else growth.to_dict(digits)
    return json.dumps(obj, indent=2)
