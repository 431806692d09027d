"""Command-line front end: ``popstack <subcommand> ...``.

Exit codes: 0 success, 2 bad arguments, 3 precondition failure,
4 resource exhaustion, 5 check mismatch.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import bfile, dp, fit, modular, perm
from .errors import PreconditionError, ResourceError
from .series import SeriesTerms, TRANSFORMS, transform_series

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_RESOURCE = 4
EXIT_MISMATCH = 5

ENV_WORKERS = "POPSTACK_WORKERS"
ENV_PRECISION = "POPSTACK_PRECISION"

log = logging.getLogger("popstack")


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def nonnegative_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return positive_int(raw)
    except argparse.ArgumentTypeError as exc:
        raise SystemExit(f"popstack: bad {name}: {exc}")


def _emit(text: str, output: str | None, summary: str) -> None:
    if output:
        Path(output).write_text(text)
        print(summary)
    else:
        sys.stdout.write(text)


def _add_backend(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=("bigint", "modular"), default="bigint")
    p.add_argument("--workers", type=positive_int, default=None,
                   help=f"worker threads for the modular backend (env {ENV_WORKERS})")
    p.add_argument("--prime-ceiling", type=positive_int, default=None,
                   help="all primes are chosen below this (default 2^31)")
    p.add_argument("-o", "--output", help="write the data file here instead of stdout")


def _check_backend(parser, args) -> None:
    if args.backend == "bigint":
        for flag, value in (("--workers", args.workers), ("--prime-ceiling", args.prime_ceiling),
                            ("--checkpoint-dir", getattr(args, "checkpoint_dir", None))):
            if value is not None:
                parser.error(f"{flag} only applies to --backend modular")
    if args.workers is None:
        args.workers = _env_int(ENV_WORKERS, 1)
    if args.prime_ceiling is None:
        args.prime_ceiling = modular.DEFAULT_PRIME_CEILING


# ---------------------------------------------------------------------------
# subcommands


def cmd_count(args) -> int:
    N = args.max_n
    if args.backend == "bigint":
        values = dp.count_sequence(N)
    else:
        values = modular.count_parallel(N, args.workers, args.prime_ceiling, args.checkpoint_dir)
    _emit(bfile.format_bfile(values), args.output, f"wrote f(1..{N}) to {args.output}")
    return EXIT_OK


def cmd_count_by_runs(args) -> int:
    N = args.max_n
    kmax = args.kmax or N
    if kmax > N:
        raise PreconditionError(f"--kmax {kmax} exceeds --max-n {N}")
    if args.backend == "bigint":
        cols = dp.count_by_runs(N, kmax)
    else:
        cols = modular.count_by_runs_parallel(N, kmax, args.workers, args.prime_ceiling)
    _emit(bfile.format_matrix(cols), args.output, f"wrote f(n,k) for n <= {N}, k <= {kmax} to {args.output}")
    return EXIT_OK


def cmd_brute(args) -> int:
    try:
        report = perm.brute_count(args.n)
    except ValueError as exc:
        raise PreconditionError(str(exc))
    for line in report.lines():
        print(line)
    if args.check_against:
        offset, values = bfile.read_bfile(args.check_against)
        idx = args.n - offset
        if not 0 <= idx < len(values):
            raise PreconditionError(f"{args.check_against} has no entry for n = {args.n}")
        if values[idx] != report.total:
            print(f"MISMATCH n {args.n}: brute {report.total}, file {values[idx]}")
            return EXIT_MISMATCH
        print(f"match n {args.n}")
    return EXIT_OK


def _load_terms(args) -> SeriesTerms:
    if args.column is not None:
        matrix = bfile.read_matrix(args.input)
        if not matrix:
            raise PreconditionError(f"{args.input} is empty")
        counts = bfile.matrix_column(matrix, args.column)
        return SeriesTerms.from_counts(counts, args.a0 or 0)
    offset, values = bfile.read_bfile(args.input)
    if offset == 0:
        if args.a0 is not None:
            raise PreconditionError("--a0 only applies to sequences starting at n = 1")
        return SeriesTerms(values, ["a_0 taken from the file"])
    if offset != 1:
        raise PreconditionError(f"sequence starts at n = {offset}; expected 0 or 1")
    return SeriesTerms.from_counts(values, args.a0 or 0)


def cmd_guess(args) -> int:
    terms = _load_terms(args)
    if args.terms:
        terms = terms.truncated(args.terms)
    if args.transform:
        terms = transform_series(terms, args.transform)
    if args.family == "rational":
        result = fit.fit_rational(terms, args.d_max, args.margin, prime=args.prime)
    elif args.family == "algebraic":
        result = fit.fit_algebraic(terms, args.m_max, args.d_max, args.margin, args.max_unknowns, args.prime)
    else:
        result = fit.fit_dfinite(terms, args.k_max, args.d_max, args.margin, args.max_unknowns, args.prime)
    for note in terms.notes:
        print(f"# {note}")
    if isinstance(result, fit.NegativeCertificate):
        print(f"negative: {result.claim()}")
        if args.recheck:
            ok = fit.recheck_certificate(result, terms)
            print(f"recheck at a second prime: {'confirmed' if ok else 'FAILED'}")
            if not ok:
                return EXIT_MISMATCH
    else:
        print(f"{args.family} fit: {result.canonical()}")
        if isinstance(result, fit.RationalFit):
            print(f"denominator: {result.factored_denominator()}")
        print(f"verified on all {len(terms)} terms: {fit.verify_fit(result, terms)}")
    if args.output:
        Path(args.output).write_text(fit.fit_to_json(result) + "\n")
        print(f"wrote {args.output}")
    return EXIT_OK


def cmd_asymptote(args) -> int:
    from . import asymptotics
    from .series import egf

    offset, values = bfile.read_bfile(args.input)
    if offset != 1:
        raise PreconditionError("asymptote expects raw counts starting at n = 1")
    if args.terms:
        values = values[: args.terms]
    if len(values) < asymptotics.MIN_GROWTH_TERMS:
        raise PreconditionError(
            f"need at least {asymptotics.MIN_GROWTH_TERMS} terms, got {len(values)}"
        )
    counts = SeriesTerms.from_counts(values)
    bits = args.precision or _env_int(ENV_PRECISION, asymptotics.DEFAULT_PRECISION_BITS)
    grid = asymptotics.default_grid(len(counts), args.margin, bits)
    report = asymptotics.analyze(egf(counts), grid)
    print(f"# {counts.notes[0]}")
    print(f"approximants: {len(report.approximants)} ok, {len(report.failures)} failed")
    for line in report.failures:
        print(f"  failed {line}")
    print(f"singularities seen by >= {report.quorum()} approximants, by modulus:")
    for c in report.supported():
        print("  " + c.describe(args.digits))
    dom = report.dominant()
    growth = asymptotics.growth_constants(counts, dom.location.real, dom.agreed_digits, bits)
    print(growth.describe(args.digits))
    if args.output:
        Path(args.output).write_text(asymptotics.full_report_json(report, growth) + "\n")
        print(f"wrote {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="popstack", description="Count and analyse pop-stacked permutations.")
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true")
    noise.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="f(1..N) as a b-file")
    p.add_argument("--max-n", type=positive_int, required=True)
    _add_backend(p)
    p.add_argument("--checkpoint-dir", help="keep per-prime residues here and reuse them")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("count-by-runs", help="f(n,k) by number of ascending runs")
    p.add_argument("--max-n", type=positive_int, required=True)
    p.add_argument("--kmax", type=positive_int)
    _add_backend(p)
    p.set_defaults(func=cmd_count_by_runs)

    p = sub.add_parser("brute", help="exhaustive count for small n")
    p.add_argument("--n", type=nonnegative_int, required=True)
    p.add_argument("--check-against", metavar="BFILE")
    p.set_defaults(func=cmd_brute)

    p = sub.add_parser("guess", help="search for a rational, algebraic or D-finite fit")
    p.add_argument("input", help="b-file, or matrix file with --column")
    p.add_argument("--family", choices=("rational", "algebraic", "dfinite"), default="rational")
    p.add_argument("--column", type=positive_int, help="read column k of a matrix file")
    p.add_argument("--terms", type=positive_int, help="use only the first this many terms")
    p.add_argument("--a0", type=int, help="value of a_0 (default 0)")
    p.add_argument("--transform", help=f"comma chain of {', '.join(TRANSFORMS)}")
    p.add_argument("--d-max", type=nonnegative_int, default=20)
    p.add_argument("--m-max", type=positive_int, default=2)
    p.add_argument("--k-max", type=nonnegative_int, default=2)
    p.add_argument("--max-unknowns", type=positive_int)
    p.add_argument("--margin", type=positive_int, default=fit.DEFAULT_MARGIN)
    p.add_argument("--prime", type=positive_int, default=fit.linalg.DEFAULT_SCREEN_PRIME)
    p.add_argument("--recheck", action="store_true", help="re-verify a negative result at a second prime")
    p.add_argument("-o", "--output", help="write the fit or certificate as JSON")
    p.set_defaults(func=cmd_guess)

    p = sub.add_parser("asymptote", help="differential-approximant analysis of the EGF")
    p.add_argument("input", help="b-file of raw counts starting at n = 1")
    p.add_argument("--precision", type=positive_int, help=f"bits (env {ENV_PRECISION}, default 256)")
    p.add_argument("--margin", type=positive_int, default=10)
    p.add_argument("--terms", type=positive_int)
    p.add_argument("--digits", type=positive_int, default=40, help="digits shown at most")
    p.add_argument("-o", "--output", help="write the report as JSON")
    p.set_defaults(func=cmd_asymptote)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "backend"):
        _check_backend(parser, args)
    level = logging.INFO if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"popstack: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ResourceError, MemoryError) as exc:
        n = getattr(exc, "N", None) or getattr(args, "max_n", None)
        print(f"popstack: out of resources at N = {n}: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, OSError) as exc:
        print(f"popstack: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
