"""Multi-prime evaluation of the counting DP and Chinese remaindering.

Each prime gets its own full DP run (no shared state), so primes can be
farmed out to a worker pool; results are merged in a fixed prime order so
the reconstructed integers never depend on scheduling.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import flint

from . import dp
from .errors import ReconstructionError
from .rings import PrimeField

log = logging.getLogger(__name__)

# (ceiling - 1)**2 < 2**62 keeps residue products inside int64
DEFAULT_PRIME_CEILING = 2**31


class WorkerError(RuntimeError):
    def __init__(self, prime: int, cause: BaseException):
        super().__init__(f"worker for prime {prime} failed: {cause!r}")
        self.prime = prime


@dataclass(frozen=True)
class PrimeBasis:
    primes: tuple[int, ...]
    modulus_product: int

    @classmethod
    def of(cls, primes: Sequence[int]) -> "PrimeBasis":
        primes = tuple(int(p) for p in primes)
        if len(set(primes)) != len(primes):
            raise ValueError("primes must be distinct")
        return cls(primes, math.prod(primes))


@dataclass
class ResidueBundle:
    """``residues[p]`` is a sequence of values reduced mod ``p``."""

    residues: dict[int, list[int]] = field(default_factory=dict)

    def validate(self) -> int:
        lengths = {len(seq) for seq in self.residues.values()}
        if len(lengths) > 1:
            raise ReconstructionError(f"residue sequences have different lengths: {sorted(lengths)}")
        for p, seq in self.residues.items():
            if any(not 0 <= r < p for r in seq):
                raise ReconstructionError(f"residue out of range for prime {p}")
        return lengths.pop() if lengths else 0


def _prev_prime(n: int) -> int:
    n -= 1
    while n >= 2 and not flint.fmpz(n).is_prime():
        n -= 1
    return n


def select_primes(N: int, prime_ceiling: int = DEFAULT_PRIME_CEILING, bound: int | None = None) -> PrimeBasis:
    """Largest primes below ``prime_ceiling``, descending, until their product exceeds ``bound``.

    ``bound`` defaults to ``N!``, the trivial upper bound on ``f(n)`` for ``n <= N``.
    """
    if prime_ceiling < 3:
        raise ValueError("prime_ceiling must be at least 3")
    if prime_ceiling > DEFAULT_PRIME_CEILING:
        raise ValueError(f"prime_ceiling above 2**31 would overflow the int64 kernel")
    bound = math.factorial(max(N, 0)) if bound is None else bound
    primes: list[int] = []
    product = 1
    p = prime_ceiling
    while product <= bound:
        p = _prev_prime(p)
        if p < 2:
            raise ValueError(
                f"primes below {prime_ceiling} cannot exceed the bound for N={N}; raise the ceiling"
            )
        primes.append(p)
        product *= p
    return PrimeBasis(tuple(primes), product)


def crt_reconstruct(bundle: ResidueBundle, basis: PrimeBasis) -> list[int]:
    """Garner's mixed-radix reconstruction, position by position, in basis order."""
    if set(bundle.residues) != set(basis.primes):
        raise ReconstructionError(
            f"bundle primes {sorted(bundle.residues)} do not match basis {sorted(basis.primes)}"
        )
    length = bundle.validate()
    primes = basis.primes
    # inverse of the running modulus (p_0 ... p_{i-1}) modulo p_i
    inverses = []
    running = 1
    for p in primes:
        inverses.append(pow(running, -1, p))
        running *= p
    out = []
    for n in range(length):
        x = 0
        modulus = 1
        for p, inv in zip(primes, inverses):
            t = ((bundle.residues[p][n] - x) * inv) % p
            x += modulus * t
            modulus *= p
        out.append(x)
    return out


# --- residue checkpoints: "p N" then N lines "n residue" ---------------------


def checkpoint_path(directory: Path | str, prime: int, tag: str = "count") -> Path:
    return Path(directory) / f"{tag}-{prime}.res"


def write_checkpoint(path: Path | str, prime: int, residues: Sequence[int]) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(f"{prime} {len(residues)}\n")
        for n, r in enumerate(residues, start=1):
            fh.write(f"{n} {r}\n")
    os.replace(tmp, path)


def read_checkpoint(path: Path | str) -> tuple[int, list[int]]:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: bad checkpoint header")
        prime, N = int(header[0]), int(header[1])
        residues = []
        for expected, line in enumerate(fh, start=1):
            n, r = (int(tok) for tok in line.split())
            if n != expected:
                raise ValueError(f"{path}: expected index {expected}, found {n}")
            residues.append(r)
    if len(residues) != N:
        raise ValueError(f"{path}: truncated ({len(residues)} of {N} lines)")
    return prime, residues


def _run_pool(task: Callable[[int], object], primes: Sequence[int], workers: int) -> dict[int, object]:
    if workers < 1:
        raise ValueError("workers must be >= 1")

    def guarded(p):
        try:
            return task(p)
        except Exception as exc:
            raise WorkerError(p, exc) from exc

    if workers == 1:
        return {p: guarded(p) for p in primes}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {p: pool.submit(guarded, p) for p in primes}
        return {p: fut.result() for p, fut in futures.items()}


def residues_for_prime(N: int, prime: int, checkpoint_dir: Path | str | None = None) -> list[int]:
    if checkpoint_dir is not None:
        path = checkpoint_path(checkpoint_dir, prime)
        if path.exists():
            p, residues = read_checkpoint(path)
            if p == prime and len(residues) >= N:
                return residues[:N]
    residues = dp.count_sequence(N, PrimeField(prime))
    if checkpoint_dir is not None:
        write_checkpoint(checkpoint_path(checkpoint_dir, prime), prime, residues)
    return residues


def count_parallel(
    N: int,
    workers: int = 1,
    prime_ceiling: int = DEFAULT_PRIME_CEILING,
    checkpoint_dir: Path | str | None = None,
) -> list[int]:
    """Exact ``f(1..N)`` from independent prime-field runs and CRT."""
    if N <= 0:
        return []
    basis = select_primes(N, prime_ceiling)
    log.info("N=%d: %d primes, %d workers", N, len(basis.primes), workers)
    if checkpoint_dir is not None:
        Path(checkpoint_dir).mkdir(parents=True, exist_ok=True)
    results = _run_pool(lambda p: residues_for_prime(N, p, checkpoint_dir), basis.primes, workers)
    return crt_reconstruct(ResidueBundle(dict(results)), basis)


def count_by_runs_parallel(
    N: int,
    Kmax: int | None = None,
    workers: int = 1,
    prime_ceiling: int = DEFAULT_PRIME_CEILING,
) -> dict[int, list[int]]:
    """Exact ``f(n, k)`` for ``n <= N, k <= Kmax`` via primes and CRT.

    Ballots of [n] with k blocks number at most ``k**n``, so fewer primes are
    needed than for the totals when ``Kmax`` is small.
    """
    if N <= 0:
        return {}
    Kmax = N if Kmax is None else Kmax
    basis = select_primes(N, prime_ceiling, bound=min(math.factorial(N), Kmax**N))
    results = _run_pool(
        lambda p: dp.count_by_runs(N, Kmax, PrimeField(p)), basis.primes, workers
    )
    out = {}
    for k in range(1, Kmax + 1):
        bundle = ResidueBundle({p: results[p][k] for p in basis.primes})
        out[k] = crt_reconstruct(bundle, basis)
    return out
