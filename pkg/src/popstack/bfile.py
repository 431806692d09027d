"""Plain-text sequence files.

A b-file has one ``n value`` pair per line (base 10, ``#`` comments allowed).
A matrix file has ``n k value`` triples, zero entries omitted, sorted by
``(n, k)``.
"""

from __future__ import annotations

import io
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence


def format_bfile(values: Sequence, offset: int = 1) -> str:
    return "".join(f"{n} {v}\n" for n, v in enumerate(values, start=offset))


def write_bfile(path: Path | str, values: Sequence, offset: int = 1) -> None:
    Path(path).write_text(format_bfile(values, offset))


def _lines(source) -> Iterable[tuple[int, list[str]]]:
    text = source.read() if isinstance(source, io.IOBase) else Path(source).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _number(tok: str):
    v = Fraction(tok)
    return v.numerator if v.denominator == 1 else v


def read_bfile(source) -> tuple[int, list]:
    """Return ``(offset, values)``; indices must be consecutive."""
    offset = None
    values: list = []
    for lineno, toks in _lines(source):
        if len(toks) != 2:
            raise ValueError(f"line {lineno}: expected 'n value', got {' '.join(toks)!r}")
        n = int(toks[0])
        if offset is None:
            offset = n
        elif n != offset + len(values):
            raise ValueError(f"line {lineno}: index {n} breaks the run starting at {offset}")
        values.append(_number(toks[1]))
    if offset is None:
        raise ValueError("empty b-file")
    return offset, values


def format_matrix(columns: Mapping[int, Sequence[int]]) -> str:
    """``columns[k][n-1] = f(n, k)`` to sorted ``n k value`` lines."""
    rows = []
    for k, col in columns.items():
        for n, v in enumerate(col, start=1):
            if v:
                rows.append((n, k, v))
    rows.sort()
    return "".join(f"{n} {k} {v}\n" for n, k, v in rows)


def write_matrix(path: Path | str, columns: Mapping[int, Sequence[int]]) -> None:
    Path(path).write_text(format_matrix(columns))


def read_matrix(source) -> dict[int, dict[int, int]]:
    """``{n: {k: value}}`` from a matrix file."""
    out: dict[int, dict[int, int]] = {}
    for lineno, toks in _lines(source):
        if len(toks) != 3:
            raise ValueError(f"line {lineno}: expected 'n k value', got {' '.join(toks)!r}")
        n, k, v = int(toks[0]), int(toks[1]), int(toks[2])
        out.setdefault(n, {})[k] = v
    return out


def matrix_column(matrix: Mapping[int, Mapping[int, int]], k: int, n_max: int | None = None) -> list[int]:
    """``f(1, k) .. f(n_max, k)`` with omitted entries read as zero."""
    n_max = max(matrix) if n_max is None else n_max
    return [matrix.get(n, {}).get(k, 0) for n in range(1, n_max + 1)]
