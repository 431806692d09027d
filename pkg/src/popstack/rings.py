"""Coefficient rings the counting engine can run over."""

from __future__ import annotations

import numpy as np


class IntegerRing:
    """Arbitrary-precision integers (numpy object arrays of Python ints)."""

    dtype = object
    modulus = None

    def __repr__(self) -> str:
        return "IntegerRing()"

    def __eq__(self, other) -> bool:
        return isinstance(other, IntegerRing)

    def __hash__(self) -> int:
        return hash("ZZ")

    zero = 0
    one = 1

    def __call__(self, value: int) -> int:
        return int(value)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def eq(self, a, b) -> bool:
        return a == b

    def zeros(self, shape) -> np.ndarray:
        out = np.empty(shape, dtype=object)
        out.fill(0)
        return out

    def reduce(self, arr):
        return arr

    def to_int(self, value) -> int:
        return int(value)


class PrimeField:
    """Integers modulo a prime ``p < 2**31`` (so residue products fit in int64)."""

    dtype = np.int64

    def __init__(self, p: int):
        p = int(p)
        if p < 2 or p >= 2**31:
            raise ValueError(f"prime modulus must lie in [2, 2**31), got {p}")
        self.modulus = p
        self.zero = 0
        self.one = 1 % p

    def __repr__(self) -> str:
        return f"PrimeField({self.modulus})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.modulus == self.modulus

    def __hash__(self) -> int:
        return hash(("GF", self.modulus))

    def __call__(self, value: int) -> int:
        return int(value) % self.modulus

    def add(self, a, b):
        return (a + b) % self.modulus

    def sub(self, a, b):
        return (a - b) % self.modulus

    def mul(self, a, b):
        return (a * b) % self.modulus

    def eq(self, a, b) -> bool:
        return (a - b) % self.modulus == 0

    def zeros(self, shape) -> np.ndarray:
        return np.zeros(shape, dtype=np.int64)

    def reduce(self, arr):
        return arr % self.modulus

    def to_int(self, value) -> int:
        return int(value) % self.modulus


ZZ = IntegerRing()
