"""Exact dyadic rationals ``numerator / 2**exponent``."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering

_PATTERN = re.compile(r"^\s*(-?\d+)\s*(?:/\s*2\^(\d+))?\s*$")


@total_ordering
@dataclass(frozen=True, init=False)
class Dyadic:
    """A dyadic rational in canonical form: odd numerator, or exponent 0.

    Sums, differences, products and comparisons are exact; the only lossy
    operation is ``float()``.
    """

    numerator: int
    exponent: int

    def __init__(self, numerator: int = 0, exponent: int = 0):
        num, exp = int(numerator), int(exponent)
        if num == 0:
            exp = 0
        else:
            shift = (num & -num).bit_length() - 1
            if exp < shift:
                shift = max(exp, 0)
            num >>= shift
            exp -= shift
        if exp < 0:
            num <<= -exp
            exp = 0
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "exponent", exp)

    @classmethod
    def pow2(cls, k: int) -> "Dyadic":
        """2**-k for k >= 0."""
        return cls(1, k)

    @classmethod
    def from_float(cls, x: float) -> "Dyadic":
        num, den = float(x).as_integer_ratio()
        return cls(num, den.bit_length() - 1)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        m = _PATTERN.match(text)
        if not m:
            raise ValueError(f"not a dyadic rational: {text!r}")
        return cls(int(m.group(1)), int(m.group(2) or 0))

    def scaled(self, exponent: int) -> int:
        """Numerator over the common denominator 2**exponent (must be exact)."""
        if exponent < self.exponent:
            raise ValueError(f"{self} is not a multiple of 2^-{exponent}")
        return self.numerator << (exponent - self.exponent)

    def _align(self, other: "Dyadic") -> tuple[int, int, int]:
        e = max(self.exponent, other.exponent)
        return self.scaled(e), other.scaled(e), e

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        a, b, e = self._align(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, int):
            return Dyadic(self.numerator * other, self.exponent)
        if not isinstance(other, Dyadic):
            return NotImplemented
        return Dyadic(self.numerator * other.numerator, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __neg__(self):
        return Dyadic(-self.numerator, self.exponent)

    def half(self) -> "Dyadic":
        return Dyadic(self.numerator, self.exponent + 1)

    def __lt__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        a, b, _ = self._align(other)
        return a < b

    def __eq__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self.numerator == other.numerator and self.exponent == other.exponent

    def __hash__(self):
        return hash((self.numerator, self.exponent))

    def __float__(self):
        return self.numerator / (1 << self.exponent)

    def __str__(self):
        return f"{self.numerator}/2^{self.exponent}"

    def __repr__(self):
        return f"Dyadic({self.numerator}, {self.exponent})"


def _coerce(x):
    if isinstance(x, Dyadic):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Dyadic(x)
    return None


ZERO = Dyadic(0)
ONE = Dyadic(1)
