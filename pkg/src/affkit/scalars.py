"""Exact Gaussian-rational scalars.

A :class:`Scalar` is a complex number ``re + im*i`` with arbitrary-precision
rational parts.  All arithmetic is exact; there is no rounding anywhere.
Scalars with ``im == 0`` are closed under the four field operations, and
conjugation is an involution.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions, and 'p/q' strings to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot coerce {x!r} to an exact rational")


@dataclass(frozen=True, slots=True)
class Scalar:
    """A Gaussian rational ``re + im*i`` with exact Fraction parts."""

    re: Fraction
    im: Fraction

    @staticmethod
    def of(re, im=0) -> Scalar:
        return Scalar(as_fraction(re), as_fraction(im))

    @property
    def is_zero(self) -> bool:
        return not self.re and not self.im

    @property
    def is_real(self) -> bool:
        return not self.im

    def conjugate(self) -> Scalar:
        return Scalar(self.re, -self.im)

    def norm2(self) -> Fraction:
        """Squared modulus, an exact nonnegative rational."""
        return self.re * self.re + self.im * self.im

    def __add__(self, other: Scalar) -> Scalar:
        return Scalar(self.re + other.re, self.im + other.im)

    def __sub__(self, other: Scalar) -> Scalar:
        return Scalar(self.re - other.re, self.im - other.im)

    def __neg__(self) -> Scalar:
        return Scalar(-self.re, -self.im)

    def __mul__(self, other) -> Scalar:
        if isinstance(other, (int, Fraction)):
            return Scalar(self.re * other, self.im * other)
        return Scalar(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Scalar:
        if isinstance(other, (int, Fraction)):
            return Scalar(self.re / other, self.im / other)
        n2 = other.norm2()
        if not n2:
            raise ZeroDivisionError("division by zero Scalar")
        num = self * other.conjugate()
        return Scalar(num.re / n2, num.im / n2)

    def __pow__(self, n: int) -> Scalar:
        if n < 0:
            return (ONE / self) ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        if self.is_real:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}*i"


ZERO = Scalar(Fraction(0), Fraction(0))
ONE = Scalar(Fraction(1), Fraction(0))
I = Scalar(Fraction(0), Fraction(1))
