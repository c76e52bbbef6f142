"""Certified enclosures with exact rational endpoints.

``IntervalValue`` is used wherever a quantity is only known up to the
truncation of an infinite sum (the renewal constants, zeta tails, high
precision logarithms). Endpoints are ``Fraction`` so interval arithmetic
itself never rounds; rounding only enters through :func:`from_mpf`, which
widens outward.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

import mpmath

Number = Union[int, Fraction]


@dataclass(frozen=True)
class IntervalValue:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: Number) -> "IntervalValue":
        return cls(Fraction(x), Fraction(x))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        if isinstance(x, IntervalValue):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= Fraction(x) <= self.hi

    def overlaps(self, other: "IntervalValue") -> bool:
        other = as_interval(other)
        return self.lo <= other.hi and other.lo <= self.hi

    def __float__(self) -> float:
        return float(self.mid)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = as_interval(other)
        return IntervalValue(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return IntervalValue(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-as_interval(other))

    def __rsub__(self, other):
        return as_interval(other) - self

    def __mul__(self, other):
        o = as_interval(other)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return IntervalValue(min(ps), max(ps))

    __rmul__ = __mul__

    def reciprocal(self) -> "IntervalValue":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return IntervalValue(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * as_interval(other).reciprocal()

    def __rtruediv__(self, other):
        return as_interval(other) * self.reciprocal()

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return IntervalValue(Fraction(0), max(-self.lo, self.hi))

    def clip(self, lo: Number, hi: Number) -> "IntervalValue":
        return IntervalValue(min(max(self.lo, lo), hi), max(min(self.hi, hi), lo))

    def __repr__(self) -> str:
        return f"IntervalValue({float(self.lo):.17g}, {float(self.hi):.17g})"


def as_interval(x) -> IntervalValue:
    if isinstance(x, IntervalValue):
        return x
    if isinstance(x, (int, Rational)):
        return IntervalValue.point(Fraction(x))
    raise TypeError(f"cannot make an interval from {type(x).__name__}")


def is_zero(x) -> bool:
    """True when the value is certainly zero."""
    if isinstance(x, IntervalValue):
        return x.hi == 0
    return x == 0


def is_positive(x) -> bool:
    """True unless the value is certainly zero (masses are never negative)."""
    return not is_zero(x)


def to_float(x) -> float:
    return float(x.mid) if isinstance(x, IntervalValue) else float(x)


def mpf_to_fraction(x: mpmath.mpf) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_  # man_exp alone drops the sign
    v = Fraction(int(man)) * (Fraction(2) ** int(exp))
    return -v if sign else v


def from_mpf(x: mpmath.mpf, rel: Fraction) -> IntervalValue:
    """Enclosure of an mpmath value with relative error at most ``rel`` (plus 2^-1000)."""
    c = mpf_to_fraction(x)
    slack = abs(c) * rel + Fraction(1, 1 << 1000)
    return IntervalValue(c - slack, c + slack)


LOG_PREC = 320
_LOG_REL = Fraction(1, 1 << (LOG_PREC - 24))


def log2_interval(x) -> IntervalValue:
    """Outward-rounded enclosure of log2 over a positive interval (or rational)."""
    iv = as_interval(x)
    if iv.lo <= 0:
        raise ValueError("log2 of a non-positive interval")
    if iv.is_point:
        num, den = iv.lo.numerator, iv.lo.denominator
        if num & (num - 1) == 0 and den & (den - 1) == 0:
            return IntervalValue.point(num.bit_length() - den.bit_length())
    with mpmath.workprec(LOG_PREC):
        lo = mpmath.log(mpmath.mpf(iv.lo.numerator) / iv.lo.denominator, 2)
        hi = lo if iv.is_point else mpmath.log(mpmath.mpf(iv.hi.numerator) / iv.hi.denominator, 2)
    a, b = from_mpf(lo, _LOG_REL), from_mpf(hi, _LOG_REL)
    return IntervalValue(a.lo, b.hi)


def pi_squared_over_6() -> IntervalValue:
    """zeta(2) = pi^2/6 as a certified enclosure (mpmath pi at 400 bits)."""
    with mpmath.workprec(400):
        v = mpmath.pi ** 2 / 6
    return from_mpf(v, Fraction(1, 1 << 380))
