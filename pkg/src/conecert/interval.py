"""Closed real intervals with outward rounding.

Sums and products use error-free transformations to decide the rounding
direction, so exact results (zero in particular) stay exact and inexact ones
move one ulp outward. Library transcendentals are not correctly rounded and
are widened by two ulps, except at arguments with known exact values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf


class DomainError(ArithmeticError):
    """An operation was applied outside the real domain of its function."""


def _down(x: float, ulps: int = 1) -> float:
    if math.isinf(x) or math.isnan(x):
        return x
    for _ in range(ulps):
        x = math.nextafter(x, -INF)
    return x


def _up(x: float, ulps: int = 1) -> float:
    if math.isinf(x) or math.isnan(x):
        return x
    for _ in range(ulps):
        x = math.nextafter(x, INF)
    return x


def _two_sum(a: float, b: float) -> tuple[float, float]:
    """s = fl(a + b) and the exact error a + b - s (Knuth)."""
    s = a + b
    if math.isinf(s):
        return s, 0.0
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


_SPLIT = 134217729.0  # 2**27 + 1


def _split(a: float) -> tuple[float, float]:
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float | None]:
    """p = fl(a * b) and the exact error a * b - p (Dekker); error None when not representable."""
    p = a * b
    if p == 0.0 or math.isinf(p):
        return p, (0.0 if a == 0.0 or b == 0.0 or math.isinf(p) and (math.isinf(a) or math.isinf(b)) else None)
    if not (1e-280 < abs(p) < 1e290) or abs(a) > 1e290 or abs(b) > 1e290:
        return p, None
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _directed(value: float, err: float | None, upward: bool) -> float:
    # err is the exact remainder (true - value); None means unknown
    if err is None:
        return _up(value) if upward else _down(value)
    if upward:
        return _up(value) if err > 0.0 else value
    return _down(value) if err < 0.0 else value


def _add_lo(a: float, b: float) -> float:
    return _directed(*_two_sum(a, b), upward=False)


def _add_hi(a: float, b: float) -> float:
    return _directed(*_two_sum(a, b), upward=True)


def _mul_lo(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    return _directed(*_two_prod(a, b), upward=False)


def _mul_hi(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    return _directed(*_two_prod(a, b), upward=True)


def _div_bound(a: float, b: float, upward: bool) -> float:
    if a == 0.0:
        return 0.0
    q = a / b
    if not math.isinf(q):
        p, err = _two_prod(q, b)
        if err == 0.0 and p == a:
            return q
    # inexact or underflowed; the true quotient keeps the sign of a / b
    positive = (a > 0.0) == (b > 0.0)
    if upward:
        return min(_up(q), 0.0) if not positive else _up(q)
    return max(_down(q), 0.0) if positive else _down(q)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise DomainError("interval bound is NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: float) -> Interval:
        x = float(x)
        return cls(x, x)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * self.lo + 0.5 * self.hi

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def subset_of(self, other: Interval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def hull(self, other: Interval) -> Interval:
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"

    # arithmetic -----------------------------------------------------------

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __add__(self, other: Interval) -> Interval:
        return Interval(_add_lo(self.lo, other.lo), _add_hi(self.hi, other.hi))

    def __sub__(self, other: Interval) -> Interval:
        return Interval(_add_lo(self.lo, -other.hi), _add_hi(self.hi, -other.lo))

    def __mul__(self, other: Interval) -> Interval:
        pairs = [(a, b) for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        # a zero factor gives an exact zero, even against an infinite bound
        return Interval(min(_mul_lo(a, b) for a, b in pairs), max(_mul_hi(a, b) for a, b in pairs))

    def __truediv__(self, other: Interval) -> Interval:
        if other.lo <= 0.0 <= other.hi:
            raise DomainError(f"division by an interval containing zero {other}")
        pairs = [(a, b) for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        return Interval(min(_div_bound(a, b, False) for a, b in pairs),
                        max(_div_bound(a, b, True) for a, b in pairs))

    def ipow(self, n: int) -> Interval:
        """Integer power, exact range (no dependency widening for even n)."""
        if n == 0:
            return Interval(1.0, 1.0)
        if n < 0:
            return Interval(1.0, 1.0) / self.ipow(-n)
        a_lo, a_hi = abs(self.lo), abs(self.hi)
        if n % 2 == 1:
            lo = -_pow_bound(a_lo, n, True) if self.lo < 0 else _pow_bound(a_lo, n, False)
            hi = -_pow_bound(a_hi, n, False) if self.hi < 0 else _pow_bound(a_hi, n, True)
            return Interval(lo, hi)
        if self.lo >= 0.0:
            return Interval(_pow_bound(a_lo, n, False), _pow_bound(a_hi, n, True))
        if self.hi <= 0.0:
            return Interval(_pow_bound(a_hi, n, False), _pow_bound(a_lo, n, True))
        return Interval(0.0, _pow_bound(max(a_lo, a_hi), n, True))

    def __pow__(self, other: Interval) -> Interval:
        if other.is_point() and float(other.lo).is_integer():
            return self.ipow(int(other.lo))
        if self.lo < 0.0:
            raise DomainError(f"non-integer power of an interval with negative part {self}")
        if self.lo == 0.0 and other.lo <= 0.0:
            raise DomainError("zero base with a non-positive exponent")
        corners = [_real_pow(a, b) for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        return Interval(max(_down(min(corners), 2), 0.0), _up(max(corners), 2))


def _pow_bound(x: float, n: int, upward: bool) -> float:
    """Directed bound on x**n for x >= 0 by square-and-multiply."""
    mul = _mul_hi if upward else _mul_lo
    result, base = 1.0, x
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def _real_pow(a: float, b: float) -> float:
    if a == 0.0:
        return 0.0
    try:
        return math.pow(a, b)
    except OverflowError:
        return INF


# elementary functions -----------------------------------------------------


def exp(x: Interval) -> Interval:
    def e(t):
        try:
            return math.exp(t)
        except OverflowError:
            return INF

    lo = 1.0 if x.lo == 0.0 else max(_down(e(x.lo), 2), 0.0)
    hi = 1.0 if x.hi == 0.0 else _up(e(x.hi), 2)
    return Interval(lo, hi)


def log(x: Interval) -> Interval:
    if x.lo <= 0.0:
        raise DomainError(f"log of an interval reaching non-positive values {x}")
    hi = INF if math.isinf(x.hi) else _up(math.log(x.hi), 2)
    lo = 0.0 if x.lo == 1.0 else _down(math.log(x.lo), 2)
    if x.hi == 1.0:
        hi = 0.0
    return Interval(lo, hi)


def sqrt(x: Interval) -> Interval:
    if x.lo < 0.0:
        raise DomainError(f"sqrt of an interval reaching negative values {x}")
    return Interval(max(_down(math.sqrt(x.lo)), 0.0), _up(math.sqrt(x.hi)))


def fabs(x: Interval) -> Interval:
    if x.lo >= 0.0:
        return x
    if x.hi <= 0.0:
        return -x
    return Interval(0.0, max(-x.lo, x.hi))


_HALF_PI = math.pi / 2


def _trig_range(x: Interval, fn, phase: float) -> Interval:
    """Range of fn over x, where fn peaks at phase + 2k*pi and dips at phase + pi + 2k*pi.

    Critical points are located conservatively: a peak or dip is included
    whenever it might fall inside x once rounding in pi is accounted for.
    """
    if math.isinf(x.lo) or math.isinf(x.hi) or x.width >= 2 * math.pi:
        return Interval(-1.0, 1.0)
    a, b = fn(x.lo), fn(x.hi)
    # fn(0) is exact for sin and cos; elsewhere allow two ulps of libm error
    exact = [t == 0.0 for t in (x.lo, x.hi)]
    lo = min(v if ex else _down(v, 2) for v, ex in zip((a, b), exact))
    hi = max(v if ex else _up(v, 2) for v, ex in zip((a, b), exact))
    slack = 1e-12 * (1.0 + max(abs(x.lo), abs(x.hi)))

    def hits(offset: float) -> bool:
        # is there an integer k with offset + 2k*pi in [x.lo - slack, x.hi + slack]?
        k = math.ceil((x.lo - slack - offset) / (2 * math.pi))
        return offset + 2 * math.pi * k <= x.hi + slack

    if hits(phase):
        hi = 1.0
    if hits(phase + math.pi):
        lo = -1.0
    return Interval(max(lo, -1.0), min(hi, 1.0))


def sin(x: Interval) -> Interval:
    return _trig_range(x, math.sin, _HALF_PI)


def cos(x: Interval) -> Interval:
    return _trig_range(x, math.cos, 0.0)
