from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conecert import interval as iv
from conecert.interval import DomainError, Interval

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@st.composite
def intervals(draw):
    a, b = draw(finite), draw(finite)
    return Interval(min(a, b), max(a, b))


def _encloses(enc: Interval, exact: Fraction) -> bool:
    # infinite ends come from overflow and bound everything on their side
    below = enc.lo == -math.inf or Fraction(enc.lo) <= exact
    above = enc.hi == math.inf or exact <= Fraction(enc.hi)
    return below and above


@given(intervals(), intervals(), st.floats(0, 1), st.floats(0, 1))
def test_arithmetic_encloses_exact_results(x, y, p, q):
    a = x.lo + p * (x.hi - x.lo)
    b = y.lo + q * (y.hi - y.lo)
    a, b = min(max(a, x.lo), x.hi), min(max(b, y.lo), y.hi)
    fa, fb = Fraction(a), Fraction(b)
    assert _encloses(x + y, fa + fb)
    assert _encloses(x - y, fa - fb)
    assert _encloses(x * y, fa * fb)
    if not y.contains(0.0):
        assert _encloses(x / y, fa / fb)


@given(intervals(), st.integers(0, 7), st.floats(0, 1))
def test_integer_powers_enclose(x, n, p):
    a = min(max(x.lo + p * (x.hi - x.lo), x.lo), x.hi)
    if n == 0:
        assert x.ipow(0) == Interval(1.0, 1.0)
        return
    if abs(a) ** n > 1e300:
        return
    assert _encloses(x.ipow(n), Fraction(a) ** n)


def test_exact_results_are_not_widened():
    assert Interval(0.0, 1.0) * Interval(256.0, 256.0) == Interval(0.0, 256.0)
    assert Interval(0.0, 0.25).ipow(2) == Interval(0.0, 0.0625)
    assert Interval(1.0, 2.0) + Interval(3.0, 4.0) == Interval(4.0, 6.0)
    assert iv.exp(Interval(0.0, 0.0)) == Interval(1.0, 1.0)
    assert iv.sin(Interval(0.0, 0.0)) == Interval(0.0, 0.0)


def test_inexact_results_move_outward():
    third = Interval(1.0, 1.0) / Interval(3.0, 3.0)
    assert third.lo < third.hi
    assert Fraction(third.lo) < Fraction(1, 3) < Fraction(third.hi)
    s = Interval(0.1, 0.1) + Interval(0.2, 0.2)
    assert Fraction(s.lo) <= Fraction(0.1) + Fraction(0.2) <= Fraction(s.hi)


def test_even_power_of_straddling_interval():
    assert Interval(-2.0, 3.0).ipow(2) == Interval(0.0, 9.0)
    assert Interval(-3.0, -2.0).ipow(2) == Interval(4.0, 9.0)
    assert Interval(-2.0, 3.0).ipow(3) == Interval(-8.0, 27.0)


@pytest.mark.parametrize(
    "fn,lo,hi,inside",
    [
        (iv.sin, 0.0, 16.0, [-1.0, 1.0]),
        (iv.sin, 0.0, 1.0, [0.0, math.sin(1.0)]),
        (iv.cos, 0.0, math.pi, [-1.0, 1.0]),
        (iv.cos, 1.0, 2.0, [math.cos(2.0), math.cos(1.0)]),
        (iv.exp, -1.0, 2.0, [math.exp(-1.0), math.exp(2.0)]),
        (iv.log, 1.0, math.e, [0.0, 1.0]),
        (iv.sqrt, 4.0, 9.0, [2.0, 3.0]),
    ],
)
def test_elementary_ranges(fn, lo, hi, inside):
    enc = fn(Interval(lo, hi))
    assert enc.lo <= inside[0] and inside[1] <= enc.hi
    # tight up to a few ulps
    assert enc.lo >= inside[0] - 1e-12 and enc.hi <= inside[1] + 1e-12


def test_trig_critical_points_are_found():
    enc = iv.sin(Interval(1.0, 2.0))
    assert enc.hi == 1.0
    enc = iv.cos(Interval(3.0, 3.5))
    assert enc.lo == -1.0


def test_domain_errors():
    with pytest.raises(DomainError):
        iv.log(Interval(0.0, 1.0))
    with pytest.raises(DomainError):
        iv.sqrt(Interval(-1.0, 1.0))
    with pytest.raises(DomainError):
        Interval(1.0, 2.0) / Interval(-1.0, 1.0)
    with pytest.raises(DomainError):
        Interval(-1.0, 2.0) ** Interval(0.5, 0.5)


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)


def test_real_power_on_nonnegative_base():
    enc = Interval(4.0, 9.0) ** Interval(0.5, 0.5)
    assert enc.lo <= 2.0 <= enc.hi and enc.lo <= 3.0 <= enc.hi
    assert enc.hi - enc.lo < 1.0 + 1e-12


def test_underflow_is_not_treated_as_exact():
    tiny = Interval(0.0, 1.1605949053067608e-232)
    cube = tiny.ipow(3)
    assert cube.hi > 0.0
    q = cube / Interval(2.9, 3.0)
    assert q.lo == 0.0 and q.hi > 0.0
    assert (Interval(5e-324, 5e-324) / Interval(3.0, 3.0)).lo == 0.0


def test_exact_quotients_stay_exact():
    assert Interval(1.0, 3.0) / Interval(4.0, 4.0) == Interval(0.25, 0.75)
    assert Interval(-6.0, -6.0) / Interval(2.0, 2.0) == Interval(-3.0, -3.0)


@given(intervals(), intervals(), st.floats(0, 1), st.floats(0, 1))
def test_division_encloses_tiny_quotients(x, y, p, q):
    x = Interval(x.lo * 1e-300, x.hi * 1e-300)
    if y.contains(0.0):
        return
    a = min(max(x.lo + p * (x.hi - x.lo), x.lo), x.hi)
    b = min(max(y.lo + q * (y.hi - y.lo), y.lo), y.hi)
    assert _encloses(x / y, Fraction(a) / Fraction(b))
