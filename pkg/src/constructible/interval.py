"""Outward-rounded interval enclosures backed by mpmath's interval context.

Every evaluation creates a private interval context so that precision
changes never leak between threads.
"""

from __future__ import annotations

import decimal
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath.ctx_iv import MPIntervalContext


def interval_context(precision: int) -> MPIntervalContext:
    if precision < 2:
        raise ValueError("precision must be at least 2 bits")
    ctx = MPIntervalContext()
    ctx.prec = precision
    return ctx


def iv_rational(ctx: MPIntervalContext, r: Fraction | int):
    r = Fraction(r)
    if r.denominator == 1:
        return ctx.mpf(r.numerator)
    return ctx.mpf(r.numerator) / ctx.mpf(r.denominator)


@dataclass(frozen=True)
class Enclosure:
    """Closed interval ``[lo, hi]`` guaranteed to contain a real value."""

    lo: mpmath.mpf
    hi: mpmath.mpf
    precision: int

    @classmethod
    def from_iv(cls, value, precision: int) -> "Enclosure":
        lo, hi = value._mpi_
        return cls(mpmath.mp.make_mpf(lo), mpmath.mp.make_mpf(hi), precision)

    @classmethod
    def exact(cls, r: Fraction | int, precision: int = 64) -> "Enclosure":
        return cls.from_iv(iv_rational(interval_context(precision), r), precision)

    def to_iv(self, ctx: MPIntervalContext):
        return ctx.mpf([self.lo, self.hi])

    @property
    def width(self) -> mpmath.mpf:
        with mpmath.workprec(self.precision + 10):
            return self.hi - self.lo

    @property
    def mid(self) -> mpmath.mpf:
        with mpmath.workprec(self.precision + 10):
            return (self.lo + self.hi) / 2

    def is_finite(self) -> bool:
        return mpmath.isfinite(self.lo) and mpmath.isfinite(self.hi)

    def contains(self, x) -> bool:
        if isinstance(x, Fraction):
            # exact comparison against the binary endpoints
            return Fraction(*_as_ratio(self.lo)) <= x <= Fraction(*_as_ratio(self.hi))
        return self.lo <= x <= self.hi

    def intersects(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def widen(self, slack) -> "Enclosure":
        with mpmath.workprec(self.precision + 10):
            return Enclosure(self.lo - slack, self.hi + slack, self.precision)

    def __repr__(self) -> str:
        return f"[{mpmath.nstr(self.lo, 17)}, {mpmath.nstr(self.hi, 17)}]"

    def to_json(self, digits: int = 20) -> dict:
        """Decimal endpoints rounded outward, so the printed interval still encloses."""
        return {
            "lo": _decimal_str(self.lo, digits, decimal.ROUND_FLOOR),
            "hi": _decimal_str(self.hi, digits, decimal.ROUND_CEILING),
            "precision": self.precision,
        }


def _decimal_str(x: mpmath.mpf, digits: int, rounding: str) -> str:
    if not mpmath.isfinite(x):
        return mpmath.nstr(x)
    num, den = _as_ratio(x)
    with decimal.localcontext() as ctx:
        ctx.prec, ctx.rounding = digits, rounding
        return str(decimal.Decimal(int(num)) / decimal.Decimal(int(den)))


def _as_ratio(x: mpmath.mpf) -> tuple[int, int]:
    sign, man, exp, _ = x._mpf_
    if not man:
        if x != 0:
            raise ValueError("non-finite endpoint")
        return 0, 1
    num = -man if sign else man
    if exp >= 0:
        return num << exp, 1
    return num, 1 << (-exp)
