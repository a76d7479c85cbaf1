"""Lazy Puiseux series in y with exact coefficients.

A series is stored densely on its exponent grid ``bound + k/ram`` (k >= 0):
position k is produced on demand by a generator and memoized.  Zero
coefficients are real grid entries; the nonzero-term views skip them.  When the
producer finishes, the support is known to be finite (``end`` is set) and every
later coefficient is zero, which is what makes ``ExactZero`` decidable for
polynomial results.

Coefficients only need ``+``, ``*``, unary ``-`` and truthiness, so the same
machinery carries the Constant-valued series of the subanalytic layer and the
log-polynomial-valued grid series of the preparation layer.
"""

from __future__ import annotations

import contextvars
import enum
import threading
from contextlib import contextmanager
from fractions import Fraction
from itertools import count
from math import lcm
from typing import Callable, Iterator

from .constants import ONE, ZERO, Constant, log_of_rational, rational_power
from .errors import (
    ExactZero,
    LeadingTermUndecided,
    NegativeLeading,
    NonConstantLeading,
    NonPositiveLeading,
    NonRationalLeading,
    NonRationalRadicand,
    NonZeroOrder,
    RamificationCapExceeded,
)

DEFAULT_ZERO_BUDGET = 64
DEFAULT_RAMIFICATION_CAP = 64

_RAM_CAP: contextvars.ContextVar[int] = contextvars.ContextVar(
    "ramification_cap", default=DEFAULT_RAMIFICATION_CAP
)


@contextmanager
def ramification_cap(cap: int):
    """Temporarily change the largest admissible exponent denominator."""
    if cap < 1:
        raise ValueError("ramification cap must be positive")
    token = _RAM_CAP.set(cap)
    try:
        yield
    finally:
        _RAM_CAP.reset(token)


class Outcome(enum.Enum):
    EXACT_ZERO = "exact-zero"
    UNDECIDED = "undecided"


EXACT_ZERO = Outcome.EXACT_ZERO
UNDECIDED = Outcome.UNDECIDED


class PuiseuxSeries:
    __slots__ = ("ram", "bound", "end", "zero", "_producer", "_it", "_memo", "_lock", "_order")

    def __init__(
        self,
        producer: Callable[["PuiseuxSeries"], Iterator],
        ram: int,
        bound: Fraction,
        end: Fraction | None = None,
        zero=ZERO,
    ):
        bound = Fraction(bound)
        if (bound * ram).denominator != 1:
            ram = lcm(ram, bound.denominator)
        if ram > _RAM_CAP.get():
            raise RamificationCapExceeded(f"ramification {ram} exceeds cap {_RAM_CAP.get()}")
        self.ram = ram
        self.bound = bound
        self.end = end
        self.zero = zero
        self._producer = producer
        self._it = None
        self._memo: list = []
        self._lock = threading.RLock()
        self._order = None

    # -- grid access -------------------------------------------------------

    def exponent(self, k: int) -> Fraction:
        return self.bound + Fraction(k, self.ram)

    @property
    def exhausted(self) -> bool:
        return self.end is not None

    def known_zero(self) -> bool:
        return self.end is not None and self.end <= self.bound

    def coeff(self, k: int):
        if k < len(self._memo):
            return self._memo[k]
        if self.end is not None and self.exponent(k) >= self.end:
            return self.zero
        with self._lock:
            if self._it is None:
                self._it = iter(self._producer(self))
            while len(self._memo) <= k:
                try:
                    self._memo.append(next(self._it))
                except StopIteration:
                    self.end = self.exponent(len(self._memo))
                    return self.zero
            return self._memo[k]

    def coeff_at(self, e: Fraction):
        k = (Fraction(e) - self.bound) * self.ram
        if k < 0 or k.denominator != 1:
            return self.zero
        return self.coeff(int(k))

    def positions_until(self, e: Fraction) -> int:
        """Number of grid positions with exponent strictly below ``e``."""
        k = (Fraction(e) - self.bound) * self.ram
        if k <= 0:
            return 0
        n = -(-k.numerator // k.denominator)
        if self.end is not None:
            n = min(n, max(0, int((self.end - self.bound) * self.ram)))
        return n

    def terms(self, positions: int):
        """Nonzero terms among the first ``positions`` grid positions."""
        for k in range(positions):
            if self.end is not None and self.exponent(k) >= self.end:
                return
            c = self.coeff(k)
            if c:
                yield self.exponent(k), c

    def terms_below(self, e: Fraction):
        return self.terms(self.positions_until(e))

    @property
    def ramification(self) -> int:
        return self.ram

    # -- operators ---------------------------------------------------------

    def __add__(self, other):
        return ps_add(self, _lift_scalar(other, self))

    __radd__ = __add__

    def __sub__(self, other):
        return ps_sub(self, _lift_scalar(other, self))

    def __rsub__(self, other):
        return ps_sub(_lift_scalar(other, self), self)

    def __neg__(self):
        return ps_neg(self)

    def __mul__(self, other):
        if isinstance(other, PuiseuxSeries):
            return ps_mul(self, other)
        return ps_scale(self, other)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        shown = [f"{c}*y^{e}" for e, c in ps_truncate(self, 6)]
        tail = "" if self.end is not None and self.exponent(6) >= self.end else " + ..."
        return f"PuiseuxSeries({' + '.join(shown) or '0'}{tail})"


def _lift_scalar(x, like: PuiseuxSeries) -> PuiseuxSeries:
    if isinstance(x, PuiseuxSeries):
        return x
    if isinstance(x, (int, Fraction)):
        x = Constant.rational(x)
    return ps_monomial(x, 0, zero=like.zero)


# -- constructors ---------------------------------------------------------


def ps_zero(zero=ZERO) -> PuiseuxSeries:
    return PuiseuxSeries(lambda s: iter(()), 1, Fraction(0), end=Fraction(0), zero=zero)


def ps_monomial(c, p: Fraction | int = 0, zero=ZERO) -> PuiseuxSeries:
    if isinstance(c, (int, Fraction)):
        c = Constant.rational(c)
    p = Fraction(p)
    if not c:
        return ps_zero(zero)
    return PuiseuxSeries(lambda s: iter((c,)), p.denominator, p, end=p + Fraction(1, p.denominator), zero=zero)


def ps_constant(c) -> PuiseuxSeries:
    return ps_monomial(c, 0)


def ps_y() -> PuiseuxSeries:
    return ps_monomial(ONE, 1)


def ps_from_terms(terms, zero=ZERO) -> PuiseuxSeries:
    """Finite series from ``{exponent: coefficient}`` or pairs."""
    items = terms.items() if isinstance(terms, dict) else terms
    acc: dict[Fraction, object] = {}
    for e, c in items:
        if isinstance(c, (int, Fraction)):
            c = Constant.rational(c)
        e = Fraction(e)
        acc[e] = acc[e] + c if e in acc else c
    acc = {e: c for e, c in acc.items() if c}
    if not acc:
        return ps_zero(zero)
    ram = lcm(*(e.denominator for e in acc))
    lo, hi = min(acc), max(acc)
    n = int((hi - lo) * ram) + 1

    def produce(s):
        for k in range(n):
            yield acc.get(lo + Fraction(k, ram), zero)

    return PuiseuxSeries(produce, ram, lo, end=hi + Fraction(1, ram), zero=zero)


def ps_from_function(fn: Callable[[int], object], ram: int = 1, bound: Fraction | int = 0, zero=ZERO) -> PuiseuxSeries:
    """Infinite series whose k-th grid coefficient is ``fn(k)``."""

    def produce(s):
        for k in count():
            c = fn(k)
            yield Constant.rational(c) if isinstance(c, (int, Fraction)) else c

    return PuiseuxSeries(produce, ram, Fraction(bound), zero=zero)


# -- ring operations ------------------------------------------------------


def ps_add(a: PuiseuxSeries, b: PuiseuxSeries) -> PuiseuxSeries:
    if a.known_zero():
        return b
    if b.known_zero():
        return a
    ram = lcm(a.ram, b.ram)
    bound = min(a.bound, b.bound)
    end = max(a.end, b.end) if a.end is not None and b.end is not None else None

    def produce(s):
        for k in count():
            e = bound + Fraction(k, ram)
            if end is not None and e >= end:
                return
            yield a.coeff_at(e) + b.coeff_at(e)

    out = PuiseuxSeries(produce, ram, bound, end=end, zero=a.zero)
    return _tighten(out) if end is not None else out


def _tighten(s: PuiseuxSeries, limit: int = 4096) -> PuiseuxSeries:
    """Re-bound a finite series to its nonzero support so that exact
    cancellation (``y - y``) is recognised structurally."""
    n = (s.end - s.bound) * s.ram
    if n > limit:
        return s
    terms = [(s.exponent(k), s.coeff(k)) for k in range(int(n))]
    return ps_from_terms([(e, c) for e, c in terms if c], zero=s.zero)


def ps_neg(a: PuiseuxSeries) -> PuiseuxSeries:
    return ps_map(a, lambda c: -c)


def ps_sub(a: PuiseuxSeries, b: PuiseuxSeries) -> PuiseuxSeries:
    return ps_add(a, ps_neg(b))


def ps_map(a: PuiseuxSeries, fn, zero=None) -> PuiseuxSeries:
    """Apply ``fn`` coefficientwise (``fn`` must send zero to zero)."""

    def produce(s):
        for k in count():
            if a.end is not None and a.exponent(k) >= a.end:
                return
            yield fn(a.coeff(k))

    return PuiseuxSeries(produce, a.ram, a.bound, end=a.end, zero=a.zero if zero is None else zero)


def ps_scale(a: PuiseuxSeries, c) -> PuiseuxSeries:
    if isinstance(c, (int, Fraction)):
        c = Constant.rational(c)
    if not c:
        return ps_zero(a.zero)
    return ps_map(a, lambda x: x * c)


def ps_shift(a: PuiseuxSeries, p: Fraction | int) -> PuiseuxSeries:
    """Multiply by y^p."""
    p = Fraction(p)
    if not p or a.known_zero():
        return a
    if (p * a.ram).denominator != 1:
        return _regrid(a, p)
    end = a.end + p if a.end is not None else None

    def produce(s):
        for k in count():
            if a.end is not None and a.exponent(k) >= a.end:
                return
            yield a.coeff(k)

    return PuiseuxSeries(produce, a.ram, a.bound + p, end=end, zero=a.zero)


def _regrid(a: PuiseuxSeries, p: Fraction) -> PuiseuxSeries:
    ram = lcm(a.ram, p.denominator)
    bound = a.bound + p
    end = a.end + p if a.end is not None else None

    def produce(s):
        for k in count():
            e = bound + Fraction(k, ram)
            if end is not None and e >= end:
                return
            yield a.coeff_at(e - p)

    return PuiseuxSeries(produce, ram, bound, end=end, zero=a.zero)


def ps_mul(a: PuiseuxSeries, b: PuiseuxSeries) -> PuiseuxSeries:
    if a.known_zero() or b.known_zero():
        return ps_zero(a.zero)
    ram = lcm(a.ram, b.ram)
    bound = a.bound + b.bound
    end = None
    if a.end is not None and b.end is not None:
        end = (a.end - Fraction(1, a.ram)) + (b.end - Fraction(1, b.ram)) + Fraction(1, ram)
    zero = a.zero

    def produce(s):
        for k in count():
            e = bound + Fraction(k, ram)
            if end is not None and e >= end:
                return
            total = zero
            limit = e - b.bound
            for i in count():
                ea = a.exponent(i)
                if ea > limit or (a.end is not None and ea >= a.end):
                    break
                ca = a.coeff(i)
                if ca:
                    cb = b.coeff_at(e - ea)
                    if cb:
                        total = total + ca * cb
            yield total

    return PuiseuxSeries(produce, ram, bound, end=end, zero=zero)


# -- leading terms ----------------------------------------------------------


def ps_leading_term(a: PuiseuxSeries, zero_budget: int = DEFAULT_ZERO_BUDGET):
    """First nonzero term ``(exponent, coeff)``, ``EXACT_ZERO`` or ``UNDECIDED``.

    At most ``zero_budget`` grid positions are forced.  A series whose finite
    support has been fully produced is recognised as exactly zero.
    """
    if a._order is not None:
        return a._order
    for k in count():
        if a.end is not None and a.exponent(k) >= a.end:
            return EXACT_ZERO
        if k >= zero_budget:
            return UNDECIDED
        c = a.coeff(k)
        if c:
            a._order = (a.exponent(k), c)
            return a._order


def require_leading(a: PuiseuxSeries, zero_budget: int = DEFAULT_ZERO_BUDGET) -> tuple[Fraction, Constant]:
    lt = ps_leading_term(a, zero_budget)
    if lt is EXACT_ZERO:
        raise ExactZero("series is identically zero")
    if lt is UNDECIDED:
        raise LeadingTermUndecided(f"no nonzero term within {zero_budget} grid positions")
    return lt


def _rational_leading(c: Constant, exc=NonRationalLeading) -> Fraction:
    if not c.is_rational():
        raise exc(f"leading coefficient {c} is not rational")
    return c.as_fraction()


def _spread(values: Iterator, factor: int) -> Iterator:
    for v in values:
        yield v
        for _ in range(factor - 1):
            yield ZERO


def _unit_coeffs(a: PuiseuxSeries, p0: Fraction, c: Fraction):
    """alpha_k = coefficient of y^(p0 + k/ram) in a, divided by c."""

    cache: list[Constant] = []

    def alpha(k: int) -> Constant:
        while len(cache) <= k:
            j = len(cache)
            cache.append(a.coeff_at(p0 + Fraction(j, a.ram)) / c)
        return cache[k]

    return alpha


def _unit_is_one(a: PuiseuxSeries, p0: Fraction) -> bool:
    return a.end is not None and a.end <= p0 + Fraction(1, a.ram)


def ps_inv(a: PuiseuxSeries, zero_budget: int = DEFAULT_ZERO_BUDGET) -> PuiseuxSeries:
    p0, lead = require_leading(a, zero_budget)
    c = _rational_leading(lead)
    if _unit_is_one(a, p0):
        return ps_monomial(Constant.rational(1 / c), -p0)
    alpha = _unit_coeffs(a, p0, c)
    inv_c = 1 / c

    def produce(s):
        beta: list[Constant] = [ONE]
        yield Constant.rational(inv_c)
        for n in count(1):
            acc = ZERO
            for k in range(1, n + 1):
                ak = alpha(k)
                if ak:
                    acc = acc + ak * beta[n - k]
            b = -acc
            beta.append(b)
            yield b * inv_c

    return PuiseuxSeries(produce, a.ram, -p0)


def _binomial_unit(alpha, q: Fraction) -> Iterator[Constant]:
    # J. C. P. Miller recurrence for (1 + sum alpha_k t^k)^q
    w: list[Constant] = [ONE]
    yield ONE
    for n in count(1):
        acc = ZERO
        for k in range(1, n + 1):
            ak = alpha(k)
            if ak:
                acc = acc + ak * w[n - k] * ((q + 1) * k - n)
        wn = acc / n
        w.append(wn)
        yield wn


def ps_pow_rational(a: PuiseuxSeries, q: Fraction | int, zero_budget: int = DEFAULT_ZERO_BUDGET) -> PuiseuxSeries:
    q = Fraction(q)
    if q.denominator == 1:
        n = q.numerator
        if n < 0:
            return ps_pow_rational(ps_inv(a, zero_budget), -n, zero_budget)
        result = ps_monomial(ONE, 0)
        base = a
        while n:
            if n & 1:
                result = ps_mul(result, base)
            n >>= 1
            if n:
                base = ps_mul(base, base)
        return result

    p0, lead = require_leading(a, zero_budget)
    c = _rational_leading(lead)
    if c < 0:
        raise NegativeLeading(f"non-integer power of a series with negative leading coefficient {c}")
    cq = rational_power(c, q)
    if cq is None:
        raise NonRationalRadicand(f"{c}^({q}) is not rational")
    new_bound = p0 * q
    ram = lcm(a.ram, new_bound.denominator)
    if _unit_is_one(a, p0):
        return ps_monomial(Constant.rational(cq), new_bound)
    alpha = _unit_coeffs(a, p0, c)
    scale = Constant.rational(cq)

    def produce(s):
        for w in _spread(_binomial_unit(alpha, q), ram // a.ram):
            yield w * scale

    return PuiseuxSeries(produce, ram, new_bound)


def ps_log_unit(a: PuiseuxSeries, zero_budget: int = DEFAULT_ZERO_BUDGET) -> tuple[Constant, PuiseuxSeries]:
    """Split log(a) = log(c) + log(1 + eps) for a series of order 0.

    Returns the exact constant ``log c`` and the Mercator series of the unit
    part, which has strictly positive order.
    """
    p0, lead = require_leading(a, zero_budget)
    if p0 != 0:
        raise NonZeroOrder(f"log_unit needs order 0, got {p0}")
    c = _rational_leading(lead, NonConstantLeading)
    if c <= 0:
        raise NonPositiveLeading(f"log of a series with leading coefficient {c}")
    log_c = log_of_rational(c)
    if _unit_is_one(a, p0):
        return log_c, ps_zero()
    alpha = _unit_coeffs(a, p0, c)

    def produce(s):
        L: list[Constant] = [ZERO]
        for n in count(1):
            acc = ZERO
            for k in range(1, n):
                amk = alpha(n - k)
                if amk and L[k]:
                    acc = acc + L[k] * amk * k
            ln = alpha(n) - acc / n
            L.append(ln)
            yield ln

    return log_c, PuiseuxSeries(produce, a.ram, Fraction(1, a.ram))


def ps_exp(a: PuiseuxSeries, zero_budget: int = DEFAULT_ZERO_BUDGET) -> PuiseuxSeries:
    """exp of a series with strictly positive order (used for round trips)."""
    lt = ps_leading_term(a, zero_budget)
    if lt is EXACT_ZERO:
        return ps_monomial(ONE, 0)
    if lt is UNDECIDED:
        raise LeadingTermUndecided("exp argument order unknown")
    if lt[0] <= 0:
        raise NonZeroOrder("exp needs an argument of positive order")
    ram = a.ram

    def lk(k: int) -> Constant:
        return a.coeff_at(Fraction(k, ram))

    def produce(s):
        E: list[Constant] = [ONE]
        yield ONE
        for n in count(1):
            acc = ZERO
            for k in range(1, n + 1):
                c = lk(k)
                if c:
                    acc = acc + c * E[n - k] * k
            en = acc / n
            E.append(en)
            yield en

    return PuiseuxSeries(produce, ram, Fraction(0))


def ps_truncate(a: PuiseuxSeries, K: int) -> list[tuple[Fraction, object]]:
    """Nonzero terms among the first K grid positions (fewer if exhausted)."""
    return list(a.terms(K))


def ps_agree(a: PuiseuxSeries, b: PuiseuxSeries, upto: Fraction) -> bool:
    """Exact coefficientwise equality for all exponents below ``upto``."""
    return dict(a.terms_below(upto)) == dict(b.terms_below(upto))


def truncation_to_json(terms) -> list:
    return [[str(e), str(c)] for e, c in terms]
