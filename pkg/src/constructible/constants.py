"""Exact constants: polynomials over Q in the formal atoms L_q = log q, q prime.

The atoms are treated as algebraically independent indeterminates, so zero
testing is purely syntactic on the canonical term map.  For Q-linear
combinations this agrees with the reals (logs of distinct primes are linearly
independent over Q); for products of atoms it is the usual Schanuel-type
assumption.  Numeric evaluation can confirm a sign but never overrules the
formal zero test.
"""

from __future__ import annotations

import enum
import re
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Union

from .errors import NonPositiveArgument, NonRationalLeading
from .interval import Enclosure, interval_context, iv_rational

# sorted tuple of primes with multiplicity; () is the monomial 1
Monomial = tuple[int, ...]
Number = Union[int, Fraction]

DEFAULT_SIGN_BUDGET = 4096


class Sign(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    ZERO = "zero"
    UNDECIDED = "undecided"


def _mono_key(m: Monomial):
    return (len(m), m)


class Constant:
    """Immutable element of Q[L2, L3, L5, ...]."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | Iterable[tuple[Monomial, Number]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, Fraction] = {}
        for mono, c in items:
            mono = tuple(sorted(mono))
            acc[mono] = acc.get(mono, Fraction(0)) + Fraction(c)
        self._terms = tuple(sorted(((m, c) for m, c in acc.items() if c), key=lambda t: _mono_key(t[0])))
        self._hash = None

    @classmethod
    def _raw(cls, terms: tuple[tuple[Monomial, Fraction], ...]) -> "Constant":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def rational(cls, r: Number) -> "Constant":
        r = Fraction(r)
        return cls._raw(((((), r),) if r else ()))

    @classmethod
    def atom(cls, q: int) -> "Constant":
        return cls._raw((((q,), Fraction(1)),))

    # -- inspection --------------------------------------------------------

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_rational(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and self._terms[0][0] == ())

    def as_fraction(self) -> Fraction:
        if not self._terms:
            return Fraction(0)
        if not self.is_rational():
            raise NonRationalLeading(f"constant {self} involves log atoms")
        return self._terms[0][1]

    def atoms(self) -> set[int]:
        return {q for m, _ in self._terms for q in m}

    def monomials(self) -> list[Monomial]:
        return [m for m, _ in self._terms]

    def coefficient(self, mono: Monomial) -> Fraction:
        return dict(self._terms).get(tuple(sorted(mono)), Fraction(0))

    def degree(self) -> int:
        return max((len(m) for m, _ in self._terms), default=0)

    # -- ring operations ---------------------------------------------------

    @staticmethod
    def _coerce(other) -> "Constant":
        if isinstance(other, Constant):
            return other
        if isinstance(other, (int, Fraction)):
            return Constant.rational(other)
        return NotImplemented

    def __add__(self, other) -> "Constant":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other._terms:
            return self
        if not self._terms:
            return other
        if self.is_rational() and other.is_rational():
            return Constant.rational(self._terms[0][1] + other._terms[0][1])
        return Constant(list(self._terms) + list(other._terms))

    __radd__ = __add__

    def __neg__(self) -> "Constant":
        return Constant._raw(tuple((m, -c) for m, c in self._terms))

    def __sub__(self, other) -> "Constant":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Constant":
        return (-self) + other

    def __mul__(self, other) -> "Constant":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self._terms or not other._terms:
            return ZERO
        if self.is_rational() and other.is_rational():
            return Constant.rational(self._terms[0][1] * other._terms[0][1])
        return Constant(
            (m1 + m2, c1 * c2) for m1, c1 in self._terms for m2, c2 in other._terms
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Constant":
        # only division by nonzero rationals stays inside the ring
        if isinstance(other, Constant):
            other = other.as_fraction()
        other = Fraction(other)
        if not other:
            raise ZeroDivisionError("division of a Constant by zero")
        return Constant._raw(tuple((m, c / other) for m, c in self._terms))

    def __pow__(self, n: int) -> "Constant":
        if not isinstance(n, int) or n < 0:
            raise ValueError("Constant powers must be nonnegative integers")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Constant.rational(other)
        if not isinstance(other, Constant):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    # -- numerics ----------------------------------------------------------

    def enclosure(self, precision: int = 128) -> Enclosure:
        ctx = interval_context(precision)
        total = ctx.mpf(0)
        logs = {}
        for mono, c in self._terms:
            term = iv_rational(ctx, c)
            for q in mono:
                if q not in logs:
                    logs[q] = ctx.log(ctx.mpf(q))
                term = term * logs[q]
            total = total + term
        return Enclosure.from_iv(total, precision)

    def sign(self, precision_budget: int = DEFAULT_SIGN_BUDGET) -> Sign:
        if not self._terms:
            return Sign.ZERO
        if self.is_rational():
            return Sign.POSITIVE if self._terms[0][1] > 0 else Sign.NEGATIVE
        prec = 64
        while prec <= max(precision_budget, 64):
            enc = self.enclosure(prec)
            if enc.lo > 0:
                return Sign.POSITIVE
            if enc.hi < 0:
                return Sign.NEGATIVE
            prec *= 2
        return Sign.UNDECIDED

    # -- text --------------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        ordered = sorted(self._terms, key=lambda t: (-len(t[0]), t[0]))
        parts = []
        for i, (mono, c) in enumerate(ordered):
            neg = c < 0
            mag = -c if neg else c
            body = _mono_str(mono)
            if not body:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            if i == 0:
                parts.append(f"-{text}" if neg else text)
            else:
                parts.append(f" - {text}" if neg else f" + {text}")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"Constant({str(self)!r})"

    @classmethod
    def parse(cls, text: str) -> "Constant":
        """Inverse of ``str``: accepts e.g. ``"2*L2 - L3 + 1/2"``."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty constant")
        if s[0] not in "+-":
            s = "+" + s
        chunks = re.findall(r"[+-][^+-]+", s)
        if "".join(chunks) != s:
            raise ValueError(f"malformed constant {text!r}")
        terms = []
        for chunk in chunks:
            sign = -1 if chunk[0] == "-" else 1
            coeff = Fraction(sign)
            mono: list[int] = []
            for factor in chunk[1:].split("*"):
                m = re.fullmatch(r"L(\d+)(?:\^(\d+))?", factor)
                if m:
                    mono.extend([int(m.group(1))] * int(m.group(2) or 1))
                else:
                    coeff *= Fraction(factor)
            terms.append((tuple(mono), coeff))
        return cls(terms)


def _mono_str(mono: Monomial) -> str:
    out = []
    i = 0
    while i < len(mono):
        j = i
        while j < len(mono) and mono[j] == mono[i]:
            j += 1
        k = j - i
        out.append(f"L{mono[i]}" if k == 1 else f"L{mono[i]}^{k}")
        i = j
    return "*".join(out)


ZERO = Constant._raw(())
ONE = Constant.rational(1)


def _factor(n: int) -> dict[int, int]:
    from sympy import factorint

    return factorint(n)


def log_of_rational(r: Number) -> Constant:
    """Exact log of a positive rational as a Q-combination of prime atoms."""
    r = Fraction(r)
    if r <= 0:
        raise NonPositiveArgument(f"log of non-positive rational {r}")
    terms: dict[Monomial, Fraction] = {}
    for p, e in _factor(r.numerator).items():
        terms[(p,)] = terms.get((p,), Fraction(0)) + e
    for p, e in _factor(r.denominator).items():
        terms[(p,)] = terms.get((p,), Fraction(0)) - e
    return Constant(terms)


def rational_root(r: Fraction, n: int) -> Fraction | None:
    """Exact n-th root of a nonnegative rational, or None if irrational."""
    from sympy import integer_nthroot

    if r < 0:
        raise ValueError("negative radicand")
    num, exact_num = integer_nthroot(r.numerator, n)
    den, exact_den = integer_nthroot(r.denominator, n)
    if exact_num and exact_den:
        return Fraction(int(num), int(den))
    return None


def rational_power(r: Fraction, q: Fraction) -> Fraction | None:
    """r**q for rational r > 0 when the result is rational, else None."""
    root = rational_root(Fraction(r), q.denominator)
    if root is None:
        return None
    return root ** q.numerator


def const_sum(items: Iterable[Constant]) -> Constant:
    return reduce(lambda a, b: a + b, items, ZERO)


# functional aliases matching the operation names used in the docs


def const_arith(a: Constant, b: Constant | None, op: str) -> Constant:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    raise ValueError(f"unknown operation {op!r}")


def const_is_zero(a: Constant) -> bool:
    return a.is_zero()


def const_sign(a: Constant, precision_budget: int = DEFAULT_SIGN_BUDGET) -> Sign:
    return a.sign(precision_budget)


def const_eval(a: Constant, precision: int = 128) -> Enclosure:
    return a.enclosure(precision)


const_log_of_rational = log_of_rational
