"""Preparation of constructible germs at 0+ into power-log normal form.

Every log-free subexpression is expanded into a Puiseux series and factored as
``a * y^p * u`` with ``u`` a unit (series starting with 1).  With
``ell = |log y| = -log y`` on (0, 1), a log factor becomes

    log(a * y^p * u) = log(a) - p * ell + log(u)

and the products expand into a grid series ``sum c[p, l] * y^p * ell^l``.
There is a single simple cell (0, delta) and the y-coordinate is y itself, so
no center is ever introduced.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import count
from math import lcm
from typing import Iterator

from .constants import ONE, ZERO, Constant, Monomial, log_of_rational
from .errors import ExactZero, NonPositiveLogArgument, NonRationalLeading
from .expr import Add, CExpr, Const, Div, Mul, Pow, Sub, SubExpr, Var
from .series import (
    DEFAULT_ZERO_BUDGET,
    EXACT_ZERO,
    UNDECIDED,
    PuiseuxSeries,
    ps_add,
    ps_constant,
    ps_inv,
    ps_leading_term,
    ps_log_unit,
    ps_map,
    ps_monomial,
    ps_mul,
    ps_pow_rational,
    ps_scale,
    ps_shift,
    ps_sub,
    ps_truncate,
    ps_y,
    require_leading,
)


class LogPoly:
    """Polynomial in ell with Constant coefficients: ``{l: c}``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: dict[int, Constant] | None = None):
        self._c = {l: c for l, c in (coeffs or {}).items() if c}

    def items(self):
        return sorted(self._c.items())

    def get(self, l: int) -> Constant:
        return self._c.get(l, ZERO)

    def degree(self) -> int:
        return max(self._c, default=-1)

    def __bool__(self) -> bool:
        return bool(self._c)

    def __eq__(self, other) -> bool:
        return isinstance(other, LogPoly) and self._c == other._c

    def __hash__(self):
        return hash(tuple(self.items()))

    def __add__(self, other: "LogPoly") -> "LogPoly":
        if not other._c:
            return self
        if not self._c:
            return other
        out = dict(self._c)
        for l, c in other._c.items():
            out[l] = out.get(l, ZERO) + c
        return LogPoly(out)

    def __neg__(self) -> "LogPoly":
        return LogPoly({l: -c for l, c in self._c.items()})

    def __sub__(self, other: "LogPoly") -> "LogPoly":
        return self + (-other)

    def __mul__(self, other) -> "LogPoly":
        if isinstance(other, Constant):
            return LogPoly({l: c * other for l, c in self._c.items()})
        if not self._c or not other._c:
            return GRID_ZERO
        out: dict[int, Constant] = {}
        for l1, c1 in self._c.items():
            for l2, c2 in other._c.items():
                out[l1 + l2] = out.get(l1 + l2, ZERO) + c1 * c2
        return LogPoly(out)

    def __repr__(self) -> str:
        return "LogPoly(" + ", ".join(f"{l}: {c}" for l, c in self.items()) + ")"


GRID_ZERO = LogPoly()


def _lift(c: Constant) -> LogPoly:
    return LogPoly({0: c}) if c else GRID_ZERO


# -- prepared subanalytic germs ----------------------------------------------


class Unit:
    """A Puiseux series whose first term is exactly (0, 1)."""

    __slots__ = ("series",)

    def __init__(self, series: PuiseuxSeries):
        self.series = series

    @classmethod
    def one(cls) -> "Unit":
        return cls(ps_constant(ONE))

    def is_one(self) -> bool:
        s = self.series
        return s.end is not None and s.end <= Fraction(1, s.ram) and s.coeff_at(0) == ONE

    def truncate(self, K: int):
        return ps_truncate(self.series, K)

    def __repr__(self):
        return f"Unit({self.series!r})"


@dataclass(frozen=True)
class PreparedSub:
    """``a * y^p * u`` with ``a`` a nonzero constant and ``u`` a unit."""

    a: Constant
    p: Fraction
    u: Unit


class SeriesBuilder:
    """Expands SubExprs into Puiseux series, sharing common subtrees."""

    def __init__(self, zero_budget: int = DEFAULT_ZERO_BUDGET):
        self.zero_budget = zero_budget
        self._cache: dict[SubExpr, PuiseuxSeries] = {}
        self._prepared: dict[SubExpr, PreparedSub | None] = {}

    def series(self, e: SubExpr) -> PuiseuxSeries:
        hit = self._cache.get(e)
        if hit is not None:
            return hit
        s = self._build(e)
        self._cache[e] = s
        return s

    def _build(self, e: SubExpr) -> PuiseuxSeries:
        if isinstance(e, Const):
            return ps_constant(Constant.rational(e.value))
        if isinstance(e, Var):
            return ps_y()
        if isinstance(e, Add):
            return ps_add(self.series(e.left), self.series(e.right))
        if isinstance(e, Sub):
            return ps_sub(self.series(e.left), self.series(e.right))
        if isinstance(e, Mul):
            return ps_mul(self.series(e.left), self.series(e.right))
        if isinstance(e, Div):
            return ps_mul(self.series(e.left), ps_inv(self.series(e.right), self.zero_budget))
        if isinstance(e, Pow):
            return ps_pow_rational(self.series(e.base), e.exp, self.zero_budget)
        raise TypeError(type(e))

    def prepare(self, e: SubExpr) -> PreparedSub | None:
        if e in self._prepared:
            return self._prepared[e]
        s = self.series(e)
        try:
            p, a = require_leading(s, self.zero_budget)
        except ExactZero:
            self._prepared[e] = None
            return None
        ra = a.as_fraction()  # coefficients of the log-free layer are rational
        unit = ps_scale(ps_shift(s, -p), Constant.rational(1 / ra))
        prepared = PreparedSub(a, p, Unit(unit))
        self._prepared[e] = prepared
        return prepared

    def log_grid(self, g: SubExpr) -> "GridSeries":
        prep = self.prepare(g)
        if prep is None:
            raise NonPositiveLogArgument("log of an identically zero expression")
        a = prep.a.as_fraction()
        if a <= 0:
            raise NonPositiveLogArgument(f"log argument has leading coefficient {a} <= 0")
        log_a = log_of_rational(a)
        _, log_u = ps_log_unit(prep.u.series, self.zero_budget)
        head: dict[int, Constant] = {}
        if log_a:
            head[0] = log_a
        if prep.p:
            head[1] = Constant.rational(-prep.p)
        sig: Signature = {(0, m): Fraction(0) for m in log_a.monomials()}
        if prep.p:
            sig[(1, ())] = Fraction(0)
        const_part = GridSeries(ps_monomial(LogPoly(head), 0, zero=GRID_ZERO) if head else _grid_zero_series(), sig)
        if log_u.known_zero():
            return const_part
        return const_part + GridSeries.lift(log_u)


def prepare_sub(e: SubExpr, zero_budget: int = DEFAULT_ZERO_BUDGET) -> PreparedSub | None:
    """Factor ``e = a * y^p * u``; ``None`` when ``e`` is identically zero."""
    return SeriesBuilder(zero_budget).prepare(e)


# -- grid series -----------------------------------------------------------------


def _grid_zero_series() -> PuiseuxSeries:
    return PuiseuxSeries(lambda s: iter(()), 1, Fraction(0), end=Fraction(0), zero=GRID_ZERO)


# A signature maps (l, log-monomial) to the largest exponent at which that
# component can be nonzero, or None when its support may be infinite.
Signature = dict


def _last_max(a: Fraction | None, b: Fraction | None) -> Fraction | None:
    if a is None or b is None:
        return None
    return max(a, b)


def _sig_add(a: Signature, b: Signature) -> Signature:
    out = dict(a)
    for key, last in b.items():
        out[key] = _last_max(out[key], last) if key in out else last
    return out


def _sig_mul(a: Signature, b: Signature) -> Signature:
    out: Signature = {}
    for (l1, m1), last1 in a.items():
        for (l2, m2), last2 in b.items():
            key = (l1 + l2, tuple(sorted(m1 + m2)))
            last = None if last1 is None or last2 is None else last1 + last2
            out[key] = _last_max(out[key], last) if key in out else last
    return out


def _series_last(s: PuiseuxSeries) -> Fraction | None:
    return None if s.end is None else s.end - Fraction(1, s.ram)


class GridSeries:
    """Lazy ``sum c[p, l] y^p ell^l``, ascending in p, with ell = -log y.

    ``signature`` over-approximates which (l, log-monomial) components can
    carry nonzero coefficients and how far their support reaches; it lets the
    normal-form emitter skip components that are structurally absent.
    """

    __slots__ = ("series", "signature")

    def __init__(self, series: PuiseuxSeries, signature: Signature | None = None):
        self.series = series
        self.signature = {(0, ()): _series_last(series)} if signature is None else signature

    @classmethod
    def lift(cls, s: PuiseuxSeries) -> "GridSeries":
        if s.known_zero():
            return cls.zero()
        return cls(ps_map(s, _lift, zero=GRID_ZERO), {(0, ()): _series_last(s)})

    @classmethod
    def zero(cls) -> "GridSeries":
        return cls(_grid_zero_series(), {})

    @classmethod
    def from_dict(cls, terms: dict[tuple, object]) -> "GridSeries":
        """Finite grid from ``{(p, l): coefficient}``."""
        by_p: dict[Fraction, dict[int, Constant]] = {}
        sig: Signature = {}
        for (p, l), c in terms.items():
            c = c if isinstance(c, Constant) else Constant.rational(c)
            if not c:
                continue
            by_p.setdefault(Fraction(p), {})
            by_p[Fraction(p)][l] = by_p[Fraction(p)].get(l, ZERO) + c
            for m in c.monomials():
                sig[(l, m)] = max(sig.get((l, m), Fraction(p)), Fraction(p))
        if not by_p:
            return cls.zero()
        ram = lcm(*(p.denominator for p in by_p))
        lo, hi = min(by_p), max(by_p)
        n = int((hi - lo) * ram) + 1

        def produce(s):
            for k in range(n):
                yield LogPoly(by_p.get(lo + Fraction(k, ram), {}))

        return cls(PuiseuxSeries(produce, ram, lo, end=hi + Fraction(1, ram), zero=GRID_ZERO), sig)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other: "GridSeries") -> "GridSeries":
        return GridSeries(ps_add(self.series, other.series), _sig_add(self.signature, other.signature))

    def __neg__(self) -> "GridSeries":
        return GridSeries(ps_map(self.series, lambda c: -c), self.signature)

    def __sub__(self, other: "GridSeries") -> "GridSeries":
        return self + (-other)

    def __mul__(self, other: "GridSeries") -> "GridSeries":
        return GridSeries(ps_mul(self.series, other.series), _sig_mul(self.signature, other.signature))

    # -- access ----------------------------------------------------------

    @property
    def ram(self) -> int:
        return self.series.ram

    @property
    def bound(self) -> Fraction:
        return self.series.bound

    def known_zero(self) -> bool:
        return self.series.known_zero()

    def max_log(self) -> int:
        return max((l for l, _ in self.signature), default=0)

    def coeff(self, p: Fraction, l: int) -> Constant:
        return self.series.coeff_at(Fraction(p)).get(l)

    def groups_upto(self, p_max: Fraction) -> Iterator[tuple[Fraction, LogPoly]]:
        """Nonzero ``(p, LogPoly)`` groups with ``p <= p_max``."""
        return self.series.terms_below(Fraction(p_max) + Fraction(1, 2 * self.series.ram))

    def terms_upto(self, p_max: Fraction) -> list[tuple[Fraction, int, Constant]]:
        return [(p, l, c) for p, lp in self.groups_upto(p_max) for l, c in sorted(lp.items(), reverse=True)]

    def truncate(self, K: int) -> list[tuple[Fraction, int, Constant]]:
        """Nonzero triples among the first K grid positions."""
        return [(p, l, c) for p, lp in self.series.terms(K) for l, c in sorted(lp.items(), reverse=True)]

    def to_dict(self, p_max: Fraction) -> dict[tuple[Fraction, int], Constant]:
        return {(p, l): c for p, l, c in self.terms_upto(p_max)}

    def component(self, l: int, mono: Monomial, start: Fraction, last: Fraction | None = None) -> PuiseuxSeries:
        """Rational series of the coefficient of ``ell^l * mono`` for p >= start."""
        g = self.series
        ram = g.ram
        k0 = max(0, -(-((start - g.bound) * ram).numerator // ((start - g.bound) * ram).denominator))
        first = g.exponent(k0)

        def produce(s):
            for k in count(k0):
                if g.end is not None and g.exponent(k) >= g.end:
                    return
                yield Constant.rational(g.coeff(k).get(l).coefficient(mono))

        end = None if last is None else max(first, last + Fraction(1, ram))
        return PuiseuxSeries(produce, ram, first, end=end)

    def __repr__(self) -> str:
        shown = " + ".join(f"({c})*y^{p}*ell^{l}" for p, l, c in self.truncate(8)) or "0"
        return f"GridSeries({shown} ...)"


def prepare_constructible(e: CExpr, zero_budget: int = DEFAULT_ZERO_BUDGET) -> GridSeries:
    builder = SeriesBuilder(zero_budget)
    return prepare_with(builder, e)


def prepare_with(builder: SeriesBuilder, e: CExpr) -> GridSeries:
    total = GridSeries.zero()
    for t in e.terms:
        factor = builder.series(t.factor)
        if factor.known_zero():
            continue
        g = GridSeries.lift(factor)
        for arg in t.logs:
            g = g * builder.log_grid(arg)
        total = total + g
    return total


def grid_to_cexpr(terms: list[tuple[Fraction, int, Constant]]) -> CExpr:
    """Turn finitely many grid terms back into an expression (ell = -log y)."""
    from .expr import CTerm, Y, power

    out = []
    for p, l, c in terms:
        for mono, r in sorted(c.terms.items()):
            factor = Const(r * (-1) ** l)
            if p:
                factor = factor * power(Y, p)
            out.append(CTerm(factor, tuple(Const(q) for q in mono) + (Y,) * l))
    return CExpr.build(out)


# -- the finite normal form -----------------------------------------------------------


@dataclass(frozen=True)
class T7Term:
    a: Constant
    p: Fraction
    l: int
    u: Unit | None  # None stands for the unit 1

    def unit_truncation(self, K: int = 6) -> list:
        if self.u is None:
            return [[ "0", "1"]]
        return [[str(e), str(c)] for e, c in self.u.truncate(K)]

    def to_json(self, K: int = 6) -> dict:
        return {"a": str(self.a), "p": str(self.p), "l": self.l, "unit_truncation": self.unit_truncation(K)}


@dataclass(frozen=True)
class Theorem7Form:
    terms: tuple[T7Term, ...]

    def violations(self) -> list[str]:
        """Structural check of properties (2) and (3); empty when both hold."""
        problems = []
        for t in self.terms:
            if t.u is not None and not t.p > 0:
                problems.append(f"term with p={t.p} <= 0 carries a nontrivial unit")
            if t.u is not None:
                head = ps_leading_term(t.u.series, 1)
                if head is EXACT_ZERO or head is UNDECIDED or head != (0, ONE):
                    problems.append(f"unit of term p={t.p} does not start with 1")
        seen = set()
        for t in self.terms:
            if t.p <= 0:
                if (t.p, t.l) in seen:
                    problems.append(f"repeated pair (p, l) = ({t.p}, {t.l}) with p <= 0")
                seen.add((t.p, t.l))
        return problems

    def satisfies_properties(self) -> bool:
        return not self.violations()

    def to_json(self, K: int = 6) -> list:
        return [t.to_json(K) for t in self.terms]


def to_theorem7_form(g: GridSeries, cutoff: Fraction | None = None, zero_budget: int = DEFAULT_ZERO_BUDGET) -> Theorem7Form:
    """Finite presentation: exact terms below the cutoff, bundled units above.

    Grid terms with ``p <= 0`` (and, when ``cutoff`` is given, all terms with
    ``p < cutoff``) are emitted individually with unit 1.  The remaining tail
    is split by log power ``l`` and log-monomial, and each nonzero piece is
    factored as ``a * y^p * ell^l * u`` with ``p > 0``.
    """
    if cutoff is not None and cutoff <= 0:
        raise ValueError("cutoff must be positive")
    terms: list[T7Term] = []
    head_max = Fraction(0)
    if cutoff is not None:
        head_max = cutoff - Fraction(1, 2 * g.ram)
    for p, l, c in g.terms_upto(head_max):
        terms.append(T7Term(c, p, l, None))
    start = head_max + Fraction(1, 2 * g.ram) if cutoff is not None else Fraction(1, 10**9)
    if g.known_zero():
        return Theorem7Form(tuple(terms))
    tail: list[T7Term] = []
    for (l, mono), last in sorted(g.signature.items(), key=lambda kv: (-kv[0][0], len(kv[0][1]), kv[0][1])):
        if last is not None and last < start:
            continue
        comp = g.component(l, mono, start, last)
        lt = ps_leading_term(comp, zero_budget)
        if lt is EXACT_ZERO:
            continue
        if lt is UNDECIDED:
            from .errors import LeadingTermUndecided

            raise LeadingTermUndecided(f"tail component ell^{l} * {mono} has no term within budget")
        p, r = lt
        rr = r.as_fraction()
        comp = g.component(l, mono, p, last)
        unit = Unit(ps_scale(ps_shift(comp, -p), Constant.rational(1 / rr)))
        tail.append(T7Term(Constant([(mono, rr)]), p, l, None if unit.is_one() else unit))
    tail.sort(key=lambda t: (t.p, -t.l))
    return Theorem7Form(tuple(terms + tail))
