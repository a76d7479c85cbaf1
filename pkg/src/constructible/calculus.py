"""Derivatives three ways and the closure check that ties them together.

* ``derivative_prepared`` differentiates a grid series termwise.
* ``derivative_symbolic`` (from :mod:`expr`) rewrites the expression.
* ``difference_quotient_derivative`` forms F(y) = (f(t0 + y) - f(t0)) / y as a
  constructible expression and takes its right limit at 0.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from .asymptotics import Finite, LimitResult, Undecided, limit_of_expr
from .constants import DEFAULT_SIGN_BUDGET, Constant
from .errors import DomainError, PointOutsideDomain, UndecidedError
from .expr import CExpr, CTerm, Y, constant_to_cexpr, derivative_symbolic, div, shift
from .prepare import GRID_ZERO, GridSeries, LogPoly, prepare_constructible
from .series import DEFAULT_ZERO_BUDGET, PuiseuxSeries


def _diff_group(p: Fraction, lp: LogPoly) -> LogPoly:
    # d/dy [y^p ell^l] = p y^(p-1) ell^l - l y^(p-1) ell^(l-1), ell = -log y
    out: dict[int, Constant] = {}
    for l, c in lp.items():
        if p:
            out[l] = out.get(l, Constant()) + c * p
        if l:
            out[l - 1] = out.get(l - 1, Constant()) - c * l
    return LogPoly(out)


def derivative_prepared(g: GridSeries) -> GridSeries:
    s = g.series

    def produce(_):
        k = 0
        while s.end is None or s.exponent(k) < s.end:
            yield _diff_group(s.exponent(k), s.coeff(k))
            k += 1

    end = None if s.end is None else s.end - 1
    sig: dict = {}
    for (l, m), last in g.signature.items():
        shifted = None if last is None else last - 1
        targets = [(l, m)] + ([(l - 1, m)] if l else [])
        for key in targets:
            if key in sig:
                sig[key] = None if sig[key] is None or shifted is None else max(sig[key], shifted)
            else:
                sig[key] = shifted
    return GridSeries(PuiseuxSeries(produce, s.ram, s.bound - 1, end=end, zero=GRID_ZERO), sig)


def _as_point_error(exc: DomainError, t0: Fraction) -> PointOutsideDomain:
    return PointOutsideDomain(f"expression is not defined near {t0}: {exc}")


def value_at(e: CExpr, t0: Fraction | int, zero_budget: int = DEFAULT_ZERO_BUDGET,
             sign_budget: int = DEFAULT_SIGN_BUDGET) -> LimitResult:
    """Exact f(t0) as the right limit of the shifted germ."""
    t0 = Fraction(t0)
    shifted = shift(e, t0)
    try:
        return limit_of_expr(shifted, zero_budget, sign_budget)
    except PointOutsideDomain:
        raise
    except DomainError as exc:
        raise _as_point_error(exc, t0) from exc


def difference_quotient(e: CExpr, t0: Fraction, f_t0: Constant) -> CExpr:
    """F(y) = (f(t0 + y) - f(t0)) / y as a constructible expression."""
    numerator = shift(e, t0) - constant_to_cexpr(f_t0)
    return CExpr.build(CTerm(div(t.factor, Y), t.logs) for t in numerator.terms)


def difference_quotient_derivative(e: CExpr, t0: Fraction | int, zero_budget: int = DEFAULT_ZERO_BUDGET,
                                   sign_budget: int = DEFAULT_SIGN_BUDGET) -> LimitResult:
    t0 = Fraction(t0)
    f_t0 = value_at(e, t0, zero_budget, sign_budget)
    if not isinstance(f_t0, Finite):
        return Undecided(f"f({t0}) is not a finite value: {f_t0}")
    F = difference_quotient(e, t0, f_t0.value)
    try:
        return limit_of_expr(F, zero_budget, sign_budget)
    except DomainError as exc:
        raise _as_point_error(exc, t0) from exc


@dataclass
class ClosureReport:
    checked_terms: int
    status: str  # "match" | "mismatch" | "undecided"
    groups: int = 0
    mismatch: tuple | None = None  # (p, l, symbolic side, termwise side)
    reason: str = ""
    elapsed: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return self.status == "match"

    def to_json(self) -> dict:
        out = {"status": self.status, "checked_terms": self.checked_terms, "groups": self.groups}
        if self.mismatch is not None:
            p, l, a, b = self.mismatch
            out["mismatch"] = {"p": str(p), "l": l, "symbolic": str(a), "termwise": str(b)}
        if self.reason:
            out["reason"] = self.reason
        return out


def compare_grids(a: GridSeries, b: GridSeries, K: int, zero_budget: int = DEFAULT_ZERO_BUDGET) -> ClosureReport:
    """Exact comparison of the first K nonzero p-groups of two grid series."""
    sa, sb = a.series, b.series
    ram = lcm(sa.ram, sb.ram)
    start = min(sa.bound, sb.bound)
    groups = checked = zero_run = 0
    k = 0
    while groups < K:
        e = start + Fraction(k, ram)
        done_a = sa.end is not None and e >= sa.end
        done_b = sb.end is not None and e >= sb.end
        if done_a and done_b:
            break
        ca, cb = sa.coeff_at(e), sb.coeff_at(e)
        if ca != cb:
            for l in sorted({l for l, _ in ca.items()} | {l for l, _ in cb.items()}, reverse=True):
                if ca.get(l) != cb.get(l):
                    return ClosureReport(checked, "mismatch", groups, (e, l, ca.get(l), cb.get(l)))
        if ca:
            groups += 1
            checked += len(ca.items())
            zero_run = 0
        else:
            zero_run += 1
            if zero_run > zero_budget:
                break
        k += 1
    if groups == 0 and not (a.known_zero() and b.known_zero()) and zero_run > zero_budget:
        return ClosureReport(0, "undecided", 0, reason=f"no nonzero term within {zero_budget} positions")
    return ClosureReport(checked, "match", groups)


def closure_check(e: CExpr, K: int = 12, zero_budget: int = DEFAULT_ZERO_BUDGET) -> ClosureReport:
    """Compare prepare(d/dy e) with the termwise derivative of prepare(e)."""
    t = time.perf_counter()
    try:
        symbolic = prepare_constructible(derivative_symbolic(e), zero_budget)
        termwise = derivative_prepared(prepare_constructible(e, zero_budget))
        report = compare_grids(symbolic, termwise, K, zero_budget)
    except UndecidedError as exc:
        report = ClosureReport(0, "undecided", reason=str(exc))
    report.elapsed = time.perf_counter() - t
    return report
