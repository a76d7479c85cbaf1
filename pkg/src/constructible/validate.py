"""Domain validation of constructible expressions near 0+."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    ConstructibleError,
    DomainViolationAtPoint,
    ExactZero,
    NegativeLeading,
    NonPositiveLogArgument,
    UndecidedError,
)
from .expr import CExpr, Div, Pow, SubExpr
from .prepare import SeriesBuilder
from .series import DEFAULT_ZERO_BUDGET


@dataclass(frozen=True)
class Issue:
    where: str
    error: str
    message: str

    def to_json(self) -> dict:
        return {"where": self.where, "error": self.error, "message": self.message}


@dataclass
class ValidationReport:
    failures: list[Issue] = field(default_factory=list)
    undecided: list[Issue] = field(default_factory=list)
    delta: Fraction | None = None

    @property
    def valid(self) -> bool:
        return not self.failures and not self.undecided

    @property
    def status(self) -> str:
        if self.failures:
            return "invalid"
        return "undecided" if self.undecided else "valid"

    def first_error(self) -> str | None:
        return self.failures[0].error if self.failures else None

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "failures": [i.to_json() for i in self.failures],
            "undecided": [i.to_json() for i in self.undecided],
            "delta": None if self.delta is None else str(self.delta),
        }


def _walk(e: SubExpr, seen: set):
    if e in seen:
        return
    seen.add(e)
    for c in e.children():
        yield from _walk(c, seen)
    yield e


def _nonzero_leading(builder: SeriesBuilder, e: SubExpr, what: str) -> None:
    if builder.prepare(e) is None:
        raise ExactZero(f"{what} is identically zero")


def validate(e: CExpr, zero_budget: int = DEFAULT_ZERO_BUDGET, sample: bool = True) -> ValidationReport:
    """Check the asymptotic side conditions of every log and power in ``e``."""
    from .parser import print_sub

    report = ValidationReport()
    builder = SeriesBuilder(zero_budget)
    seen: set = set()

    def guarded(node: SubExpr, check) -> None:
        try:
            check()
        except UndecidedError as exc:
            report.undecided.append(Issue(print_sub(node), type(exc).__name__, str(exc)))
        except ConstructibleError as exc:
            report.failures.append(Issue(print_sub(node), type(exc).__name__, str(exc)))

    for root in e.subexprs():
        for node in _walk(root, seen):
            if isinstance(node, Pow) and node.exp.denominator != 1:
                def check(node=node):
                    prep = builder.prepare(node.base)
                    if prep is None:
                        raise NegativeLeading("power base is identically zero")
                    builder.series(node)
                guarded(node, check)
            elif isinstance(node, Pow) and node.exp < 0:
                guarded(node, lambda node=node: _nonzero_leading(builder, node.base, "power base"))
            elif isinstance(node, Div):
                guarded(node, lambda node=node: _nonzero_leading(builder, node.right, "denominator"))
    for g in dict.fromkeys(g for t in e.terms for g in t.logs):
        def check_log(g=g):
            prep = builder.prepare(g)
            if prep is None:
                raise NonPositiveLogArgument("log argument is identically zero")
            if prep.a.as_fraction() <= 0:
                raise NonPositiveLogArgument(f"log argument has leading coefficient {prep.a} <= 0")
        guarded(g, check_log)
    if report.valid and sample:
        report.delta = sample_delta(e)
    return report


def sample_delta(e: CExpr, depth: int = 40, precision: int = 64) -> Fraction | None:
    """Largest dyadic delta whose sample points all evaluate cleanly."""
    from .numeric import eval_interval

    for k in range(depth):
        delta = Fraction(1, 2**k)
        points = [delta * Fraction(i, 8) for i in range(1, 8)] + [delta / 64, delta / 4096]
        try:
            for y in points:
                eval_interval(e, y, precision)
        except DomainViolationAtPoint:
            continue
        return delta
    return None
