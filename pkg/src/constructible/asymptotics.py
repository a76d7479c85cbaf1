"""Growth order of y^p * ell^l at 0+ and the right-limit operator on grids."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .constants import DEFAULT_SIGN_BUDGET, Constant, Sign
from .errors import UndecidedError
from .expr import CExpr
from .prepare import GridSeries, prepare_constructible
from .series import DEFAULT_ZERO_BUDGET


@dataclass(frozen=True)
class Finite:
    value: Constant

    def to_json(self) -> dict:
        return {"kind": "finite", "value": str(self.value)}


@dataclass(frozen=True)
class PlusInfinity:
    def to_json(self) -> dict:
        return {"kind": "+inf"}


@dataclass(frozen=True)
class MinusInfinity:
    def to_json(self) -> dict:
        return {"kind": "-inf"}


@dataclass(frozen=True)
class Undecided:
    reason: str

    def to_json(self) -> dict:
        return {"kind": "undecided", "reason": self.reason}


LimitResult = Finite | PlusInfinity | MinusInfinity | Undecided

PLUS_INFINITY = PlusInfinity()
MINUS_INFINITY = MinusInfinity()


def limit_from_json(data: dict) -> LimitResult:
    kind = data["kind"]
    if kind == "finite":
        return Finite(Constant.parse(data["value"]))
    if kind == "+inf":
        return PLUS_INFINITY
    if kind == "-inf":
        return MINUS_INFINITY
    if kind == "undecided":
        return Undecided(data.get("reason", ""))
    raise ValueError(f"unknown limit kind {kind!r}")


def dominance_less(t1: tuple[Fraction, int], t2: tuple[Fraction, int]) -> bool:
    """True iff y^p1 ell^l1 grows strictly faster than y^p2 ell^l2 as y -> 0+."""
    (p1, l1), (p2, l2) = t1, t2
    return p1 < p2 or (p1 == p2 and l1 > l2)


def dominant_term(grid: GridSeries, p_max: Fraction = Fraction(0)):
    """Dominant ``(p, l, c)`` among grid terms with p <= p_max, or None."""
    for p, lp in grid.groups_upto(p_max):
        l, c = max(lp.items())
        return p, l, c
    return None


def limit_at_zero(
    g: GridSeries,
    zero_budget: int = DEFAULT_ZERO_BUDGET,
    sign_budget: int = DEFAULT_SIGN_BUDGET,
) -> LimitResult:
    # Terms with p > 0 tend to 0; only the finitely many grid positions with
    # p <= 0 matter, and the grid's order bound makes that scan exact.
    top = dominant_term(g)
    if top is None:
        return Finite(Constant())
    p, l, c = top
    if (p, l) == (0, 0):
        return Finite(c)
    sign = c.sign(sign_budget)
    if sign is Sign.POSITIVE:
        return PLUS_INFINITY
    if sign is Sign.NEGATIVE:
        return MINUS_INFINITY
    return Undecided(f"sign of dominant coefficient {c} undecided within {sign_budget} bits")


def limit_of_expr(
    e: CExpr,
    zero_budget: int = DEFAULT_ZERO_BUDGET,
    sign_budget: int = DEFAULT_SIGN_BUDGET,
) -> LimitResult:
    """lim_{y -> 0+} e(y).  Undecided when a budget runs out."""
    try:
        g = prepare_constructible(e, zero_budget)
        return limit_at_zero(g, zero_budget, sign_budget)
    except UndecidedError as exc:
        return Undecided(str(exc))


def is_finite(r: LimitResult) -> bool:
    return isinstance(r, Finite)


__all__ = [
    "Finite",
    "LimitResult",
    "MINUS_INFINITY",
    "MinusInfinity",
    "PLUS_INFINITY",
    "PlusInfinity",
    "Undecided",
    "dominance_less",
    "dominant_term",
    "is_finite",
    "limit_at_zero",
    "limit_from_json",
    "limit_of_expr",
]
