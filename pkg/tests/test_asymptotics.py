from __future__ import annotations

from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from constructible import (
    MINUS_INFINITY,
    PLUS_INFINITY,
    CExpr,
    Constant,
    Finite,
    Undecided,
    dominance_less,
    limit_at_zero,
    limit_of_expr,
)
from constructible.asymptotics import limit_from_json
from constructible.parser import parse_cexpr
from constructible.prepare import GridSeries
from oracles import decimal_ln

F = Fraction


@pytest.mark.parametrize(
    "a, b, expected",
    [((F(-1), 0), (F(0), 3), True), ((F(0), 2), (F(0), 1), True), ((F(0), 1), (F(0), 1), False)],
)
def test_dominance_examples(a, b, expected):
    assert dominance_less(a, b) is expected


pairs = st.tuples(st.fractions(min_value=-3, max_value=3, max_denominator=4), st.integers(0, 4))


@given(pairs, pairs, pairs)
def test_dominance_is_a_strict_total_order(a, b, c):
    assert not dominance_less(a, a)
    if a != b:
        assert dominance_less(a, b) != dominance_less(b, a)
    if dominance_less(a, b) and dominance_less(b, c):
        assert dominance_less(a, c)


def test_grid_limit_examples():
    assert limit_at_zero(GridSeries.from_dict({(F(0), 0): 3, (F(1), 2): 1})) == Finite(Constant.rational(3))
    assert limit_at_zero(GridSeries.from_dict({(F(1), 1): 1})) == Finite(Constant())
    assert limit_at_zero(GridSeries.from_dict({(F(0), 1): -1})) == MINUS_INFINITY
    assert limit_at_zero(GridSeries.zero()) == Finite(Constant())


@pytest.mark.parametrize(
    "text, expected",
    [
        ("3 + y*log(y)^2", Finite(Constant.rational(3))),
        ("y*log(y)", Finite(Constant())),
        ("log(y)", MINUS_INFINITY),
        ("-log(y)", PLUS_INFINITY),
        ("y^(1/2)*log(y)^2", Finite(Constant())),
        ("(1/y)*log(1+y)", Finite(Constant.rational(1))),
        ("1/y - 1/(y*(1+y))", Finite(Constant.rational(1))),
        ("log(2) + 1/y - 1/y", Finite(Constant.atom(2))),
        ("0", Finite(Constant())),
    ],
)
def test_limit_examples(text, expected):
    assert limit_of_expr(parse_cexpr(text)) == expected


def test_empty_form_is_zero():
    assert limit_of_expr(CExpr()) == Finite(Constant())


def test_sign_budget_gives_undecided():
    approx = Fraction(Decimal(str(decimal_ln(F(2), 40))))
    g = GridSeries.from_dict({(F(-1), 0): Constant.atom(2) - approx})
    assert isinstance(limit_at_zero(g, sign_budget=64), Undecided)
    assert limit_at_zero(g, sign_budget=1024) in (PLUS_INFINITY, MINUS_INFINITY)


@pytest.mark.parametrize(
    "value", [Finite(Constant.parse("L2 - 1/3")), PLUS_INFINITY, MINUS_INFINITY, Undecided("budget")]
)
def test_json_roundtrip(value):
    assert limit_from_json(value.to_json()) == value
