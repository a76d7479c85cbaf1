from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from constructible import (
    Constant,
    Finite,
    closure_check,
    derivative_prepared,
    derivative_symbolic,
    difference_quotient_derivative,
    prepare_constructible,
    value_at,
)
from constructible.calculus import compare_grids
from constructible.corpus import CorpusGenerator
from constructible.errors import ConstructibleError, PointOutsideDomain
from constructible.parser import parse_cexpr
from constructible.prepare import GridSeries

F = Fraction


def const(x):
    return Constant.rational(x)


@pytest.mark.parametrize(
    "terms, expected",
    [
        ({(F(0), 1): -1}, {(F(-1), 0): const(1)}),
        ({(F(1), 1): 1}, {(F(0), 1): const(1), (F(0), 0): const(-1)}),
        ({(F(0), 0): 7}, {}),
    ],
)
def test_derivative_prepared_examples(terms, expected):
    assert derivative_prepared(GridSeries.from_dict(terms)).to_dict(F(4)) == expected


@pytest.mark.parametrize(
    "text, t0, expected",
    [("log(y)", F(1, 2), const(2)), ("y^2", F(1, 3), const(F(2, 3))), ("y*log(y)", F(1), const(1))],
)
def test_difference_quotient_examples(text, t0, expected):
    assert difference_quotient_derivative(parse_cexpr(text), t0) == Finite(expected)


@pytest.mark.parametrize(
    "text, t0, expected",
    [("log(y)", F(1, 2), -Constant.atom(2)), ("y^2", F(1, 3), const(F(1, 9))), ("1/(1-y)", F(1, 2), const(2))],
)
def test_value_at_examples(text, t0, expected):
    assert value_at(parse_cexpr(text), t0) == Finite(expected)


def test_value_at_outside_domain():
    with pytest.raises(PointOutsideDomain):
        value_at(parse_cexpr("log(y)"), F(-1, 2))
    with pytest.raises(PointOutsideDomain):
        value_at(parse_cexpr("1/y"), 0)


@pytest.mark.parametrize("text", ["log(1+y)", "y^(1/2)*log(y)", "0"])
def test_closure_examples(text):
    report = closure_check(parse_cexpr(text), K=4)
    assert report.status == "match"
    assert "elapsed" not in report.to_json()


def test_closure_log1p_coefficients():
    # d/dy log(1+y) = 1 - y + y^2 - y^3 + ...
    g = derivative_prepared(prepare_constructible(parse_cexpr("log(1+y)")))
    assert g.to_dict(F(3)) == {(F(k), 0): const((-1) ** k) for k in range(4)}


def test_closure_detects_a_wrong_derivative():
    a = prepare_constructible(parse_cexpr("y^2"))
    b = prepare_constructible(parse_cexpr("3*y"))
    report = compare_grids(derivative_prepared(a), b, 4)
    assert report.status == "mismatch" and report.mismatch[0] == 1


def exprs():
    return st.integers(0, 10**6).map(lambda seed: CorpusGenerator(seed).valid_cexpr())


@given(exprs())
def test_closure_on_generated(e):
    assert closure_check(e, K=6).status != "mismatch"


@given(exprs(), exprs())
def test_derivative_prepared_is_linear(a, b):
    try:
        ga, gb = prepare_constructible(a), prepare_constructible(b)
        report = compare_grids(derivative_prepared(ga + gb), derivative_prepared(ga) + derivative_prepared(gb), 8)
    except ConstructibleError:
        return
    assert report.status != "mismatch"


@given(exprs(), st.sampled_from([F(1, 4), F(1, 3), F(1, 2), F(2, 3)]))
def test_pipeline_agreement(e, t0):
    try:
        dq = difference_quotient_derivative(e, t0)
        sym = value_at(derivative_symbolic(e), t0)
    except ConstructibleError:
        return
    if isinstance(dq, Finite) and isinstance(sym, Finite):
        assert dq == sym
