from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from constructible import CExpr, derivative_symbolic, shift, validate
from constructible.corpus import CorpusGenerator
from constructible.errors import DivisionByLog, NestedLog, PointOutsideDomain
from constructible.expr import Const, CTerm, Y, add, div, mul, power
from constructible.parser import parse_cexpr, print_canonical

F = Fraction


def canon(text: str) -> str:
    return print_canonical(parse_cexpr(text))


def test_smart_constructors_fold_constants():
    assert add(Const(1), Const(F(1, 2))) == Const(F(3, 2))
    assert mul(Const(0), Y) == Const(0)
    assert mul(Const(1), Y) == Y
    assert power(Y, 1) == Y
    assert div(Y, Const(1)) == Y


def test_build_merges_and_drops_zero_terms():
    assert CExpr.build([CTerm(Const(0), (Y,))]).is_zero()
    assert CExpr().is_zero()
    assert print_canonical(CExpr()) == "0"


@pytest.mark.parametrize(
    "text, expected",
    [
        ("log(y)", "1/y"),
        ("y*log(y)", "log(y) + 1"),
        ("(1+y)^(1/2)", "1/2*(1 + y)^(-1/2)"),
        ("7", "0"),
    ],
)
def test_derivative_examples(text, expected):
    assert print_canonical(derivative_symbolic(parse_cexpr(text))) == canon(expected)


@pytest.mark.parametrize(
    "text, t0, expected",
    [("y^2", F(1, 3), "(1/3 + y)^2"), ("log(y)", F(1, 2), "log(1/2 + y)")],
)
def test_shift_examples(text, t0, expected):
    assert print_canonical(shift(parse_cexpr(text), t0)) == expected


def test_shift_at_boundary_rejected():
    with pytest.raises(PointOutsideDomain):
        shift(parse_cexpr("1/y"), 0)


def test_normalize_examples():
    assert canon("(log(y))*(log(y)+1)*y") == "y*log(y)*log(y) + y*log(y)"
    with pytest.raises(NestedLog):
        parse_cexpr("log(log(y))")
    with pytest.raises(DivisionByLog):
        parse_cexpr("1/log(y)")


@pytest.mark.parametrize(
    "text, status, error",
    [
        ("log(1+y)", "valid", None),
        ("log(y-1)", "invalid", "NonPositiveLogArgument"),
        ("(-y)^(1/2)", "invalid", "NegativeLeading"),
        ("1/(y-y)", "invalid", "ExactZero"),
        ("(2+y)^(1/2)", "invalid", "NonRationalRadicand"),
    ],
)
def test_validate_examples(text, status, error):
    report = validate(parse_cexpr(text))
    assert report.status == status
    assert report.first_error() == error


def test_validate_reports_sample_delta():
    report = validate(parse_cexpr("log(1/2 - y)"))
    # leading coefficient 1/2 > 0, but the log needs y < 1/2
    assert report.valid and report.delta is not None and report.delta <= F(1, 2)


def exprs():
    return st.integers(0, 10**6).map(lambda seed: CorpusGenerator(seed).cexpr())


points = st.sampled_from([F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(1, 7)])


@given(exprs(), points, points)
def test_shift_composes(e, a, b):
    assert shift(shift(e, a), b) == shift(e, a + b)


@given(exprs())
def test_derivative_is_well_formed(e):
    d = derivative_symbolic(e)
    assert isinstance(d, CExpr)
    # the product rule never adds log factors to a term
    assert d.log_count() <= e.log_count()


@given(exprs())
def test_validate_monotone_in_budget(e):
    small, large = validate(e, 4, sample=False), validate(e, 64, sample=False)
    if small.status != "undecided":
        assert large.status == small.status
    if small.valid:
        assert large.valid
