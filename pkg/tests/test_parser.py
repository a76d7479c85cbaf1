from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constructible import CExpr, CTerm
from constructible.corpus import CorpusGenerator
from constructible.errors import (
    ConstructibleError,
    ExprSyntaxError,
    NestedLog,
    NonRationalExponent,
    UnknownIdentifier,
)
from constructible.expr import Const, Y, mul, power
from constructible.parser import parse, parse_cexpr, print_canonical, tokenize

F = Fraction


def test_parse_tree_shape():
    node = parse("y^(1/2)*log(1+y)")
    assert node.kind == "mul"
    left, right = node.children
    assert left.kind == "pow" and left.value == F(1, 2) and left.children[0].kind == "y"
    assert right.kind == "log" and right.children[0].kind == "add"


def test_nested_log_parses_then_normalize_rejects():
    assert parse("log(log(y))").kind == "log"
    with pytest.raises(NestedLog):
        parse_cexpr("log(log(y))")


def test_unknown_identifier_has_span():
    with pytest.raises(UnknownIdentifier) as info:
        parse("y^z")
    assert info.value.span == (2, 3)


def test_non_rational_exponent():
    with pytest.raises(NonRationalExponent):
        parse("y^y")


@pytest.mark.parametrize("text", ["", "y +", "(y", "y)", "log y", "2 ** y", "y $ 2", "log()"])
def test_syntax_errors(text):
    with pytest.raises(ExprSyntaxError):
        parse_cexpr(text)


def test_print_examples():
    assert print_canonical(CExpr([CTerm(Y, (Y,))])) == "y*log(y)"
    assert print_canonical(CExpr()) == "0"
    assert print_canonical(CExpr.of(power(mul(Const(4), Y), F(1, 2)))) == "(4*y)^(1/2)"


def test_decimals_are_exact():
    assert parse_cexpr("0.1") == CExpr.of(Const(F(1, 10)))
    assert parse_cexpr("2.5e-3*y") == CExpr.of(mul(Const(F(1, 400)), Y))
    assert parse("1e-2").value == F(1, 100)


def test_ln_alias():
    assert parse_cexpr("ln(1+y)") == parse_cexpr("log(1+y)")


def test_tokens_carry_spans():
    toks = tokenize("12 + y")
    assert [t.span for t in toks if t.kind != "end"] == [(0, 2), (3, 4), (5, 6)]


def test_deep_nesting_is_a_syntax_error():
    with pytest.raises(ExprSyntaxError):
        parse("(" * 500 + "y" + ")" * 500)


@given(st.integers(0, 10**6))
def test_roundtrip_generated(seed):
    e = CorpusGenerator(seed).cexpr()
    assert parse_cexpr(print_canonical(e)) == e


@settings(max_examples=400)
@given(st.text(alphabet="y0123456789.+-*/^() logn,e", max_size=30))
def test_fuzz_only_raises_library_errors(text):
    try:
        result = parse_cexpr(text)
    except ConstructibleError:
        return
    assert isinstance(result, CExpr)
    assert parse_cexpr(print_canonical(result)) == result


@pytest.mark.parametrize("text", ["1e4300", "1e-100000", "1" * 5000])
def test_huge_literals_are_syntax_errors(text):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.span == (0, len(text))
