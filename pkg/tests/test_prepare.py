from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from constructible import Constant, prepare_constructible, prepare_sub, to_theorem7_form
from constructible.calculus import compare_grids
from constructible.corpus import CorpusGenerator
from constructible.errors import ConstructibleError
from constructible.expr import cexpr_mul
from constructible.parser import parse_cexpr
from oracles import binomial, long_division, mercator

F = Fraction
L2 = Constant.atom(2)


def sub_of(text):
    return parse_cexpr(text).terms[0].factor


def unit_coeffs(prep, n):
    # truncate counts grid positions, which may be finer than integer steps
    out = [F(0)] * n
    for e, c in prep.u.truncate(n * prep.u.series.ram):
        if e.denominator == 1 and e < n:
            out[int(e)] = c.as_fraction()
    return out


def grid(text):
    return prepare_constructible(parse_cexpr(text))


def test_prepare_sub_constant():
    prep = prepare_sub(sub_of("5"))
    assert prep.a == Constant.rational(5) and prep.p == 0 and prep.u.is_one()


def test_prepare_sub_geometric_unit():
    prep = prepare_sub(sub_of("y^2/(1-y)"))
    assert prep.a == Constant.rational(1) and prep.p == 2
    assert unit_coeffs(prep, 6) == long_division([F(1), F(-1)], 6)


def test_prepare_sub_binomial_unit():
    prep = prepare_sub(sub_of("(y+y^2)^(1/2)"))
    assert prep.a == Constant.rational(1) and prep.p == F(1, 2)
    assert unit_coeffs(prep, 6) == binomial(F(1, 2), 6)


def test_prepare_sub_zero():
    assert prepare_sub(sub_of("y - y")) is None


def test_grid_examples():
    assert grid("log(y)").to_dict(F(3)) == {(F(0), 1): Constant.rational(-1)}
    assert grid("y*log(2*y)").to_dict(F(3)) == {(F(1), 0): L2, (F(1), 1): Constant.rational(-1)}
    g = grid("log(1+y)").to_dict(F(6))
    assert g == {(F(k), 0): Constant.rational(m) for k, m in enumerate(mercator(7)) if m}


def t7_rows(text):
    return [(t.a, t.p, t.l, t.u is None) for t in to_theorem7_form(grid(text)).terms]


def test_t7_examples():
    one = Constant.rational(1)
    rows = t7_rows("1/y + log(y) + y^(1/2)/(1-y)")
    assert rows == [(one, -1, 0, True), (-one, 0, 1, True), (one, F(1, 2), 0, False)]
    form = to_theorem7_form(grid("1/y + log(y) + y^(1/2)/(1-y)"))
    # the unit lives on the half-integer grid of y^(1/2); K counts positions
    assert form.terms[-1].unit_truncation(5) == [["0", "1"], ["1", "1"], ["2", "1"]]
    assert t7_rows("3") == [(Constant.rational(3), 0, 0, True)]
    assert t7_rows("0") == []
    assert form.satisfies_properties()


def test_t7_cutoff():
    form = to_theorem7_form(grid("log(1+y)"), cutoff=F(3))
    assert [(t.p, t.u is None) for t in form.terms] == [(1, True), (2, True), (3, False)]
    with pytest.raises(ValueError):
        to_theorem7_form(grid("y"), cutoff=F(0))


def exprs():
    gen_seed = st.integers(0, 10**6)
    return gen_seed.map(lambda seed: CorpusGenerator(seed).valid_cexpr())


@given(exprs())
def test_t7_properties_hold(e):
    try:
        form = to_theorem7_form(prepare_constructible(e))
    except ConstructibleError:
        return
    assert form.violations() == []
    for t in form.terms:
        assert t.a


@given(exprs())
def test_grid_groups_are_ordered_and_nonzero(e):
    try:
        g = prepare_constructible(e)
        groups = list(g.groups_upto(F(2)))
    except ConstructibleError:
        return
    ps = [p for p, _ in groups]
    assert ps == sorted(set(ps))
    assert all(lp for _, lp in groups)


@given(exprs(), exprs())
def test_prepare_is_a_ring_homomorphism(a, b):
    try:
        ga, gb = prepare_constructible(a), prepare_constructible(b)
        total = compare_grids(prepare_constructible(a + b), ga + gb, 8)
        product = compare_grids(prepare_constructible(cexpr_mul(a, b)), ga * gb, 8)
    except ConstructibleError:
        return
    assert total.status != "mismatch"
    assert product.status != "mismatch"
