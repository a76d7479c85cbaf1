"""Seeded random corpora of valid constructible expressions.

All knobs live in ``corpus_config.json`` (versioned) so that acceptance runs
are reproducible from a seed alone.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction
from importlib import resources
from pathlib import Path

import mpmath

from .asymptotics import Finite, MinusInfinity, PlusInfinity, limit_at_zero
from .constants import Constant
from .errors import ConstructibleError
from .expr import CExpr, Const, CTerm, SubExpr, Y, add, div, mul, power, shift, sub
from .prepare import grid_to_cexpr, prepare_constructible
from .validate import validate


def load_config(path: str | Path | None = None) -> dict:
    if path is None:
        text = resources.files(__package__).joinpath("corpus_config.json").read_text()
    else:
        text = Path(path).read_text()
    cfg = json.loads(text)
    cfg["frac_exponents"] = [Fraction(q) for q in cfg["frac_exponents"]]
    cfg["t0_points"] = [Fraction(t) for t in cfg["t0_points"]]
    return cfg


class CorpusGenerator:
    def __init__(self, seed: int = 0, config: dict | None = None, zero_budget: int = 64):
        self.rng = random.Random(seed)
        self.cfg = config or load_config()
        self.zero_budget = zero_budget

    def _pick(self, weights: dict) -> str:
        keys = sorted(weights)
        return self.rng.choices(keys, [weights[k] for k in keys])[0]

    def rational(self, nonzero: bool = True, positive: bool = False) -> Fraction:
        lo, hi = self.cfg["numerator_range"]
        dlo, dhi = self.cfg["denominator_range"]
        while True:
            n = self.rng.randint(1 if positive else lo, hi)
            if n or not nonzero:
                return Fraction(n, self.rng.randint(dlo, dhi))

    def sub(self, depth: int) -> SubExpr:
        if depth <= 0 or self.rng.random() < self.cfg["leaf_probability"]:
            return Y if self._pick(self.cfg["leaf_weights"]) == "y" else Const(self.rational())
        op = self._pick(self.cfg["op_weights"])
        if op == "pow_int":
            return power(self.sub(depth - 1), self.rng.choice(self.cfg["int_exponents"]))
        if op == "pow_frac":
            q = self.rng.choice(self.cfg["frac_exponents"])
            return power(self.positive(depth - 1, q), q)
        ctor = {"add": add, "sub": sub, "mul": mul, "div": div}[op]
        return ctor(self.sub(depth - 1), self.sub(depth - 1))

    def positive(self, depth: int, q: Fraction | None = None) -> SubExpr:
        """A SubExpr that is likely positive near 0+.

        For a fractional exponent q the leading coefficient is made a perfect
        power so that the radicand stays rational.
        """
        kind = self._pick(self.cfg["positive_weights"]) if depth > 0 else "y"
        den = 1 if q is None else q.denominator
        if kind == "y":
            return Y
        if kind == "monomial":
            c = Fraction(self.rng.randint(1, 3), self.rng.randint(1, 3)) ** den
            return mul(Const(c), power(Y, self.rng.randint(1, 2)))
        rest = mul(Y, self.sub(depth - 1))
        if kind == "unit":
            return add(Const(1), rest)
        c = Fraction(self.rng.randint(1, 3), self.rng.randint(1, 3)) ** den
        return add(Const(c), rest)

    def cexpr(self) -> CExpr:
        depth = self.cfg["max_sub_depth"]
        budget = self.cfg["max_logs_total"]
        terms = []
        for _ in range(self.rng.randint(1, self.cfg["max_terms"])):
            k = self.rng.randint(0, min(budget, self.cfg["max_logs_per_term"]))
            budget -= k
            logs = tuple(self.positive(depth - 1) for _ in range(k))
            terms.append(CTerm(self.sub(depth), logs))
        return CExpr.build(terms)

    def valid_cexpr(self) -> CExpr:
        for _ in range(self.cfg["max_tries"]):
            e = self.cexpr()
            if validate(e, self.zero_budget, sample=False).valid:
                return e
        raise RuntimeError("corpus generator could not find a valid expression")


def generate_corpus(n: int, seed: int = 0, config: dict | None = None) -> list[CExpr]:
    gen = CorpusGenerator(seed, config)
    return [gen.valid_cexpr() for _ in range(n)]


def _tail_estimate(g, start: Fraction, y: Fraction, groups: int = 4):
    """Sum of |a_pl| y^p ell^l over the first few nonzero groups with p >= start."""
    s = g.series
    with mpmath.workprec(64):
        yv = mpmath.mpf(y.numerator) / y.denominator
        ell = -mpmath.log(yv)
        total, seen, k = mpmath.mpf(0), 0, 0
        while seen < groups and k < 256 * s.ram:
            e = s.exponent(k)
            if s.end is not None and e >= s.end:
                break
            lp = s.coeff(k)
            if e >= start and lp:
                seen += 1
                for l, c in lp.items():
                    total += abs(c.enclosure(64).mid) * yv ** (mpmath.mpf(e.numerator) / e.denominator) * ell**l
            k += 1
        return total


def finite_limit_family(n: int, seed: int = 0, config: dict | None = None, order: Fraction = Fraction(2),
                        probe_point: Fraction = Fraction(1, 10**6), tail_tolerance: float = 1e-9):
    """Expressions with a known finite limit and a tail of order y^order.

    Each item is ``e - (grid terms of e below y^order other than the constant)
    + r`` for a random rational r, so the limit is ``a00 + r``.  Items whose
    omitted tail is not yet small at ``probe_point`` (coefficients growing
    faster than the probe can see) are excluded and counted.
    Returns ``(pairs, excluded)`` with pairs ``(expr, expected limit)``.
    """
    gen = CorpusGenerator(seed, config)
    out, excluded = [], 0
    while len(out) < n:
        e = gen.valid_cexpr()
        try:
            g = prepare_constructible(e)
            low = [(p, l, c) for p, l, c in g.terms_upto(order) if p < order and (p, l) != (0, 0)]
        except ConstructibleError:
            continue
        r = gen.rational()
        expected = g.coeff(Fraction(0), 0) + Constant.rational(r)
        scale = max(1.0, abs(float(expected.enclosure(64).mid)))
        if _tail_estimate(g, order, probe_point) > tail_tolerance * scale:
            excluded += 1
            continue
        F = e - grid_to_cexpr(low) + CExpr.of(Const(r))
        out.append((F, expected))
    return out, excluded


def divergent_family(n: int, seed: int = 0, config: dict | None = None, max_draws: int = 100000):
    """Generated expressions whose symbolic limit is +inf or -inf."""
    gen = CorpusGenerator(seed, config)
    out = []
    for _ in range(max_draws):
        if len(out) >= n:
            break
        e = gen.valid_cexpr()
        try:
            lim = limit_at_zero(prepare_constructible(e))
        except ConstructibleError:
            continue
        if isinstance(lim, (PlusInfinity, MinusInfinity)):
            out.append((e, lim))
    return out


def t0_family(n: int, seed: int = 0, config: dict | None = None, max_draws: int = 100000):
    """(expr, t0) pairs where the shifted germ is inside the fragment.

    Pairs whose shifted expression needs an irrational radicand or puts a log
    argument at a nonpositive value are skipped; the number of skips is
    returned alongside.
    """
    from .calculus import value_at
    from .numeric import eval_interval

    gen = CorpusGenerator(seed, config)
    points = gen.cfg["t0_points"]
    out, skipped = [], 0
    for _ in range(max_draws):
        if len(out) >= n:
            break
        e = gen.valid_cexpr()
        t0 = points[len(out) % len(points)]
        try:
            if not validate(shift(e, t0), sample=False).valid:
                skipped += 1
                continue
            if not isinstance(value_at(e, t0), Finite):
                skipped += 1
                continue
            for h in (Fraction(1, 10**4), -Fraction(1, 10**4)):
                eval_interval(e, t0 + h, 64)
        except ConstructibleError:
            skipped += 1
            continue
        out.append((e, t0))
    return out, skipped
