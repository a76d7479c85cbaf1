"""Rigorous numeric oracle: interval evaluation, limit probes, finite differences.

Nothing here is authoritative.  The symbolic layer decides; these routines
exist to falsify it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .constants import Constant
from .errors import DomainViolationAtPoint
from .expr import Add, CExpr, Const, Div, Mul, Pow, Sub, SubExpr, Var
from .interval import Enclosure, interval_context, iv_rational

DEFAULT_PRECISION = 128
DEFAULT_SCHEDULE = tuple(Fraction(1, 10**k) for k in range(2, 7))
DEFAULT_H_SCHEDULE = tuple(Fraction(1, 10**k) for k in range(4, 8))
DIVERGENCE_THRESHOLD = 10**6
CONTRACTION = 0.9
STEADY = 0.999


def default_precision() -> int:
    raw = os.environ.get("CONSTRUCTIBLE_PRECISION")
    return int(raw) if raw else DEFAULT_PRECISION


def _check_positive(iv, what: str, y) -> None:
    if not iv.a > 0:
        raise DomainViolationAtPoint(f"{what} is not provably positive at y={y}: {iv}")


class _Evaluator:
    def __init__(self, y: Fraction, precision: int):
        self.ctx = interval_context(precision)
        self.y = Fraction(y)
        self.y_iv = iv_rational(self.ctx, self.y)
        self.memo: dict[SubExpr, object] = {}

    def sub(self, e: SubExpr):
        hit = self.memo.get(e)
        if hit is not None:
            return hit
        v = self._sub(e)
        self.memo[e] = v
        return v

    def _sub(self, e: SubExpr):
        ctx = self.ctx
        if isinstance(e, Const):
            return iv_rational(ctx, e.value)
        if isinstance(e, Var):
            return self.y_iv
        if isinstance(e, Pow):
            b = self.sub(e.base)
            q = e.exp
            if q.denominator == 1:
                if q < 0 and not (b.a > 0 or b.b < 0):
                    raise DomainViolationAtPoint(f"negative power of a base that may vanish at y={self.y}")
                return b ** int(q)
            _check_positive(b, "power base", self.y)
            return ctx.exp(iv_rational(ctx, q) * ctx.log(b))
        a, b = self.sub(e.left), self.sub(e.right)
        if isinstance(e, Add):
            return a + b
        if isinstance(e, Sub):
            return a - b
        if isinstance(e, Mul):
            return a * b
        if isinstance(e, Div):
            if not (b.a > 0 or b.b < 0):
                raise DomainViolationAtPoint(f"denominator may vanish at y={self.y}")
            return a / b
        raise TypeError(f"unknown node {e!r}")

    def log(self, e: SubExpr):
        v = self.sub(e)
        _check_positive(v, "log argument", self.y)
        return self.ctx.log(v)

    def cexpr(self, e: CExpr):
        total = self.ctx.mpf(0)
        for t in e.terms:
            v = self.sub(t.factor)
            for g in t.logs:
                v = v * self.log(g)
            total = total + v
        return total


def eval_interval(e: CExpr, y: Fraction | int, precision: int | None = None) -> Enclosure:
    """Outward-rounded enclosure of e(y) for rational y in (0, 1)."""
    precision = precision or default_precision()
    y = Fraction(y)
    if not 0 < y < 1:
        raise DomainViolationAtPoint(f"y={y} is outside (0, 1)")
    ev = _Evaluator(y, precision)
    return Enclosure.from_iv(ev.cexpr(e), precision)


def eval_adaptive(e: CExpr, y: Fraction | int, precision: int | None = None, rel_width=Fraction(1, 10**12),
                  max_precision: int = 4096) -> Enclosure:
    """Like ``eval_interval`` but doubles precision until the enclosure is
    narrower than ``rel_width * max(1, |value|)`` (cancellation guard)."""
    precision = precision or default_precision()
    while True:
        enc = eval_interval(e, y, precision)
        with mpmath.workprec(precision + 10):
            target = mpmath.mpf(rel_width.numerator) / rel_width.denominator * max(1, abs(enc.mid))
            if (enc.is_finite() and enc.width <= target) or precision >= max_precision:
                return enc
        precision *= 2


def eval_constant(c: Constant, precision: int | None = None) -> Enclosure:
    return c.enclosure(precision or default_precision())


# -- limit probe -------------------------------------------------------------


@dataclass
class ProbeReport:
    points: list  # (y, Enclosure | error message)
    verdict: str  # converging | diverging+ | diverging- | inconclusive
    interval: Enclosure | None = None

    @property
    def last(self) -> Enclosure | None:
        for _, v in reversed(self.points):
            if isinstance(v, Enclosure):
                return v
        return None

    def to_json(self) -> dict:
        pts = [{"y": str(y), "value": v.to_json() if isinstance(v, Enclosure) else {"error": v}}
               for y, v in self.points]
        out = {"verdict": self.verdict, "points": pts}
        if self.interval is not None:
            out["interval"] = self.interval.to_json()
        return out


def _trend(encs: list, precision: int, threshold) -> tuple[str, Enclosure | None]:
    """Monotone-envelope heuristics on the last few probe values.

    Steps smaller than the enclosure widths count as zero.  Steps shrinking
    by a factor below CONTRACTION mean convergence; steps that do not shrink
    (or a value beyond ``threshold``) mean divergence; anything in between
    is inconclusive.
    """
    if len(encs) < 3:
        return "inconclusive", None
    with mpmath.workprec(precision):
        v = [x.mid for x in encs]
        w = [x.width for x in encs]
        d = []
        for i in range(len(v) - 1):
            step = v[i + 1] - v[i]
            d.append(mpmath.mpf(0) if abs(step) <= w[i] + w[i + 1] else step)
        last = v[-1]
        if abs(last) > threshold and abs(v[-2]) <= abs(last):
            return ("diverging+" if last > 0 else "diverging-"), None
        if d[-1] == 0 and d[-2] == 0:
            lo = min(x.lo for x in encs[-2:])
            hi = max(x.hi for x in encs[-2:])
            return "converging", Enclosure(lo, hi, precision)
        if d[-2] == 0:
            return "inconclusive", None
        r = abs(d[-1]) / abs(d[-2])
        if r < CONTRACTION:
            # geometric tail estimate, padded by the last step
            est = last + d[-1] * r / (1 - r)
            pad = abs(d[-1]) + w[-1]
            return "converging", Enclosure(min(last, est) - pad, max(last, est) + pad, precision)
        if r >= STEADY and all(x > 0 for x in d[-3:]):
            return "diverging+", None
        if r >= STEADY and all(x < 0 for x in d[-3:]):
            return "diverging-", None
        return "inconclusive", None


def probe_limit(e: CExpr, schedule=DEFAULT_SCHEDULE, precision: int | None = None,
                threshold=DIVERGENCE_THRESHOLD) -> ProbeReport:
    """Evaluate along a schedule decreasing to 0 and guess the trend.

    Each point starts at ``precision`` bits and is refined when cancellation
    leaves the enclosure wide.
    """
    precision = precision or default_precision()
    points, encs = [], []
    for y in schedule:
        try:
            enc = eval_adaptive(e, y, precision)
        except DomainViolationAtPoint as exc:
            points.append((Fraction(y), str(exc)))
            continue
        points.append((Fraction(y), enc))
        encs.append(enc)
    verdict, interval = _trend(encs, precision, threshold)
    return ProbeReport(points, verdict, interval)


# -- finite differences ------------------------------------------------------


@dataclass
class FiniteDifference:
    estimate: mpmath.mpf
    error: mpmath.mpf
    precision: int = DEFAULT_PRECISION
    table: list = field(default_factory=list)

    @property
    def enclosure(self) -> Enclosure:
        with mpmath.workprec(self.precision):
            return Enclosure(self.estimate - self.error, self.estimate + self.error, self.precision)

    def agrees_with(self, value, slack=0) -> bool:
        """``value`` may be an mpf, a Fraction or an Enclosure (its midpoint)."""
        with mpmath.workprec(self.precision):
            if isinstance(value, Enclosure):
                value = value.mid
            elif isinstance(value, Fraction):
                value = mpmath.mpf(value.numerator) / value.denominator
            return abs(mpmath.mpf(value) - self.estimate) <= self.error + slack

    def to_json(self) -> dict:
        return {"estimate": mpmath.nstr(self.estimate, 20), "error": mpmath.nstr(self.error, 5)}


def finite_difference(e: CExpr, t0: Fraction | int, h_schedule=DEFAULT_H_SCHEDULE,
                      precision: int | None = None) -> FiniteDifference:
    """Central differences refined by Richardson extrapolation in h^2."""
    precision = precision or default_precision()
    t0 = Fraction(t0)
    hs = [Fraction(h) for h in h_schedule]
    if len(hs) < 2:
        raise ValueError("need at least two step sizes")
    with mpmath.workprec(precision):
        rows = []
        slack = mpmath.mpf(0)
        for h in hs:
            hi = eval_interval(e, t0 + h, precision)
            lo = eval_interval(e, t0 - h, precision)
            rows.append((hi.mid - lo.mid) / (2 * mpmath.mpf(h.numerator) / h.denominator))
            slack = max(slack, (hi.width + lo.width) / (2 * mpmath.mpf(h.numerator) / h.denominator))
        table = [rows]
        for j in range(1, len(hs)):
            prev = table[-1]
            nxt = []
            for i in range(len(prev) - 1):
                ratio = (mpmath.mpf(hs[i].numerator) / hs[i].denominator) / (
                    mpmath.mpf(hs[i + j].numerator) / hs[i + j].denominator)
                f = ratio ** 2
                nxt.append((f * prev[i + 1] - prev[i]) / (f - 1))
            table.append(nxt)
        best = table[-1][0]
        # empirical error: spread between the two most refined estimates
        err = abs(best - table[-2][-1]) + slack
        return FiniteDifference(best, err, precision, table)


# -- grid truncation cross-check ---------------------------------------------


@dataclass
class CrosscheckReport:
    samples: list  # (y, deviation, bound)
    max_abs_deviation: mpmath.mpf
    max_rel_deviation: mpmath.mpf
    next_order: tuple | None  # (p, l) of the first omitted group
    consistent: bool

    def to_json(self) -> dict:
        return {
            "max_abs_deviation": mpmath.nstr(self.max_abs_deviation, 6),
            "max_rel_deviation": mpmath.nstr(self.max_rel_deviation, 6),
            "next_order": None if self.next_order is None else [str(self.next_order[0]), self.next_order[1]],
            "consistent": self.consistent,
        }


def _grid_value(terms, y: Fraction, precision: int):
    ctx = interval_context(precision)
    yv = iv_rational(ctx, y)
    ell = -ctx.log(yv)
    total = ctx.mpf(0)
    for p, l, c in terms:
        ce = c.enclosure(precision).to_iv(ctx)
        total = total + ce * ctx.exp(iv_rational(ctx, p) * ctx.log(yv)) * ell ** l
    return Enclosure.from_iv(total, precision)


def crosscheck_series(e: CExpr, g, K: int, sample_points, precision: int | None = None,
                      lookahead: int = 4, slack: int = 4) -> CrosscheckReport:
    """Compare e(y) with the first K grid positions of g at each sample.

    The deviation is deemed consistent when it is at most ``slack`` times the
    absolute sum of the next few omitted groups (plus rounding noise).
    """
    precision = precision or default_precision()
    s = g.series
    kept = [(s.exponent(k), l, c) for k in range(K) for l, c in sorted(s.coeff(k).items(), reverse=True)]
    omitted, k = [], K
    while len({p for p, _, _ in omitted}) < lookahead and k < K + 64 * s.ram:
        if s.end is not None and s.exponent(k) >= s.end:
            break
        omitted.extend((s.exponent(k), l, abs_c) for l, abs_c in s.coeff(k).items())
        k += 1
    next_order = None
    if omitted:
        p0 = omitted[0][0]
        next_order = (p0, max(l for p, l, _ in omitted if p == p0))
    samples = []
    worst_abs = worst_rel = mpmath.mpf(0)
    ok = True
    with mpmath.workprec(precision):
        noise = mpmath.ldexp(1, -precision // 2)
        for y in sample_points:
            y = Fraction(y)
            exact = eval_interval(e, y, precision)
            approx = _grid_value(kept, y, precision)
            dev = abs(exact.mid - approx.mid)
            bound = mpmath.mpf(0)
            for p, l, c in omitted:
                bound += abs(_grid_value([(p, l, c)], y, precision).mid)
            bound = slack * bound + noise * (1 + abs(exact.mid))
            rel = dev / abs(exact.mid) if exact.mid else dev
            worst_abs, worst_rel = max(worst_abs, dev), max(worst_rel, rel)
            ok = ok and dev <= bound
            samples.append((y, dev, bound))
    return CrosscheckReport(samples, worst_abs, worst_rel, next_order, ok)
