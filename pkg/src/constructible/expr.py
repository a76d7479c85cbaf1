"""Two-layer expression trees for constructible functions of one variable y.

``SubExpr`` is the log-free layer (rational constants, y, + - * /, rational
powers).  ``CExpr`` is a finite sum of terms ``factor * log(g1) * ... * log(gk)``
with every ``factor`` and ``gj`` a ``SubExpr``, so the log depth is at most one.

Nodes are built through smart constructors (``add``, ``mul``, ...) that fold
constants and a few identities.  Every tree reachable from the public API is in
that folded form, which is what makes printing and re-parsing the identity.
"""

from __future__ import annotations

from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Sequence

from .constants import Constant, rational_power
from .errors import DivisionByLog, NestedLog, PointOutsideDomain, PowerOfLog

if TYPE_CHECKING:
    from .parser import RawNode


class SubExpr:
    __slots__ = ("_hash",)

    def children(self) -> tuple["SubExpr", ...]:
        return ()

    def _key(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self) -> int:
        try:
            return self._hash
        except AttributeError:
            self._hash = hash((type(self).__name__, self._key()))
            return self._hash

    def __repr__(self) -> str:
        from .parser import print_sub

        return f"SubExpr({print_sub(self)!r})"

    # operator sugar, all routed through the smart constructors
    def __add__(self, other):
        return add(self, as_sub(other))

    def __radd__(self, other):
        return add(as_sub(other), self)

    def __sub__(self, other):
        return sub(self, as_sub(other))

    def __rsub__(self, other):
        return sub(as_sub(other), self)

    def __mul__(self, other):
        return mul(self, as_sub(other))

    def __rmul__(self, other):
        return mul(as_sub(other), self)

    def __truediv__(self, other):
        return div(self, as_sub(other))

    def __rtruediv__(self, other):
        return div(as_sub(other), self)

    def __pow__(self, q):
        return power(self, Fraction(q))

    def __neg__(self):
        return neg(self)


class Const(SubExpr):
    __slots__ = ("value",)

    def __init__(self, value: Fraction | int):
        self.value = Fraction(value)

    def _key(self):
        return (self.value,)


class Var(SubExpr):
    __slots__ = ()

    def _key(self):
        return ()


class _Binary(SubExpr):
    __slots__ = ("left", "right")

    def __init__(self, left: SubExpr, right: SubExpr):
        self.left = left
        self.right = right

    def children(self):
        return (self.left, self.right)

    def _key(self):
        return (self.left, self.right)


class Add(_Binary):
    __slots__ = ()


class Sub(_Binary):
    __slots__ = ()


class Mul(_Binary):
    __slots__ = ()


class Div(_Binary):
    __slots__ = ()


class Pow(SubExpr):
    __slots__ = ("base", "exp")

    def __init__(self, base: SubExpr, exp: Fraction):
        self.base = base
        self.exp = Fraction(exp)

    def children(self):
        return (self.base,)

    def _key(self):
        return (self.base, self.exp)


Y = Var()
ZERO_SUB = Const(0)
ONE_SUB = Const(1)


def as_sub(x) -> SubExpr:
    if isinstance(x, SubExpr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(x)
    if isinstance(x, str):
        return Const(Fraction(x))
    raise TypeError(f"cannot use {type(x).__name__} as a SubExpr")


def _is_const(e: SubExpr, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# -- smart constructors -----------------------------------------------------


def add(a: SubExpr, b: SubExpr) -> SubExpr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Add) and isinstance(b.left, Const):
        return add(Const(a.value + b.left.value), b.right)
    return Add(a, b)


def sub(a: SubExpr, b: SubExpr) -> SubExpr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is_const(b, 0):
        return a
    return Sub(a, b)


def mul(a: SubExpr, b: SubExpr) -> SubExpr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO_SUB
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    return Mul(a, b)


def div(a: SubExpr, b: SubExpr) -> SubExpr:
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    if _is_const(b, 1):
        return a
    if _is_const(a, 0) and not _is_const(b, 0):
        return ZERO_SUB
    return Div(a, b)


def power(base: SubExpr, q: Fraction | int) -> SubExpr:
    q = Fraction(q)
    if q == 1:
        return base
    if q == 0:
        return ONE_SUB
    if isinstance(base, Const):
        c = base.value
        if c == 1:
            return ONE_SUB
        if q.denominator == 1 and (c != 0 or q > 0):
            return Const(c ** q.numerator)
        if c > 0:
            r = rational_power(c, q)
            if r is not None:
                return Const(r)
    return Pow(base, q)


def neg(a: SubExpr) -> SubExpr:
    return mul(Const(-1), a)


# -- the constructible layer -----------------------------------------------


class CTerm:
    __slots__ = ("factor", "logs")

    def __init__(self, factor: SubExpr, logs: Sequence[SubExpr] = ()):
        self.factor = factor
        self.logs = tuple(logs)

    def __eq__(self, other):
        return isinstance(other, CTerm) and self.factor == other.factor and self.logs == other.logs

    def __hash__(self):
        return hash((self.factor, self.logs))

    def __repr__(self):
        return f"CTerm({self.factor!r}, {list(self.logs)!r})"


class CExpr:
    """Finite sum of ``CTerm``; the empty sum is the zero function."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[CTerm] = ()):
        self.terms = tuple(terms)

    @classmethod
    def build(cls, terms: Iterable[CTerm]) -> "CExpr":
        """Canonical sum: one term per log tuple, zero factors dropped."""
        merged: dict[tuple, SubExpr] = {}
        for t in terms:
            if t.logs in merged:
                merged[t.logs] = add(merged[t.logs], t.factor)
            else:
                merged[t.logs] = t.factor
        return cls(CTerm(f, logs) for logs, f in merged.items() if not _is_const(f, 0))

    @classmethod
    def of(cls, factor, logs: Sequence = ()) -> "CExpr":
        return cls.build([CTerm(as_sub(factor), [as_sub(g) for g in logs])])

    @classmethod
    def log(cls, g) -> "CExpr":
        return cls.of(ONE_SUB, [g])

    def is_zero(self) -> bool:
        return not self.terms

    def log_count(self) -> int:
        return max((len(t.logs) for t in self.terms), default=0)

    def subexprs(self):
        for t in self.terms:
            yield t.factor
            yield from t.logs

    def __eq__(self, other):
        return isinstance(other, CExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        from .parser import print_canonical

        return f"CExpr({print_canonical(self)!r})"

    def __str__(self):
        from .parser import print_canonical

        return print_canonical(self)

    def __add__(self, other):
        return cexpr_add(self, as_cexpr(other))

    def __radd__(self, other):
        return cexpr_add(as_cexpr(other), self)

    def __sub__(self, other):
        return cexpr_add(self, cexpr_scale(as_cexpr(other), Const(-1)))

    def __neg__(self):
        return cexpr_scale(self, Const(-1))

    def __mul__(self, other):
        return cexpr_mul(self, as_cexpr(other))

    def __rmul__(self, other):
        return cexpr_mul(as_cexpr(other), self)

    def to_json(self) -> list:
        return [
            {"factor": sub_to_json(t.factor), "logs": [sub_to_json(g) for g in t.logs]}
            for t in self.terms
        ]


def as_cexpr(x) -> CExpr:
    if isinstance(x, CExpr):
        return x
    return CExpr.of(as_sub(x))


def cexpr_add(a: CExpr, b: CExpr) -> CExpr:
    return CExpr.build(a.terms + b.terms)


def cexpr_scale(a: CExpr, s: SubExpr) -> CExpr:
    return CExpr.build(CTerm(mul(s, t.factor), t.logs) for t in a.terms)


def cexpr_mul(a: CExpr, b: CExpr) -> CExpr:
    return CExpr.build(
        CTerm(mul(s.factor, t.factor), s.logs + t.logs) for s in a.terms for t in b.terms
    )


def constant_to_cexpr(c: Constant) -> CExpr:
    """Represent an exact constant, L_q becoming log(q)."""
    return CExpr.build(
        CTerm(Const(r), tuple(Const(q) for q in mono)) for mono, r in sorted(c.terms.items())
    )


def sub_to_json(e: SubExpr):
    if isinstance(e, Const):
        return {"const": str(e.value)}
    if isinstance(e, Var):
        return {"var": "y"}
    if isinstance(e, Pow):
        return {"op": "pow", "base": sub_to_json(e.base), "exp": str(e.exp)}
    return {"op": type(e).__name__.lower(), "args": [sub_to_json(c) for c in e.children()]}


# -- structural operations ---------------------------------------------------


def map_leaves(e: SubExpr, fn) -> SubExpr:
    """Rewrite the leaves with ``fn`` and rebuild through the smart
    constructors.  Nodes produced by folding are not revisited."""
    if isinstance(e, (Const, Var)):
        return fn(e)
    if isinstance(e, Pow):
        return power(map_leaves(e.base, fn), e.exp)
    ctor = {Add: add, Sub: sub, Mul: mul, Div: div}[type(e)]
    return ctor(map_leaves(e.left, fn), map_leaves(e.right, fn))


def substitute_y(e: SubExpr, replacement: SubExpr) -> SubExpr:
    return map_leaves(e, lambda n: replacement if isinstance(n, Var) else n)


def shift(e: CExpr, t0: Fraction | int) -> CExpr:
    """Substitute y -> t0 + y, moving the point t0 to 0+."""
    t0 = Fraction(t0)
    if t0 <= 0:
        raise PointOutsideDomain(f"shift point {t0} is not inside (0, oo)")
    repl = add(Const(t0), Y)
    return CExpr.build(
        CTerm(substitute_y(t.factor, repl), tuple(substitute_y(g, repl) for g in t.logs))
        for t in e.terms
    )


def diff_sub(e: SubExpr) -> SubExpr:
    if isinstance(e, Const):
        return ZERO_SUB
    if isinstance(e, Var):
        return ONE_SUB
    if isinstance(e, Add):
        return add(diff_sub(e.left), diff_sub(e.right))
    if isinstance(e, Sub):
        return sub(diff_sub(e.left), diff_sub(e.right))
    if isinstance(e, Mul):
        return add(mul(diff_sub(e.left), e.right), mul(e.left, diff_sub(e.right)))
    if isinstance(e, Div):
        num = sub(mul(diff_sub(e.left), e.right), mul(e.left, diff_sub(e.right)))
        return div(num, power(e.right, 2))
    if isinstance(e, Pow):
        return mul(mul(Const(e.exp), power(e.base, e.exp - 1)), diff_sub(e.base))
    raise TypeError(type(e))


def derivative_symbolic(e: CExpr) -> CExpr:
    """d/dy by linearity, the product rule and d log g = g'/g."""
    out: list[CTerm] = []
    for t in e.terms:
        out.append(CTerm(diff_sub(t.factor), t.logs))
        for j, g in enumerate(t.logs):
            rest = t.logs[:j] + t.logs[j + 1 :]
            out.append(CTerm(_times_log_derivative(t.factor, g), rest))
    return CExpr.build(out)


def _times_log_derivative(f: SubExpr, g: SubExpr) -> SubExpr:
    # f * g'/g, cancelling the common case f == g (g is nonzero as a log argument)
    dg = diff_sub(g)
    if f == g:
        return dg
    return mul(f, div(dg, g))


# -- from parser output to the definition's shape ---------------------------


def normalize_to_definition(node: "RawNode") -> CExpr:
    """Distribute a raw parse tree into a sum of ``factor * prod log(g)``."""
    return CExpr.build(CTerm(f if f is not None else ONE_SUB, logs) for f, logs in _norm(node))


def _has_log(node: "RawNode") -> bool:
    if node.kind == "log":
        return True
    return any(_has_log(c) for c in node.children)


def raw_to_sub(node: "RawNode") -> SubExpr:
    k = node.kind
    if k == "num":
        return Const(node.value)
    if k == "y":
        return Y
    if k == "neg":
        inner = raw_to_sub(node.children[0])
        if isinstance(inner, Const):
            return Const(-inner.value)
        return neg(inner)
    if k == "pow":
        return power(raw_to_sub(node.children[0]), node.value)
    ctor = {"add": add, "sub": sub, "mul": mul, "div": div}[k]
    return ctor(raw_to_sub(node.children[0]), raw_to_sub(node.children[1]))


def _fmul(a: SubExpr | None, b: SubExpr | None) -> SubExpr | None:
    if a is None:
        return b
    if b is None:
        return a
    return mul(a, b)


def _negate(terms):
    return [(Const(-1) if f is None else neg(f), logs) for f, logs in terms]


def _norm(node: "RawNode") -> list[tuple[SubExpr | None, tuple[SubExpr, ...]]]:
    if not _has_log(node):
        return [(raw_to_sub(node), ())]
    k = node.kind
    if k == "log":
        arg = node.children[0]
        if _has_log(arg):
            raise NestedLog(f"log applied to a log-containing expression at {node.span}")
        return [(None, (raw_to_sub(arg),))]
    if k == "add":
        return _norm(node.children[0]) + _norm(node.children[1])
    if k == "sub":
        return _norm(node.children[0]) + _negate(_norm(node.children[1]))
    if k == "neg":
        return _negate(_norm(node.children[0]))
    if k == "mul":
        left, right = _norm(node.children[0]), _norm(node.children[1])
        return [(_fmul(fa, fb), la + lb) for fa, la in left for fb, lb in right]
    if k == "div":
        num, den = node.children
        if _has_log(den):
            raise DivisionByLog(f"division by a log-containing expression at {den.span}")
        d = raw_to_sub(den)
        return [(div(f if f is not None else ONE_SUB, d), logs) for f, logs in _norm(num)]
    if k == "pow":
        q = node.value
        if q.denominator != 1 or q < 0:
            raise PowerOfLog(f"power {q} of a log-containing expression at {node.span}")
        result: list = [(None, ())]
        base = _norm(node.children[0])
        for _ in range(q.numerator):
            result = [(_fmul(fa, fb), la + lb) for fa, la in result for fb, lb in base]
        return result
    raise ValueError(f"unexpected node kind {k!r}")


def validate(e: CExpr, zero_budget: int = 64):
    """See :func:`constructible.validate.validate`."""
    from .validate import validate as _validate

    return _validate(e, zero_budget)
