"""Exact preparation, limits and derivatives of constructible functions of one
variable at 0+: finite sums of products of log-free algebraic expressions and
logarithms of positive ones."""

from __future__ import annotations

__version__ = "0.1.0"

from .asymptotics import (
    MINUS_INFINITY,
    PLUS_INFINITY,
    Finite,
    MinusInfinity,
    PlusInfinity,
    Undecided,
    dominance_less,
    limit_at_zero,
    limit_of_expr,
)
from .calculus import (
    ClosureReport,
    closure_check,
    derivative_prepared,
    difference_quotient_derivative,
    value_at,
)
from .constants import Constant, Sign, const_arith, const_eval, const_is_zero, const_log_of_rational, const_sign
from .errors import *  # noqa: F401,F403
from .expr import CExpr, CTerm, SubExpr, derivative_symbolic, normalize_to_definition, shift
from .interval import Enclosure
from .numeric import crosscheck_series, eval_interval, finite_difference, probe_limit
from .parser import parse, parse_cexpr, print_canonical
from .prepare import GridSeries, PreparedSub, Theorem7Form, prepare_constructible, prepare_sub, to_theorem7_form
from .series import (
    PuiseuxSeries,
    ps_inv,
    ps_leading_term,
    ps_log_unit,
    ps_mul,
    ps_pow_rational,
    ps_truncate,
    ramification_cap,
)
from .validate import ValidationReport, validate
