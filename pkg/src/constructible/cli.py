"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 domain or fragment error,
3 undecided within budget, 4 internal invariant violation (a bug).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from . import __version__
from .asymptotics import Finite, MinusInfinity, PlusInfinity, Undecided, limit_at_zero, limit_of_expr
from .calculus import closure_check, difference_quotient_derivative, value_at
from .errors import (
    ConstructibleError,
    DomainError,
    ExprSyntaxError,
    FragmentError,
    UndecidedError,
)
from .expr import derivative_symbolic
from .numeric import crosscheck_series, eval_interval, finite_difference, probe_limit
from .parser import parse_cexpr, print_canonical
from .prepare import prepare_constructible, to_theorem7_form
from .series import ramification_cap
from .validate import validate

ENV_PREFIX = "CONSTRUCTIBLE_"

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_UNDECIDED, EXIT_BUG = range(5)


@dataclass(frozen=True)
class RunConfig:
    zero_budget: int = 64
    ramification_cap: int = 64
    precision_bits: int = 128
    K: int = 12
    output: str = "pretty"
    probe: bool = False
    seed: int = 1

    def __post_init__(self):
        for name in ("zero_budget", "ramification_cap", "precision_bits", "K"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def json(self) -> bool:
        return self.output == "json"


class Outcome(Exception):
    """Carries a rendered result and an exit code out of a command."""

    def __init__(self, code: int, payload: dict, text: str):
        super().__init__(text)
        self.code, self.payload, self.text = code, payload, text


# -- option handling ---------------------------------------------------------

_OPTIONS = {
    # dest: (flags, type, env name, help)
    "zero_budget": (("--budget",), int, "BUDGET", "grid positions searched for a nonzero term (64)"),
    "ramification_cap": (("--ram-cap",), int, "RAM_CAP", "largest exponent denominator (64)"),
    "precision_bits": (("--precision",), int, "PRECISION", "interval precision in bits (128)"),
    "K": (("-K",), int, "K", "grid terms shown and compared (12)"),
    "seed": (("--seed",), int, "SEED", "corpus seed for selfcheck (1)"),
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for dest, (flags, typ, env, text) in _OPTIONS.items():
        common.add_argument(*flags, dest=dest, type=typ, default=argparse.SUPPRESS,
                            help=f"{text}; env {ENV_PREFIX}{env}")
    common.add_argument("--json", dest="json", action="store_true", default=argparse.SUPPRESS,
                        help="emit deterministic JSON")
    common.add_argument("--probe", dest="probe", action="store_true", default=argparse.SUPPRESS,
                        help="attach the numeric limit probe")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="constructible",
        description="Preparation, limits and derivatives of constructible functions at 0+.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", parents=[common], help="grid expansion and normal form")
    p.add_argument("expr")
    p = sub.add_parser("limit", parents=[common], help="right limit at 0")
    p.add_argument("expr")
    p = sub.add_parser("diff", parents=[common], help="derivative, optionally checked at t0")
    p.add_argument("expr")
    p.add_argument("t0", nargs="?", type=Fraction)
    p = sub.add_parser("eval", parents=[common], help="interval evaluation at a point")
    p.add_argument("expr")
    p.add_argument("y", type=Fraction)
    p = sub.add_parser("check", parents=[common], help="closure check of the derivative")
    p.add_argument("expr")
    p = sub.add_parser("validate", parents=[common], help="domain conditions near 0+")
    p.add_argument("expr")
    p = sub.add_parser("selfcheck", parents=[common], help="run the seeded corpus checks")
    p.add_argument("--size", type=int, default=100)
    return parser


def _env_flag(name: str) -> bool | None:
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return None
    return raw.strip().lower() in ("1", "true", "yes", "on")


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    """Flags win over environment variables, which win over defaults."""
    values = {}
    for dest, (_, typ, env, _) in _OPTIONS.items():
        if hasattr(ns, dest):
            values[dest] = getattr(ns, dest)
        elif (raw := os.environ.get(ENV_PREFIX + env)) is not None:
            try:
                values[dest] = typ(raw)
            except ValueError:
                raise ValueError(f"{ENV_PREFIX}{env} must be an integer, got {raw!r}") from None
    as_json = getattr(ns, "json", None) or _env_flag("JSON")
    probe = getattr(ns, "probe", None) or _env_flag("PROBE")
    return RunConfig(output="json" if as_json else "pretty", probe=bool(probe), **values)


# -- rendering helpers ---------------------------------------------------------


def _limit_text(r) -> str:
    if isinstance(r, Finite):
        return f"finite {r.value}"
    if isinstance(r, PlusInfinity):
        return "+inf"
    if isinstance(r, MinusInfinity):
        return "-inf"
    return f"undecided ({r.reason})"


def _term_text(p: Fraction, l: int, c) -> str:
    return f"({c}) * y^{p} * |log y|^{l}"


def _parse_valid(text: str, cfg: RunConfig):
    e = parse_cexpr(text)
    report = validate(e, cfg.zero_budget, sample=False)
    if report.failures:
        issue = report.failures[0]
        raise Outcome(EXIT_DOMAIN, {"error": {"kind": issue.error, "message": issue.message, "where": issue.where},
                                    "validation": report.to_json()},
                      f"error: {issue.error}: {issue.message} (in {issue.where})")
    if report.undecided:
        issue = report.undecided[0]
        raise Outcome(EXIT_UNDECIDED, {"error": {"kind": issue.error, "message": issue.message, "where": issue.where},
                                       "validation": report.to_json()},
                      f"undecided: {issue.message} (in {issue.where})")
    return e


# -- commands -------------------------------------------------------------------


def cmd_prepare(text: str, cfg: RunConfig) -> tuple[int, dict, str]:
    e = _parse_valid(text, cfg)
    g = prepare_constructible(e, cfg.zero_budget)
    grid = g.truncate(cfg.K)
    form = to_theorem7_form(g, zero_budget=cfg.zero_budget)
    problems = form.violations()
    payload = {
        "expr": print_canonical(e),
        "grid": [{"p": str(p), "l": l, "a": str(c)} for p, l, c in grid],
        "form": form.to_json(),
    }
    lines = [f"expr: {print_canonical(e)}"]
    lines.append("grid: " + (" + ".join(_term_text(p, l, c) for p, l, c in grid) if grid else "0"))
    if form.terms:
        lines.append("form:")
        for t in form.terms:
            unit = "1" if t.u is None else " + ".join(f"{c}*y^{q}" for q, c in t.u.truncate(4)) + " + ..."
            lines.append(f"  a={t.a}  p={t.p}  l={t.l}  u={unit}")
    else:
        lines.append("form: 0")
    if problems:
        payload["violations"] = problems
        return EXIT_BUG, payload, "\n".join(lines + [f"BUG: {p}" for p in problems])
    return EXIT_OK, payload, "\n".join(lines)


def cmd_limit(text: str, cfg: RunConfig) -> tuple[int, dict, str]:
    e = _parse_valid(text, cfg)
    r = limit_of_expr(e, cfg.zero_budget)
    payload = {"expr": print_canonical(e), "limit": r.to_json()}
    lines = [f"limit: {_limit_text(r)}"]
    if cfg.probe:
        probe = probe_limit(e, precision=cfg.precision_bits)
        payload["probe"] = probe.to_json()
        lines.append(f"probe: {probe.verdict}" + (f" {probe.interval!r}" if probe.interval else ""))
    code = EXIT_UNDECIDED if isinstance(r, Undecided) else EXIT_OK
    return code, payload, "\n".join(lines)


def cmd_diff(text: str, t0: Fraction | None, cfg: RunConfig) -> tuple[int, dict, str]:
    e = _parse_valid(text, cfg)
    d = derivative_symbolic(e)
    payload = {"expr": print_canonical(e), "derivative": print_canonical(d)}
    lines = [print_canonical(d)]
    if t0 is None:
        return EXIT_OK, payload, "\n".join(lines)
    quotient = difference_quotient_derivative(e, t0, cfg.zero_budget)
    direct = value_at(d, t0, cfg.zero_budget)
    payload["t0"] = str(t0)
    payload["difference_quotient"] = quotient.to_json()
    payload["symbolic_at_t0"] = direct.to_json()
    lines.append(f"at t0={t0}: difference quotient {_limit_text(quotient)}, symbolic {_limit_text(direct)}")
    if isinstance(quotient, Undecided) or isinstance(direct, Undecided):
        return EXIT_UNDECIDED, payload, "\n".join(lines)
    if quotient != direct:
        payload["agree"] = False
        return EXIT_BUG, payload, "\n".join(lines + ["BUG: the two derivative computations disagree"])
    payload["agree"] = True
    try:
        fd = finite_difference(e, t0, precision=cfg.precision_bits)
    except DomainError as exc:
        lines.append(f"finite difference unavailable: {exc}")
        return EXIT_OK, payload, "\n".join(lines)
    payload["finite_difference"] = fd.to_json()
    lines.append(f"finite difference: {mpmath.nstr(fd.estimate, 15)} +/- {mpmath.nstr(fd.error, 3)}")
    if isinstance(quotient, Finite) and not fd.agrees_with(quotient.value.enclosure(cfg.precision_bits)):
        payload["numeric_agree"] = False
        return EXIT_BUG, payload, "\n".join(lines + ["BUG: finite difference disagrees with the exact value"])
    return EXIT_OK, payload, "\n".join(lines)


def cmd_eval(text: str, y: Fraction, cfg: RunConfig) -> tuple[int, dict, str]:
    e = parse_cexpr(text)
    enc = eval_interval(e, y, cfg.precision_bits)
    return EXIT_OK, {"expr": print_canonical(e), "y": str(y), "value": enc.to_json()}, repr(enc)


def cmd_check(text: str, cfg: RunConfig) -> tuple[int, dict, str]:
    e = _parse_valid(text, cfg)
    report = closure_check(e, cfg.K, cfg.zero_budget)
    payload = {"expr": print_canonical(e), "closure": report.to_json()}
    line = f"closure: {report.status} ({report.checked_terms} terms in {report.groups} groups)"
    if report.mismatch is not None:
        p, l, a, b = report.mismatch
        line += f"; first mismatch at y^{p} |log y|^{l}: {a} vs {b}"
    code = {"match": EXIT_OK, "undecided": EXIT_UNDECIDED}.get(report.status, EXIT_BUG)
    return code, payload, line


def cmd_validate(text: str, cfg: RunConfig) -> tuple[int, dict, str]:
    e = parse_cexpr(text)
    report = validate(e, cfg.zero_budget)
    lines = [f"status: {report.status}"]
    lines += [f"  {i.error}: {i.message} (in {i.where})" for i in report.failures + report.undecided]
    if report.delta is not None:
        lines.append(f"sampled delta: {report.delta}")
    code = {"valid": EXIT_OK, "undecided": EXIT_UNDECIDED}.get(report.status, EXIT_DOMAIN)
    return code, {"expr": print_canonical(e), "validation": report.to_json()}, "\n".join(lines)


def _probe_agrees(limit, probe) -> str:
    """pass / fail / undecided for the symbolic limit against the probe."""
    if isinstance(limit, Undecided) or probe.verdict == "inconclusive":
        return "undecided"
    if isinstance(limit, Finite):
        if probe.verdict != "converging":
            return "fail"
        c = limit.value.enclosure(probe.interval.precision)
        with mpmath.workprec(probe.interval.precision):
            pad = mpmath.mpf(10) ** -9 * max(1, abs(c.mid))
        return "pass" if probe.interval.widen(pad).intersects(c) else "fail"
    want = "diverging+" if isinstance(limit, PlusInfinity) else "diverging-"
    if probe.verdict == want:
        return "pass"
    return "fail" if probe.verdict.startswith("diverging") else "undecided"


def cmd_selfcheck(size: int, cfg: RunConfig) -> tuple[int, dict, str]:
    from collections import Counter

    from .corpus import generate_corpus

    corpus = generate_corpus(size, cfg.seed)
    counts = {"closure": Counter(), "limit_probe": Counter(), "crosscheck": Counter()}
    failures = []
    samples = [Fraction(1, 10**4), Fraction(1, 10**5)]
    for e in corpus:
        text = print_canonical(e)
        report = closure_check(e, cfg.K, cfg.zero_budget)
        counts["closure"][report.status] += 1
        if report.status == "mismatch":
            failures.append({"check": "closure", "expr": text, "detail": report.to_json()})
        g = prepare_constructible(e, cfg.zero_budget)
        limit = limit_at_zero(g, cfg.zero_budget)
        verdict = _probe_agrees(limit, probe_limit(e, precision=cfg.precision_bits))
        counts["limit_probe"][verdict] += 1
        if verdict == "fail":
            failures.append({"check": "limit_probe", "expr": text, "limit": limit.to_json()})
        cc = crosscheck_series(e, g, cfg.K, samples, cfg.precision_bits)
        status = "pass" if cc.consistent else "fail"
        counts["crosscheck"][status] += 1
        if status == "fail":
            failures.append({"check": "crosscheck", "expr": text, "detail": cc.to_json()})
    closure = counts["closure"]
    payload = {
        "size": size,
        "seed": cfg.seed,
        "counts": {k: dict(sorted(v.items())) for k, v in counts.items()},
        "failures": failures,
    }
    lines = [
        f"{closure['match']} closure matches, {closure['mismatch']} mismatches, {closure['undecided']} undecided",
        "limit vs probe: " + (", ".join(f"{v} {k}" for k, v in sorted(counts["limit_probe"].items())) or "none"),
        "series crosscheck: " + (", ".join(f"{v} {k}" for k, v in sorted(counts["crosscheck"].items())) or "none"),
    ]
    lines += [f"FAIL {f['check']}: {f['expr']}" for f in failures]
    return (EXIT_BUG if failures else EXIT_OK), payload, "\n".join(lines)


# -- entry point -----------------------------------------------------------------


def _error_payload(exc: Exception) -> dict:
    out = {"kind": type(exc).__name__, "message": getattr(exc, "message", str(exc))}
    span = getattr(exc, "span", None)
    if span is not None:
        out["span"] = list(span)
    return {"error": out}


def _caret(exc: ExprSyntaxError) -> str:
    if exc.span is None or exc.text is None or "\n" in exc.text:
        return ""
    start, end = exc.span
    return f"\n  {exc.text}\n  {' ' * start}{'^' * max(1, end - start)}"


def run(argv: list[str] | None = None) -> tuple[int, str]:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_OK if exc.code == 0 else EXIT_USAGE), ""
    try:
        cfg = resolve_config(ns)
    except ValueError as exc:
        return EXIT_USAGE, f"error: {exc}"
    try:
        with ramification_cap(cfg.ramification_cap):
            cmd = ns.command
            if cmd == "prepare":
                code, payload, text = cmd_prepare(ns.expr, cfg)
            elif cmd == "limit":
                code, payload, text = cmd_limit(ns.expr, cfg)
            elif cmd == "diff":
                code, payload, text = cmd_diff(ns.expr, ns.t0, cfg)
            elif cmd == "eval":
                code, payload, text = cmd_eval(ns.expr, ns.y, cfg)
            elif cmd == "check":
                code, payload, text = cmd_check(ns.expr, cfg)
            elif cmd == "validate":
                code, payload, text = cmd_validate(ns.expr, cfg)
            else:
                if ns.size < 0:
                    return EXIT_USAGE, "error: --size must be nonnegative"
                code, payload, text = cmd_selfcheck(ns.size, cfg)
    except Outcome as out:
        code, payload, text = out.code, out.payload, out.text
    except ExprSyntaxError as exc:
        code, payload, text = EXIT_USAGE, _error_payload(exc), f"error: {exc}{_caret(exc)}"
    except (DomainError, FragmentError) as exc:
        code, payload, text = EXIT_DOMAIN, _error_payload(exc), f"error: {type(exc).__name__}: {exc}"
    except UndecidedError as exc:
        code, payload, text = EXIT_UNDECIDED, _error_payload(exc), f"undecided: {exc}"
    except ConstructibleError as exc:
        code, payload, text = EXIT_BUG, _error_payload(exc), f"internal error: {type(exc).__name__}: {exc}"
    if cfg.json:
        payload = dict(payload, exit_code=code)
        text = json.dumps(payload, sort_keys=True, indent=2)
    return code, text


def main(argv: list[str] | None = None) -> int:
    code, text = run(argv)
    if text:
        stream = sys.stdout if code == EXIT_OK or not text.startswith(("error", "internal")) else sys.stderr
        print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
