"""Exception hierarchy shared by every layer of the engine.

The CLI maps the four top-level families onto exit codes:
parse errors -> 1, domain/fragment errors -> 2, undecided -> 3.
"""

from __future__ import annotations


class ConstructibleError(Exception):
    """Base class for all engine errors."""


# -- parsing ---------------------------------------------------------------


class ExprSyntaxError(ConstructibleError):
    """Malformed input text. ``span`` is a ``(start, end)`` character range."""

    def __init__(self, message: str, span: tuple[int, int] | None = None, text: str | None = None):
        self.span = span
        self.text = text
        self.message = message
        super().__init__(self._render())

    def _render(self) -> str:
        if self.span is None or self.text is None:
            return self.message
        line, col = _line_col(self.text, self.span[0])
        return f"{line}:{col}: {self.message}"


class NonRationalExponent(ExprSyntaxError):
    pass


class UnknownIdentifier(ExprSyntaxError):
    pass


def _line_col(text: str, offset: int) -> tuple[int, int]:
    before = text[:offset]
    line = before.count("\n") + 1
    col = offset - (before.rfind("\n") + 1) + 1
    return line, col


# -- leaving the constructible class / the computable fragment -------------


class FragmentError(ConstructibleError):
    """The input is outside the class the engine handles."""


class NestedLog(FragmentError):
    pass


class DivisionByLog(FragmentError):
    pass


class PowerOfLog(FragmentError):
    pass


class NonRationalRadicand(FragmentError):
    """A rational power of the leading coefficient is irrational (e.g. 2^(1/2))."""


class NonRationalLeading(FragmentError):
    """A leading coefficient carrying log atoms would need inverting."""


class NonConstantLeading(NonRationalLeading):
    pass


class RamificationCapExceeded(FragmentError):
    pass


# -- domain problems -------------------------------------------------------


class DomainError(ConstructibleError):
    pass


class NonPositiveArgument(DomainError):
    pass


class NegativeLeading(DomainError):
    pass


class NonPositiveLeading(DomainError):
    pass


class NonPositiveLogArgument(DomainError):
    pass


class ExactZero(DomainError):
    """A series that had to be inverted, rooted or logged is identically zero."""


class PointOutsideDomain(DomainError):
    pass


class DomainViolationAtPoint(DomainError):
    pass


class NonZeroOrder(DomainError):
    pass


# -- semi-decidability ------------------------------------------------------


class UndecidedError(ConstructibleError):
    pass


class LeadingTermUndecided(UndecidedError):
    pass
