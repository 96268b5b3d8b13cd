"""Source spans and diagnostics shared by the contract and property frontends."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class Span:
    """Half-open source region; line and column are 1-based."""

    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"

    def to(self, other: "Span") -> "Span":
        return Span(self.line, self.col, other.end_line, other.end_col)


DUMMY_SPAN = Span(0, 0, 0, 0)


@dataclass(frozen=True, slots=True)
class Diagnostic:
    message: str
    span: Span

    def __str__(self) -> str:
        return f"{self.span}: {self.message}"


class FrontendError(Exception):
    """Parse or type errors, each carrying a source span."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


def fail(message: str, span: Span) -> "NoReturn":  # type: ignore[name-defined]
    raise FrontendError([Diagnostic(message, span)])
