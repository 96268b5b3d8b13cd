"""Hand-written lexer shared by the contract (.sol) and property (.hml) readers."""
from __future__ import annotations

from dataclasses import dataclass

from hmlmc.diag import Span, fail

# Longest-match-first punctuation table. The property language adds `->`; the
# contract language adds `=>` (mapping types); sharing one table is harmless.
_PUNCT = (
    "&&", "||", "==", "!=", "<=", ">=", "=>", "->",
    ".", ",", ";", ":", "(", ")", "{", "}", "[", "]",
    "=", "<", ">", "+", "-", "*", "!",
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "ident" | "int" | "punct" | "eof"
    text: str
    line: int
    col: int

    @property
    def span(self) -> Span:
        width = max(len(self.text), 1)
        return Span(self.line, self.col, self.line, self.col + width)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("/*", i):
            start = Span(line, col, line, col + 2)
            i, col = i + 2, col + 2
            while i < n and not text.startswith("*/", i):
                if text[i] == "\n":
                    i, line, col = i + 1, line + 1, 1
                else:
                    i, col = i + 1, col + 1
            if i >= n:
                fail("unterminated block comment", start)
            i, col = i + 2, col + 2
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            fail(f"unexpected character {ch!r}", Span(line, col, line, col + 1))
    tokens.append(Token("eof", "", line, col))
    return tokens


class TokenStream:
    """Cursor over a token list with the usual expect/accept helpers."""

    def __init__(self, tokens: list[Token]):
        self._tokens = tokens
        self._pos = 0

    @property
    def cur(self) -> Token:
        return self._tokens[self._pos]

    def mark(self) -> int:
        return self._pos

    def reset(self, mark: int) -> None:
        self._pos = mark

    def peek(self, ahead: int = 1) -> Token:
        return self._tokens[min(self._pos + ahead, len(self._tokens) - 1)]

    def next(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self._pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.cur.text == text and self.cur.kind in ("punct", "ident")

    def at_kind(self, kind: str) -> bool:
        return self.cur.kind == kind

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.cur.text or "end of input"
            fail(f"expected `{text}`, found `{found}`", self.cur.span)
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.cur.kind != "ident":
            found = self.cur.text or "end of input"
            fail(f"expected {what}, found `{found}`", self.cur.span)
        return self.next()
