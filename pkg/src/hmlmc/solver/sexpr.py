"""S-expression reader for the SMT-LIB2 subset the solver accepts.

An s-expression is either a token (symbol, keyword, numeral or string
literal) represented as ``str``, or a list of s-expressions. Numerals stay
strings at this level; term construction interprets them.
"""

from __future__ import annotations


class SExprError(Exception):
    """Raised on malformed s-expression input."""


def tokenize(text: str) -> list[str]:
    """Split SMT-LIB2 text into parenthesis and atom tokens.

    Handles ;-comments, "..." string literals (with "" escapes) and
    |...| quoted symbols.
    """
    tokens: list[str] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c == '"':
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            if j >= n:
                raise SExprError("unterminated string literal")
            tokens.append(text[i : j + 1])
            i = j + 1
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SExprError("unterminated quoted symbol")
            tokens.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in ' \t\r\n();"|':
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def parse_all(text: str) -> list:
    """Parse every s-expression in `text`."""
    tokens = tokenize(text)
    out: list = []
    pos = 0
    while pos < len(tokens):
        expr, pos = _parse_one(tokens, pos)
        out.append(expr)
    return out


def _parse_one(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise SExprError("unexpected end of input")
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _parse_one(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise SExprError("unbalanced '('")
        return items, pos + 1
    if tok == ")":
        raise SExprError("unbalanced ')'")
    return tok, pos + 1


class StreamReader:
    """Incremental reader: feed text chunks, pop complete top-level forms.

    Used by the REPL loop so commands may span lines or share one line.
    """

    def __init__(self) -> None:
        self._buf = ""

    def feed(self, chunk: str) -> list:
        self._buf += chunk
        forms: list = []
        while True:
            stripped = self._buf.lstrip()
            if not stripped:
                self._buf = ""
                break
            try:
                tokens = tokenize(self._buf)
            except SExprError:
                break  # inside an unterminated literal: wait for more input
            if not tokens:
                self._buf = ""
                break
            depth = 0
            end = None
            for idx, tok in enumerate(tokens):
                if tok == "(":
                    depth += 1
                elif tok == ")":
                    depth -= 1
                    if depth < 0:
                        raise SExprError("unbalanced ')'")
                if depth == 0:
                    end = idx
                    break
            if end is None:
                break  # form incomplete: wait for more input
            form, _ = _parse_one(tokens[: end + 1], 0)
            forms.append(form)
            # Drop the consumed prefix from the buffer by re-scanning text:
            # find the end offset of the consumed form.
            self._buf = _remainder(self._buf, end + 1)
        return forms


def _remainder(text: str, ntokens: int) -> str:
    """Return the suffix of `text` after its first `ntokens` tokens."""
    count = 0
    i, n = 0, len(text)
    while i < n and count < ntokens:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            count += 1
            i += 1
        elif c == '"':
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            count += 1
            i = j + 1
        elif c == "|":
            j = text.find("|", i + 1)
            count += 1
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in ' \t\r\n();"|':
                j += 1
            count += 1
            i = j
    return text[i:]


def to_text(expr) -> str:
    """Print an s-expression back to SMT-LIB2 concrete syntax."""
    if isinstance(expr, str):
        return expr
    return "(" + " ".join(to_text(e) for e in expr) + ")"
