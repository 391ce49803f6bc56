"""Lossless tokenizer shared by the three viewpoint languages."""

from __future__ import annotations

import bisect
import enum
import re
from dataclasses import dataclass
from typing import Optional

from .diagnostics import Diagnostic, SourceSpan
from .errors import LexError


class TokenKind(enum.Enum):
    IDENT = "identifier"
    KEYWORD = "keyword"
    STRING_LIT = "string"
    INT_LIT = "integer"
    PUNCT = "punctuation"
    COMMENT = "comment"
    EOF = "end of file"


KEYWORDS = frozenset(
    """
    namespace import as
    structure list element boolean int float string date
    functional infrastructure microservice interface operation not-implemented
    in out inout sync async initialized by contract provides requires
    technology service container protocol format load-balancer circuit-breaker
    artifact contracts endpoint for environment instances deploys
    discovery gateway registers
    """.split()
)


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.text)

    def is_(self, kind: TokenKind, text: Optional[str] = None) -> bool:
        return self.kind is kind and (text is None or self.text == text)

    def __repr__(self) -> str:
        return f"Token({self.kind.name}, {self.text!r}, {self.span})"


_SCANNER = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<string>"(?:[^"\\\n]|\\[^\n])*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<int>[0-9]+)
  | (?P<punct>\.\.|[{}():,.])
    """,
    re.VERBOSE | re.DOTALL,
)


class _Positions:
    def __init__(self, source: str, file: str):
        self.file = file
        self.line_starts = [0] + [i + 1 for i, ch in enumerate(source) if ch == "\n"]

    def at(self, offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(self.line_starts, offset) - 1
        return line + 1, offset - self.line_starts[line] + 1

    def span(self, start: int, end: int) -> SourceSpan:
        sl, sc = self.at(start)
        el, ec = self.at(end)
        return SourceSpan(self.file, sl, sc, el, ec)


def _scan(source: str, file: str, errors: Optional[list[Diagnostic]]) -> list[Token]:
    pos = _Positions(source, file)
    tokens: list[Token] = []
    i, n = 0, len(source)

    def fail(message: str, start: int, end: int) -> None:
        span = pos.span(start, end)
        if errors is None:
            raise LexError(message, span)
        errors.append(Diagnostic("P002", message, span))

    while i < n:
        m = _SCANNER.match(source, i)
        if m is None:
            ch = source[i]
            if source.startswith("/*", i):
                fail("unterminated block comment", i, i + 2)
                tokens.append(Token(TokenKind.COMMENT, source[i:], pos.span(i, n), i))
                i = n
            elif ch == '"':
                fail("unterminated string literal", i, i + 1)
                end = source.find("\n", i)
                end = n if end < 0 else end
                tokens.append(Token(TokenKind.STRING_LIT, source[i:end], pos.span(i, end), i))
                i = end
            else:
                fail(f"illegal character {ch!r}", i, i + 1)
                i += 1
            continue
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            if kind == "ident":
                tk = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            elif kind in ("line_comment", "block_comment"):
                tk = TokenKind.COMMENT
            elif kind == "string":
                tk = TokenKind.STRING_LIT
            elif kind == "int":
                tk = TokenKind.INT_LIT
            else:
                tk = TokenKind.PUNCT
            tokens.append(Token(tk, text, pos.span(i, m.end()), i))
        i = m.end()
    tokens.append(Token(TokenKind.EOF, "", pos.span(n, n), n))
    return tokens


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """Split ``source`` into tokens, comments included, ending with EOF.

    Raises LexError on unterminated strings or comments and on illegal characters.
    """
    return _scan(source, file, None)


def tokenize_tolerant(source: str, file: str = "<input>") -> tuple[list[Token], list[Diagnostic]]:
    """Like :func:`tokenize` but records lexical errors as P002 diagnostics and keeps going."""
    errors: list[Diagnostic] = []
    return _scan(source, file, errors), errors


def string_value(token: Token) -> str:
    body = token.text[1:-1] if len(token.text) >= 2 and token.text.endswith('"') else token.text[1:]
    return re.sub(r"\\(.)", r"\1", body)


def quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
