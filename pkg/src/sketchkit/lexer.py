"""Lossless, indentation-aware lexing of Python source text.

A TokenStream pairs every token with the whitespace gap that precedes it,
so render() reproduces the input byte-for-byte. Indent/Dedent/EndMarker
(and the EOF-synthesized Newline) are zero-width: their text is "" and
the surrounding whitespace lives in the gaps.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

from . import _kernel
from .errors import LexError


class TokenKind(Enum):
    NAME = "Name"
    NUMBER = "Number"
    STRING = "String"
    OP = "Operator"
    COMMENT = "Comment"
    NEWLINE = "Newline"
    INDENT = "Indent"
    DEDENT = "Dedent"
    ENDMARKER = "EndMarker"


_KIND_FROM_CODE = {
    _kernel.K_NAME: TokenKind.NAME,
    _kernel.K_NUMBER: TokenKind.NUMBER,
    _kernel.K_STRING: TokenKind.STRING,
    _kernel.K_OP: TokenKind.OP,
    _kernel.K_COMMENT: TokenKind.COMMENT,
    _kernel.K_NEWLINE: TokenKind.NEWLINE,
}

CONTENT_KINDS = frozenset(
    {TokenKind.NAME, TokenKind.NUMBER, TokenKind.STRING, TokenKind.OP}
)

DEFAULT_KEYWORDS = frozenset({"def", "if", "return", "for"})


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    col: int

    def replaced(self, kind: TokenKind, text: str) -> "Token":
        return Token(kind, text, self.line, self.col)


class TokenStream:
    """Tokens plus their preceding whitespace gaps; len(gaps) == len(tokens)."""

    __slots__ = ("tokens", "gaps", "source_hash")

    def __init__(self, tokens: Sequence[Token], gaps: Sequence[str], source_hash: str):
        if len(tokens) != len(gaps):
            raise ValueError("tokens and gaps must have equal length")
        self.tokens: tuple[Token, ...] = tuple(tokens)
        self.gaps: tuple[str, ...] = tuple(gaps)
        self.source_hash = source_hash

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def with_tokens(self, tokens: Sequence[Token], gaps: Sequence[str] | None = None) -> "TokenStream":
        return TokenStream(tokens, self.gaps if gaps is None else gaps, self.source_hash)


def _hash(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8", errors="surrogatepass")).hexdigest()


def _indent_widths(prefix: str) -> tuple[int, int]:
    """(tab-stop-8 width, character count); form feed resets both."""
    col8 = 0
    col1 = 0
    for c in prefix:
        if c == "\t":
            col8 = (col8 // 8 + 1) * 8
            col1 += 1
        elif c == "\f":
            col8 = 0
            col1 = 0
        else:
            col8 += 1
            col1 += 1
    return col8, col1


def tokenize(source: str) -> TokenStream:
    """Lex source into a lossless TokenStream.

    Raises LexError(UNTERMINATED_STRING) on an unclosed string literal and
    LexError(INCONSISTENT_INDENT) when tab/space indentation is ambiguous
    or a dedent does not land on an enclosing level.
    """
    events, err = _kernel.scan(source)
    if err is not None:
        code, line, col = err
        raise LexError(LexError.UNTERMINATED_STRING, line, col)

    tokens: list[Token] = []
    gaps: list[str] = []
    pos = 0
    indents: list[tuple[int, int]] = [(0, 0)]
    at_line_start = True

    for code, start, end, line, col in events:
        kind = _KIND_FROM_CODE[code]
        if at_line_start and kind in CONTENT_KINDS:
            ls = max(source.rfind("\n", 0, start), source.rfind("\r", 0, start)) + 1
            col8, col1 = _indent_widths(source[ls:start])
            top8, top1 = indents[-1]
            if col8 > top8:
                if col1 <= top1:
                    raise LexError(LexError.INCONSISTENT_INDENT, line, 0)
                indents.append((col8, col1))
                gaps.append(source[pos:start])
                pos = start
                tokens.append(Token(TokenKind.INDENT, "", line, 0))
            elif col8 == top8:
                if col1 != top1:
                    raise LexError(LexError.INCONSISTENT_INDENT, line, 0)
            else:
                first = True
                dedent_col = start - ls
                while indents and col8 < indents[-1][0]:
                    indents.pop()
                    gap = source[pos:start] if first else ""
                    pos = start
                    first = False
                    gaps.append(gap)
                    tokens.append(Token(TokenKind.DEDENT, "", line, dedent_col))
                if not indents or indents[-1] != (col8, col1):
                    raise LexError(LexError.INCONSISTENT_INDENT, line, 0)
            at_line_start = False
        if kind is TokenKind.NEWLINE:
            at_line_start = True
        gaps.append(source[pos:start])
        pos = end
        tokens.append(Token(kind, source[start:end], line, col))

    final_line = (
        1
        + source.count("\n")
        + source.count("\r")
        - source.count("\r\n")
    )
    if source and source[-1] not in "\r\n":
        final_line += 1  # the runtime tokenizer counts the unfinished line
    first = True
    while len(indents) > 1:
        indents.pop()
        gaps.append(source[pos:] if first else "")
        if first:
            pos = len(source)
        first = False
        tokens.append(Token(TokenKind.DEDENT, "", final_line, 0))
    gaps.append(source[pos:])
    tokens.append(Token(TokenKind.ENDMARKER, "", final_line, 0))
    return TokenStream(tokens, gaps, _hash(source))


def render(stream: TokenStream) -> str:
    """Inverse of tokenize: concatenates gap + text pairs."""
    return "".join(
        g + t.text for g, t in zip(stream.gaps, stream.tokens)
    )


def render_slice(stream: TokenStream, start: int, end: int) -> str:
    return "".join(
        stream.gaps[i] + stream.tokens[i].text for i in range(start, end)
    )


def count_keywords(source: str, keywords: Iterable[str] = DEFAULT_KEYWORDS) -> int:
    """Number of distinct keywords appearing as Name tokens. Never raises:
    on unlexable source the events scanned before the error still count."""
    wanted = frozenset(keywords)
    events, _err = _kernel.scan(source)
    seen: set[str] = set()
    for code, start, end, _line, _col in events:
        if code == _kernel.K_NAME:
            text = source[start:end]
            if text in wanted:
                seen.add(text)
                if len(seen) == len(wanted):
                    break
    return len(seen)


def read_source(path) -> str:
    """Read a source file as UTF-8; undecodable bytes raise
    LexError(INVALID_ENCODING)."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise LexError(LexError.INVALID_ENCODING, 0, 0, str(exc)) from exc


def _full_line_comment(source: str, start: int) -> bool:
    ls = max(source.rfind("\n", 0, start), source.rfind("\r", 0, start)) + 1
    return source[ls:start].strip() == ""


def remove_comments(
    source: str, predicate: Callable[[Token], bool] | None = None
) -> str:
    """Delete comments matched by predicate (default: all) from source.

    A comment alone on its line is removed together with the line's
    indentation and trailing newline; a trailing comment is removed
    together with the spaces that separated it from the code.
    """
    stream = tokenize(source)
    spans: list[tuple[int, int]] = []
    pos = 0
    for gap, tok in zip(stream.gaps, stream.tokens):
        start = pos + len(gap)
        end = start + len(tok.text)
        pos = end
        if tok.kind is not TokenKind.COMMENT:
            continue
        if predicate is not None and not predicate(tok):
            continue
        if _full_line_comment(source, start):
            ls = max(source.rfind("\n", 0, start), source.rfind("\r", 0, start)) + 1
            cut_end = end
            if cut_end < len(source) and source[cut_end] == "\r":
                cut_end += 1
                if cut_end < len(source) and source[cut_end] == "\n":
                    cut_end += 1
            elif cut_end < len(source) and source[cut_end] == "\n":
                cut_end += 1
            spans.append((ls, cut_end))
        else:
            cut_start = start
            while cut_start > 0 and source[cut_start - 1] in " \t":
                cut_start -= 1
            spans.append((cut_start, end))
    if not spans:
        return source
    out: list[str] = []
    pos = 0
    for a, b in spans:
        out.append(source[pos:a])
        pos = b
    out.append(source[pos:])
    return "".join(out)
