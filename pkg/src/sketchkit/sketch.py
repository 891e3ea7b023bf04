"""Sketching: anonymization of user-defined terms in token streams.

A sketch replaces literals (and, in the name-anonymizing modes,
user-defined identifiers) with fixed placeholder words while leaving
layout, keywords and library calls untouched. The result always re-lexes,
and sketching an already-sketched stream changes nothing.
"""

from __future__ import annotations

import keyword
from collections import Counter
from dataclasses import dataclass
from enum import Enum

from .errors import EmptyCandidateList
from .lexer import (
    CONTENT_KINDS,
    Token,
    TokenKind,
    TokenStream,
    render,
    tokenize,
)


class SketchMode(Enum):
    CONSTANTS_ONLY = "constants-only"
    NAMES_ONLY = "names-only"
    NAMES_AND_CONSTANTS = "names-and-constants"


@dataclass(frozen=True)
class SymbolTable:
    """Placeholder vocabulary. Words must lex as single Name tokens and
    must not be Python keywords, or the sketch would not re-lex cleanly."""

    number_symbol: str = "number"
    string_symbol: str = "string"
    function_symbol: str = "function"
    class_symbol: str = "classname"
    variable_symbol: str = "variable"
    keep_numbers: frozenset[str] = frozenset({"0", "1", "2", "3"})

    def words(self, mode: SketchMode) -> frozenset[str]:
        if mode is SketchMode.CONSTANTS_ONLY:
            return frozenset({self.number_symbol, self.string_symbol})
        if mode is SketchMode.NAMES_ONLY:
            return frozenset(
                {self.function_symbol, self.class_symbol, self.variable_symbol}
            )
        return frozenset(
            {
                self.number_symbol,
                self.string_symbol,
                self.function_symbol,
                self.class_symbol,
                self.variable_symbol,
            }
        )

    def all_words(self) -> frozenset[str]:
        return self.words(SketchMode.NAMES_AND_CONSTANTS)


DEFAULT_SYMBOLS = SymbolTable()


@dataclass
class Sketch:
    stream: TokenStream
    text: str
    mode: SketchMode
    anonymous_count: int
    symbol_collisions: int


def _iter_logical_lines(tokens):
    """Yield lists of (index, token) content tokens per logical line."""
    line: list[tuple[int, Token]] = []
    for i, tok in enumerate(tokens):
        if tok.kind in CONTENT_KINDS:
            line.append((i, tok))
        elif tok.kind is TokenKind.NEWLINE or tok.kind is TokenKind.ENDMARKER:
            if line:
                yield line
                line = []
    if line:
        yield line


_AUG_OPS = frozenset(
    {"+=", "-=", "*=", "/=", "//=", "**=", "%=", "&=", "|=", "^=", ">>=", "<<=", "@="}
)
_COMPOUND_HEADS = frozenset(
    {"if", "elif", "while", "else", "try", "finally", "except", "with", "for",
     "def", "class", "match", "case", "async"}
)


def _depth_delta(text: str) -> int:
    if text in ("(", "[", "{"):
        return 1
    if text in (")", "]", "}"):
        return -1
    return 0


def _split_statements(toks: list[Token]) -> list[list[Token]]:
    """Split one logical line into statements at depth-0 semicolons."""
    out: list[list[Token]] = []
    cur: list[Token] = []
    depth = 0
    for t in toks:
        if t.kind is TokenKind.OP:
            if t.text == ";" and depth == 0:
                if cur:
                    out.append(cur)
                cur = []
                continue
            depth += _depth_delta(t.text)
        cur.append(t)
    if cur:
        out.append(cur)
    return out


def _collect_import_bindings(toks: list[Token], exempt: set[str]) -> None:
    texts = [t.text for t in toks]
    if texts[0] == "import":
        # import a.b as c, d.e => binds c and d
        i = 1
        depth = 0
        while i < len(toks):
            t = toks[i]
            if t.kind is TokenKind.OP:
                depth += _depth_delta(t.text)
                i += 1
                continue
            if t.kind is TokenKind.NAME and depth == 0:
                # first component of the dotted path
                root = t.text
                j = i + 1
                while j + 1 < len(toks) and toks[j].text == "." and toks[j + 1].kind is TokenKind.NAME:
                    j += 2
                if j < len(toks) and toks[j].text == "as" and j + 1 < len(toks):
                    exempt.add(toks[j + 1].text)
                    j += 2
                else:
                    exempt.add(root)
                # advance to next comma
                while j < len(toks) and toks[j].text != ",":
                    j += 1
                i = j + 1
                continue
            i += 1
        return
    # from a.b import c as d, e
    try:
        imp = next(i for i, t in enumerate(toks) if t.text == "import" and t.kind is TokenKind.NAME)
    except StopIteration:
        return
    i = imp + 1
    while i < len(toks):
        t = toks[i]
        if t.kind is TokenKind.NAME and not keyword.iskeyword(t.text):
            if i + 2 < len(toks) and toks[i + 1].text == "as":
                exempt.add(toks[i + 2].text)
                i += 3
            else:
                exempt.add(t.text)
                i += 1
        else:
            i += 1


def _next_content(toks: list[Token], i: int) -> Token | None:
    return toks[i + 1] if i + 1 < len(toks) else None


def _prev_content(toks: list[Token], i: int) -> Token | None:
    return toks[i - 1] if i > 0 else None


def _bindable(toks: list[Token], i: int) -> bool:
    """True when toks[i] is a Name usable as a binding target."""
    t = toks[i]
    if t.kind is not TokenKind.NAME or keyword.iskeyword(t.text):
        return False
    p = _prev_content(toks, i)
    if p is not None and p.kind is TokenKind.OP and p.text == ".":
        return False
    nxt = _next_content(toks, i)
    if nxt is not None and nxt.kind is TokenKind.OP and nxt.text in ("(", "["):
        return False
    return True


def _set_var(cats: dict[str, str], name: str) -> None:
    cats.setdefault(name, "variable")


def _collect_def_params(toks: list[Token], open_idx: int, cats: dict[str, str]) -> int:
    """Collect parameter names inside the parens opening at open_idx.
    Returns the index one past the closing paren."""
    depth = 0
    expecting = True
    i = open_idx
    while i < len(toks):
        t = toks[i]
        if t.kind is TokenKind.OP:
            d = _depth_delta(t.text)
            depth += d
            if depth == 0 and d < 0:
                return i + 1
            if depth == 1:
                if t.text == ",":
                    expecting = True
                elif t.text in ("*", "**", "/"):
                    expecting = True
                elif t.text in (":", "="):
                    expecting = False
        elif t.kind is TokenKind.NAME and depth == 1 and expecting and not keyword.iskeyword(t.text):
            _set_var(cats, t.text)
            expecting = False
        i += 1
    return i


def _collect_lambda_params(toks: list[Token], lam_idx: int, cats: dict[str, str]) -> None:
    depth = 0
    expecting = True
    for i in range(lam_idx + 1, len(toks)):
        t = toks[i]
        if t.kind is TokenKind.OP:
            if t.text == ":" and depth == 0:
                return
            d = _depth_delta(t.text)
            depth += d
            if depth == 0:
                if t.text == ",":
                    expecting = True
                elif t.text in ("*", "**"):
                    expecting = True
                elif t.text == "=":
                    expecting = False
            if depth < 0:
                return
        elif t.kind is TokenKind.NAME and depth == 0 and expecting and not keyword.iskeyword(t.text):
            _set_var(cats, t.text)
            expecting = False


def _collect_for_targets(toks: list[Token], for_idx: int, cats: dict[str, str]) -> None:
    base = 0
    for i in range(for_idx + 1, len(toks)):
        t = toks[i]
        if t.kind is TokenKind.NAME and t.text == "in" and base == 0:
            return
        if t.kind is TokenKind.OP:
            base += _depth_delta(t.text)
            if base < 0:
                return
            continue
        if t.kind is TokenKind.NAME and _bindable(toks, i):
            _set_var(cats, t.text)


def _depth0_positions(toks: list[Token]) -> tuple[int, int]:
    """Indices of the first depth-0 colon and the first depth-0 plain =
    (-1 when absent)."""
    depth = 0
    colon = -1
    eq = -1
    for i, t in enumerate(toks):
        if t.kind is not TokenKind.OP:
            continue
        depth += _depth_delta(t.text)
        if depth != 0:
            continue
        if t.text == ":" and colon == -1:
            colon = i
        elif t.text == "=" and eq == -1:
            eq = i
    return colon, eq


def _collect_statement(toks: list[Token], cats: dict[str, str]) -> None:
    if not toks:
        return
    # generic sweeps valid anywhere in the statement: lambda params,
    # for targets (loops and comprehensions), as-bindings, walrus
    for i, t in enumerate(toks):
        if t.kind is not TokenKind.NAME:
            continue
        if t.text == "lambda":
            _collect_lambda_params(toks, i, cats)
        elif t.text == "for":
            _collect_for_targets(toks, i, cats)
        elif t.text == "as":
            nxt = _next_content(toks, i)
            if nxt is not None and nxt.kind is TokenKind.NAME and not keyword.iskeyword(nxt.text):
                _set_var(cats, nxt.text)
        elif not keyword.iskeyword(t.text):
            nxt = _next_content(toks, i)
            if nxt is not None and nxt.kind is TokenKind.OP and nxt.text == ":=":
                p = _prev_content(toks, i)
                if p is None or p.text != ".":
                    _set_var(cats, t.text)

    head = toks[0].text
    if head == "async" and len(toks) > 1:
        toks = toks[1:]
        head = toks[0].text
    is_compound = False
    if head in _COMPOUND_HEADS and head not in ("match", "case", "async"):
        is_compound = True
    elif head in ("match", "case"):
        # soft keywords: a block header has a depth-0 colon and no
        # assignment before it ("match = f()" stays an assignment)
        colon, eq = _depth0_positions(toks)
        is_compound = colon != -1 and (eq == -1 or eq > colon)
    if is_compound:
        if head == "def":
            if len(toks) > 1 and toks[1].kind is TokenKind.NAME:
                cats.setdefault(toks[1].text, "function")
                try:
                    open_idx = next(
                        i for i in range(2, len(toks)) if toks[i].text == "("
                    )
                except StopIteration:
                    return
                _collect_def_params(toks, open_idx, cats)
            return
        if head == "class":
            if len(toks) > 1 and toks[1].kind is TokenKind.NAME:
                cats.setdefault(toks[1].text, "class")
            return
        # one-liner bodies after the colon: "if x: y = 1"
        colon, _eq = _depth0_positions(toks)
        if colon != -1 and colon + 1 < len(toks):
            for stmt in _split_statements(toks[colon + 1 :]):
                _collect_statement(stmt, cats)
        return

    if head in ("global", "nonlocal"):
        for i in range(1, len(toks)):
            if toks[i].kind is TokenKind.NAME and not keyword.iskeyword(toks[i].text):
                _set_var(cats, toks[i].text)
        return
    if head == "del":
        for i in range(1, len(toks)):
            if _bindable(toks, i):
                _set_var(cats, toks[i].text)
        return
    if head in ("import", "from"):
        return  # handled by the import collector

    # assignment statement: names left of the last delimiting = at depth 0
    depth = 0
    last_eq = -1
    colon = -1
    for i, t in enumerate(toks):
        if t.kind is not TokenKind.OP:
            continue
        depth += _depth_delta(t.text)
        if depth != 0:
            continue
        if t.text == "=":
            last_eq = i
        elif t.text in _AUG_OPS and last_eq == -1:
            last_eq = i
        elif t.text == ":" and colon == -1:
            colon = i
    if last_eq == -1:
        return
    stop = colon if 0 <= colon < last_eq else last_eq
    for i in range(stop):
        if _bindable(toks, i):
            _set_var(cats, toks[i].text)


def classify_names(stream: TokenStream) -> tuple[dict[str, str], set[str]]:
    """Two-pass lexical classification of user-defined identifiers.

    Returns (categories, exempt): categories maps a name to one of
    "function" | "class" | "variable" (first classification wins);
    exempt holds names bound by imports, which are never anonymized.
    """
    cats: dict[str, str] = {}
    exempt: set[str] = set()
    for line in _iter_logical_lines(stream.tokens):
        toks = [t for _, t in line]
        for stmt in _split_statements(toks):
            if not stmt:
                continue
            if stmt[0].text in ("import", "from") and stmt[0].kind is TokenKind.NAME:
                _collect_import_bindings(stmt, exempt)
            else:
                _collect_statement(stmt, cats)
    return cats, exempt


def _ends_wordish(text: str) -> bool:
    if not text:
        return False
    c = text[-1]
    return c == "_" or c.isalnum()


def _starts_wordish(text: str) -> bool:
    if not text:
        return False
    c = text[0]
    return c == "_" or c.isalnum()


def sketch_tokens(
    stream: TokenStream,
    mode: SketchMode = SketchMode.CONSTANTS_ONLY,
    symbols: SymbolTable = DEFAULT_SYMBOLS,
    names: tuple[dict[str, str], set[str]] | None = None,
) -> Sketch:
    """Anonymize stream per mode. Idempotent; preserves token count,
    comments, layout and re-lexability.

    names: precomputed classify_names result, so callers sketching file
    fragments can keep whole-file classification semantics.
    """
    do_constants = mode in (SketchMode.CONSTANTS_ONLY, SketchMode.NAMES_AND_CONSTANTS)
    do_names = mode in (SketchMode.NAMES_ONLY, SketchMode.NAMES_AND_CONSTANTS)

    cats: dict[str, str] = {}
    exempt: set[str] = set()
    if do_names:
        cats, exempt = names if names is not None else classify_names(stream)
    sym_words = symbols.all_words()
    cat_word = {
        "function": symbols.function_symbol,
        "class": symbols.class_symbol,
        "variable": symbols.variable_symbol,
    }

    toks = list(stream.tokens)
    new_tokens: list[Token] = []
    count = 0
    collisions = 0
    prev_content: Token | None = None
    for i, tok in enumerate(toks):
        out = tok
        if tok.kind is TokenKind.NAME:
            if tok.text in sym_words:
                collisions += 1  # pre-existing symbol word; never re-replaced
            elif (
                do_names
                and tok.text in cats
                and tok.text not in exempt
                and not keyword.iskeyword(tok.text)
                and not (
                    prev_content is not None
                    and prev_content.kind is TokenKind.OP
                    and prev_content.text == "."
                )
            ):
                out = tok.replaced(TokenKind.NAME, cat_word[cats[tok.text]])
                count += 1
        elif tok.kind is TokenKind.NUMBER:
            if do_constants and tok.text not in symbols.keep_numbers:
                out = tok.replaced(TokenKind.NAME, symbols.number_symbol)
                count += 1
        elif tok.kind is TokenKind.STRING:
            if do_constants:
                out = tok.replaced(TokenKind.NAME, symbols.string_symbol)
                count += 1
        new_tokens.append(out)
        if tok.kind in CONTENT_KINDS:
            prev_content = tok

    # adjacency repair: a replacement flush against a wordish neighbor
    # would fuse into one token on re-lex, so give it a one-space gap
    new_gaps = list(stream.gaps)
    for i in range(1, len(new_tokens)):
        if new_gaps[i]:
            continue
        if _ends_wordish(new_tokens[i - 1].text) and _starts_wordish(new_tokens[i].text):
            if new_tokens[i - 1].text != toks[i - 1].text or new_tokens[i].text != toks[i].text:
                new_gaps[i] = " "

    out_stream = TokenStream(new_tokens, new_gaps, stream.source_hash)
    return Sketch(
        stream=out_stream,
        text=render(out_stream),
        mode=mode,
        anonymous_count=count,
        symbol_collisions=collisions,
    )


def sketch_source(
    source: str,
    mode: SketchMode = SketchMode.CONSTANTS_ONLY,
    symbols: SymbolTable = DEFAULT_SYMBOLS,
) -> Sketch:
    return sketch_tokens(tokenize(source), mode, symbols)


def has_anonymous_symbols(sketch: Sketch) -> bool:
    """True when the sketch still contains placeholders a generator must fill."""
    return sketch.anonymous_count > 0


def detect_anonymous_symbols(
    text: str,
    symbols: SymbolTable = DEFAULT_SYMBOLS,
    mode: SketchMode = SketchMode.NAMES_AND_CONSTANTS,
) -> int:
    """Count placeholder words appearing as Name tokens in arbitrary text.
    Raises LexError when the text does not lex."""
    words = symbols.words(mode)
    return sum(
        1
        for t in tokenize(text).tokens
        if t.kind is TokenKind.NAME and t.text in words
    )


def normalize(text: str) -> str:
    """Canonical form for voting and exact-match comparison.

    Comments and blank lines are dropped, intra-line spacing collapses to
    single spaces, and indentation is re-encoded as four spaces per level.
    Raises LexError when text does not lex.
    """
    stream = tokenize(text)
    lines: list[str] = []
    cur: list[str] = []
    level = 0
    for tok in stream.tokens:
        if tok.kind in CONTENT_KINDS:
            cur.append(tok.text)
        elif tok.kind is TokenKind.INDENT:
            level += 1
        elif tok.kind is TokenKind.DEDENT:
            level -= 1
        elif tok.kind is TokenKind.NEWLINE or tok.kind is TokenKind.ENDMARKER:
            if cur:
                lines.append("    " * level + " ".join(cur))
                cur = []
    return "\n".join(lines)


def vote(candidates: list[str]) -> str:
    """Most frequent normalized candidate; ties break to the
    lexicographically smallest. Raises EmptyCandidateList on []."""
    if not candidates:
        raise EmptyCandidateList("vote requires at least one candidate")
    counts = Counter(normalize(c) for c in candidates)
    top = max(counts.values())
    return min(k for k, v in counts.items() if v == top)
