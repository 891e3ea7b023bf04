"""Pure-Python scanner kernel.

Reference implementation of the character-level scanner. The compiled
kernel (_scan_cy) mirrors this logic exactly; parity between the two is
enforced by tests. Keep the two in sync when touching either.

scan(source) produces flat events, not Token objects: downstream layers
attach indentation structure and inter-token gaps. Event tuple layout:

    (kind, start, end, line, col)

with kind one of the K_* codes below, [start, end) a codepoint span in
source, line 1-based and col 0-based at the token start. A logical
NEWLINE event is emitted only at depth 0 on lines that carry at least
one non-comment token; newlines inside brackets, blank lines and
comment-only lines are left to the gap between tokens. A zero-width
NEWLINE is synthesized at EOF when the last line has content but no
trailing newline.

The only scan-level error is an unterminated string, reported as
(ERR_UNTERMINATED, line, col) of the opening quote; events scanned
before the error are still returned.
"""

from __future__ import annotations

import re

K_NAME = 0
K_NUMBER = 1
K_STRING = 2
K_OP = 3
K_COMMENT = 4
K_NEWLINE = 5

ERR_UNTERMINATED = 1

_NAME_ASCII = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

_DIGITS = r"[0-9](?:_?[0-9])*"
_NUMBER = re.compile(
    r"0[xX](?:_?[0-9a-fA-F])+"
    r"|0[bB](?:_?[01])+"
    r"|0[oO](?:_?[0-7])+"
    rf"|(?:{_DIGITS}\.(?:{_DIGITS})?|\.{_DIGITS}|{_DIGITS})(?:[eE][-+]?{_DIGITS})?[jJ]?"
)

_STRING_PREFIXES = frozenset(
    {"r", "b", "u", "f", "rb", "br", "fr", "rf"}
)

_OPS3 = frozenset({"**=", "//=", ">>=", "<<=", "..."})
_OPS2 = frozenset(
    {
        "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->",
        "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", ":=", "@=",
    }
)

_OPENERS = frozenset("([{")
_CLOSERS = frozenset(")]}")

_SQ_SPECIAL = re.compile(r"['\\\r\n]")
_DQ_SPECIAL = re.compile(r'["\\\r\n]')


def _is_id_start(ch: str) -> bool:
    return ch == "_" or ("a" <= ch <= "z") or ("A" <= ch <= "Z") or (
        ord(ch) > 127 and ch.isidentifier()
    )


def _is_id_cont(ch: str) -> bool:
    return (
        ch == "_"
        or ("a" <= ch <= "z")
        or ("A" <= ch <= "Z")
        or ("0" <= ch <= "9")
        or (ord(ch) > 127 and ("a" + ch).isidentifier())
    )


def _scan_name_end(source: str, i: int) -> int:
    """End index of the identifier starting at i (caller checked the start)."""
    n = len(source)
    j = i
    while j < n:
        m = _NAME_ASCII.match(source, j)
        if m:
            j = m.end()
        if j >= n or not (ord(source[j]) > 127 and ("a" + source[j]).isidentifier()):
            break
        j += 1
        while j < n and ord(source[j]) > 127 and ("a" + source[j]).isidentifier():
            j += 1
    return j


def _scan_string(source: str, qpos: int):
    """Scan a string literal whose opening quote sits at qpos.

    Returns (end, newlines, last_nl_pos): end index one past the closing
    quote, the number of line breaks inside the literal, and the index of
    the final line-break character (-1 when single-line). end == -1 means
    unterminated.
    """
    n = len(source)
    q = source[qpos]
    if source.startswith(q * 3, qpos):
        terminator = q * 3
        j = qpos + 3
        while True:
            k = source.find(terminator, j)
            if k == -1:
                return -1, 0, -1
            b = k - 1
            nb = 0
            while b >= j and source[b] == "\\":
                nb += 1
                b -= 1
            if nb % 2:
                j = k + 1
                continue
            end = k + 3
            break
    else:
        special = _SQ_SPECIAL if q == "'" else _DQ_SPECIAL
        j = qpos + 1
        end = -1
        while True:
            m = special.search(source, j)
            if m is None:
                return -1, 0, -1
            k = m.start()
            c = source[k]
            if c == "\\":
                if k + 1 >= n:
                    return -1, 0, -1
                if source[k + 1] == "\r" and k + 2 < n and source[k + 2] == "\n":
                    j = k + 3
                else:
                    j = k + 2
                continue
            if c == q:
                end = k + 1
                break
            return -1, 0, -1  # raw newline inside a single-quoted literal
    newlines = source.count("\n", qpos, end) + source.count(
        "\r", qpos, end
    ) - source.count("\r\n", qpos, end)
    last_nl = max(source.rfind("\n", qpos, end), source.rfind("\r", qpos, end))
    return end, newlines, last_nl


def scan(source: str):
    """Scan source into (events, error); error is None or (code, line, col)."""
    events = []
    append = events.append
    n = len(source)
    i = 0
    line = 1
    line_start = 0
    depth = 0
    line_has_token = False

    while i < n:
        ch = source[i]

        if ch == " " or ch == "\t" or ch == "\f" or ch == "﻿":
            i += 1
            continue

        if ch == "\n" or ch == "\r":
            j = i + 1
            if ch == "\r" and j < n and source[j] == "\n":
                j += 1
            if depth == 0 and line_has_token:
                append((K_NEWLINE, i, j, line, i - line_start))
                line_has_token = False
            line += 1
            line_start = j
            i = j
            continue

        if ch == "\\":
            j = i + 1
            if j < n and (source[j] == "\n" or source[j] == "\r"):
                k = j + 1
                if source[j] == "\r" and k < n and source[k] == "\n":
                    k += 1
                line += 1
                line_start = k
                i = k
                continue
            append((K_OP, i, i + 1, line, i - line_start))
            line_has_token = True
            i += 1
            continue

        if ch == "#":
            j = i + 1
            while j < n and source[j] != "\n" and source[j] != "\r":
                j += 1
            append((K_COMMENT, i, j, line, i - line_start))
            i = j
            continue

        col = i - line_start

        if _is_id_start(ch):
            j = _scan_name_end(source, i)
            if (
                j - i <= 2
                and j < n
                and (source[j] == '"' or source[j] == "'")
                and source[i:j].lower() in _STRING_PREFIXES
            ):
                end, newlines, last_nl = _scan_string(source, j)
                if end == -1:
                    return events, (ERR_UNTERMINATED, line, col)
                append((K_STRING, i, end, line, col))
                if newlines:
                    line += newlines
                    line_start = last_nl + 1
                line_has_token = True
                i = end
                continue
            append((K_NAME, i, j, line, col))
            line_has_token = True
            i = j
            continue

        if ch == '"' or ch == "'":
            end, newlines, last_nl = _scan_string(source, i)
            if end == -1:
                return events, (ERR_UNTERMINATED, line, col)
            append((K_STRING, i, end, line, col))
            if newlines:
                line += newlines
                line_start = last_nl + 1
            line_has_token = True
            i = end
            continue

        if "0" <= ch <= "9" or (
            ch == "." and i + 1 < n and "0" <= source[i + 1] <= "9"
        ):
            m = _NUMBER.match(source, i)
            j = m.end()
            append((K_NUMBER, i, j, line, col))
            line_has_token = True
            i = j
            continue

        if source[i : i + 3] in _OPS3:
            j = i + 3
        elif source[i : i + 2] in _OPS2:
            j = i + 2
        else:
            j = i + 1
            if ch in _OPENERS:
                depth += 1
            elif ch in _CLOSERS and depth > 0:
                depth -= 1
        append((K_OP, i, j, line, col))
        line_has_token = True
        i = j

    if line_has_token:
        append((K_NEWLINE, n, n, line, n - line_start))
    return events, None
