"""Training-document assembly for the two model stages.

Sketcher documents are whole files with terms anonymized (comments kept:
the sketcher learns to write sketches under real-world context).
Generator documents interleave comment-stripped sketched blocks with the
verbatim original blocks, so the generator learns to expand a sketch
into concrete code. Blocks are top-level function/class definitions
(decorators included) or runs of consecutive top-level statements.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from enum import Enum

from .errors import BlockAlignmentError, LexError
from .lexer import (
    CONTENT_KINDS,
    TokenKind,
    TokenStream,
    remove_comments,
    render_slice,
    tokenize,
)
from .sketch import (
    DEFAULT_SYMBOLS,
    SketchMode,
    SymbolTable,
    classify_names,
    sketch_tokens,
)

MAX_RUN_TOKENS = 512
DOC_SENTINEL = "<|endoftext|>"


class BlockKind(Enum):
    FUNCTION_DEF = "FunctionDef"
    CLASS_DEF = "ClassDef"
    STATEMENT_RUN = "StatementRun"


@dataclass
class Block:
    kind: BlockKind
    index: int
    start: int  # token index, inclusive
    end: int  # token index, exclusive
    text: str
    token_count: int


def strip_docstring_spans(source: str, module_head: bool = True) -> str:
    """Remove standalone string-expression statements sitting at the head
    of the module (when module_head) or of any def/class suite."""
    stream = tokenize(source)
    toks = stream.tokens

    # logical lines as (first_index, last_index) over content tokens
    lines: list[tuple[int, int]] = []
    first = -1
    last = -1
    for i, t in enumerate(toks):
        if t.kind in CONTENT_KINDS:
            if first == -1:
                first = i
            last = i
        elif t.kind is TokenKind.NEWLINE or t.kind is TokenKind.ENDMARKER:
            if first != -1:
                lines.append((first, last))
                first = -1
    if first != -1:
        lines.append((first, last))

    def is_string_only(a: int, b: int) -> bool:
        return all(
            toks[i].kind is TokenKind.STRING
            for i in range(a, b + 1)
            if toks[i].kind in CONTENT_KINDS
        ) and any(toks[i].kind is TokenKind.STRING for i in range(a, b + 1))

    def is_def_header(a: int, b: int) -> bool:
        head = toks[a].text
        if head == "async" and a + 1 <= b:
            head = toks[a + 1].text
        return head in ("def", "class")

    doomed: list[tuple[int, int]] = []
    for idx, (a, b) in enumerate(lines):
        if not is_string_only(a, b):
            continue
        if idx == 0:
            if module_head:
                doomed.append((a, b))
            continue
        pa, pb = lines[idx - 1]
        if is_def_header(pa, pb):
            doomed.append((a, b))

    if not doomed:
        return source

    # map token indices to source offsets by walking gaps
    offsets: list[tuple[int, int]] = []
    pos = 0
    for g, t in zip(stream.gaps, toks):
        s = pos + len(g)
        e = s + len(t.text)
        offsets.append((s, e))
        pos = e

    spans: list[tuple[int, int]] = []
    for a, b in doomed:
        start = offsets[a][0]
        ls = max(source.rfind("\n", 0, start), source.rfind("\r", 0, start)) + 1
        if source[ls:start].strip() == "":
            start = ls
        # extend through the line's newline token if present
        end = offsets[b][1]
        k = b + 1
        while k < len(toks) and toks[k].kind not in CONTENT_KINDS:
            if toks[k].kind is TokenKind.NEWLINE and toks[k].text:
                end = offsets[k][1]
                break
            if toks[k].kind is TokenKind.COMMENT:
                break  # trailing comment keeps its line
            k += 1
        spans.append((start, end))

    out: list[str] = []
    pos = 0
    for a, b in sorted(spans):
        out.append(source[pos:a])
        pos = b
    out.append(source[pos:])
    return "".join(out)


def strip_comments_and_docstrings(source: str, module_head: bool = True) -> str:
    """Comments out, then docstrings out. The result still lexes."""
    return strip_docstring_spans(remove_comments(source), module_head=module_head)


def split_blocks(stream: TokenStream) -> list[Block]:
    """Partition a file's tokens into top-level blocks.

    def/class blocks swallow their decorators; consecutive plain
    statements form StatementRun blocks, split at blank lines into
    chunks of at most MAX_RUN_TOKENS tokens (a single over-long segment
    stays whole). Standalone comments attach to the following block.
    Every token lands in exactly one block, so the block texts
    concatenate back to the exact file.
    """
    toks = stream.tokens
    n = len(toks)
    if n == 0 or all(t.kind is TokenKind.ENDMARKER for t in toks):
        return []

    # first content-token index of every depth-0 logical line
    level = 0
    at_start = True
    line_heads: list[int] = []
    for i, t in enumerate(toks):
        if t.kind is TokenKind.INDENT:
            level += 1
        elif t.kind is TokenKind.DEDENT:
            level -= 1
        elif t.kind is TokenKind.NEWLINE:
            at_start = True
        elif t.kind in CONTENT_KINDS:
            if at_start and level == 0:
                line_heads.append(i)
            at_start = False
    if not line_heads:
        return []  # nothing but comments/whitespace: no blocks to learn from

    def head_kind(i: int) -> str:
        text = toks[i].text
        if text == "@":
            return "deco"
        if text == "async":
            j = i + 1
            while j < n and toks[j].kind not in CONTENT_KINDS:
                j += 1
            if j < n and toks[j].text == "def":
                return "def"
            return "stmt"
        if text == "def":
            return "def"
        if text == "class":
            return "class"
        return "stmt"

    # group logical lines into block spans
    groups: list[tuple[BlockKind, int]] = []  # (kind, first line-head index)
    i = 0
    pending_deco = -1
    while i < len(line_heads):
        kind = head_kind(line_heads[i])
        if kind == "deco":
            if pending_deco == -1:
                pending_deco = i
            i += 1
            continue
        if kind in ("def", "class"):
            first = pending_deco if pending_deco != -1 else i
            groups.append(
                (
                    BlockKind.FUNCTION_DEF if kind == "def" else BlockKind.CLASS_DEF,
                    first,
                )
            )
            pending_deco = -1
            i += 1
            continue
        first = pending_deco if pending_deco != -1 else i
        pending_deco = -1
        groups.append((BlockKind.STATEMENT_RUN, first))
        i += 1
    if pending_deco != -1:
        groups.append((BlockKind.STATEMENT_RUN, pending_deco))

    # merge consecutive StatementRun lines into runs
    merged: list[tuple[BlockKind, int]] = []
    for kind, first in groups:
        if (
            kind is BlockKind.STATEMENT_RUN
            and merged
            and merged[-1][0] is BlockKind.STATEMENT_RUN
        ):
            continue
        merged.append((kind, first))

    def boundary_token(line_head_idx: int) -> int:
        """Token index opening the block that starts at this logical line:
        walk back over comments and zero-width structure tokens."""
        i = line_heads[line_head_idx]
        j = i
        while j > 0:
            prev = toks[j - 1]
            if prev.kind in (TokenKind.COMMENT, TokenKind.DEDENT, TokenKind.INDENT):
                j -= 1
            else:
                break
        return j

    bounds = [boundary_token(first) for _kind, first in merged]
    bounds[0] = 0
    bounds.append(n)

    blocks: list[Block] = []
    for bi, (kind, _first) in enumerate(merged):
        a, b = bounds[bi], bounds[bi + 1]
        if kind is not BlockKind.STATEMENT_RUN or b - a <= MAX_RUN_TOKENS:
            blocks.append(_make_block(stream, kind, len(blocks), a, b))
            continue
        # oversized statement run: split at blank-line boundaries
        inner_heads = [h for h in line_heads if a < h < b]
        segments = _segment_run(stream, a, b, inner_heads)
        for sa, sb in segments:
            blocks.append(
                _make_block(stream, BlockKind.STATEMENT_RUN, len(blocks), sa, sb)
            )
    return blocks


def _blank_check_index(toks, head: int) -> int:
    """Index whose gap holds the whitespace before this logical line
    (walks back over comments/zero-width tokens like boundary_token)."""
    j = head
    while j > 0 and toks[j - 1].kind in (
        TokenKind.COMMENT,
        TokenKind.DEDENT,
        TokenKind.INDENT,
    ):
        j -= 1
    return j


def _gap_has_blank_line(gap: str) -> bool:
    # the logical Newline token already owns the line-ending newline, so
    # any newline left in the gap means an intervening blank line
    return "\n" in gap or "\r" in gap


def _segment_run(
    stream: TokenStream, a: int, b: int, cut_heads: list[int]
) -> list[tuple[int, int]]:
    toks = stream.tokens
    cuts = []
    for head in cut_heads:
        j = _blank_check_index(toks, head)
        if _gap_has_blank_line(stream.gaps[j]):
            cuts.append(j)
    pieces: list[tuple[int, int]] = []
    prev = a
    for c in cuts:
        if c > prev:
            pieces.append((prev, c))
            prev = c
    pieces.append((prev, b))
    # greedy recombination up to the cap
    out: list[tuple[int, int]] = []
    cur_a, cur_b = pieces[0]
    for pa, pb in pieces[1:]:
        if pb - cur_a <= MAX_RUN_TOKENS:
            cur_b = pb
        else:
            out.append((cur_a, cur_b))
            cur_a, cur_b = pa, pb
    out.append((cur_a, cur_b))
    return out


def _make_block(
    stream: TokenStream, kind: BlockKind, index: int, a: int, b: int
) -> Block:
    return Block(
        kind=kind,
        index=index,
        start=a,
        end=b,
        text=render_slice(stream, a, b),
        token_count=b - a,
    )


@dataclass
class MergedDoc:
    """Alternating parts: even positions sketched (comment-stripped),
    odd positions verbatim original blocks."""

    parts: list[str]
    source_path: str = ""

    def text(self) -> str:
        out: list[str] = []
        for part in self.parts:
            out.append(part)
            if part and not part.endswith("\n"):
                out.append("\n")  # keep adjacent parts from fusing
        return "".join(out)

    def original_blocks(self) -> list[str]:
        return self.parts[1::2]

    def sketched_blocks(self) -> list[str]:
        return self.parts[0::2]


def make_sketcher_doc(
    source: str,
    mode: SketchMode = SketchMode.CONSTANTS_ONLY,
    symbols: SymbolTable = DEFAULT_SYMBOLS,
) -> str:
    """Whole-file sketch, comments retained."""
    return sketch_tokens(tokenize(source), mode, symbols).text


def make_generator_doc(
    source: str,
    mode: SketchMode = SketchMode.CONSTANTS_ONLY,
    symbols: SymbolTable = DEFAULT_SYMBOLS,
    source_path: str = "",
) -> MergedDoc | None:
    """Cross-merge of sketched and original blocks; None when the file
    has no blocks. Name classification runs once over the whole file so
    fragment sketching matches whole-file sketching exactly."""
    stream = tokenize(source)
    blocks = split_blocks(stream)
    if not blocks:
        return None
    names = classify_names(stream)
    parts: list[str] = []
    for blk in blocks:
        stripped = strip_comments_and_docstrings(
            blk.text, module_head=(blk.index == 0)
        )
        try:
            sub = tokenize(stripped)
        except LexError as exc:
            raise BlockAlignmentError(
                f"stripped block {blk.index} of {source_path or '<memory>'} "
                f"does not lex: {exc}"
            ) from exc
        sk = sketch_tokens(sub, mode, symbols, names=names)
        parts.append(sk.text)
        parts.append(blk.text)
    return MergedDoc(parts=parts, source_path=source_path)


def _doc_token_count(text: str) -> int:
    try:
        return max(len(tokenize(text)) - 1, 0)  # EndMarker excluded
    except LexError:
        return len(text.split())


def emit_corpus(
    docs,
    out_dir,
    prefix: str = "shard",
    shard_mb: int = 100,
    sentinel: str = DOC_SENTINEL,
    extra_manifest: dict | None = None,
) -> dict:
    """Write documents into size-capped shard files separated by sentinel
    lines, plus a manifest. docs yields (doc_id, text) pairs.

    On any write error, partially written shards are removed before the
    exception propagates.
    """
    os.makedirs(out_dir, exist_ok=True)
    cap = shard_mb * 1024 * 1024
    shards: list[dict] = []
    written: list[str] = []
    documents = 0
    tokens = 0
    fh = None
    cur_path = None
    cur_bytes = 0
    cur_docs = 0
    digest = hashlib.sha256()

    def open_next():
        nonlocal fh, cur_path, cur_bytes, cur_docs
        cur_path = os.path.join(out_dir, f"{prefix}-{len(written):05d}.txt")
        written.append(cur_path)
        fh = open(cur_path, "w", encoding="utf-8")
        cur_bytes = 0
        cur_docs = 0

    def close_current():
        nonlocal fh
        if fh is not None:
            fh.close()
            shards.append(
                {
                    "path": os.path.basename(cur_path),
                    "bytes": cur_bytes,
                    "documents": cur_docs,
                }
            )
            fh = None

    try:
        open_next()
        for doc_id, text in docs:
            blob = text if text.endswith("\n") else text + "\n"
            blob += sentinel + "\n"
            data = blob.encode("utf-8")
            if cur_bytes and cur_bytes + len(data) > cap:
                close_current()
                open_next()
            fh.write(blob)
            digest.update(data)
            cur_bytes += len(data)
            cur_docs += 1
            documents += 1
            tokens += _doc_token_count(text)
        close_current()
    except BaseException:
        if fh is not None:
            fh.close()
        for p in written:
            try:
                os.remove(p)
            except OSError:
                pass
        raise

    manifest = {
        "shards": shards,
        "documents": documents,
        "tokens": tokens,
        "sentinel": sentinel,
        "content_digest": digest.hexdigest(),
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    manifest_path = os.path.join(out_dir, f"{prefix}-manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as mh:
        json.dump(manifest, mh, indent=2, sort_keys=True)
        mh.write("\n")
    return manifest
