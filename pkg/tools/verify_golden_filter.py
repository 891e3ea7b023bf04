"""Development oracle for the golden filter fixture: recompute every
metric with independent code (CPython tokenize + plain counting, no
sketchkit imports) and check the hand-assigned labels."""

import io
import re
import sys
import tokenize as ctok

sys.path.insert(0, "tests")
from golden_filter import GOLDEN, DEDUP_EXPECT  # noqa: E402

LICENSE_WORDS = ("license", "copyright", "apache", "mit license", "gnu")
KEYWORDS = {"def", "if", "return", "for"}


def simple_clean(source: str) -> str:
    """Line-based cleaning good enough for the golden files: strip the
    leading comment block when it smells like a license, and drop
    full-line comments whose post-# alnum rate is < 0.5."""
    lines = source.splitlines(keepends=True)
    head_end = 0
    while head_end < len(lines) and lines[head_end].lstrip().startswith("#"):
        head_end += 1
    head = lines[:head_end]
    if head and any(w in " ".join(head).lower() for w in LICENSE_WORDS):
        lines = lines[head_end:]
    out = []
    for line in lines:
        stripped = line.strip()
        if stripped.startswith("#"):
            body = stripped[1:]
            nonws = [c for c in body if not c.isspace()]
            rate = (sum(c.isalnum() for c in nonws) / len(nonws)) if nonws else 1.0
            if rate < 0.5:
                continue
        out.append(line)
    return "".join(out)


def alnum_rate(text: str) -> float:
    nonws = [c for c in text if not c.isspace()]
    if not nonws:
        return 1.0
    return sum(c.isalnum() for c in nonws) / len(nonws)


def distinct_keywords(source: str) -> int:
    found = set()
    try:
        for tok in ctok.generate_tokens(io.StringIO(source).readline):
            if tok.type == ctok.NAME and tok.string in KEYWORDS:
                found.add(tok.string)
    except (ctok.TokenizeError, IndentationError, SyntaxError, ValueError):
        for word in re.findall(r"[A-Za-z_][A-Za-z0-9_]*", source):
            if word in KEYWORDS:
                found.add(word)
    return len(found)


def expected_reasons(rel: str, content: str) -> list[str]:
    reasons = []
    if len(content.encode("utf-8")) > 1_048_576:
        reasons.append("MaxSize")
    name = rel.rsplit("/", 1)[-1]
    if name in ("__init__.py", "setup.py") or name.endswith("_pb2.py"):
        reasons.append("Blacklist")
    cleaned = simple_clean(content)
    lines = cleaned.splitlines()
    if len(lines) < 5:
        reasons.append("MinLines")
    if lines and sum(map(len, lines)) / len(lines) > 100:
        reasons.append("MaxAvgLineLen")
    if lines and max(map(len, lines)) > 1000:
        reasons.append("MaxLineLen")
    if alnum_rate(cleaned) < 0.98:
        reasons.append("MinAlnumRate")
    if distinct_keywords(content) < 3:
        reasons.append("MinKeywords")
    try:
        compile(content, rel, "exec")
    except (SyntaxError, ValueError):
        reasons.append("Syntax")
    return reasons


def main() -> int:
    assert len(GOLDEN) == 30, f"golden set has {len(GOLDEN)} files, want 30"
    bad = 0
    for rel, content, labels in GOLDEN:
        indep = expected_reasons(rel, content)
        mark = "ok " if indep == labels else "BAD"
        if indep != labels:
            bad += 1
            cleaned = simple_clean(content)
            lines = cleaned.splitlines()
            print(
                f"{mark} {rel}: labeled {labels}, independent {indep} "
                f"(lines={len(lines)}, "
                f"avg={sum(map(len, lines)) / len(lines) if lines else 0:.1f}, "
                f"max={max(map(len, lines)) if lines else 0}, "
                f"alnum={alnum_rate(cleaned):.4f}, "
                f"keys={distinct_keywords(content)})"
            )
        else:
            print(f"{mark} {rel}: {labels or 'kept'}")
    # dedup golden: normalized-content hashing independent of the package
    seen = set()
    for rel, content, _ in GOLDEN:
        if rel not in DEDUP_EXPECT:
            continue
        norm = "\n".join(l.rstrip() for l in content.splitlines())
        first = norm not in seen
        seen.add(norm)
        if first != DEDUP_EXPECT[rel]:
            bad += 1
            print(f"BAD dedup {rel}: expected first={DEDUP_EXPECT[rel]}, got {first}")
        else:
            print(f"ok  dedup {rel}: first={first}")
    print("RESULT:", "all labels verified" if bad == 0 else f"{bad} mismatches")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
