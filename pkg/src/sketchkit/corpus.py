"""Corpus curation: cleaning, quality filtering, dedup, subsetting,
and weighted epoch planning.

Throughput-sensitive operations work directly on scanner events instead
of building full TokenStreams; the filter pipeline is expected to chew
through tens of thousands of files per minute.

Rule inputs: MaxSize and Blacklist look at the raw input (bytes, path);
MinLines, MaxAvgLineLen, MaxLineLen and MinAlnumRate look at the cleaned
text (license header and decorative comments removed); MinKeywords and
Syntax look at the original text. All rules are always evaluated - a
verdict carries every failed rule, not just the first.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from . import _kernel
from .errors import EmptyCorpus
from .lexer import DEFAULT_KEYWORDS, count_keywords

DEFAULT_LICENSE_LEXICON = frozenset(
    {
        "license",
        "licence",
        "copyright",
        "apache",
        "mit license",
        "gnu",
        "bsd",
        "all rights reserved",
        "warranty",
    }
)

DEFAULT_BLACKLIST_NAMES = frozenset({"__init__.py", "setup.py"})
DEFAULT_BLACKLIST_SUFFIXES = ("_pb2.py",)

RULE_MAX_SIZE = "MaxSize"
RULE_BLACKLIST = "Blacklist"
RULE_MIN_LINES = "MinLines"
RULE_MAX_AVG_LINE_LEN = "MaxAvgLineLen"
RULE_MAX_LINE_LEN = "MaxLineLen"
RULE_MIN_ALNUM_RATE = "MinAlnumRate"
RULE_MIN_KEYWORDS = "MinKeywords"
RULE_SYNTAX = "Syntax"

RULE_ORDER = (
    RULE_MAX_SIZE,
    RULE_BLACKLIST,
    RULE_MIN_LINES,
    RULE_MAX_AVG_LINE_LEN,
    RULE_MAX_LINE_LEN,
    RULE_MIN_ALNUM_RATE,
    RULE_MIN_KEYWORDS,
    RULE_SYNTAX,
)


@dataclass
class FileRecord:
    """One corpus file as listed in a manifest line."""

    path: str
    repo_name: str = ""
    stars: int = 0
    url: str = ""
    unit_test_rate: float = 0.0

    @classmethod
    def from_json(cls, line: str) -> "FileRecord":
        obj = json.loads(line)
        return cls(
            path=obj["path"],
            repo_name=obj.get("repo_name", ""),
            stars=int(obj.get("stars", 0)),
            url=obj.get("url", ""),
            unit_test_rate=float(obj.get("unit_test_rate", 0.0)),
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "path": self.path,
                "repo_name": self.repo_name,
                "stars": self.stars,
                "url": self.url,
            },
            sort_keys=True,
        )


def read_manifest(path) -> list[FileRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(FileRecord.from_json(line))
    return records


@dataclass(frozen=True)
class FilterConfig:
    max_bytes: int = 1_048_576
    min_lines: int = 5
    max_avg_line_len: float = 100.0
    max_line_len: int = 1000
    min_alnum_rate: float = 0.98
    min_distinct_keywords: int = 3  # "more than two" of {def, if, return, for}
    keywords: frozenset[str] = DEFAULT_KEYWORDS
    comment_alnum_threshold: float = 0.5
    license_lexicon: frozenset[str] = DEFAULT_LICENSE_LEXICON
    blacklist_names: frozenset[str] = DEFAULT_BLACKLIST_NAMES
    blacklist_suffixes: tuple[str, ...] = DEFAULT_BLACKLIST_SUFFIXES


DEFAULT_FILTER_CONFIG = FilterConfig()


@dataclass
class FilterVerdict:
    path: str
    kept: bool
    reasons: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {"path": self.path, "kept": self.kept, "reasons": self.reasons}
        )


def alnum_rate(text: str) -> float:
    """Alphanumeric characters per non-whitespace character; 1.0 for
    empty or all-whitespace text."""
    total = 0
    alnum = 0
    for ch in text:
        if ch.isspace():
            continue
        total += 1
        if ch.isalnum():
            alnum += 1
    if total == 0:
        return 1.0
    return alnum / total


def _full_line_comment(source: str, start: int) -> bool:
    ls = max(source.rfind("\n", 0, start), source.rfind("\r", 0, start)) + 1
    return source[ls:start].strip() == ""


def _comment_cut_span(source: str, start: int, end: int) -> tuple[int, int]:
    """Deletion span for the comment at [start, end): a full-line comment
    takes its indentation and trailing newline with it; a trailing comment
    takes the spaces before it."""
    n = len(source)
    if _full_line_comment(source, start):
        ls = max(source.rfind("\n", 0, start), source.rfind("\r", 0, start)) + 1
        cut_end = end
        if cut_end < n and source[cut_end] == "\r":
            cut_end += 1
            if cut_end < n and source[cut_end] == "\n":
                cut_end += 1
        elif cut_end < n and source[cut_end] == "\n":
            cut_end += 1
        return ls, cut_end
    cut_start = start
    while cut_start > 0 and source[cut_start - 1] in " \t":
        cut_start -= 1
    return cut_start, end


def clean_file(
    source: str, config: FilterConfig = DEFAULT_FILTER_CONFIG
) -> str:
    """Remove the leading license-header comment block (when any of its
    lines matches the lexicon) and decorative comments (alnum rate below
    the threshold). Unlexable input is returned unchanged."""
    events, _err = _kernel.scan(source)
    spans: list[tuple[int, int]] = []

    # leading comment block: comments before the first non-comment event
    head: list[tuple[int, int]] = []
    for code, start, end, _line, _col in events:
        if code == _kernel.K_COMMENT:
            head.append((start, end))
        else:
            break
    if head:
        block_text = " ".join(source[a:b].lower() for a, b in head)
        if any(term in block_text for term in config.license_lexicon):
            spans.extend(head)

    threshold = config.comment_alnum_threshold
    licensed = {s for s, _ in spans}
    for code, start, end, _line, _col in events:
        if code != _kernel.K_COMMENT or start in licensed:
            continue
        if alnum_rate(source[start + 1 : end]) < threshold:
            spans.append((start, end))

    if not spans:
        return source
    spans = sorted({_comment_cut_span(source, a, b) for a, b in spans})
    out: list[str] = []
    pos = 0
    for a, b in spans:
        if a < pos:
            continue  # overlapping cut already covered
        out.append(source[pos:a])
        pos = b
    out.append(source[pos:])
    return "".join(out)


def _compile_check(source: str) -> bool:
    try:
        compile(source, "<corpus>", "exec")
        return True
    except (SyntaxError, ValueError):
        return False
    except RecursionError:
        return False


def quality_filter(
    source: str,
    path: str = "",
    config: FilterConfig = DEFAULT_FILTER_CONFIG,
    syntax_checker: Callable[[str], bool] | None = None,
) -> FilterVerdict:
    """Apply every quality rule and report all failures.

    syntax_checker defaults to an in-process parse; pass a different
    callable (e.g. a sandboxed parse-only runner) to swap the engine.
    """
    reasons: list[str] = []

    if len(source.encode("utf-8", errors="surrogatepass")) > config.max_bytes:
        reasons.append(RULE_MAX_SIZE)

    name = path.rsplit("/", 1)[-1] if path else ""
    if name and (
        name in config.blacklist_names
        or any(name.endswith(sfx) for sfx in config.blacklist_suffixes)
    ):
        reasons.append(RULE_BLACKLIST)

    cleaned = clean_file(source, config)
    lines = cleaned.splitlines()
    if len(lines) < config.min_lines:
        reasons.append(RULE_MIN_LINES)
    if lines:
        avg = sum(len(l) for l in lines) / len(lines)
        longest = max(len(l) for l in lines)
    else:
        avg = 0.0
        longest = 0
    if avg > config.max_avg_line_len:
        reasons.append(RULE_MAX_AVG_LINE_LEN)
    if longest > config.max_line_len:
        reasons.append(RULE_MAX_LINE_LEN)
    if alnum_rate(cleaned) < config.min_alnum_rate:
        reasons.append(RULE_MIN_ALNUM_RATE)
    if count_keywords(source, config.keywords) < config.min_distinct_keywords:
        reasons.append(RULE_MIN_KEYWORDS)
    check = syntax_checker if syntax_checker is not None else _compile_check
    if not check(source):
        reasons.append(RULE_SYNTAX)

    order = {r: i for i, r in enumerate(RULE_ORDER)}
    reasons.sort(key=order.__getitem__)
    return FilterVerdict(path=path, kept=not reasons, reasons=reasons)


def dedup_key(source: str) -> str:
    """Content hash ignoring line-ending style and trailing whitespace."""
    normalized = "\n".join(
        line.rstrip() for line in source.splitlines()
    )
    return hashlib.sha256(normalized.encode("utf-8", errors="surrogatepass")).hexdigest()


def iter_unique(
    pairs: Iterable[tuple[str, str]]
) -> Iterator[tuple[str, bool]]:
    """Stream (id, text) pairs; yield (id, is_first_occurrence). Order
    preserved, first occurrence wins."""
    seen: set[str] = set()
    for key, text in pairs:
        h = dedup_key(text)
        if h in seen:
            yield key, False
        else:
            seen.add(h)
            yield key, True


def import_roots(source: str) -> set[str]:
    """Root modules imported at column 0 (lexical, tolerant of unparseable
    files): `import a.b`, `import a as x`, `from a.b import c`."""
    events, _err = _kernel.scan(source)
    roots: set[str] = set()
    n = len(events)
    i = 0
    while i < n:
        code, start, end, _line, col = events[i]
        if code == _kernel.K_NAME and col == 0:
            word = source[start:end]
            if word in ("import", "from"):
                j = i + 1
                while j < n:
                    jcode, js, je, _jl, _jc = events[j]
                    if jcode == _kernel.K_NAME:
                        roots.add(source[js:je])
                        break
                    # a dot before any name means a relative import
                    # ("from . import x", "from .mod import x"): no root
                    break
                # import statements list more names, but the root module
                # of the first dotted path is all the subset check needs
                # for `import a.b, c` handle the comma continuation:
                if word == "import":
                    depth = 0
                    j = i + 1
                    grab_next = False
                    while j < n:
                        jcode, js, je, _jl, _jc = events[j]
                        if jcode == _kernel.K_NEWLINE:
                            break
                        text = source[js:je]
                        if jcode == _kernel.K_OP:
                            if text in ("(", "[", "{"):
                                depth += 1
                            elif text in (")", "]", "}"):
                                depth -= 1
                            elif text == "," and depth == 0:
                                grab_next = True
                        elif jcode == _kernel.K_NAME and grab_next:
                            roots.add(text)
                            grab_next = False
                        j += 1
        i += 1
    return roots


def uses_library(source: str, library: str) -> bool:
    return library in import_roots(source)


def extract_library_subcorpus(
    items: Iterable[tuple[str, str]], library: str
) -> Iterator[str]:
    """Yield ids of (id, text) items whose text imports library at top level."""
    for key, text in items:
        if uses_library(text, library):
            yield key


def unit_test_rate(source: str) -> float:
    """Fraction of function definitions whose name starts with 'test';
    0.0 for files without functions."""
    events, _err = _kernel.scan(source)
    defs = 0
    tests = 0
    n = len(events)
    for i in range(n):
        code, start, end, _line, _col = events[i]
        if code != _kernel.K_NAME or source[start:end] != "def":
            continue
        if i + 1 < n:
            jcode, js, je, _jl, _jc = events[i + 1]
            if jcode == _kernel.K_NAME:
                defs += 1
                if source[js:je].lower().startswith("test"):
                    tests += 1
    if defs == 0:
        return 0.0
    return tests / defs


def sample_weight(stars: int, test_rate: float) -> float:
    """Resampling weight: grows with log-stars, shrinks with test density."""
    if stars < 0:
        stars = 0
    return (1.0 + math.log(1.0 + stars)) * (1.0 - 0.5 * test_rate)


def record_weight(record: FileRecord) -> float:
    return sample_weight(record.stars, record.unit_test_rate)


def build_epoch_plan(
    records: list[FileRecord],
    extra_draws: int,
    seed: int,
    weight_fn: Callable[[FileRecord], float] = record_weight,
) -> list[str]:
    """Training-epoch file order: every file once, plus extra_draws
    weighted resamples, shuffled. Deterministic for a given seed."""
    if not records:
        raise EmptyCorpus("cannot plan an epoch over zero files")
    rng = random.Random(seed)
    ids = [r.path for r in records]
    plan = list(ids)
    if extra_draws > 0:
        weights = [max(weight_fn(r), 0.0) for r in records]
        if sum(weights) <= 0:
            weights = [1.0] * len(records)
        plan.extend(rng.choices(ids, weights=weights, k=extra_draws))
    rng.shuffle(plan)
    return plan


def corpus_stats(items: Iterable[tuple[str, str]]) -> dict:
    """Aggregate statistics over (id, text) pairs for the stats CLI."""
    files = 0
    total_bytes = 0
    total_lines = 0
    rates = []
    test_rates = []
    for _key, text in items:
        files += 1
        total_bytes += len(text.encode("utf-8", errors="surrogatepass"))
        total_lines += len(text.splitlines())
        rates.append(alnum_rate(text))
        test_rates.append(unit_test_rate(text))
    return {
        "files": files,
        "bytes": total_bytes,
        "lines": total_lines,
        "mean_alnum_rate": sum(rates) / files if files else 0.0,
        "mean_unit_test_rate": sum(test_rates) / files if files else 0.0,
    }


def write_filter_report(
    verdicts: Iterable[FilterVerdict], report_path, stats_path=None
) -> dict:
    """Write the per-file verdict JSONL and return (optionally writing)
    the summary: total, kept, histogram of failure reasons."""
    total = 0
    kept = 0
    histogram: dict[str, int] = {}
    with open(report_path, "w", encoding="utf-8") as fh:
        for v in verdicts:
            total += 1
            if v.kept:
                kept += 1
            for r in v.reasons:
                histogram[r] = histogram.get(r, 0) + 1
            fh.write(v.to_json() + "\n")
    stats = {"total": total, "kept": kept, "reason_histogram": histogram}
    if stats_path is not None:
        with open(stats_path, "w", encoding="utf-8") as fh:
            json.dump(stats, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return stats
