"""Execution-based evaluation: problems, candidates, pass@k, reports.

The pass@k estimator is the unbiased combinatorial form computed with a
numerically stable running product; tests pin it against an exact
rational-arithmetic oracle.
"""

from __future__ import annotations

import json
import keyword
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import DomainError, MissingProblem
from .execution import ErrorKind, ExecVerdict
from .lexer import CONTENT_KINDS, LexError, TokenKind, tokenize
from .sketch import DEFAULT_SYMBOLS, SketchMode, SymbolTable, normalize, sketch_source
from . import _kernel

DEFAULT_STOPS = ("\nclass", "\ndef", "\n#", "\n@", "\nprint", "\nif")

CHECK_FUNCTION = "function"
CHECK_VARIABLE = "variable"

STAGE_BASELINE = "baseline"
STAGE_TWO_STAGE = "two-stage"
STAGE_SKETCH_SHORTCUT = "sketch-shortcut"


def pass_at_k(n: int, c: int, k: int) -> float:
    """Probability that at least one of k samples drawn without
    replacement from n candidates (c of them correct) is correct.

    Identity: 1 - C(n-c, k) / C(n, k), evaluated as a running product so
    large n stay in float range.
    """
    if n < 1 or c < 0 or c > n or k < 1 or k > n:
        raise DomainError(f"pass_at_k outside domain: n={n} c={c} k={k}")
    if c == 0:
        return 0.0
    if n - c < k:
        return 1.0
    prod = 1.0
    for i in range(n - c + 1, n + 1):
        prod *= 1.0 - k / i
    return 1.0 - prod


def truncate_completion(text: str, stops=DEFAULT_STOPS) -> str:
    """Cut text at the earliest occurrence of any stop sequence."""
    cut = len(text)
    for stop in stops:
        idx = text.find(stop)
        if idx != -1 and idx < cut:
            cut = idx
    return text[:cut]


@dataclass
class Problem:
    task_id: str
    context: str
    canonical_solution: str
    tests: list[str]
    check_kind: str = CHECK_FUNCTION
    entry_point: str = ""
    var_name: str = ""
    library: str = ""

    def __post_init__(self):
        if self.check_kind not in (CHECK_FUNCTION, CHECK_VARIABLE):
            raise ValueError(f"{self.task_id}: bad check_kind {self.check_kind!r}")
        if self.check_kind == CHECK_FUNCTION and not self.entry_point:
            raise ValueError(f"{self.task_id}: function check needs entry_point")
        if self.check_kind == CHECK_VARIABLE:
            if not self.var_name:
                raise ValueError(f"{self.task_id}: variable check needs var_name")
            if len(self.tests) != 1:
                raise ValueError(
                    f"{self.task_id}: variable check takes exactly one test"
                )
        if not self.tests:
            raise ValueError(f"{self.task_id}: no tests")

    @classmethod
    def from_json(cls, line: str) -> "Problem":
        obj = json.loads(line)
        return cls(
            task_id=obj["task_id"],
            context=obj["context"],
            canonical_solution=obj.get("canonical_solution", ""),
            tests=list(obj["tests"]),
            check_kind=obj.get("check_kind", CHECK_FUNCTION),
            entry_point=obj.get("entry_point", ""),
            var_name=obj.get("var_name", ""),
            library=obj.get("library", ""),
        )


def load_problems(path) -> dict[str, Problem]:
    problems: dict[str, Problem] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            p = Problem.from_json(line)
            problems[p.task_id] = p
    return problems


@dataclass
class Sample:
    task_id: str
    text: str
    temperature: float
    seed: int = 0
    stage: str = STAGE_BASELINE

    def to_json(self) -> str:
        return json.dumps(
            {
                "task_id": self.task_id,
                "text": self.text,
                "temperature": self.temperature,
                "seed": self.seed,
                "stage": self.stage,
            }
        )

    @classmethod
    def from_json(cls, line: str) -> "Sample":
        obj = json.loads(line)
        return cls(
            task_id=obj["task_id"],
            text=obj["text"],
            temperature=float(obj["temperature"]),
            seed=int(obj.get("seed", 0)),
            stage=obj.get("stage", STAGE_BASELINE),
        )


@dataclass
class CandidateSet:
    task_id: str
    samples: list[Sample] = field(default_factory=list)


def save_candidates(samples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(s.to_json() + "\n")


def load_candidates(paths) -> dict[str, CandidateSet]:
    if isinstance(paths, (str, bytes)) or hasattr(paths, "__fspath__"):
        paths = [paths]
    sets: dict[str, CandidateSet] = {}
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                s = Sample.from_json(line)
                sets.setdefault(s.task_id, CandidateSet(s.task_id)).samples.append(s)
    return sets


def assemble_program(problem: Problem, completion: str) -> str:
    """Context + completion + checks, as one executable program.

    Function-style problems append every test assertion; they run
    sequentially in one process. Variable-style problems append their
    single check.
    """
    body = problem.context + completion
    if not body.endswith("\n"):
        body += "\n"
    checks = "\n".join(problem.tests)
    return body + "\n" + checks + "\n"


@dataclass
class EvalReport:
    problems: dict = field(default_factory=dict)  # task_id -> {"n": int, "c": int}
    pass_at_k: dict = field(default_factory=dict)  # k -> mean over problems
    by_temperature: dict = field(default_factory=dict)  # temp -> {k: mean}
    temperature_best: dict = field(default_factory=dict)  # k -> {"temperature", "value"}
    groups: dict = field(default_factory=dict)  # label -> {"count", "pass_at_k"}
    error_histogram: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "problems": self.problems,
                "pass_at_k": {str(k): v for k, v in self.pass_at_k.items()},
                "by_temperature": {
                    str(t): {str(k): v for k, v in table.items()}
                    for t, table in self.by_temperature.items()
                },
                "temperature_best": {
                    str(k): v for k, v in self.temperature_best.items()
                },
                "groups": self.groups,
                "error_histogram": self.error_histogram,
            },
            indent=2,
            sort_keys=True,
        )


def _mean_pass_at_k(counts: dict[str, tuple[int, int]], k: int) -> float:
    vals = [pass_at_k(n, c, k) for n, c in counts.values()]
    return sum(vals) / len(vals)


def evaluate(
    problems: dict[str, Problem],
    candidate_sets: dict[str, CandidateSet],
    runner,
    ks=(1,),
    timeout_s: float = 10.0,
    jobs: int = 2,
    groups: dict[str, str] | None = None,
) -> EvalReport:
    """Run every sample of every candidate set and aggregate pass@k.

    Infra verdicts are retried once; a second infra failure counts as a
    plain failure and lands in the error histogram. groups optionally
    maps task_id -> label for per-group tables.
    """
    for task_id in candidate_sets:
        if task_id not in problems:
            raise MissingProblem(task_id)

    tasks: list[tuple[str, int, str]] = []
    for task_id, cset in sorted(candidate_sets.items()):
        problem = problems[task_id]
        for si, sample in enumerate(cset.samples):
            tasks.append((task_id, si, assemble_program(problem, sample.text)))

    def run_one(spec: tuple[str, int, str]) -> ExecVerdict:
        _tid, _si, program = spec
        verdict = runner.run(program, timeout_s)
        if verdict.error_kind is ErrorKind.INFRA:
            verdict = runner.run(program, timeout_s)
        return verdict

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(run_one, tasks))
    else:
        verdicts = [run_one(t) for t in tasks]

    per_problem: dict[str, tuple[int, int]] = {}
    per_temp: dict[float, dict[str, tuple[int, int]]] = defaultdict(dict)
    histogram: dict[str, int] = defaultdict(int)
    passed_by_sample: dict[tuple[str, int], bool] = {}
    for (task_id, si, _prog), verdict in zip(tasks, verdicts):
        passed_by_sample[(task_id, si)] = verdict.passed
        histogram[verdict.error_kind.value] += 1

    for task_id, cset in sorted(candidate_sets.items()):
        n = len(cset.samples)
        c = sum(
            1 for si in range(n) if passed_by_sample[(task_id, si)]
        )
        per_problem[task_id] = (n, c)
        for temp in {s.temperature for s in cset.samples}:
            idxs = [
                si for si, s in enumerate(cset.samples) if s.temperature == temp
            ]
            tn = len(idxs)
            tc = sum(1 for si in idxs if passed_by_sample[(task_id, si)])
            per_temp[temp][task_id] = (tn, tc)

    report = EvalReport()
    report.problems = {
        tid: {"n": n, "c": c} for tid, (n, c) in sorted(per_problem.items())
    }
    report.error_histogram = dict(sorted(histogram.items()))

    for k in ks:
        bad = [tid for tid, (n, _c) in per_problem.items() if k > n]
        if bad:
            raise DomainError(
                f"k={k} exceeds sample count for {len(bad)} problem(s), "
                f"e.g. {bad[0]}"
            )
        report.pass_at_k[k] = _mean_pass_at_k(per_problem, k)

    for temp, counts in sorted(per_temp.items()):
        table = {}
        for k in ks:
            if all(k <= n for n, _c in counts.values()):
                table[k] = _mean_pass_at_k(counts, k)
        if table:
            report.by_temperature[temp] = table
    for k in ks:
        best = None
        for temp, table in report.by_temperature.items():
            if k in table and (best is None or table[k] > best[1]):
                best = (temp, table[k])
        if best is not None:
            report.temperature_best[k] = {
                "temperature": best[0],
                "value": best[1],
            }

    if groups:
        by_label: dict[str, dict[str, tuple[int, int]]] = defaultdict(dict)
        for tid, counts in per_problem.items():
            label = groups.get(tid)
            if label is not None:
                by_label[label][tid] = counts
        for label, counts in sorted(by_label.items()):
            table = {
                str(k): _mean_pass_at_k(counts, k)
                for k in ks
                if all(k <= n for n, _c in counts.values())
            }
            report.groups[label] = {"count": len(counts), "pass_at_k": table}

    return report


def sketch_exact_match(
    predictions: list[str],
    references: list[str],
    mode: SketchMode = SketchMode.CONSTANTS_ONLY,
    symbols: SymbolTable = DEFAULT_SYMBOLS,
) -> dict:
    """Share of predicted sketches normalizing to the reference's true
    sketch. Unlexable predictions never match."""
    if len(predictions) != len(references):
        raise DomainError("predictions and references differ in length")
    flags: list[bool] = []
    for pred, ref in zip(predictions, references):
        gold = normalize(sketch_source(ref, mode, symbols).text)
        try:
            got = normalize(pred)
        except LexError:
            flags.append(False)
            continue
        flags.append(got == gold)
    accuracy = sum(flags) / len(flags) if flags else 0.0
    return {"matches": flags, "accuracy": accuracy}


def _library_aliases(source: str, library: str) -> set[str]:
    """Names that refer to the library after imports: the module name,
    as-aliases, and from-imported members."""
    events, _err = _kernel.scan(source)
    toks = [
        (code, source[s:e], col)
        for code, s, e, _line, col in events
        if code in (_kernel.K_NAME, _kernel.K_OP, _kernel.K_NEWLINE)
    ]
    aliases: set[str] = set()
    i = 0
    n = len(toks)
    while i < n:
        code, text, col = toks[i]
        if code != _kernel.K_NAME or text not in ("import", "from"):
            i += 1
            continue
        # gather this logical line
        j = i
        line = []
        while j < n and toks[j][0] != _kernel.K_NEWLINE:
            line.append(toks[j])
            j += 1
        words = [t for t in line if t[0] == _kernel.K_NAME]
        texts = [t[1] for t in words]
        if text == "import":
            # import lib[.sub] [as x][, other]
            k = 0
            while k < len(texts):
                if texts[k] == library:
                    if k + 2 < len(texts) and texts[k + 1] == "as":
                        aliases.add(texts[k + 2])
                    else:
                        aliases.add(library)
                k += 1
        else:
            # from lib[.sub] import a [as b], c
            if len(texts) >= 2 and texts[1] == library:
                try:
                    imp = texts.index("import")
                except ValueError:
                    imp = -1
                if imp != -1:
                    k = imp + 1
                    while k < len(texts):
                        name = texts[k]
                        if k + 2 < len(texts) and texts[k + 1] == "as":
                            aliases.add(texts[k + 2])
                            k += 3
                        else:
                            if name != "as":
                                aliases.add(name)
                            k += 1
        i = j + 1
    return aliases


def count_api_calls(
    source: str, library: str, extra_aliases: set[str] | None = None
) -> int:
    """Lexical count of library API calls in source.

    Counts calls rooted in the library's imported names, walks dotted
    chains (pd.io.json.read_json(...) is one call, a chained
    .groupby(...) after it is another), and taints names assigned from
    such expressions so their later method calls count too.
    """
    try:
        stream = tokenize(source)
    except LexError:
        return 0
    aliases = _library_aliases(source, library)
    if extra_aliases:
        aliases |= set(extra_aliases)
    if not aliases:
        return 0

    # logical lines of content tokens
    lines: list[list] = []
    cur: list = []
    for t in stream.tokens:
        if t.kind in CONTENT_KINDS:
            cur.append(t)
        elif t.kind is TokenKind.NEWLINE or t.kind is TokenKind.ENDMARKER:
            if cur:
                lines.append(cur)
                cur = []
    if cur:
        lines.append(cur)

    tainted: set[str] = set()
    total = 0
    for line in lines:
        texts = [t.text for t in line]
        if texts and texts[0] in ("import", "from"):
            continue
        # assignment split at the last depth-0 plain '='
        depth = 0
        eq = -1
        for idx, t in enumerate(line):
            if t.kind is TokenKind.OP:
                if t.text in ("(", "[", "{"):
                    depth += 1
                elif t.text in (")", "]", "}"):
                    depth -= 1
                elif t.text == "=" and depth == 0:
                    eq = idx
        line_count = 0
        i = 0
        nline = len(line)
        while i < nline:
            t = line[i]
            if (
                t.kind is TokenKind.NAME
                and t.text in (aliases | tainted)
                and not (
                    i > 0
                    and line[i - 1].kind is TokenKind.OP
                    and line[i - 1].text == "."
                )
            ):
                i, calls = _walk_call_chain(line, i)
                line_count += calls
                continue
            i += 1
        total += line_count
        if eq != -1 and line_count > 0:
            for idx in range(eq):
                t = line[idx]
                if (
                    t.kind is TokenKind.NAME
                    and not keyword.iskeyword(t.text)
                    and not (
                        idx > 0
                        and line[idx - 1].kind is TokenKind.OP
                        and line[idx - 1].text == "."
                    )
                    and not (
                        idx + 1 < nline
                        and line[idx + 1].kind is TokenKind.OP
                        and line[idx + 1].text in ("(", "[")
                    )
                ):
                    tainted.add(t.text)
    return total


def _walk_call_chain(line, i) -> tuple[int, int]:
    """From the root name at i, walk `.name`, call parens and subscripts,
    counting each call. Returns (resume_index, calls)."""
    n = len(line)
    calls = 0
    j = i  # j sits on the last name of the current chain link
    while True:
        nxt = line[j + 1] if j + 1 < n else None
        if nxt is None or nxt.kind is not TokenKind.OP:
            return j + 1, calls
        if nxt.text == ".":
            if j + 2 < n and line[j + 2].kind is TokenKind.NAME:
                j = j + 2
                continue
            return j + 1, calls
        if nxt.text == "(":
            calls += 1
            j = _skip_balanced(line, j + 1) - 1
            nxt2 = line[j + 1] if j + 1 < n else None
            if nxt2 is not None and nxt2.kind is TokenKind.OP and nxt2.text in (".", "(", "["):
                continue
            return j + 1, calls
        if nxt.text == "[":
            j = _skip_balanced(line, j + 1) - 1
            continue
        return j + 1, calls


def _skip_balanced(line, open_idx: int) -> int:
    """Index one past the bracket closing line[open_idx]."""
    depth = 0
    j = open_idx
    n = len(line)
    while j < n:
        t = line[j]
        if t.kind is TokenKind.OP:
            if t.text in ("(", "[", "{"):
                depth += 1
            elif t.text in (")", "]", "}"):
                depth -= 1
                if depth == 0:
                    return j + 1
        j += 1
    return n


def api_count_buckets(
    problems: dict[str, Problem], n_buckets: int = 4
) -> dict[str, str]:
    """Bucket task_ids by API-call count of their canonical solutions
    (quantile boundaries, bucket labels "q1".."qN")."""
    counts = {
        tid: count_api_calls(p.context + p.canonical_solution, p.library)
        for tid, p in problems.items()
        if p.library
    }
    if not counts:
        return {}
    ordered = sorted(counts.values())
    bounds = []
    for b in range(1, n_buckets):
        idx = min(len(ordered) - 1, (b * len(ordered)) // n_buckets)
        bounds.append(ordered[idx])
    labels = {}
    for tid, cnt in counts.items():
        b = 0
        while b < len(bounds) and cnt > bounds[b]:
            b += 1
        labels[tid] = f"q{b + 1}"
    return labels
