"""Command-line entry point.

Usage: sketchkit GROUP COMMAND [options]. Groups:

    corpus    filter | dedup | extract | stats | plan
    sketch    file | corpus
    traindata sketcher | generator
    infer     baseline | two-stage | sweep
    eval      run | passk | sketch-em | buckets | report
    mock-serve

A TOML file passed with --config supplies defaults for omitted flags
(sections [endpoint], [sketcher], [generator], [filter]); explicit
flags always win. Usage errors exit 2, pipeline errors exit 1.
"""

from __future__ import annotations

import argparse
import glob as globmod
import json
import os
import sys

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover - version dependent
    import tomli as tomllib

from . import SCANNER_BACKEND, __version__
from . import corpus as corpusmod
from . import evalkit, mockserve, orchestrator, traindata
from .errors import DomainError, SketchkitError
from .execution import HarnessParseChecker, HarnessRunner, InProcessRunner
from .lexer import read_source
from .sketch import DEFAULT_SYMBOLS, SketchMode, sketch_source


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _cfg(config: dict, section: str, key: str, fallback):
    return config.get(section, {}).get(key, fallback)


def _mode(value: str) -> SketchMode:
    try:
        return SketchMode(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown mode {value!r}; pick one of "
            + ", ".join(m.value for m in SketchMode)
        )


def _float_list(value: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list {value!r}")


def _int_list(value: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad int list {value!r}")


def _iter_corpus(manifest: str, src_root: str):
    """Yield (record, source_text) for each manifest entry, skipping
    files that are unreadable or not valid UTF-8."""
    for rec in corpusmod.read_manifest(manifest):
        full = os.path.join(src_root, rec.path) if src_root else rec.path
        try:
            source = read_source(full)
        except (OSError, SketchkitError):
            continue
        yield rec, source


def _filter_config(config: dict, args) -> corpusmod.FilterConfig:
    base = corpusmod.DEFAULT_FILTER_CONFIG
    sec = config.get("filter", {})
    return corpusmod.FilterConfig(
        max_bytes=int(sec.get("max_bytes", base.max_bytes)),
        min_lines=int(sec.get("min_lines", base.min_lines)),
        max_avg_line_len=float(sec.get("max_avg_line_len", base.max_avg_line_len)),
        max_line_len=int(sec.get("max_line_len", base.max_line_len)),
        min_alnum_rate=float(sec.get("min_alnum_rate", base.min_alnum_rate)),
        min_distinct_keywords=int(
            sec.get("min_distinct_keywords", base.min_distinct_keywords)
        ),
    )


def _endpoint(config: dict, args, section: str = "endpoint",
              url_attr: str = "url", model_attr: str = "model") -> orchestrator.Endpoint:
    url = getattr(args, url_attr, None) or _cfg(config, section, "url", None)
    model = getattr(args, model_attr, None) or _cfg(config, section, "model", None)
    if not url or not model:
        raise SketchkitError(
            f"no endpoint url/model given (flag or [{section}] config section)"
        )
    return orchestrator.Endpoint(
        base_url=url,
        model=model,
        auth_token_env=_cfg(config, section, "token_env", "SKETCHKIT_API_TOKEN"),
        timeout_s=float(_cfg(config, section, "timeout_s", 60.0)),
        max_retries=int(_cfg(config, section, "max_retries", 3)),
    )


# ---------------------------------------------------------------- corpus


def cmd_corpus_filter(args, config) -> int:
    fcfg = _filter_config(config, args)
    checker = None
    if args.syntax_engine == "harness":
        checker = HarnessParseChecker(HarnessRunner(cmd=[args.harness_cmd]))
    verdicts = []
    kept_sources = []
    for rec, source in _iter_corpus(args.manifest, args.src_root):
        v = corpusmod.quality_filter(source, rec.path, fcfg, syntax_checker=checker)
        verdicts.append(v)
        if v.kept and args.clean_dir:
            kept_sources.append((rec.path, corpusmod.clean_file(source, fcfg)))
    if args.dry_run:
        kept = sum(1 for v in verdicts if v.kept)
        print(f"would write {len(verdicts)} verdicts ({kept} kept) to {args.report}")
        return 0
    stats = corpusmod.write_filter_report(verdicts, args.report, args.stats)
    if args.clean_dir:
        for rel, text in kept_sources:
            dest = os.path.join(args.clean_dir, rel)
            os.makedirs(os.path.dirname(dest) or ".", exist_ok=True)
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(text)
    print(json.dumps(stats, sort_keys=True))
    return 0


def cmd_corpus_dedup(args, config) -> int:
    pairs = ((rec.path, src) for rec, src in _iter_corpus(args.manifest, args.src_root))
    unique = [key for key, first in corpusmod.iter_unique(pairs) if first]
    if args.dry_run:
        print(f"would keep {len(unique)} unique paths")
        return 0
    with open(args.out, "w", encoding="utf-8") as fh:
        for key in unique:
            fh.write(key + "\n")
    print(f"kept {len(unique)} unique paths")
    return 0


def cmd_corpus_extract(args, config) -> int:
    pairs = ((rec.path, src) for rec, src in _iter_corpus(args.manifest, args.src_root))
    hits = list(corpusmod.extract_library_subcorpus(pairs, args.library))
    if args.dry_run:
        print(f"would write {len(hits)} paths importing {args.library}")
        return 0
    with open(args.out, "w", encoding="utf-8") as fh:
        for key in hits:
            fh.write(key + "\n")
    print(f"{len(hits)} files import {args.library}")
    return 0


def cmd_corpus_stats(args, config) -> int:
    pairs = ((rec.path, src) for rec, src in _iter_corpus(args.manifest, args.src_root))
    stats = corpusmod.corpus_stats(pairs)
    text = json.dumps(stats, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_corpus_plan(args, config) -> int:
    records = corpusmod.read_manifest(args.manifest)
    plan = corpusmod.build_epoch_plan(records, args.extra_draws, args.seed)
    if args.dry_run:
        print(f"would write a {len(plan)}-entry epoch plan to {args.out}")
        return 0
    with open(args.out, "w", encoding="utf-8") as fh:
        for p in plan:
            fh.write(p + "\n")
    print(f"epoch plan: {len(plan)} entries ({len(records)} files)")
    return 0


# ---------------------------------------------------------------- sketch


def cmd_sketch_file(args, config) -> int:
    source = read_source(args.path)
    sk = sketch_source(source, args.mode, DEFAULT_SYMBOLS)
    sys.stdout.write(sk.text)
    return 0


def cmd_sketch_corpus(args, config) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    written = 0
    for rec, source in _iter_corpus(args.manifest, args.src_root):
        try:
            sk = sketch_source(source, args.mode, DEFAULT_SYMBOLS)
        except SketchkitError:
            continue
        if args.dry_run:
            written += 1
            continue
        dest = os.path.join(args.out_dir, rec.path)
        os.makedirs(os.path.dirname(dest) or ".", exist_ok=True)
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(sk.text)
        written += 1
    verb = "would sketch" if args.dry_run else "sketched"
    print(f"{verb} {written} files into {args.out_dir}")
    return 0


# ---------------------------------------------------------------- traindata


def _train_docs(args, kind: str):
    for rec, source in _iter_corpus(args.manifest, args.src_root):
        try:
            if kind == "sketcher":
                text = traindata.make_sketcher_doc(source, args.mode)
            else:
                doc = traindata.make_generator_doc(
                    source, args.mode, source_path=rec.path
                )
                if doc is None:
                    continue
                text = doc.text()
        except SketchkitError:
            continue
        yield rec.path, text


def cmd_traindata(args, config, kind: str) -> int:
    docs = _train_docs(args, kind)
    if args.dry_run:
        n = sum(1 for _ in docs)
        print(f"would emit {n} {kind} documents to {args.out_dir}")
        return 0
    manifest = traindata.emit_corpus(
        docs, args.out_dir, prefix=kind, shard_mb=args.shard_mb
    )
    print(
        f"{manifest['documents']} documents, {manifest['tokens']} tokens, "
        f"{len(manifest['shards'])} shards in {args.out_dir}"
    )
    return 0


# ---------------------------------------------------------------- infer


def cmd_infer_baseline(args, config) -> int:
    endpoint = _endpoint(config, args)
    problems = evalkit.load_problems(args.problems)
    if args.dry_run:
        print(f"would sample {args.n} completions for {len(problems)} problems")
        return 0
    samples = []
    for task_id in sorted(problems):
        cset = orchestrator.generate_baseline(
            endpoint, problems[task_id], args.n, args.temperature,
            max_tokens=args.max_tokens, seed=args.seed,
        )
        samples.extend(cset.samples)
    evalkit.save_candidates(samples, args.out)
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def cmd_infer_two_stage(args, config) -> int:
    sketcher = _endpoint(config, args, "sketcher", "sketcher_url", "sketcher_model")
    generator = _endpoint(config, args, "generator", "generator_url", "generator_model")
    problems = evalkit.load_problems(args.problems)
    tscfg = orchestrator.TwoStageConfig(
        mode=args.mode,
        n_sketch=args.n_sketch,
        n_final=args.n_final,
        max_tokens=args.max_tokens,
        seed=args.seed,
    )
    if args.dry_run:
        print(
            f"would run two-stage ({args.n_sketch} sketches, {args.n_final} final) "
            f"on {len(problems)} problems"
        )
        return 0
    samples = []
    for task_id in sorted(problems):
        cset = orchestrator.generate_two_stage(
            sketcher, generator, problems[task_id], tscfg, args.temperature
        )
        samples.extend(cset.samples)
    evalkit.save_candidates(samples, args.out)
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def cmd_infer_sweep(args, config) -> int:
    endpoint = _endpoint(config, args)
    problems = evalkit.load_problems(args.problems)
    generator = None
    tscfg = None
    if args.two_stage:
        generator = _endpoint(
            config, args, "generator", "generator_url", "generator_model"
        )
        tscfg = orchestrator.TwoStageConfig(
            mode=args.mode,
            n_sketch=args.n,
            n_final=args.n_final,
            max_tokens=args.max_tokens,
            seed=args.seed,
        )
    sweep_cfg = orchestrator.SweepConfig(
        out_dir=args.out_dir,
        temperatures=args.temperatures,
        n=args.n,
        max_tokens=args.max_tokens,
        seed=args.seed,
        two_stage=tscfg,
    )
    if args.dry_run:
        total = len(problems) * len(args.temperatures)
        print(f"would sweep {total} (problem, temperature) cells into {args.out_dir}")
        return 0
    written = orchestrator.sweep(endpoint, problems, sweep_cfg, generator=generator)
    print(f"wrote {len(written)} candidate files to {args.out_dir}")
    return 0


# ---------------------------------------------------------------- eval


def _expand_candidates(patterns: list[str]) -> list[str]:
    paths: list[str] = []
    for pat in patterns:
        hits = sorted(globmod.glob(pat))
        paths.extend(hits if hits else [pat])
    return paths


def cmd_eval_run(args, config) -> int:
    problems = evalkit.load_problems(args.problems)
    candidate_sets = evalkit.load_candidates(_expand_candidates(args.candidates))
    if args.runner == "harness":
        runner = HarnessRunner(cmd=[args.harness_cmd])
    else:
        runner = InProcessRunner()
    groups = None
    if args.group_by_api:
        groups = evalkit.api_count_buckets(problems)
    if args.dry_run:
        n = sum(len(c.samples) for c in candidate_sets.values())
        print(f"would execute {n} samples over {len(candidate_sets)} tasks")
        return 0
    report = evalkit.evaluate(
        problems,
        candidate_sets,
        runner,
        ks=args.ks,
        timeout_s=args.timeout_s,
        jobs=args.jobs,
        groups=groups,
    )
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_eval_passk(args, config) -> int:
    value = evalkit.pass_at_k(args.n, args.c, args.k)
    print(f"{value:.6f}")
    return 0


def cmd_eval_sketch_em(args, config) -> int:
    with open(args.predictions, "r", encoding="utf-8") as fh:
        preds = json.load(fh)
    with open(args.references, "r", encoding="utf-8") as fh:
        refs = json.load(fh)
    result = evalkit.sketch_exact_match(preds, refs, args.mode)
    print(json.dumps({"accuracy": result["accuracy"]}, sort_keys=True))
    return 0


def cmd_eval_buckets(args, config) -> int:
    problems = evalkit.load_problems(args.problems)
    buckets = evalkit.api_count_buckets(problems, args.n_buckets)
    print(json.dumps(buckets, indent=2, sort_keys=True))
    return 0


def cmd_eval_report(args, config) -> int:
    with open(args.report, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    tasks = report.get("problems", {})
    samples = sum(row.get("n", 0) for row in tasks.values())
    print(f"problems: {len(tasks)} ({samples} samples)")
    for k, v in sorted(report.get("pass_at_k", {}).items()):
        print(f"  pass@{k}: {v:.6f}")
    by_temp = report.get("by_temperature", {})
    if by_temp:
        print("by temperature:")
        for temp in sorted(by_temp, key=float):
            row = " ".join(
                f"pass@{k}={v:.4f}" for k, v in sorted(by_temp[temp].items())
            )
            print(f"  T={temp}: {row}")
        best = report.get("temperature_best", {})
        for k, entry in sorted(best.items()):
            print(
                f"  best for pass@{k}: T={entry['temperature']}"
                f" ({entry['value']:.4f})"
            )
    hist = report.get("error_histogram", {})
    if hist:
        print("errors: " + json.dumps(hist, sort_keys=True))
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchkit",
        description="corpus filtering, sketching, training data, and evaluation",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"sketchkit {__version__} (scanner: {SCANNER_BACKEND})",
    )
    parser.add_argument("--config", default=None, help="TOML config file")
    parser.add_argument(
        "--dry-run", action="store_true",
        help="report what would be done without writing",
    )
    parser.add_argument(
        "--jobs", type=int, default=2,
        help="worker-pool cap for subcommands that execute in parallel",
    )
    sub = parser.add_subparsers(dest="group", required=True)

    # corpus
    corpus_p = sub.add_parser("corpus", help="corpus filtering and planning")
    corpus_sub = corpus_p.add_subparsers(dest="command", required=True)

    p = corpus_sub.add_parser("filter", help="apply quality rules")
    p.add_argument("--manifest", required=True)
    p.add_argument("--src-root", default="")
    p.add_argument("--report", required=True, help="verdict JSONL output")
    p.add_argument("--stats", default=None, help="summary JSON output")
    p.add_argument("--clean-dir", default=None, help="write cleaned kept files here")
    p.add_argument("--syntax-engine", choices=("inprocess", "harness"),
                   default="inprocess")
    p.add_argument("--harness-cmd", default="sandbox-harness")
    p.set_defaults(func=cmd_corpus_filter)

    p = corpus_sub.add_parser("dedup", help="drop duplicate file contents")
    p.add_argument("--manifest", required=True)
    p.add_argument("--src-root", default="")
    p.add_argument("--out", required=True, help="unique path list output")
    p.set_defaults(func=cmd_corpus_dedup)

    p = corpus_sub.add_parser("extract", help="files importing a library")
    p.add_argument("--manifest", required=True)
    p.add_argument("--src-root", default="")
    p.add_argument("--library", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_corpus_extract)

    p = corpus_sub.add_parser("stats", help="aggregate corpus statistics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--src-root", default="")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_corpus_stats)

    p = corpus_sub.add_parser("plan", help="weighted epoch sampling plan")
    p.add_argument("--manifest", required=True)
    p.add_argument("--extra-draws", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_corpus_plan)

    # sketch
    sketch_p = sub.add_parser("sketch", help="anonymize code")
    sketch_sub = sketch_p.add_subparsers(dest="command", required=True)

    p = sketch_sub.add_parser("file", help="sketch one file to stdout")
    p.add_argument("--path", required=True)
    p.add_argument("--mode", type=_mode, default=SketchMode.CONSTANTS_ONLY)
    p.set_defaults(func=cmd_sketch_file)

    p = sketch_sub.add_parser("corpus", help="sketch every manifest file")
    p.add_argument("--manifest", required=True)
    p.add_argument("--src-root", default="")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mode", type=_mode, default=SketchMode.CONSTANTS_ONLY)
    p.set_defaults(func=cmd_sketch_corpus)

    # traindata
    train_p = sub.add_parser("traindata", help="emit training documents")
    train_sub = train_p.add_subparsers(dest="command", required=True)
    for kind in ("sketcher", "generator"):
        p = train_sub.add_parser(kind, help=f"emit {kind} documents")
        p.add_argument("--manifest", required=True)
        p.add_argument("--src-root", default="")
        p.add_argument("--out-dir", required=True)
        p.add_argument("--mode", type=_mode, default=SketchMode.CONSTANTS_ONLY)
        p.add_argument("--shard-mb", type=int, default=100)
        p.set_defaults(func=lambda a, c, k=kind: cmd_traindata(a, c, k))

    # infer
    infer_p = sub.add_parser("infer", help="sample completions from an endpoint")
    infer_sub = infer_p.add_subparsers(dest="command", required=True)

    p = infer_sub.add_parser("baseline", help="single-stage sampling")
    p.add_argument("--url", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--problems", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--temperature", type=float, default=0.2)
    p.add_argument("--max-tokens", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_infer_baseline)

    p = infer_sub.add_parser("two-stage", help="sketch, vote, generate")
    p.add_argument("--sketcher-url", default=None)
    p.add_argument("--sketcher-model", default=None)
    p.add_argument("--generator-url", default=None)
    p.add_argument("--generator-model", default=None)
    p.add_argument("--problems", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n-sketch", type=int, default=200)
    p.add_argument("--n-final", type=int, default=1)
    p.add_argument("--temperature", type=float, default=0.6)
    p.add_argument("--max-tokens", type=int, default=300)
    p.add_argument("--mode", type=_mode, default=SketchMode.CONSTANTS_ONLY)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_infer_two_stage)

    p = infer_sub.add_parser("sweep", help="temperature sweep with resume")
    p.add_argument("--url", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--problems", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--temperatures", type=_float_list,
                   default=orchestrator.DEFAULT_TEMPERATURES)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--max-tokens", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--two-stage", action="store_true")
    p.add_argument("--generator-url", default=None)
    p.add_argument("--generator-model", default=None)
    p.add_argument("--n-final", type=int, default=1)
    p.add_argument("--mode", type=_mode, default=SketchMode.CONSTANTS_ONLY)
    p.set_defaults(func=cmd_infer_sweep)

    # eval
    eval_p = sub.add_parser("eval", help="execute candidates and score")
    eval_sub = eval_p.add_subparsers(dest="command", required=True)

    p = eval_sub.add_parser("run", help="execute candidates, report pass@k")
    p.add_argument("--problems", required=True)
    p.add_argument("--candidates", nargs="+", required=True,
                   help="candidate JSONL paths or globs")
    p.add_argument("--ks", type=_int_list, default=(1,))
    p.add_argument("--timeout-s", type=float, default=10.0)
    p.add_argument("--runner", choices=("inprocess", "harness"),
                   default="inprocess")
    p.add_argument("--harness-cmd", default="sandbox-harness")
    p.add_argument("--group-by-api", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval_run)

    p = eval_sub.add_parser("passk", help="closed-form pass@k")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_eval_passk)

    p = eval_sub.add_parser("sketch-em", help="sketch exact-match accuracy")
    p.add_argument(
        "--predictions", required=True, help="path to a JSON list of texts"
    )
    p.add_argument(
        "--references", required=True, help="path to a JSON list of texts"
    )
    p.add_argument("--mode", type=_mode, default=SketchMode.CONSTANTS_ONLY)
    p.set_defaults(func=cmd_eval_sketch_em)

    p = eval_sub.add_parser("buckets", help="API-count quantile buckets")
    p.add_argument("--problems", required=True)
    p.add_argument("--n-buckets", type=int, default=4)
    p.set_defaults(func=cmd_eval_buckets)

    p = eval_sub.add_parser("report", help="pretty-print a saved report")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_eval_report)

    # mock-serve
    p = sub.add_parser("mock-serve", help="serve a completion transcript")
    p.add_argument("--transcript", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--log-file", default=None)
    p.set_defaults(func=None, command="mock-serve")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.group == "mock-serve":
        argv_tail = ["--transcript", args.transcript, "--port", str(args.port)]
        if args.log_file:
            argv_tail += ["--log-file", args.log_file]
        return mockserve.main(argv_tail)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SketchkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
