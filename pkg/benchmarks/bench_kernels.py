"""Compare the compiled scanner kernel against the pure-Python fallback.

Both backends are imported directly (ignoring the SKETCHKIT_PURE switch)
and timed over the same synthetic corpus, scanning byte-identical
sources, so the speedup number is apples to apples.

    python3 benchmarks/bench_kernels.py [--files 2000] [--min-bytes 3000]
"""

from __future__ import annotations

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

from sketchkit import _scan_py  # noqa: E402
from synthcorpus import make_corpus  # noqa: E402

try:
    from sketchkit import _scan_cy
except ImportError:
    _scan_cy = None


def _time_backend(scan, sources: list[str], repeats: int) -> tuple[float, int]:
    events = 0
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        events = 0
        for text in sources:
            evs, _err = scan(text)
            events += len(evs)
        best = min(best, time.perf_counter() - start)
    return best, events


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--files", type=int, default=2000)
    parser.add_argument("--min-bytes", type=int, default=3000)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args(argv)

    sources = make_corpus(args.files, seed=args.seed, min_bytes=args.min_bytes)
    total_mb = sum(len(s.encode("utf-8")) for s in sources) / 1e6
    print(f"corpus: {len(sources)} files, {total_mb:.1f} MB "
          f"(best of {args.repeats} runs)")

    pure_s, pure_events = _time_backend(_scan_py.scan, sources, args.repeats)
    print(f"pure     : {pure_s:8.3f}s  {total_mb / pure_s:7.1f} MB/s  "
          f"{pure_events} events")

    if _scan_cy is None:
        print("compiled : not built (pip install -e . compiles it)")
        return 0

    comp_s, comp_events = _time_backend(_scan_cy.scan, sources, args.repeats)
    print(f"compiled : {comp_s:8.3f}s  {total_mb / comp_s:7.1f} MB/s  "
          f"{comp_events} events")

    if comp_events != pure_events:
        print("WARNING: event counts differ between backends")
        return 1
    print(f"speedup  : {pure_s / comp_s:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
