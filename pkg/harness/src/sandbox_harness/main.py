"""Job execution and the stdio verdict protocol.

Job (stdin, one JSON object):
    {"mode": "execute" | "parse_only",
     "program": "<source>",
     "timeout_s": 10,
     "memory_cap_mb": 512}

Verdict (stdout, one JSON line):
    {"kind": "pass" | "assertion" | "exception" | "timeout" | "syntax",
     "duration_s": 0.07, "duration_ms": 70, "detail": "<first error line>"}

Exit code 0 whenever a verdict was delivered. When no real verdict is
possible (bad job, harness fault) a {"kind": "infra"} record is written
instead and the exit code is nonzero.

execute mode runs the program in a fresh child interpreter: its own
session (so the whole process group can be killed on timeout), a private
temporary working directory, an address-space cap, sockets disabled, and
a wall-clock timeout with a one-second kill grace. parse_only compiles
the program without running any of it.
"""

from __future__ import annotations

import argparse
import json
import os
import resource
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass

# Marker the child uses to hand the error's first line back on stderr.
DETAIL_MARK = "[sandbox-verdict] "

# Exit codes of the child bootstrap, one per verdict kind.
EXIT_PASS = 0
EXIT_ASSERTION = 11
EXIT_EXCEPTION = 12
EXIT_SYNTAX = 13

KILL_GRACE_S = 1.0

# Runs inside the resource-limited child as `python -c BOOTSTRAP prog.py`.
# It must not import anything beyond the stdlib and must translate every
# candidate outcome into one of the exit codes above.
BOOTSTRAP = r"""
import sys

def _detail(text):
    first = str(text).splitlines()[0] if str(text) else ""
    sys.stderr.write("\n[sandbox-verdict] " + first + "\n")
    sys.stderr.flush()

import socket as _socket

def _blocked(*args, **kwargs):
    raise OSError("network disabled by sandbox harness")

# socket.socket must stay a class: stdlib modules subclass it at import
# time (ssl.SSLSocket), so a plain function there breaks unrelated imports.
class _BlockedSocket(_socket.socket):
    def __new__(cls, *args, **kwargs):
        raise OSError("network disabled by sandbox harness")

_socket.socket = _BlockedSocket
for _name in ("socketpair", "create_connection", "create_server",
              "fromfd", "getaddrinfo"):
    if hasattr(_socket, _name):
        setattr(_socket, _name, _blocked)

with open(sys.argv[1], "r", encoding="utf-8") as fh:
    source = fh.read()
try:
    code = compile(source, "<candidate>", "exec")
except (SyntaxError, ValueError, RecursionError) as exc:
    _detail("%s: %s" % (type(exc).__name__, exc))
    sys.exit(13)
namespace = {"__name__": "__main__"}
try:
    exec(code, namespace)
except AssertionError as exc:
    _detail("AssertionError: %s" % (exc,))
    sys.exit(11)
except SystemExit as exc:
    if exc.code in (0, None):
        sys.exit(0)
    _detail("SystemExit(%r)" % (exc.code,))
    sys.exit(12)
except BaseException as exc:
    _detail("%s: %s" % (type(exc).__name__, exc))
    sys.exit(12)
sys.exit(0)
"""

_EXIT_KIND = {
    EXIT_PASS: "pass",
    EXIT_ASSERTION: "assertion",
    EXIT_EXCEPTION: "exception",
    EXIT_SYNTAX: "syntax",
}


@dataclass
class Job:
    mode: str
    program: str
    timeout_s: float = 10.0
    memory_cap_mb: int = 512


class BadJob(ValueError):
    pass


def parse_job(raw: str) -> Job:
    try:
        obj = json.loads(raw)
    except ValueError as exc:
        raise BadJob(f"job is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise BadJob("job must be a JSON object")
    mode = obj.get("mode", "")
    if mode not in ("execute", "parse_only"):
        raise BadJob(f"unknown mode {mode!r}")
    program = obj.get("program")
    if not isinstance(program, str):
        raise BadJob("program must be a string")
    if mode == "execute" and not program.strip():
        raise BadJob("execute mode needs a non-empty program")
    timeout_s = float(obj.get("timeout_s", 10.0))
    if timeout_s <= 0:
        raise BadJob("timeout_s must be positive")
    memory_cap_mb = int(obj.get("memory_cap_mb", 512))
    if memory_cap_mb <= 0:
        raise BadJob("memory_cap_mb must be positive")
    return Job(mode, program, timeout_s, memory_cap_mb)


def _verdict(kind: str, duration_s: float, detail: str = "") -> dict:
    return {
        "kind": kind,
        "duration_s": round(duration_s, 6),
        "duration_ms": round(duration_s * 1000.0, 3),
        "detail": detail,
    }


def _last_detail(stderr: bytes) -> str:
    text = stderr.decode("utf-8", "replace")
    detail = ""
    for line in text.splitlines():
        if line.startswith(DETAIL_MARK):
            detail = line[len(DETAIL_MARK):]
    return detail


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()


def run_parse_only(job: Job) -> dict:
    start = time.perf_counter()
    try:
        compile(job.program, "<candidate>", "exec")
    except (SyntaxError, ValueError, RecursionError) as exc:
        first = f"{type(exc).__name__}: {exc}".splitlines()[0]
        return _verdict("syntax", time.perf_counter() - start, first)
    return _verdict("pass", time.perf_counter() - start)


def run_execute(job: Job) -> dict:
    cap_bytes = job.memory_cap_mb * 1024 * 1024

    def limits() -> None:
        os.setsid()
        resource.setrlimit(resource.RLIMIT_AS, (cap_bytes, cap_bytes))

    env = os.environ.copy()
    env.pop("PYTHONPATH", None)  # jobs see installed packages only

    with tempfile.TemporaryDirectory(prefix="sandbox-job-") as workdir:
        prog_path = os.path.join(workdir, "candidate.py")
        with open(prog_path, "w", encoding="utf-8") as fh:
            fh.write(job.program)
        start = time.perf_counter()
        proc = subprocess.Popen(
            [sys.executable, "-c", BOOTSTRAP, prog_path],
            cwd=workdir,
            env=env,
            stdin=subprocess.DEVNULL,
            stdout=subprocess.DEVNULL,
            stderr=subprocess.PIPE,
            preexec_fn=limits,
        )
        try:
            _, stderr = proc.communicate(timeout=job.timeout_s)
        except subprocess.TimeoutExpired:
            _kill_group(proc)
            try:
                proc.communicate(timeout=KILL_GRACE_S)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.communicate()
            duration = time.perf_counter() - start
            return _verdict("timeout", duration,
                            f"no result within {job.timeout_s:g}s")
        duration = time.perf_counter() - start

    rc = proc.returncode
    detail = _last_detail(stderr)
    if rc in _EXIT_KIND:
        return _verdict(_EXIT_KIND[rc], duration, detail)
    if rc < 0:
        return _verdict("exception", duration,
                        detail or f"killed by signal {-rc}")
    return _verdict("infra", duration,
                    detail or f"child exited with unexpected code {rc}")


def run_job(job: Job) -> dict:
    if job.mode == "parse_only":
        return run_parse_only(job)
    return run_execute(job)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sandbox-harness",
        description="run one program job from stdin, print one verdict line",
    )
    parser.add_argument(
        "--allow-network",
        action="store_true",
        help="refused at runtime; provision required packages beforehand",
    )
    args = parser.parse_args(argv)
    if args.allow_network:
        print(json.dumps(_verdict(
            "infra", 0.0,
            "network enablement is refused; pre-provision required packages",
        )))
        return 1
    try:
        job = parse_job(sys.stdin.read())
    except BadJob as exc:
        print(json.dumps(_verdict("infra", 0.0, f"invalid job: {exc}")))
        return 1
    try:
        verdict = run_job(job)
    except Exception as exc:  # harness fault, not a program outcome
        print(json.dumps(_verdict("infra", 0.0,
                                  f"harness failure: {exc}")))
        return 1
    print(json.dumps(verdict))
    return 0 if verdict["kind"] != "infra" else 1


if __name__ == "__main__":
    sys.exit(main())
