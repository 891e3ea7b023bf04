"""Program execution backends for evaluation.

Two interchangeable runners satisfy the same protocol,
run(program, timeout_s) -> ExecVerdict:

* InProcessRunner executes assembled programs with exec() in this
  interpreter. No isolation, no timeout enforcement: it exists so the
  evaluation pipeline works end to end on trusted fixture problems
  without the external sandbox package.
* HarnessRunner shells out to the sandbox harness CLI, one process per
  program, and maps its verdict JSON back.
"""

from __future__ import annotations

import json
import subprocess
import time
from dataclasses import dataclass
from enum import Enum

from .errors import SandboxUnavailable


class ErrorKind(Enum):
    NONE = "none"
    ASSERTION = "assertion"
    EXCEPTION = "exception"
    TIMEOUT = "timeout"
    SYNTAX = "syntax"
    INFRA = "infra"


@dataclass
class ExecVerdict:
    passed: bool
    error_kind: ErrorKind = ErrorKind.NONE
    duration_s: float = 0.0
    detail: str = ""


class InProcessRunner:
    """Executes programs with exec() in a fresh namespace.

    Only for trusted fixture code: no resource limits, no network
    blocking, and timeout_s is recorded but not enforced.
    """

    def run(self, program: str, timeout_s: float = 10.0) -> ExecVerdict:
        t0 = time.perf_counter()
        try:
            code = compile(program, "<candidate>", "exec")
        except SyntaxError as exc:
            return ExecVerdict(
                False, ErrorKind.SYNTAX, time.perf_counter() - t0, str(exc)
            )
        except (ValueError, RecursionError) as exc:
            return ExecVerdict(
                False, ErrorKind.SYNTAX, time.perf_counter() - t0, str(exc)
            )
        namespace: dict = {"__name__": "__main__"}
        try:
            exec(code, namespace)
        except AssertionError as exc:
            return ExecVerdict(
                False, ErrorKind.ASSERTION, time.perf_counter() - t0, str(exc)
            )
        except SystemExit as exc:
            ok = exc.code in (0, None)
            return ExecVerdict(
                ok,
                ErrorKind.NONE if ok else ErrorKind.EXCEPTION,
                time.perf_counter() - t0,
                f"SystemExit({exc.code})",
            )
        except BaseException as exc:
            return ExecVerdict(
                False,
                ErrorKind.EXCEPTION,
                time.perf_counter() - t0,
                f"{type(exc).__name__}: {exc}",
            )
        return ExecVerdict(True, ErrorKind.NONE, time.perf_counter() - t0)


_VERDICT_KIND_MAP = {
    "pass": (True, ErrorKind.NONE),
    "assertion": (False, ErrorKind.ASSERTION),
    "exception": (False, ErrorKind.EXCEPTION),
    "timeout": (False, ErrorKind.TIMEOUT),
    "syntax": (False, ErrorKind.SYNTAX),
    "infra": (False, ErrorKind.INFRA),
}


class HarnessRunner:
    """Runs each program in the external sandbox harness.

    cmd is the harness invocation (default: the installed console
    script). A job JSON object goes to the child's stdin; one verdict
    JSON line comes back on stdout.
    """

    def __init__(self, cmd: list[str] | None = None, memory_cap_mb: int = 512):
        self.cmd = list(cmd) if cmd else ["sandbox-harness"]
        self.memory_cap_mb = memory_cap_mb

    def _invoke(self, job: dict, wall_timeout_s: float) -> dict:
        try:
            proc = subprocess.run(
                self.cmd,
                input=json.dumps(job).encode("utf-8"),
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                timeout=wall_timeout_s,
            )
        except FileNotFoundError as exc:
            raise SandboxUnavailable(
                f"harness command not found: {self.cmd[0]}"
            ) from exc
        except subprocess.TimeoutExpired:
            return {"kind": "infra", "detail": "harness wall timeout"}
        if not proc.stdout.strip():
            return {
                "kind": "infra",
                "detail": f"no verdict (exit {proc.returncode}): "
                + proc.stderr.decode("utf-8", "replace")[:200],
            }
        try:
            return json.loads(proc.stdout.decode("utf-8").splitlines()[-1])
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            return {"kind": "infra", "detail": f"unparseable verdict: {exc}"}

    def run(self, program: str, timeout_s: float = 10.0) -> ExecVerdict:
        job = {
            "mode": "execute",
            "program": program,
            "timeout_s": timeout_s,
            "memory_cap_mb": self.memory_cap_mb,
        }
        t0 = time.perf_counter()
        verdict = self._invoke(job, wall_timeout_s=timeout_s + 15.0)
        duration = time.perf_counter() - t0
        kind = verdict.get("kind", "infra")
        passed, error_kind = _VERDICT_KIND_MAP.get(
            kind, (False, ErrorKind.INFRA)
        )
        return ExecVerdict(
            passed,
            error_kind,
            float(verdict.get("duration_s", duration)),
            str(verdict.get("detail", "")),
        )

    def parse_only(self, source: str, timeout_s: float = 10.0) -> bool:
        job = {"mode": "parse_only", "program": source, "timeout_s": timeout_s}
        verdict = self._invoke(job, wall_timeout_s=timeout_s + 15.0)
        return verdict.get("kind") == "pass"


class HarnessParseChecker:
    """Adapter for corpus.quality_filter(syntax_checker=...)."""

    def __init__(self, runner: HarnessRunner | None = None):
        self.runner = runner or HarnessRunner()

    def __call__(self, source: str) -> bool:
        return self.runner.parse_only(source)
