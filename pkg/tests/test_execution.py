"""Runner tests: in-process verdicts and the external-process protocol."""

from __future__ import annotations

import sys

import pytest

from sketchkit.errors import SandboxUnavailable
from sketchkit.execution import (
    ErrorKind,
    ExecVerdict,
    HarnessParseChecker,
    HarnessRunner,
    InProcessRunner,
)


@pytest.fixture
def runner():
    return InProcessRunner()


def test_pass(runner):
    v = runner.run("assert 1 + 1 == 2\n")
    assert v.passed and v.error_kind is ErrorKind.NONE


def test_assertion_failure(runner):
    v = runner.run("assert 1 == 2, 'nope'\n")
    assert not v.passed and v.error_kind is ErrorKind.ASSERTION
    assert "nope" in v.detail


def test_exception(runner):
    v = runner.run("raise ValueError('boom')\n")
    assert not v.passed and v.error_kind is ErrorKind.EXCEPTION
    assert "boom" in v.detail


def test_syntax_error(runner):
    v = runner.run("def f(:\n")
    assert not v.passed and v.error_kind is ErrorKind.SYNTAX


def test_system_exit_zero_passes(runner):
    assert runner.run("import sys\nsys.exit(0)\n").passed


def test_system_exit_nonzero_fails(runner):
    v = runner.run("import sys\nsys.exit(3)\n")
    assert not v.passed and v.error_kind is ErrorKind.EXCEPTION


def test_duration_recorded(runner):
    v = runner.run("x = sum(range(1000))\n")
    assert v.duration_s >= 0.0


def test_name_main_guard_runs(runner):
    program = (
        "ran = []\n"
        "if __name__ == '__main__':\n"
        "    ran.append(1)\n"
        "assert ran == [1]\n"
    )
    assert runner.run(program).passed


# ------------------------------------------------------- external harness

_FAKE_HARNESS = (
    "import json, sys\n"
    "job = json.loads(sys.stdin.read())\n"
    "prog = job.get('program', '')\n"
    "if job.get('mode') == 'parse_only':\n"
    "    try:\n"
    "        compile(prog, '<job>', 'exec')\n"
    "        kind = 'pass'\n"
    "    except SyntaxError:\n"
    "        kind = 'syntax'\n"
    "elif 'BOOM' in prog:\n"
    "    kind = 'exception'\n"
    "elif 'SLOW' in prog:\n"
    "    kind = 'timeout'\n"
    "else:\n"
    "    kind = 'pass'\n"
    "print('log line that is not the verdict')\n"
    "print(json.dumps({'kind': kind, 'duration_s': 0.01, 'detail': ''}))\n"
)


def _fake_harness_cmd() -> list[str]:
    return [sys.executable, "-c", _FAKE_HARNESS]


def test_harness_runner_speaks_protocol():
    runner = HarnessRunner(cmd=_fake_harness_cmd())
    assert runner.run("x = 1\n").passed
    v = runner.run("BOOM = 1\n")
    assert not v.passed and v.error_kind is ErrorKind.EXCEPTION
    v = runner.run("SLOW = 1\n")
    assert not v.passed and v.error_kind is ErrorKind.TIMEOUT


def test_harness_parse_only():
    runner = HarnessRunner(cmd=_fake_harness_cmd())
    assert runner.parse_only("x = 1\n") is True
    assert runner.parse_only("def f(:\n") is False
    checker = HarnessParseChecker(runner)
    assert checker("x = 1\n") is True
    assert checker("def f(:\n") is False


def test_missing_harness_binary_raises():
    runner = HarnessRunner(cmd=["definitely-not-installed-anywhere"])
    with pytest.raises(SandboxUnavailable):
        runner.run("x = 1\n")


def test_garbage_harness_output_is_infra():
    runner = HarnessRunner(cmd=[sys.executable, "-c", "print('not json')"])
    v = runner.run("x = 1\n")
    assert not v.passed and v.error_kind is ErrorKind.INFRA


def test_verdict_dataclass_fields():
    v = ExecVerdict(passed=True, error_kind=ErrorKind.NONE,
                    duration_s=0.5, detail="")
    assert v.passed and v.duration_s == 0.5
