"""Sandboxed single-job program runner.

Reads one job as JSON on stdin, executes (or parse-checks) the program
in an isolated child process with resource limits, and writes exactly
one verdict JSON line on stdout.
"""

__version__ = "0.1.0"
