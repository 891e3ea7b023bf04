"""Scanner backend selection.

The compiled kernel is preferred when importable; the pure-Python kernel
is a drop-in fallback. Setting SKETCHKIT_PURE=1 forces the fallback,
which the parity tests and benchmark rely on.
"""

from __future__ import annotations

import os

from . import _scan_py

K_NAME = _scan_py.K_NAME
K_NUMBER = _scan_py.K_NUMBER
K_STRING = _scan_py.K_STRING
K_OP = _scan_py.K_OP
K_COMMENT = _scan_py.K_COMMENT
K_NEWLINE = _scan_py.K_NEWLINE
ERR_UNTERMINATED = _scan_py.ERR_UNTERMINATED

if os.environ.get("SKETCHKIT_PURE"):
    scan = _scan_py.scan
    BACKEND = "pure"
else:
    try:
        from . import _scan_cy  # type: ignore[attr-defined]

        scan = _scan_cy.scan
        BACKEND = "compiled"
    except ImportError:
        scan = _scan_py.scan
        BACKEND = "pure"
