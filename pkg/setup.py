"""Build hook for the optional compiled scanner kernel.

The package works without the extension: sketchkit._kernel falls back to
the pure-Python scanner when the compiled module is missing or fails to
import. Any build failure here is therefore non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/sketchkit/_scan_cy.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
        },
    )
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    import sys

    print(f"warning: compiled scanner kernel skipped ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
