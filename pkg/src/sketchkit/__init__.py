"""sketchkit: sketch-based two-stage code generation toolkit."""

from ._kernel import BACKEND as SCANNER_BACKEND

__version__ = "0.1.0"
__all__ = ["SCANNER_BACKEND", "__version__"]
