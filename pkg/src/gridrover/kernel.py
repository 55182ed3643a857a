"""Stepping-kernel backend selection.

The episode loop has two interchangeable implementations: a compiled
Cython kernel (built at install time when a C compiler is available) and
a pure-Python reference.  Both produce bit-identical episode traces; the
compiled one is just faster.  Selection happens here, once, at import,
and can be overridden per call or with the GRIDROVER_BACKEND environment
variable ("compiled", "python", or "auto").
"""

import os

from . import _stepkernel

try:
    from . import _speedups
except ImportError:
    _speedups = None

HAVE_COMPILED = _speedups is not None
DEFAULT_BACKEND = "compiled" if HAVE_COMPILED else "python"

# The segment return codes are shared constants; keep one source of truth.
SEG_COVERAGE = _stepkernel.SEG_COVERAGE
SEG_BUDGET = _stepkernel.SEG_BUDGET
SEG_STUCK = _stepkernel.SEG_STUCK
SEG_DETOUR = _stepkernel.SEG_DETOUR


def available_backends():
    names = ["python"]
    if HAVE_COMPILED:
        names.insert(0, "compiled")
    return names


def get_kernel(backend=None):
    """Resolve a backend name to the module providing run_segment.

    backend: "compiled", "python", "auto", or None (= environment
    override if set, else auto).
    """
    if backend is None:
        backend = os.environ.get("GRIDROVER_BACKEND", "auto")
    backend = backend.lower()
    if backend == "auto":
        backend = DEFAULT_BACKEND
    if backend == "python":
        return _stepkernel
    if backend == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError(
                "compiled kernel requested but gridrover._speedups is not built; "
                "reinstall with a C compiler or use backend='python'"
            )
        return _speedups
    raise ValueError(f"unknown backend {backend!r}; use 'compiled', 'python', or 'auto'")
