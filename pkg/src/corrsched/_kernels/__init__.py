"""Search kernel selection: compiled extension with pure-Python fallback.

The compiled kernel (Cython, built at install time) and the pure kernel
implement identical semantics and return bit-identical results; the
compiled one is roughly two orders of magnitude faster on branch-and-bound
workloads (see benchmarks/kernel_benchmark.py).  Set CORRSCHED_KERNEL=pure
to force the fallback.
"""

import os

from corrsched._kernels import _pure

if os.environ.get("CORRSCHED_KERNEL", "").lower() == "pure":
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from corrsched._kernels import _search as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

search_assignments = _impl.search_assignments
STATUS_DONE = _impl.STATUS_DONE
STATUS_NODE_LIMIT = _impl.STATUS_NODE_LIMIT
STATUS_TIME_LIMIT = _impl.STATUS_TIME_LIMIT


def available_backends() -> dict:
    """Name -> kernel module for every importable backend."""
    out = {"pure": _pure}
    try:
        from corrsched._kernels import _search

        out["compiled"] = _search
    except ImportError:
        pass
    return out
