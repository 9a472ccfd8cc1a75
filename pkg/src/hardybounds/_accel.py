"""Backend selection for the numeric kernels.

Kernels are compiled with numba when it is importable and the environment
variable ``HARDY_KERNELS`` is not set to ``numpy``.  Setting
``HARDY_KERNELS=numpy`` forces the pure-numpy fallback path everywhere,
which is handy for debugging and for the benchmark in ``benchmarks/``.
"""

import os

_requested = os.environ.get("HARDY_KERNELS", "numba").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = _numba is not None and _requested != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` that degrades to the identity decorator."""
    if _numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    return _numba.njit(*args, **kwargs)


def thread_count():
    """Worker cap from ``HARDY_THREADS``; absent or invalid means sequential."""
    raw = os.environ.get("HARDY_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
