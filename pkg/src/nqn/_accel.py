"""JIT selection.

Hot kernels exist twice: a numba ``@njit`` version and a vectorized numpy
version.  The numba path is used when numba imports cleanly and the
environment variable ``NQN_DISABLE_JIT`` is unset (or ``0``/``false``).
"""
import os

_flag = os.environ.get("NQN_DISABLE_JIT", "").strip().lower()
JIT_DISABLED_BY_ENV = _flag not in ("", "0", "false", "no")

try:
    import numba as _numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAS_NUMBA = False

USE_JIT = HAS_NUMBA and not JIT_DISABLED_BY_ENV


def njit(*args, **kwargs):
    """``numba.njit`` with on-disk caching, or a passthrough without numba."""
    if not HAS_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)


def pick(jit_impl, numpy_impl):
    return jit_impl if USE_JIT else numpy_impl


def backend_name():
    return "numba" if USE_JIT else "numpy"
