"""Numba availability switch.

Setting ``COMMEVO_DISABLE_NUMBA=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``)
routes every kernel in :mod:`commevo.kernels` through its pure-numpy twin.
The flag is read once at import time.
"""

import os

_TRUTHY = {"1", "true", "yes", "on"}


def _flag(name):
    return os.environ.get(name, "").strip().lower() in _TRUTHY


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag("COMMEVO_DISABLE_NUMBA") and not _flag("NUMBA_DISABLE_JIT")


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        import numba

        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap


def backend():
    return "numba" if USE_NUMBA else "numpy"
