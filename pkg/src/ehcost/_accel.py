"""Backend selection for the numeric kernels.

Numba is used when importable unless ``EHCOST_DISABLE_NUMBA`` is set to a
truthy value, in which case every kernel dispatches to its numpy twin.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("EHCOST_DISABLE_NUMBA", "").strip().lower() in _FALSY


def njit(*args, **kwargs):
    """``numba.njit`` with caching on, or an identity decorator without numba."""
    if _njit is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return _njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
