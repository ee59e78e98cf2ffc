"""numba shim.

Set ``KMLAB_DISABLE_NUMBA=1`` to run every kernel as plain Python/numpy.
The compiled and interpreted paths execute the same source, so results are
bit-identical; only speed differs.
"""
import os

DISABLED = os.environ.get("KMLAB_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if DISABLED:
        raise ImportError
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAVE_NUMBA = False


def njit(*args, **kws):
    """``numba.njit(nogil=True, cache=True)`` or the identity decorator."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kws:
            return args[0]
        return lambda fn: fn
    kws.setdefault("nogil", True)
    kws.setdefault("cache", True)
    return numba.njit(*args, **kws)


def backend():
    return "numba" if HAVE_NUMBA else "python"
