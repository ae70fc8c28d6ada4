"""Optional numba acceleration.

Set ``VOROPATROL_DISABLE_NUMBA=1`` to force the pure-numpy code paths.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional extra
    numba = None

DISABLED = os.environ.get("VOROPATROL_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")
USING_NUMBA = numba is not None and not DISABLED


def njit(f=None, **options):
    """``numba.njit`` when available, identity otherwise."""
    options.setdefault("cache", True)

    def wrap(func):
        if numba is None:
            return func
        return numba.njit(func, **options)

    if f is None:
        return wrap
    return wrap(f)


def select(fast, slow):
    return fast if USING_NUMBA else slow
