"""Optional numba acceleration.

Hot kernels are written once in a numba-compatible subset of numpy and
decorated with :func:`njit`.  Setting ``KREINPERT_DISABLE_NUMBA=1`` (or
running without numba installed) turns the decorator into a no-op, so the
very same functions run as plain Python/numpy.
"""
import os


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _numba_requested():
    flag = os.environ.get("KREINPERT_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes", "on")


def _have_numba():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _numba_requested() and _have_numba()

if USE_NUMBA:
    from numba import njit as _numba_njit

    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        if len(args) == 1 and callable(args[0]):
            return _numba_njit(**kwargs)(args[0])
        return _numba_njit(*args, **kwargs)
else:
    njit = _noop_jit


def python_impl(func):
    """Return the uncompiled Python body of a (possibly jitted) kernel."""
    return getattr(func, "py_func", func)
