"""Numerical kernels: compiled extension with a pure-Python fallback.

The compiled module is used when it was built at install time; otherwise the
numpy implementation in ``_pycore`` is selected.  ``set_backend`` switches
between them at runtime (tests and benchmarks use this).
"""

from . import _pycore

try:
    from . import _ccore
except ImportError:  # extension not built
    _ccore = None

BACKENDS = {"python": _pycore}
if _ccore is not None:
    BACKENDS["cython"] = _ccore

_active = _ccore if _ccore is not None else _pycore


def backend():
    """Return the active kernel module."""
    return _active


def backend_name():
    return "cython" if _active is _ccore and _ccore is not None else "python"


def set_backend(name):
    """Select the kernel implementation by name ("cython" or "python")."""
    global _active
    try:
        _active = BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown or unavailable backend {name!r}; available: {sorted(BACKENDS)}"
        ) from None
