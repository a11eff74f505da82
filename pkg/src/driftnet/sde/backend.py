"""Kernel backend selection.

The compiled extension is preferred; the pure-Python twin is the fallback.
Set DRIFTNET_PYTHON_KERNEL=1 to force the fallback, or call use() at runtime
(the benchmark does, to time both).
"""

import os

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

_forced = os.environ.get("DRIFTNET_PYTHON_KERNEL", "") not in ("", "0")
_active = _kernel_py if (_forced or _compiled is None) else _compiled


def available_backends():
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "cython")
    return names


def active_backend() -> str:
    return "cython" if _active is _compiled else "python"


def use(name: str) -> None:
    """Switch backend at runtime ('cython' or 'python')."""
    global _active
    if name == "python":
        _active = _kernel_py
    elif name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        _active = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")


def kernel():
    return _active
