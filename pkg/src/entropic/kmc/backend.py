"""Kernel selection.

The compiled kernel is used when it imports; otherwise the pure-Python one.
``ENTROPIC_BACKEND=python`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _kmc_py

_compiled = None
if os.environ.get("ENTROPIC_BACKEND", "").lower() != "python":
    try:
        from . import _kmc_core as _compiled
    except ImportError:  # extension not built
        _compiled = None

KERNELS = {"python": _kmc_py}
if _compiled is not None:
    KERNELS["compiled"] = _compiled

default = _compiled if _compiled is not None else _kmc_py
BACKEND = default.BACKEND


def get(name: str | None = None):
    """Kernel module by name (``"compiled"`` or ``"python"``); default if None."""
    if name is None:
        return default
    try:
        return KERNELS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(KERNELS)}") from None
