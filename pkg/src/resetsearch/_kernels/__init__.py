"""Kernel backend selection.

The compiled extension is used when it imports; set
``RESETSEARCH_BACKEND=python`` to force the pure-Python fallback.
"""
from __future__ import annotations

import os

from . import _fallback
from ._rng import ZIG_FI, ZIG_KI, ZIG_WI

BACKEND = "python"
_impl = _fallback
if os.environ.get("RESETSEARCH_BACKEND", "").lower() != "python":
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` ("compiled", "python", or current)."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")


def thread_count() -> int:
    """Worker threads for Monte Carlo, capped by ``RESETSEARCH_THREADS``."""
    cap = os.environ.get("RESETSEARCH_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = max(1, min(n, int(cap)))
        except ValueError:
            pass
    return n


__all__ = ["BACKEND", "ZIG_FI", "ZIG_KI", "ZIG_WI", "get_backend", "thread_count"]
