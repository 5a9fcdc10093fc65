"""Hot-kernel backend selection.

The compiled extension is used when present; the numpy reference
implementation is an always-available fallback.  Set
``GRASSWALK_KERNELS=python`` to force the fallback (useful for
benchmarking and debugging).
"""
from __future__ import annotations

import os

from . import _ref

_choice = os.environ.get("GRASSWALK_KERNELS", "auto").lower()

if _choice == "python":
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        _impl = _ref
        BACKEND = "python"

sample_rows = _impl.sample_rows
orbit_sums = _impl.orbit_sums

__all__ = ["sample_rows", "orbit_sums", "BACKEND"]
