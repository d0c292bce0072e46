"""Pick the stencil kernel implementation at import time.

The compiled extension is used when it was built; set
``WILLMORE_BACKEND=python`` to force the numpy fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("WILLMORE_BACKEND", "auto").lower()

kernels = _kernels_py
if _requested != "python":
    try:
        from . import _ckernels as kernels  # noqa: F811
    except ImportError:
        if _requested == "cython":
            raise

BACKEND = kernels.BACKEND


def get(name: str | None = None):
    """Return a kernel module by backend name (``None`` for the active one)."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
