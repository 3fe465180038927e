"""Kernel backend selection.

The compiled extension is used when available; the numpy fallback is the
reference implementation. Set ``SIGCLASS_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SIGCLASS_PURE") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
PARAM_TOL: float = _kernels_py.PARAM_TOL
ray_hits = _impl.ray_hits
best_split = _impl.best_split
