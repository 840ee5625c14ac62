"""Backend selection for the hot rendering loops.

Two interchangeable implementations exist: ``jitk`` (numba-compiled) and
``vec`` (pure numpy).  The active one is chosen once at import time from the
``AEROGEN_BACKEND`` environment variable ("numba" or "numpy"); the default
is numba when it imports cleanly.  Both modules stay importable directly so
tests and benchmarks can compare them.
"""

from __future__ import annotations

import importlib
import os
import warnings

from . import vec

NEAR_PLANE = vec.NEAR_PLANE

_requested = os.environ.get("AEROGEN_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"AEROGEN_BACKEND={_requested!r} not recognized; "
        "use 'numba' or 'numpy'")

jitk = None
if _requested != "numpy":
    try:
        jitk = importlib.import_module(__name__ + ".jitk")
    except ImportError as exc:
        if _requested == "numba":
            raise
        warnings.warn(
            f"numba backend unavailable ({exc}); falling back to numpy",
            RuntimeWarning, stacklevel=2)

if jitk is not None:
    BACKEND = "numba"
    _impl = jitk
else:
    BACKEND = "numpy"
    _impl = vec

rasterize = _impl.rasterize
coverage_count = _impl.coverage_count
mask_stats = _impl.mask_stats
raycast = _impl.raycast
shade = _impl.shade

__all__ = [
    "BACKEND", "NEAR_PLANE", "rasterize", "coverage_count", "mask_stats",
    "raycast", "shade", "vec", "jitk",
]
