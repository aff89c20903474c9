"""Hot-loop kernels with import-time backend selection.

The compiled Cython extension is used when available; otherwise the
batched-numpy fallback provides the same interface. ``BACKEND`` records
which one was picked, and ``SNMBOUNDS_NO_ACCEL=1`` forces the fallback.
"""

import os

from . import _fallback

if os.environ.get("SNMBOUNDS_NO_ACCEL"):
    _impl = _fallback
    BACKEND = "fallback"
else:
    try:
        from . import _poly_kernel as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "fallback"

poly_selfnorm_stats = _impl.poly_selfnorm_stats
poly_selfnorm_stats_fallback = _fallback.poly_selfnorm_stats

__all__ = ["poly_selfnorm_stats", "poly_selfnorm_stats_fallback", "BACKEND"]
