"""Select the compiled kernels when available, else the numpy fallback.

Set ``DYNAMO_DRIFT_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
window_extrema = _fallback.window_extrema
span_readings = _fallback.span_readings
ks_statistic = _fallback.ks_statistic
total_variation = _fallback.total_variation

if os.environ.get("DYNAMO_DRIFT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        BACKEND = "cython"
        window_extrema = _kernels.window_extrema
        span_readings = _kernels.span_readings
        ks_statistic = _kernels.ks_statistic
        total_variation = _kernels.total_variation

__all__ = ["BACKEND", "window_extrema", "span_readings", "ks_statistic", "total_variation"]
