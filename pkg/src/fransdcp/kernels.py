"""Kernel backend selection.

The compiled ``_core`` extension is preferred; setting the environment
variable ``FRANSDCP_PURE_PYTHON=1`` or a failed import selects the numpy
fallback. ``BACKEND`` names the active implementation.
"""
import os

from . import _fallback

if os.environ.get("FRANSDCP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

lindley_sojourns = _impl.lindley_sojourns
scene_interference = _impl.scene_interference
h_kernel_grid = _impl.h_kernel_grid

__all__ = ["BACKEND", "lindley_sojourns", "scene_interference",
           "h_kernel_grid"]
