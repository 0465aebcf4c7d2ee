"""Hot-kernel backend selection.

The compiled extension is preferred when it imports cleanly; otherwise the
numpy reference implementation is used.  Set ``HYLM_KERNELS=python`` or
``HYLM_KERNELS=cython`` to force a backend (the latter raises if the
extension is unavailable).
"""

import os

from . import _numpy

_FUNCS = (
    "stage_c", "mul_ik",
    "dot2", "dot3", "div_spectral", "skew_combine", "project_aniso",
    "stage_a", "stage_b", "rk_final", "reflect_z", "parity_project_z",
    "weighted_sumsq", "antiderive_z",
)

_requested = os.environ.get("HYLM_KERNELS", "").strip().lower()

if _requested in ("", "cython"):
    try:
        from . import _compiled as _impl
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "HYLM_KERNELS=cython requested but the compiled extension "
                "is not built; reinstall the package or unset the variable")
        _impl = _numpy
        BACKEND = "python"
elif _requested == "python":
    _impl = _numpy
    BACKEND = "python"
else:
    raise ValueError(f"unknown HYLM_KERNELS value {_requested!r}")

globals().update({name: getattr(_impl, name) for name in _FUNCS})


def backend_name():
    """Name of the active backend: 'cython' or 'python'."""
    return BACKEND


__all__ = list(_FUNCS) + ["backend_name", "BACKEND"]
