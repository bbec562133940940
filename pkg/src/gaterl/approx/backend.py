"""Kernel backend selection, resolved once at import.

The compiled extension is preferred when present; otherwise the numpy
fallback is used. GATERL_BACKEND=python|cython forces a choice (forcing
cython raises if the extension was never built). Both backends implement
the same two functions and agree to float64 rounding.
"""

import os

_requested = os.environ.get("GATERL_BACKEND", "").strip().lower()
if _requested not in ("", "cython", "python"):
    raise RuntimeError(f"GATERL_BACKEND must be 'cython' or 'python', got {_requested!r}")

if _requested == "python":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _kernels_py as _impl

        BACKEND = "python"

dense_forward = _impl.dense_forward
dense_backward = _impl.dense_backward


def backend_name() -> str:
    return BACKEND
