"""Backend selection for the particle-step kernels.

Tries the compiled extension first and falls back to the numpy
implementation.  Set DEGENLAB_FORCE_PYTHON=1 to force the fallback (used by
the benchmark and the cross-backend tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("DEGENLAB_FORCE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
step_chunk_1d = _impl.step_chunk_1d
step_chunk_2d = _impl.step_chunk_2d


def get_backends() -> dict:
    """Both implementations, for side-by-side comparison."""
    out = {"python": _kernels_py}
    try:
        from . import _speedups

        out["cython"] = _speedups
    except ImportError:
        pass
    return out
