"""Kernel backend selection: compiled extension if available, else pure Python.

Set CHAOSRNG_PURE_PYTHON=1 to force the fallback (used by the benchmark and
the backend-equivalence tests). ``BACKEND`` names the active implementation.
"""
import os

if os.environ.get("CHAOSRNG_PURE_PYTHON") == "1":
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from . import _fastkernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _pykernels as _impl

        BACKEND = "python"

bits_from_trajectory = _impl.bits_from_trajectory
trajectory = _impl.trajectory
