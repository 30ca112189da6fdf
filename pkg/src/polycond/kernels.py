"""Backend selection for the batched kernels.

The compiled extension is used when it imports; set ``POLYCOND_PURE_PYTHON=1``
to force the numpy fallback.  Both expose the same functions.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("POLYCOND_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
system_values_jacobians = _impl.system_values_jacobians
local_condition_batch = _impl.local_condition_batch
sigma_max_batch = _impl.sigma_max_batch

__all__ = ["BACKEND", "system_values_jacobians", "local_condition_batch", "sigma_max_batch", "backends"]


def backends() -> dict:
    """All importable backends by name (used by tests and the benchmark)."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels as compiled  # type: ignore[attr-defined]

        out["cython"] = compiled
    except ImportError:
        pass
    return out
