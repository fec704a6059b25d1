"""Backend selection for the numerical kernels.

The compiled extension is preferred when it imported cleanly; set
ANCOH_PURE_PYTHON=1 to force the numpy fallback. BACKEND names the winner.
"""
import os

if os.environ.get("ANCOH_PURE_PYTHON"):
    from . import _pure as _backend
    BACKEND = "pure"
else:
    try:
        from . import _core as _backend
        BACKEND = "compiled"
    except ImportError:
        from . import _pure as _backend
        BACKEND = "pure"

numerov_count_nodes = _backend.numerov_count_nodes
cesaro_accumulate = _backend.cesaro_accumulate

__all__ = ["BACKEND", "numerov_count_nodes", "cesaro_accumulate"]
