"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``SUBARRAY_DPD_PURE_PYTHON`` is set to a non-empty
value, the numpy fallback is used. ``BACKEND`` names the active choice.
"""

import os

from . import _kernels_py

if os.environ.get("SUBARRAY_DPD_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_ext as _impl
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"
    else:
        BACKEND = "cython"

ph_eval = _impl.ph_eval
snl_basis = _impl.snl_basis

__all__ = ["BACKEND", "ph_eval", "snl_basis"]
