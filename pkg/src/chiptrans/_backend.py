"""Kernel backend selection.

The compiled extension is used when it was built; setting the environment
variable ``CHIPTRANS_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if not os.environ.get("CHIPTRANS_PURE_PYTHON"):
    try:
        from . import _ckernels as kernels  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

series_match_search = kernels.series_match_search
unwrap_phase = kernels.unwrap_phase
