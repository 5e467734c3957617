"""Hot loops, compiled when the Cython extension is built.

Set ``HMRR_PURE_PYTHON=1`` to force the numpy implementation.
"""

import os

from . import _pycore

BACKEND = "python"
correlate_sorted = _pycore.correlate_sorted

if not os.environ.get("HMRR_PURE_PYTHON"):
    try:
        from . import _ccore
    except ImportError:
        pass
    else:
        correlate_sorted = _ccore.correlate_sorted
        BACKEND = "cython"

__all__ = ["BACKEND", "correlate_sorted"]
