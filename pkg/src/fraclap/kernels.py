"""Import-time selection between the compiled and pure-Python kernels.

Set ``FRACLAP_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from fraclap import _kernels_py

python_impl = _kernels_py.sym_difference_sum

try:
    from fraclap import _kernels as _compiled
except ImportError:
    _compiled = None

compiled_impl = _compiled.sym_difference_sum if _compiled is not None else None

if compiled_impl is not None and not os.environ.get("FRACLAP_PURE_PYTHON"):
    sym_difference_sum = compiled_impl
    BACKEND = "cython"
else:
    sym_difference_sum = python_impl
    BACKEND = "python"

__all__ = ["BACKEND", "compiled_impl", "python_impl", "sym_difference_sum"]
