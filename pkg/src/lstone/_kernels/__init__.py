"""Hot inner loops, JIT-compiled with numba when available.

Set ``LSTONE_DISABLE_NUMBA=1`` to force the pure numpy/Python path.  Both
implementations are importable directly (``numpy_impl``, ``numba_impl``) for
parity tests and benchmarks.
"""
import os
import warnings

from . import _numpy as numpy_impl

numba_impl = None
if os.environ.get("LSTONE_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes"):
    try:
        from . import _numba as numba_impl
    except ImportError:  # pragma: no cover - numba missing
        warnings.warn("numba unavailable; using the numpy kernels", RuntimeWarning)

active = numba_impl if numba_impl is not None else numpy_impl
BACKEND = "numba" if numba_impl is not None else "numpy"

LdimTable = active.LdimTable
first_mismatch = active.first_mismatch
pattern_count = active.pattern_count
masses = active.masses
retain_batch = active.retain_batch

__all__ = ["BACKEND", "LdimTable", "first_mismatch", "pattern_count", "masses", "retain_batch",
           "numpy_impl", "numba_impl"]
