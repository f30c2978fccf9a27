"""Kernel selection: compiled extension when available, pure Python otherwise.

Set FNPW_PURE=1 to force the pure-Python kernels (useful for benchmarking
and for verifying that both implementations agree).
"""

import os

from . import _pykernel

if os.environ.get("FNPW_PURE"):
    _impl = _pykernel
    IMPLEMENTATION = "python"
else:
    try:
        from . import _ckernel as _impl

        IMPLEMENTATION = "c"
    except ImportError:
        _impl = _pykernel
        IMPLEMENTATION = "python"

max_welfare = _impl.max_welfare
max_marginal = _impl.max_marginal


def implementations():
    """Name -> module for every kernel implementation importable here."""
    impls = {"python": _pykernel}
    try:
        from . import _ckernel

        impls["c"] = _ckernel
    except ImportError:
        pass
    return impls
