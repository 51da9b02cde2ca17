"""Backend selection for the numerical hot loops.

The compiled extension ``lrsync._ckernels`` is used when it was built;
otherwise the NumPy implementations in ``lrsync._pykernels`` are used.
Set ``LRSYNC_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("LRSYNC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels
    else:
        BACKEND = "cython"
else:
    _impl = _pykernels

jacobi_eigh = _impl.jacobi_eigh
rk4_linear = _impl.rk4_linear

__all__ = ["BACKEND", "jacobi_eigh", "rk4_linear"]
