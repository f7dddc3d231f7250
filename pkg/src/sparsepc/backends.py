"""Kernel backend selection.

The compiled extension is preferred; the numpy implementation is the fallback
when the extension is unavailable.  ``SPARSEPC_BACKEND=python`` or
``SPARSEPC_BACKEND=compiled`` forces a choice at import time.
"""

import os

from . import _core_py

HERMITE = _core_py.HERMITE
LEGENDRE = _core_py.LEGENDRE
HERMITE_PHYS = _core_py.HERMITE_PHYS

_forced = os.environ.get("SPARSEPC_BACKEND")
if _forced == "python":
    _impl = _core_py
elif _forced == "compiled":
    from . import _core as _impl
elif _forced is None:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _core_py
else:
    raise ImportError(f"unknown SPARSEPC_BACKEND {_forced!r}")

BACKEND = "python" if _impl is _core_py else "compiled"

poly_table = _impl.poly_table
envelope = _impl.envelope
basis_matrix = _impl.basis_matrix
mh_scan = _impl.mh_scan


def get_backend(name):
    """Return the kernel module for ``name`` ("compiled" or "python")."""
    if name == "python":
        return _core_py
    if name == "compiled":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")
