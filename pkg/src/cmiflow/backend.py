"""Kernel backend selection.

The environment variable CMIFLOW_BACKEND picks the implementation of the hot
numeric kernels:

    CMIFLOW_BACKEND=numba   jitted kernels (default when numba imports)
    CMIFLOW_BACKEND=numpy   pure-numpy fallback

Selection happens once at import time so a process uses one backend
throughout, which keeps seeded runs reproducible.
"""

import os

from . import _kernels_numpy

_ENV = "CMIFLOW_BACKEND"


def _load():
    choice = os.environ.get(_ENV, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise RuntimeError(f"{_ENV} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numpy":
        return _kernels_numpy
    try:
        from . import _kernels_numba
        return _kernels_numba
    except ImportError:
        if choice == "numba":
            raise RuntimeError("CMIFLOW_BACKEND=numba but numba is not importable")
        return _kernels_numpy


_impl = _load()

eigvalsh_herm = _impl.eigvalsh_herm
eigh_herm = _impl.eigh_herm
entropy_psd = _impl.entropy_psd
gram_entropy = _impl.gram_entropy
ensemble_term = _impl.ensemble_term


def backend_name():
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return _impl.NAME
