"""Kernel backend selection.

The hot CSR and factorization kernels exist in two call-compatible
implementations: numba ``@njit`` scalar loops (:mod:`nullfem._kernels_numba`)
and vectorized pure-numpy fallbacks (:mod:`nullfem._kernels_numpy`).

The ``NULLFEM_BACKEND`` environment variable ("numba" or "numpy") picks the
backend when the package is imported; if numba is requested but cannot be
imported, the numpy path is used and a warning is emitted. Call sites read
``backend.kernels`` at call time, so :func:`use` can switch backends within
a process (used by the test suite and the benchmark).
"""

from __future__ import annotations

import os
import warnings
from contextlib import contextmanager

ENV_VAR = "NULLFEM_BACKEND"


def _load(name: str):
    if name == "numpy":
        from . import _kernels_numpy

        return _kernels_numpy
    if name == "numba":
        try:
            from . import _kernels_numba
        except ImportError as exc:
            warnings.warn(
                f"numba backend unavailable ({exc}); falling back to numpy",
                RuntimeWarning,
                stacklevel=3,
            )
            from . import _kernels_numpy

            return _kernels_numpy
        return _kernels_numba
    raise ValueError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")


kernels = _load(os.environ.get(ENV_VAR, "numba").strip().lower())


def backend_name() -> str:
    """Name of the active kernel backend ("numba" or "numpy")."""
    return kernels.BACKEND_NAME


@contextmanager
def use(name: str):
    """Temporarily switch the kernel backend. Not thread-safe."""
    global kernels
    previous = kernels
    kernels = _load(name)
    try:
        yield kernels
    finally:
        kernels = previous
