"""Graph kernels, compiled when available.

The Cython extension ``lorentz._kernels`` is used if it imports; otherwise the
numpy fallback in ``lorentz._kernels_py``. Set ``LORENTZ_PURE_PYTHON=1`` to
force the fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("LORENTZ_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def all_pairs_bfs(indptr, indices, n, backend=None):
    impl = _pick(backend)
    return impl.all_pairs_bfs(
        np.ascontiguousarray(indptr, dtype=np.int64), np.ascontiguousarray(indices, dtype=np.int64), n
    )


def delta_exact(D, backend=None):
    return _pick(backend).delta_exact(np.ascontiguousarray(D, dtype=np.int32))


def delta_quads(D, quads, backend=None):
    return _pick(backend).delta_quads(
        np.ascontiguousarray(D, dtype=np.int32), np.ascontiguousarray(quads, dtype=np.int64)
    )


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        if BACKEND != "cython":
            raise RuntimeError("compiled kernels are not available")
        return _impl
    raise ValueError(f"unknown backend {backend!r}")
