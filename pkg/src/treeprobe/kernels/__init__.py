"""Hot numeric kernels with two interchangeable backends.

The numba backend is used when numba imports cleanly.  Set
``TREEPROBE_BACKEND=numpy`` to force the pure-numpy path (useful for
debugging and for the backend comparison benchmark).  Both backends expose
the same functions with identical outputs.
"""

import os

from . import _numpy_impl

BACKEND_ENV = "TREEPROBE_BACKEND"


def _select_backend():
    wanted = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if wanted == "numpy":
        return "numpy", _numpy_impl
    if wanted != "numba":
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {wanted!r}")
    try:
        from . import _numba_impl
    except ImportError:  # pragma: no cover - numba is a declared dependency
        return "numpy", _numpy_impl
    return "numba", _numba_impl


BACKEND, _impl = _select_backend()

prufer_decode_batch = _impl.prufer_decode_batch
distances_from_order = _impl.distances_from_order
four_point_violations = _impl.four_point_violations
decode_matching_batch = _impl.decode_matching_batch


def get_backend(name):
    """Return the kernel module for ``name`` ('numba' or 'numpy')."""
    if name == "numpy":
        return _numpy_impl
    if name == "numba":
        from . import _numba_impl

        return _numba_impl
    raise ValueError(f"unknown backend {name!r}")


__all__ = [
    "BACKEND",
    "BACKEND_ENV",
    "decode_matching_batch",
    "distances_from_order",
    "four_point_violations",
    "get_backend",
    "prufer_decode_batch",
]
