"""Kernel backend selection.

The compiled Cython module is used when it is importable, unless the
environment variable ``GEOFLOW_BACKEND=python`` forces the NumPy fallback.
"""
import logging
import os

from . import _pykernels as python_backend

log = logging.getLogger(__name__)

compiled_backend = None
try:
    from . import _ckernels as compiled_backend  # type: ignore[no-redef]
except ImportError:  # pragma: no cover - depends on the build
    log.debug("compiled kernels unavailable, using NumPy fallback")

if os.environ.get("GEOFLOW_BACKEND", "").lower() == "python" or compiled_backend is None:
    backend = python_backend
    BACKEND_NAME = "python"
else:
    backend = compiled_backend
    BACKEND_NAME = "cython"


def get_backend(name=None):
    """Return a kernel module by name ("python", "cython") or the active one."""
    if name is None:
        return backend
    if name == "python":
        return python_backend
    if name == "cython":
        if compiled_backend is None:
            raise ImportError("compiled kernels are not built")
        return compiled_backend
    raise ValueError(f"unknown backend {name!r}")
