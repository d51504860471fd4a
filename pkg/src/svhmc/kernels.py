"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
implementation is used. Set ``SVHMC_BACKEND=python`` to force the
fallback (useful for benchmarking and cross-checking).
"""
import os

from . import _pykernels

_forced = os.environ.get("SVHMC_BACKEND", "").lower()

if _forced == "python":
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        if _forced == "cython":
            raise
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

sv_potential = _impl.sv_potential
sv_grad = _impl.sv_grad
sv_leapfrog = _impl.sv_leapfrog
garch_filter = _impl.garch_filter


def get_backend(name):
    """Return the kernel module for ``name`` ('python' or 'cython')."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
