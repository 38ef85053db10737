"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``PLSUM_PURE_PYTHON=1`` to force the fallback even when the extension is
importable (useful for benchmarking and for debugging parity issues).
"""

from __future__ import annotations

import os

from . import _pykernel

_KERNELS = {"python": _pykernel}
_DEFAULT = _pykernel

if os.environ.get("PLSUM_PURE_PYTHON") != "1":
    try:
        from . import _ckernel

        _KERNELS["cython"] = _ckernel
        _DEFAULT = _ckernel
    except ImportError:
        pass


def get_kernel(name: str | None = None):
    """Kernel module by name ("python" or "cython"); best available when None."""
    if name is None:
        return _DEFAULT
    try:
        return _KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(_KERNELS)}") from None


def kernel_backend() -> str:
    """Name of the kernel used by default in this process."""
    return _DEFAULT.BACKEND


def available_backends() -> list[str]:
    return sorted(_KERNELS)
