"""Kernel backend selection.

The compiled ``_ckernels`` module is used when it imports; otherwise, or
when ``HYPERMAJORITY_PURE_PYTHON`` is set to a non-empty value other than
``0``, the pure-Python ``_pykernels`` are used.  Both produce identical
results for identical random streams.
"""
from __future__ import annotations

import contextlib
import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS: dict[str, ModuleType] = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels


def _default() -> ModuleType:
    if os.environ.get("HYPERMAJORITY_PURE_PYTHON", "") not in ("", "0"):
        return _pykernels
    return _ckernels if _ckernels is not None else _pykernels


kernels: ModuleType = _default()


def available() -> list[str]:
    return sorted(_BACKENDS)


def name() -> str:
    return kernels.NAME


def set_backend(backend: str) -> None:
    global kernels
    try:
        kernels = _BACKENDS[backend]
    except KeyError:
        raise ValueError(f"backend {backend!r} not available; have {available()}") from None


@contextlib.contextmanager
def using(backend: str):
    """Temporarily switch the kernel backend."""
    global kernels
    previous = kernels
    set_backend(backend)
    try:
        yield
    finally:
        kernels = previous
