"""Backend selection for the graph kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module is used. Setting ``CODEDCACHE_PURE_PYTHON=1``
forces the fallback. Inputs outside the compiled kernel's limits (more than 64
nodes, huge integer weights) are routed to Python regardless.
"""
from __future__ import annotations

import os
from typing import Sequence

from codedcache import _pykernels

_c = None
if os.environ.get("CODEDCACHE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from codedcache import _ckernels as _c
    except ImportError:
        _c = None

BACKEND = "cython" if _c is not None else "python"

_C_MAX_NODES = 64
_C_MAX_WEIGHT = 2 ** 62


def available_backends() -> list[str]:
    names = ["python"]
    if _c is not None:
        names.append("cython")
    return names


def _pick(backend: str | None):
    if backend is None:
        return _c if _c is not None else _pykernels
    if backend == "python":
        return _pykernels
    if backend == "cython":
        if _c is None:
            raise RuntimeError("compiled kernels are not built")
        return _c
    raise ValueError(f"unknown backend {backend!r}")


def induced_acyclic(out_masks: Sequence[int], mask: int, backend: str | None = None) -> bool:
    impl = _pick(backend)
    if impl is _c and len(out_masks) > _C_MAX_NODES:
        impl = _pykernels
    return impl.induced_acyclic(out_masks, mask)


def max_acyclic_weight(out_masks: Sequence[int], weights: Sequence[int],
                       backend: str | None = None) -> tuple[int, int]:
    impl = _pick(backend)
    if impl is _c and (len(out_masks) > _C_MAX_NODES or sum(weights) >= _C_MAX_WEIGHT):
        impl = _pykernels
    return impl.max_acyclic_weight(out_masks, weights)
