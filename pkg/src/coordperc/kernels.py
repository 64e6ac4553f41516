"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``COORDPERC_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("COORDPERC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

IMPLEMENTATION: str = _impl.IMPLEMENTATION

reach_grid = _impl.reach_grid
reach_boundary = _impl.reach_boundary
reach_corner = _impl.reach_corner
reach_depth = _impl.reach_depth
nonoriented_reaches = _impl.nonoriented_reaches
level1_cuts = _impl.level1_cuts


def available() -> dict:
    """Both implementations keyed by name (the compiled one only if built)."""
    impls = {"python": _kernels_py}
    try:
        from . import _ckernels
        impls["cython"] = _ckernels
    except ImportError:
        pass
    return impls
