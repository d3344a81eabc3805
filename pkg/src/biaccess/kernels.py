"""Kernel selection: the compiled extension when available, else pure Python.

Set ``BIACCESS_PURE=1`` to force the fallback.  ``BACKEND`` names the one in use.
Single-angle routines always run on Python integers so arbitrary rationals stay
exact; only batch sampling and numeric loops are dispatched.
"""

from __future__ import annotations

import os

import numpy as np

from . import _fallback
from ._fallback import NO, UNDECIDED, YES, biaccess_verdict, cylinder, labels, spine_verdict
from ._fallback import _intersect as intersect

_compiled = None
if os.environ.get("BIACCESS_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

# the compiled cylinder code works in 128-bit integers: grid * modulus must fit
_MAX_BITS = 120


def _fits(m: int, q: int, depth: int) -> bool:
    return m.bit_length() + q.bit_length() + depth + 4 <= _MAX_BITS and m < 2**62


def _batch(name, ks, m, p, q, depth):
    if _compiled is not None and _fits(m, q, depth):
        arr = np.asarray(ks, dtype=np.int64)
        out = np.asarray(getattr(_compiled, name)(arr, m, p, q, depth))
        redo = np.nonzero(out == 3)[0]  # piece buffer overflow: recompute exactly
        if len(redo):
            slow = getattr(_fallback, name.replace("_batch", "_verdict"))
            for i in redo:
                out[i] = slow(int(ks[i]), m, p, q, depth)
        return out
    return getattr(_fallback, name)(ks, m, p, q, depth)


def biaccess_batch(ks, m: int, p: int, q: int, depth: int) -> np.ndarray:
    return _batch("biaccess_batch", ks, m, p, q, depth)


def spine_batch(ks, m: int, p: int, q: int, depth: int) -> np.ndarray:
    return _batch("spine_batch", ks, m, p, q, depth)


def ray_newton(c: complex, z0: complex, targets, newton_iter: int = 60):
    if _compiled is not None:
        n = np.ascontiguousarray([t[0] for t in targets], dtype=np.int64)
        lw = np.ascontiguousarray([t[1] for t in targets], dtype=np.float64)
        aw = np.ascontiguousarray([t[2] for t in targets], dtype=np.float64)
        pts, count = _compiled.ray_newton(complex(c), complex(z0), n, lw, aw, newton_iter)
        return np.asarray(pts)[:count], count == len(targets)
    return _fallback.ray_newton(c, z0, targets, newton_iter)


def escape_raster(c: complex, xmin, xmax, ymin, ymax, width: int, height: int, max_iter: int) -> np.ndarray:
    if _compiled is not None:
        return np.asarray(_compiled.escape_raster(complex(c), xmin, xmax, ymin, ymax, width, height, max_iter))
    return _fallback.escape_raster(c, xmin, xmax, ymin, ymax, width, height, max_iter)


def basin_attracted(c: complex, zs, cycle, radius: float, max_iter: int) -> np.ndarray:
    if _compiled is not None:
        zs = np.ascontiguousarray(zs, dtype=np.complex128)
        cyc = np.ascontiguousarray(cycle, dtype=np.complex128)
        return np.asarray(_compiled.basin_attracted(complex(c), zs, cyc, radius, max_iter)).astype(bool)
    return _fallback.basin_attracted(c, zs, cycle, radius, max_iter)


__all__ = [
    "BACKEND",
    "NO",
    "YES",
    "UNDECIDED",
    "labels",
    "cylinder",
    "intersect",
    "biaccess_verdict",
    "spine_verdict",
    "biaccess_batch",
    "spine_batch",
    "ray_newton",
    "escape_raster",
    "basin_attracted",
]
