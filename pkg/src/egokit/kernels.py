"""Backend selection for the inner loops.

The compiled extension is used when it was built; set ``EGOKIT_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("EGOKIT_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"


def max_pairwise_distance(points) -> float:
    """Largest Euclidean distance between any two rows of an (n, 2) array; 0 for n < 2."""
    return float(_impl.max_pairwise_distance(np.ascontiguousarray(points, dtype=np.float64)))


def box_iou_pairs(a, b):
    """Row-wise IoU of two (n, 4) box arrays in (x_min, y_min, x_max, y_max) order."""
    return _impl.box_iou_pairs(
        np.ascontiguousarray(a, dtype=np.float64), np.ascontiguousarray(b, dtype=np.float64)
    )


def interval_iou_pairs(a, b):
    return _impl.interval_iou_pairs(
        np.ascontiguousarray(a, dtype=np.float64), np.ascontiguousarray(b, dtype=np.float64)
    )
