# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the inner loops in :mod:`egokit._kernels_py`.

Arithmetic is written in the same order as the numpy fallback so both
backends agree to the last bit on the same platform.
"""

import numpy as np
from libc.math cimport sqrt


def max_pairwise_distance(const double[:, ::1] points):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t i, j
    cdef double dx, dy, d2, best = 0.0
    if points.shape[1] != 2:
        raise ValueError("points must have shape (n, 2)")
    for i in range(n):
        for j in range(i + 1, n):
            dx = points[i, 0] - points[j, 0]
            dy = points[i, 1] - points[j, 1]
            d2 = dx * dx + dy * dy
            if d2 > best:
                best = d2
    return sqrt(best)


def box_iou_pairs(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i
    cdef double iw, ih, inter, area_a, area_b, union
    if b.shape[0] != n or a.shape[1] != 4 or b.shape[1] != 4:
        raise ValueError("expected two (n, 4) arrays")
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] res = out
    for i in range(n):
        iw = min(a[i, 2], b[i, 2]) - max(a[i, 0], b[i, 0])
        ih = min(a[i, 3], b[i, 3]) - max(a[i, 1], b[i, 1])
        if iw < 0.0:
            iw = 0.0
        if ih < 0.0:
            ih = 0.0
        inter = iw * ih
        area_a = (a[i, 2] - a[i, 0]) * (a[i, 3] - a[i, 1])
        area_b = (b[i, 2] - b[i, 0]) * (b[i, 3] - b[i, 1])
        union = area_a + area_b - inter
        if union > 0.0:
            res[i] = inter / union
    return out


def interval_iou_pairs(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i
    cdef double inter, union
    if b.shape[0] != n or a.shape[1] != 2 or b.shape[1] != 2:
        raise ValueError("expected two (n, 2) arrays")
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] res = out
    for i in range(n):
        inter = min(a[i, 1], b[i, 1]) - max(a[i, 0], b[i, 0])
        if inter < 0.0:
            inter = 0.0
        union = (a[i, 1] - a[i, 0]) + (b[i, 1] - b[i, 0]) - inter
        if union > 0.0:
            res[i] = inter / union
    return out
