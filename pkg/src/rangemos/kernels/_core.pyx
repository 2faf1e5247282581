# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels.

Semantics mirror ``_numpy_impl`` exactly: deterministic minimum selection with
lowest-index tie-breaking, and a stable (gap, flat-pixel-index) neighbor order
in the window vote.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, INFINITY
from libc.stdlib cimport free, malloc

cnp.import_array()

BACKEND_NAME = "cython"

INVERSE_GAP_EPS = 1e-6


def scatter_argmin(cells, values, Py_ssize_t n_cells):
    """See ``rangemos.kernels._numpy_impl.scatter_argmin``."""
    cdef cnp.int64_t[::1] c = np.ascontiguousarray(cells, dtype=np.int64)
    cdef cnp.float64_t[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    winners_arr = np.full(n_cells, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] winners = winners_arr
    cdef Py_ssize_t i, m = c.shape[0]
    cdef cnp.int64_t cell, best
    for i in range(m):
        cell = c[i]
        best = winners[cell]
        if best < 0 or v[i] < v[best]:
            winners[cell] = i
    return winners_arr


def knn_vote(
    anchor_u,
    anchor_v,
    point_range,
    input_label,
    image_range,
    image_valid,
    pixel_label,
    Py_ssize_t k,
    Py_ssize_t window,
    double range_cutoff,
    bint inverse_weight,
):
    """See ``rangemos.kernels._numpy_impl.knn_vote``."""
    cdef cnp.int64_t[::1] au = np.ascontiguousarray(anchor_u, dtype=np.int64)
    cdef cnp.int64_t[::1] av = np.ascontiguousarray(anchor_v, dtype=np.int64)
    cdef cnp.float64_t[::1] pr = np.ascontiguousarray(point_range, dtype=np.float64)
    cdef cnp.float64_t[:, ::1] img = np.ascontiguousarray(image_range, dtype=np.float64)
    cdef cnp.uint8_t[:, ::1] valid = np.ascontiguousarray(image_valid, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] pixlab = np.ascontiguousarray(pixel_label, dtype=np.uint8)
    out_arr = np.ascontiguousarray(input_label, dtype=np.uint8).copy()
    cdef cnp.uint8_t[::1] out = out_arr

    cdef Py_ssize_t height = img.shape[0]
    cdef Py_ssize_t width = img.shape[1]
    cdef Py_ssize_t n = au.shape[0]
    cdef Py_ssize_t half = window // 2
    cdef Py_ssize_t n_off = window * window

    cdef double* buf_gap = <double*> malloc(n_off * sizeof(double))
    cdef unsigned char* buf_lab = <unsigned char*> malloc(n_off * sizeof(unsigned char))
    if buf_gap == NULL or buf_lab == NULL:
        free(buf_gap)
        free(buf_lab)
        raise MemoryError()

    cdef Py_ssize_t p, dv, du, vv, uu, count, i, j, kk
    cdef double gap, g, moving, static, w
    cdef unsigned char lab
    try:
        for p in range(n):
            if au[p] < 0 or av[p] < 0:
                continue
            count = 0
            for dv in range(-half, half + 1):
                vv = av[p] + dv
                if vv < 0 or vv >= height:
                    continue
                for du in range(-half, half + 1):
                    uu = au[p] + du
                    if uu < 0 or uu >= width:
                        continue
                    if not valid[vv, uu]:
                        continue
                    gap = fabs(img[vv, uu] - pr[p])
                    if gap > range_cutoff:
                        continue
                    buf_gap[count] = gap
                    buf_lab[count] = pixlab[vv, uu]
                    count += 1
            if count == 0:
                continue
            # Stable insertion sort on the gap; candidates are already in
            # ascending flat-pixel order, so ties keep that order.
            for i in range(1, count):
                g = buf_gap[i]
                lab = buf_lab[i]
                j = i - 1
                while j >= 0 and buf_gap[j] > g:
                    buf_gap[j + 1] = buf_gap[j]
                    buf_lab[j + 1] = buf_lab[j]
                    j -= 1
                buf_gap[j + 1] = g
                buf_lab[j + 1] = lab
            kk = k if k < count else count
            moving = 0.0
            static = 0.0
            for i in range(kk):
                if inverse_weight:
                    w = 1.0 / (buf_gap[i] + INVERSE_GAP_EPS)
                else:
                    w = 1.0
                if buf_lab[i] == 1:
                    moving += w
                else:
                    static += w
            if moving > static:
                out[p] = 1
            elif static > moving:
                out[p] = 0
    finally:
        free(buf_gap)
        free(buf_lab)
    return out_arr
