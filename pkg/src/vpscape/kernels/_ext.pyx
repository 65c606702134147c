# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels.

Must stay numerically identical to ``_impl_py``: same formulas, same
clamping, evaluated in the same order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport hypot, sqrt


def drms_matrix(moments, vps):
    """RMS edge/VP consistency for all (edge, finite VP) pairs."""
    cdef double[:, ::1] m = np.ascontiguousarray(moments, dtype=np.float64)
    cdef double[:, ::1] v = np.ascontiguousarray(vps, dtype=np.float64)
    cdef Py_ssize_t ne = m.shape[0], nv = v.shape[0]
    out_arr = np.empty((ne, nv), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double n, cx, cy, sxx, sxy, syy, det_c
    cdef double ux, uy, tr, det, disc, lam
    for i in range(ne):
        n = m[i, 0]
        cx = m[i, 1]
        cy = m[i, 2]
        sxx = m[i, 3]
        sxy = m[i, 4]
        syy = m[i, 5]
        det_c = sxx * syy - sxy * sxy
        for j in range(nv):
            ux = cx - v[j, 0]
            uy = cy - v[j, 1]
            tr = sxx + syy + n * (ux * ux + uy * uy)
            det = det_c + n * (syy * ux * ux - 2.0 * sxy * ux * uy + sxx * uy * uy)
            if det < 0.0:
                det = 0.0
            if tr <= 0.0:
                out[i, j] = 0.0
                continue
            disc = tr * tr - 4.0 * det
            if disc < 0.0:
                disc = 0.0
            lam = 2.0 * det / (tr + sqrt(disc))
            if lam < 0.0:
                lam = 0.0
            out[i, j] = sqrt(lam / n)
    return out_arr


def drms_matrix_ideal(moments, dirs):
    """RMS consistency for all (edge, ideal VP) pairs."""
    cdef double[:, ::1] m = np.ascontiguousarray(moments, dtype=np.float64)
    cdef double[:, ::1] d = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef Py_ssize_t ne = m.shape[0], nd = d.shape[0]
    out_arr = np.empty((ne, nd), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double n, sxx, sxy, syy, nx, ny, var
    for i in range(ne):
        n = m[i, 0]
        sxx = m[i, 3]
        sxy = m[i, 4]
        syy = m[i, 5]
        for j in range(nd):
            nx = -d[j, 1]
            ny = d[j, 0]
            var = (sxx * nx * nx + 2.0 * sxy * nx * ny + syy * ny * ny) / n
            if var < 0.0:
                var = 0.0
            out[i, j] = sqrt(var)
    return out_arr


def strength_sum(pixels, double vx, double vy, double tau):
    """Sum of inverse (distance-to-VP + tau) over a pixel array."""
    cdef double[:, ::1] p = np.ascontiguousarray(pixels, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t k, np_ = p.shape[0]
    cdef double acc = 0.0
    for k in range(np_):
        acc += 1.0 / (hypot(p[k, 0] - vx, p[k, 1] - vy) + tau)
    return acc
