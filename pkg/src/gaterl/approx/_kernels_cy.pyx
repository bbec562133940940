# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled dense-layer kernels.

Hot path for single-observation policy evaluation during rollouts, where
numpy per-call overhead dominates the actual arithmetic. Contract matches
_kernels_py: float64 C-contiguous arrays, weights (out, in).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport tanh

cnp.import_array()


def dense_forward(double[:, ::1] x, double[:, ::1] w, double[::1] b, bint apply_tanh):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t din = x.shape[1]
    cdef Py_ssize_t dout = w.shape[0]
    out = np.empty((n, dout), dtype=np.float64)
    cdef double[:, ::1] y = out
    cdef Py_ssize_t i, j, k
    cdef double acc
    with nogil:
        for i in range(n):
            for j in range(dout):
                acc = b[j]
                for k in range(din):
                    acc += w[j, k] * x[i, k]
                y[i, j] = tanh(acc) if apply_tanh else acc
    return out


def dense_backward(double[:, ::1] x, double[:, ::1] y, double[:, ::1] dy,
                   double[:, ::1] w, bint applied_tanh):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t din = x.shape[1]
    cdef Py_ssize_t dout = w.shape[0]
    dx_arr = np.zeros((n, din), dtype=np.float64)
    dw_arr = np.zeros((dout, din), dtype=np.float64)
    db_arr = np.zeros(dout, dtype=np.float64)
    cdef double[:, ::1] dx = dx_arr
    cdef double[:, ::1] dw = dw_arr
    cdef double[::1] db = db_arr
    cdef Py_ssize_t i, j, k
    cdef double dz
    with nogil:
        for i in range(n):
            for j in range(dout):
                dz = dy[i, j]
                if applied_tanh:
                    dz = dz * (1.0 - y[i, j] * y[i, j])
                db[j] += dz
                for k in range(din):
                    dw[j, k] += dz * x[i, k]
                    dx[i, k] += dz * w[j, k]
    return dx_arr, dw_arr, db_arr
