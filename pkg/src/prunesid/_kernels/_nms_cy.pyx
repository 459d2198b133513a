# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled greedy suppression kernel. Mirrors _nms_py exactly."""

import numpy as np

cimport numpy as cnp


def greedy_nms_block(double[:, ::1] block, cnp.intp_t[::1] order, double tau):
    cdef Py_ssize_t n = order.shape[0]
    out = np.empty(n, dtype=np.intp)
    cdef cnp.intp_t[::1] kept = out
    cdef Py_ssize_t m = 0, t, j
    cdef cnp.intp_t i
    cdef bint keep
    for t in range(n):
        i = order[t]
        keep = True
        for j in range(m):
            if block[i, kept[j]] >= tau:
                keep = False
                break
        if keep:
            kept[m] = i
            m += 1
    return out[:m].copy()
