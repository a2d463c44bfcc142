# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Must agree exactly with ``_pykernels`` on k-NN output."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


def knn_bruteforce(const double[:, ::1] points, Py_ssize_t k):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t dim = points.shape[1]
    cdef Py_ssize_t i, j, a, pos, filled
    cdef double acc, diff
    out = np.empty((n, k), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] nbr = out
    best_d_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] best_d = best_d_arr

    for i in range(n):
        filled = 0
        for j in range(n):
            if j == i:
                continue
            acc = 0.0
            for a in range(dim):
                diff = points[j, a] - points[i, a]
                acc = acc + diff * diff
            if filled == k and acc >= best_d[k - 1]:
                continue
            # insertion after any equal distances keeps the lower index first
            pos = filled if filled < k else k - 1
            while pos > 0 and best_d[pos - 1] > acc:
                if pos < k:
                    best_d[pos] = best_d[pos - 1]
                    nbr[i, pos] = nbr[i, pos - 1]
                pos -= 1
            best_d[pos] = acc
            nbr[i, pos] = j
            if filled < k:
                filled += 1
    return out


def assign_nearest(const double[:, ::1] X, const double[:, ::1] C):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t m = C.shape[0]
    cdef Py_ssize_t dim = X.shape[1]
    cdef Py_ssize_t i, c, a, best
    cdef double acc, diff, best_d
    labels_arr = np.empty(n, dtype=np.int64)
    d2_arr = np.empty(n, dtype=np.float64)
    cdef cnp.int64_t[::1] labels = labels_arr
    cdef double[::1] d2 = d2_arr

    for i in range(n):
        best = 0
        best_d = INFINITY
        for c in range(m):
            acc = 0.0
            for a in range(dim):
                diff = X[i, a] - C[c, a]
                acc = acc + diff * diff
            if acc < best_d:
                best_d = acc
                best = c
        labels[i] = best
        d2[i] = best_d
    return labels_arr, d2_arr


def cluster_distance_sums(const double[:, ::1] X, const cnp.int64_t[::1] labels,
                          Py_ssize_t n_clusters):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t dim = X.shape[1]
    cdef Py_ssize_t i, j, a
    cdef double acc, diff, dist
    out = np.zeros((n, n_clusters), dtype=np.float64)
    cdef double[:, ::1] sums = out

    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for a in range(dim):
                diff = X[i, a] - X[j, a]
                acc = acc + diff * diff
            dist = sqrt(acc)
            sums[i, labels[j]] += dist
            sums[j, labels[i]] += dist
    return out
