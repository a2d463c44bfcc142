"""Pure-numpy versions of the compiled kernels in ``_ckernels.pyx``."""

import numpy as np

_CHUNK = 512


def knn_bruteforce(points, k):
    points = np.ascontiguousarray(points, dtype=np.float64)
    n, dim = points.shape
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        # accumulate per axis in the same order as the compiled loop
        acc = np.zeros(n)
        for a in range(dim):
            diff = points[:, a] - points[i, a]
            acc = acc + diff * diff
        acc[i] = np.inf
        out[i] = np.argsort(acc, kind="stable")[:k]
    return out


def assign_nearest(X, C):
    X = np.ascontiguousarray(X, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    acc = np.zeros((X.shape[0], C.shape[0]))
    for a in range(X.shape[1]):
        diff = X[:, a, None] - C[None, :, a]
        acc = acc + diff * diff
    labels = np.argmin(acc, axis=1)
    return labels.astype(np.int64), acc[np.arange(X.shape[0]), labels]


def cluster_distance_sums(X, labels, n_clusters):
    X = np.ascontiguousarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    onehot = np.zeros((X.shape[0], n_clusters))
    onehot[np.arange(X.shape[0]), labels] = 1.0
    out = np.empty((X.shape[0], n_clusters))
    for start in range(0, X.shape[0], _CHUNK):
        block = X[start:start + _CHUNK]
        acc = np.zeros((block.shape[0], X.shape[0]))
        for a in range(X.shape[1]):
            diff = block[:, a, None] - X[None, :, a]
            acc += diff * diff
        out[start:start + _CHUNK] = np.sqrt(acc) @ onehot
    return out
