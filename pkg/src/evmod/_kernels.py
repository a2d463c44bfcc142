"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
implementations are used. ``use_backend`` switches at runtime (tests and
the benchmark exercise both).
"""

import logging

import numpy as np

from evmod import _pykernels

log = logging.getLogger(__name__)

try:
    from evmod import _ckernels
except ImportError:  # extension not built
    _ckernels = None
    log.debug("compiled kernels unavailable, using numpy fallback")

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_active = _ckernels if _ckernels is not None else _pykernels


def available_backends():
    return sorted(_BACKENDS)


def active_backend():
    return "compiled" if _active is _ckernels and _ckernels is not None else "python"


def use_backend(name):
    """Select ``"compiled"`` or ``"python"``; returns the previous name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available_backends()}")
    previous = active_backend()
    _active = _BACKENDS[name]
    return previous


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def knn_bruteforce(points, k):
    """Indices of the ``k`` nearest other points, ordered by (distance, index)."""
    return _active.knn_bruteforce(_f64(points), int(k))


def assign_nearest(X, C):
    """Nearest centroid per row (lowest index on ties) and its squared distance."""
    return _active.assign_nearest(_f64(X), _f64(C))


def cluster_distance_sums(X, labels, n_clusters):
    """``out[i, c]`` = sum of Euclidean distances from row i to members of cluster c."""
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    return _active.cluster_distance_sums(_f64(X), labels, int(n_clusters))
