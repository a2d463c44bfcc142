"""Symmetric k-NN graph over sampled events and its unnormalized Laplacian."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc
from scipy.spatial import cKDTree

from evmod import _kernels

BRUTE_FORCE_BELOW = 64
DEFAULT_KNN = 30
# per-sequence neighbour counts used for the hands / cars / street recordings
KNN_PRESETS = {"hands": 30, "cars": 100, "street": 25}


def _coords(points):
    pts = getattr(points, "points", points)
    return np.ascontiguousarray(pts, dtype=np.float64)


def collapse_duplicates(points):
    """Unique rows in first-occurrence order.

    Returns ``(unique, inverse, counts)`` with ``unique[inverse] == points``.
    """
    pts = _coords(points)
    _, first, inverse, counts = np.unique(pts, axis=0, return_index=True,
                                          return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return pts[first[order]], rank[inverse], counts[order]


@dataclass(frozen=True, eq=False)
class NeighborGraph:
    node_count: int
    knn_k: int
    adjacency: sp.csr_matrix  # symmetric 0/1, zero diagonal
    degrees: np.ndarray

    @property
    def edges(self) -> np.ndarray:
        """Undirected edges as an (E, 2) array, ``i < j``, lexicographically sorted."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        e = np.column_stack([upper.row, upper.col]).astype(np.int64)
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.nnz // 2)

    def edge_set(self) -> set:
        return {(int(i), int(j)) for i, j in self.edges}


@dataclass(frozen=True, eq=False)
class LaplacianMatrix:
    matrix: sp.csr_matrix
    degrees: np.ndarray

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def _sqdist(pts, i, cand):
    # same left-to-right accumulation as the brute-force kernels
    acc = np.zeros(len(cand))
    for a in range(pts.shape[1]):
        diff = pts[cand, a] - pts[i, a]
        acc = acc + diff * diff
    return acc


def _knn_tree(pts, k):
    n = len(pts)
    tree = cKDTree(pts)
    dist, _ = tree.query(pts, k=k + 1)
    # every point with distance <= the k-th neighbour distance is a candidate;
    # re-rank candidates with the exact (distance, index) rule
    radius = dist[:, -1] * (1.0 + 1e-9) + 1e-300
    balls = tree.query_ball_point(pts, radius)
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        cand = np.asarray(balls[i], dtype=np.int64)
        cand = cand[cand != i]
        d2 = _sqdist(pts, i, cand)
        order = np.lexsort((cand, d2))
        out[i] = cand[order[:k]]
    return out


def knn_indices(points, k: int, method: str = "auto") -> np.ndarray:
    """Each point's ``k`` nearest other points, ranked by (distance, index)."""
    pts = _coords(points)
    n = len(pts)
    if n < 2:
        raise ValueError("need at least 2 points for a k-NN graph")
    if not 1 <= k < n:
        raise ValueError(f"k={k} must satisfy 1 <= k < N={n}")
    if method == "auto":
        method = "brute" if n < BRUTE_FORCE_BELOW else "tree"
    if method == "brute":
        return _kernels.knn_bruteforce(pts, k)
    if method == "tree":
        return _knn_tree(pts, k)
    raise ValueError(f"unknown k-NN method {method!r}")


def build_knn_graph(points, k: int, method: str = "auto") -> NeighborGraph:
    """Connect i and j when either is among the other's k nearest neighbours.

    Points must be pairwise distinct; see :func:`collapse_duplicates`.
    """
    pts = _coords(points)
    n = len(pts)
    if n >= 2 and len(np.unique(pts, axis=0)) != n:
        raise ValueError("duplicate points; collapse them before building the graph")
    nbr = knn_indices(pts, k, method)
    rows = np.repeat(np.arange(n), k)
    directed = sp.csr_matrix((np.ones(n * k, dtype=np.int8), (rows, nbr.ravel())), shape=(n, n))
    adj = ((directed + directed.T) > 0).astype(np.int8).tocsr()
    adj.sort_indices()
    degrees = np.diff(adj.indptr).astype(np.int64)
    return NeighborGraph(node_count=n, knn_k=k, adjacency=adj, degrees=degrees)


def graph_from_edges(n: int, edges, knn_k: int = 0) -> NeighborGraph:
    """Graph from an explicit undirected edge list (tests, debugging)."""
    e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    if (e[:, 0] == e[:, 1]).any():
        raise ValueError("self loops are not allowed")
    data = np.ones(2 * len(e), dtype=np.int8)
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    adj = (sp.csr_matrix((data, (rows, cols)), shape=(n, n)) > 0).astype(np.int8).tocsr()
    degrees = np.diff(adj.indptr).astype(np.int64)
    return NeighborGraph(node_count=n, knn_k=knn_k, adjacency=adj, degrees=degrees)


def laplacian(graph: NeighborGraph) -> LaplacianMatrix:
    """L = D - A."""
    a = graph.adjacency.astype(np.float64)
    d = graph.degrees.astype(np.float64)
    mat = (sp.diags(d) - a).tocsr()
    mat.sort_indices()
    return LaplacianMatrix(matrix=mat, degrees=graph.degrees.copy())


def connected_components(graph: NeighborGraph) -> np.ndarray:
    """Component label per node, numbered in order of first appearance."""
    _, raw = _cc(graph.adjacency, directed=False)
    _, first = np.unique(raw, return_index=True)
    rank = np.argsort(np.argsort(first))
    return rank[raw].astype(np.int64)


def dump_edges(graph: NeighborGraph, path) -> None:
    with open(path, "w") as fh:
        for i, j in graph.edges:
            fh.write(f"{i} {j}\n")
