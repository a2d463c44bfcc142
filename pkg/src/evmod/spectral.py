"""Laplacian eigenproblem, spectral embedding and k-means on the embedding rows."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from evmod import _kernels
from evmod.graph import LaplacianMatrix, NeighborGraph, laplacian

MODES = ("generalized", "unnormalized")
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class SolverSettings:
    laplacian_mode: str = "generalized"
    restarts: int = 10
    max_iter: int = 300
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.laplacian_mode not in MODES:
            raise ValueError(f"laplacian_mode must be one of {MODES}")
        if self.restarts < 1 or self.max_iter < 1:
            raise ValueError("restarts and max_iter must be >= 1")


@dataclass(frozen=True, eq=False)
class EigenSolution:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # N x m, column j pairs with eigenvalues[j]
    mode: str

    def __len__(self):
        return len(self.eigenvalues)


@dataclass(frozen=True, eq=False)
class SpectralEmbedding:
    matrix: np.ndarray  # N x k

    @property
    def k(self) -> int:
        return self.matrix.shape[1]

    @property
    def rows(self) -> np.ndarray:
        return self.matrix


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations: int
    converged: bool
    history: tuple = field(default=())  # inertia after each assignment step
    restart: int = 0

    @property
    def k(self) -> int:
        return len(self.centroids)


def residuals(lap: LaplacianMatrix, solution: EigenSolution) -> np.ndarray:
    """Relative residual per pair: |L u - lam B u| / (|L| |u|), B = D or I."""
    L = lap.matrix
    U = solution.eigenvectors
    lam = solution.eigenvalues
    if solution.mode == "generalized":
        BU = lap.degrees[:, None] * U
    else:
        BU = U
    r = np.linalg.norm(L @ U - BU * lam[None, :], axis=0)
    # induced 1-norm of L is exactly twice the largest degree
    norm_l = max(2.0 * float(lap.degrees.max(initial=0)), 1.0)
    return r / (norm_l * np.linalg.norm(U, axis=0))


def solve_eigen(lap: LaplacianMatrix, count: int, mode: str = "generalized") -> EigenSolution:
    """Smallest ``count`` eigenpairs of L (``unnormalized``) or of L u = lam D u (``generalized``).

    The generalized problem is solved through D^-1/2 L D^-1/2 and mapped back with
    u = D^-1/2 w. Every returned pair is checked against the residual bound.
    """
    n = lap.matrix.shape[0]
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not 1 <= count <= n:
        raise ValueError(f"count={count} must be in [1, {n}]")
    dense = lap.dense()
    if mode == "generalized":
        deg = lap.degrees.astype(np.float64)
        if (deg <= 0).any():
            raise ValueError(
                f"{int((deg <= 0).sum())} zero-degree vertices; generalized mode needs every "
                "degree > 0 (collapse isolated vertices or use unnormalized mode)")
        s = 1.0 / np.sqrt(deg)
        dense = s[:, None] * dense * s[None, :]
        dense = 0.5 * (dense + dense.T)
    vals, vecs = scipy.linalg.eigh(dense, subset_by_index=[0, count - 1], driver="evr")
    if mode == "generalized":
        vecs = s[:, None] * vecs
    # fix the sign so the largest-magnitude entry of each vector is positive
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs = vecs * signs[None, :]
    sol = EigenSolution(eigenvalues=vals, eigenvectors=np.ascontiguousarray(vecs), mode=mode)
    if vals[0] < -RESIDUAL_TOL:
        raise ArithmeticError(f"smallest eigenvalue {vals[0]:.3e} is negative beyond tolerance")
    worst = residuals(lap, sol).max()
    if not worst <= RESIDUAL_TOL:
        raise ArithmeticError(f"eigen residual {worst:.3e} exceeds {RESIDUAL_TOL}")
    return sol


def embed(solution: EigenSolution, k: int) -> SpectralEmbedding:
    if not 1 <= k <= len(solution):
        raise ValueError(f"k={k} but only {len(solution)} eigenpairs are available")
    return SpectralEmbedding(np.ascontiguousarray(solution.eigenvectors[:, :k]))


def _seed_centroids(X, k, rng):
    """k-means++ seeding with a few greedy candidate trials per step."""
    n = len(X)
    trials = 2 + int(np.log(k))
    centers = np.empty((k, X.shape[1]))
    first = rng.integers(n)
    centers[0] = X[first]
    _, closest = _kernels.assign_nearest(X, centers[:1])
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            raise ValueError("ran out of distinct rows while seeding")
        cand = rng.choice(n, size=trials, p=closest / total)
        best_pot, best_d2, best_idx = np.inf, None, None
        for idx in cand:
            _, d2 = _kernels.assign_nearest(X, X[idx:idx + 1])
            d2 = np.minimum(closest, d2)
            pot = d2.sum()
            if pot < best_pot:
                best_pot, best_d2, best_idx = pot, d2, idx
        centers[c] = X[best_idx]
        closest = best_d2
    return centers


def _means(X, labels, k):
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, labels, X)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = sums / counts[:, None]
    return means, counts


def _lloyd(X, k, rng, max_iter, tol, restart):
    centers = _seed_centroids(X, k, rng)
    labels, d2 = _kernels.assign_nearest(X, centers)
    history = [float(d2.sum())]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new_centers, counts = _means(X, labels, k)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            far_d2 = d2.copy()
            for c in empty:
                far = int(np.argmax(far_d2))
                new_centers[c] = X[far]
                far_d2[far] = -1.0
        shift = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
        centers = new_centers
        new_labels, d2 = _kernels.assign_nearest(X, centers)
        history.append(float(d2.sum()))
        changed = bool((new_labels != labels).any())
        labels = new_labels
        if not changed or shift < tol:
            converged = True
            break
    means, counts = _means(X, labels, k)
    centers = np.where(counts[:, None] > 0, means, centers)
    inertia = float(((X - centers[labels]) ** 2).sum())
    history.append(inertia)
    return ClusterAssignment(labels=labels, centroids=centers, inertia=inertia,
                             iterations=it, converged=converged, history=tuple(history),
                             restart=restart)


def kmeans(rows, k: int, seed: int = 0, restarts: int = 10, max_iter: int = 300,
           tol: float = 1e-10) -> ClusterAssignment:
    """Best-of-``restarts`` Lloyd k-means; deterministic for a fixed seed."""
    X = np.ascontiguousarray(getattr(rows, "matrix", rows), dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = len(X)
    if restarts < 1 or max_iter < 1:
        raise ValueError("restarts and max_iter must be >= 1")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must be in [1, N={n}]")
    distinct = len(np.unique(X, axis=0))
    if k > distinct:
        raise ValueError(
            f"k={k} exceeds the {distinct} distinct rows ({n - distinct} duplicate rows)")
    best = None
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        res = _lloyd(X, k, np.random.default_rng(child), max_iter, tol, r)
        if best is None or res.inertia < best.inertia:
            best = res
    return best


def cluster_events(points, graph: NeighborGraph, k: int, cfg: SolverSettings | None = None,
                   solution: EigenSolution | None = None) -> ClusterAssignment:
    """Laplacian -> first k eigenvectors -> k-means on the rows.

    Row i of the embedding is event i, so ``labels[i]`` is that event's cluster.
    A precomputed ``solution`` with at least k pairs may be passed to share one
    eigensolve across several k.
    """
    cfg = cfg or SolverSettings()
    n_points = len(getattr(points, "points", points))
    if n_points != graph.node_count:
        raise ValueError(f"{n_points} points but graph has {graph.node_count} nodes")
    if solution is None:
        solution = solve_eigen(laplacian(graph), k, cfg.laplacian_mode)
    emb = embed(solution, k)
    return kmeans(emb, k, seed=cfg.seed, restarts=cfg.restarts, max_iter=cfg.max_iter,
                  tol=cfg.tol)
