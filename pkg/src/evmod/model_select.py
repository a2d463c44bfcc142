"""Silhouette analysis and the sweep that picks the number of moving objects."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from evmod import _kernels
from evmod.graph import NeighborGraph, laplacian
from evmod.spectral import ClusterAssignment, SolverSettings, cluster_events, embed, solve_eigen

log = logging.getLogger(__name__)

SPACES = ("original_spacetime", "embedding")
DEFAULT_K_RANGE = (2, 10)


@dataclass(frozen=True, eq=False)
class SilhouetteReport:
    per_point: np.ndarray
    mean: float
    k: int
    distance_space: str = "original_spacetime"


@dataclass(frozen=True, eq=False)
class SweepResult:
    candidates: list  # [(k, mean silhouette)], ascending k
    best_k: int
    sc: float
    assignment: ClusterAssignment
    skipped: list = field(default_factory=list)  # [(k, reason)]
    reports: dict = field(default_factory=dict)


def silhouette(points, labels, distance_space: str = "original_spacetime") -> SilhouetteReport:
    """Per-point silhouette s(i) = (b - a) / max(a, b) with Euclidean distances.

    a(i) is the mean distance to the other members of i's cluster (0 for a
    singleton), b(i) the smallest mean distance to the members of any other
    cluster. s(i) = 0 when a(i) = b(i) = 0.
    """
    X = np.asarray(getattr(points, "points", points), dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    labels = np.asarray(labels)
    if len(X) == 0:
        raise ValueError("empty input")
    if len(labels) != len(X):
        raise ValueError(f"{len(labels)} labels for {len(X)} points")
    if len(X) < 3:
        raise ValueError("silhouette needs at least 3 points")
    uniq, lab = np.unique(labels, return_inverse=True)
    lab = lab.reshape(-1)
    c = len(uniq)
    if c < 2:
        raise ValueError("silhouette needs at least 2 clusters")
    sums = _kernels.cluster_distance_sums(X, lab, c)
    counts = np.bincount(lab, minlength=c).astype(np.float64)
    idx = np.arange(len(X))
    own = counts[lab]
    a = np.where(own > 1, sums[idx, lab] / np.maximum(own - 1, 1), 0.0)
    means = sums / counts[None, :]
    means[idx, lab] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 0, (b - a) / denom, 0.0)
    if not ((s >= -1.0) & (s <= 1.0)).all():
        raise ArithmeticError("silhouette value outside [-1, 1]")
    return SilhouetteReport(per_point=s, mean=float(s.mean()), k=c, distance_space=distance_space)


def sweep_k(points, graph: NeighborGraph, k_range=DEFAULT_K_RANGE,
            cfg: SolverSettings | None = None,
            silhouette_space: str = "original_spacetime") -> SweepResult:
    """Cluster for every k in the inclusive range and keep the best mean silhouette.

    Ties go to the smaller k. A k whose clustering fails is skipped and recorded.
    """
    cfg = cfg or SolverSettings()
    if silhouette_space not in SPACES:
        raise ValueError(f"silhouette_space must be one of {SPACES}")
    X = np.asarray(getattr(points, "points", points), dtype=np.float64)
    n = len(X)
    lo, hi = int(k_range[0]), int(k_range[1])
    if lo > hi or lo < 2 or hi > n - 1:
        raise ValueError(f"k range [{lo}, {hi}] must lie within [2, {n - 1}]")
    solution = solve_eigen(laplacian(graph), hi, cfg.laplacian_mode)

    candidates, skipped, reports, assignments = [], [], {}, {}
    for k in range(lo, hi + 1):
        try:
            assignment = cluster_events(X, graph, k, cfg, solution=solution)
        except ValueError as exc:
            log.warning("skipping k=%d: %s", k, exc)
            skipped.append((k, str(exc)))
            continue
        space = X if silhouette_space == "original_spacetime" else embed(solution, k).matrix
        rep = silhouette(space, assignment.labels, silhouette_space)
        candidates.append((k, rep.mean))
        reports[k] = rep
        assignments[k] = assignment
    if not candidates:
        raise ValueError(f"every k in [{lo}, {hi}] failed to cluster")
    best_k, sc = candidates[0]
    for k, m in candidates[1:]:
        if m > sc:
            best_k, sc = k, m
    return SweepResult(candidates=candidates, best_k=best_k, sc=sc,
                       assignment=assignments[best_k], skipped=skipped, reports=reports)


def write_sweep_csv(result: SweepResult, path) -> None:
    with open(path, "w") as fh:
        fh.write("k,mean_silhouette\n")
        for k, m in result.candidates:
            fh.write(f"{k},{m:.12g}\n")
