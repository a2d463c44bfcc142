"""Per-partition detection: sample, build the graph, sweep k, box the clusters."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from evmod.config import PipelineConfig
from evmod.evaluate import BoundingBox
from evmod.events import EventPartition, EventStream, PartitionSpec, partition, sample_uniform
from evmod.graph import build_knn_graph, collapse_duplicates
from evmod.model_select import sweep_k

log = logging.getLogger(__name__)

OK = "ok"
INSUFFICIENT = "insufficient_events"


@dataclass(frozen=True)
class Detection:
    cluster_id: int
    box: BoundingBox
    event_count: int
    member_events: np.ndarray = field(compare=False, repr=False)


@dataclass(frozen=True, eq=False)
class DetectionReport:
    partition_index: int
    chosen_k: int | None
    sc: float | None
    detections: list
    suppressed: int
    config_echo: dict
    status: str = OK
    candidates: list = field(default_factory=list)
    # not serialized; kept for rendering
    sampled: object = None
    labels: np.ndarray | None = None  # per sampled event, -1 when suppressed

    def to_dict(self) -> dict:
        d = {
            "partition": self.partition_index,
            "chosen_k": self.chosen_k,
            "sc": self.sc,
            "suppressed": self.suppressed,
            "detections": [
                {"cluster_id": det.cluster_id, "box": list(map(int, det.box)),
                 "event_count": det.event_count}
                for det in self.detections
            ],
            "config": self.config_echo,
        }
        if self.status != OK:
            d["status"] = self.status
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def core_members(xs, ys, gap: float) -> np.ndarray:
    """Mask of the largest group of members chained by steps of at most ``gap`` pixels.

    Ties go to the group containing the lowest member index.
    """
    pts = np.column_stack([xs, ys]).astype(np.float64)
    n = len(pts)
    if n < 2:
        return np.ones(n, dtype=bool)
    pairs = cKDTree(pts).query_pairs(gap, output_type="ndarray")
    adj = sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, comp = connected_components(adj, directed=False)
    sizes = np.bincount(comp)
    return comp == np.argmax(sizes)


def extract_box(xs, ys, trim_fraction: float = 0.0, gap: float | None = None) -> BoundingBox:
    """Per-axis extent of cluster members.

    Drops floor(trim * n) members from each end of each axis. With ``gap``,
    only the members returned by :func:`core_members` are used, which removes
    noise events detached from the object.
    """
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    n = len(xs)
    if n == 0 or len(ys) != n:
        raise ValueError("need at least one member with matching x and y")
    if not 0 <= trim_fraction < 0.5:
        raise ValueError("trim_fraction must be in [0, 0.5)")
    if gap is not None:
        keep = core_members(xs, ys, gap)
        xs, ys = xs[keep], ys[keep]
        n = len(xs)
    xs, ys = np.sort(xs), np.sort(ys)
    cut = int(np.floor(trim_fraction * n))
    return BoundingBox(int(xs[cut]), int(ys[cut]), int(xs[n - 1 - cut]), int(ys[n - 1 - cut]))


def derive_seed(seed: int, *tags: int) -> int:
    return int(np.random.SeedSequence([seed, *tags]).generate_state(1)[0])


def _insufficient(part, cfg, reason):
    log.info("partition %d: %s", part.index, reason)
    return DetectionReport(partition_index=part.index, chosen_k=None, sc=None, detections=[],
                           suppressed=0, config_echo=cfg.to_dict(), status=INSUFFICIENT)


def detect_partition(part: EventPartition, cfg: PipelineConfig | None = None) -> DetectionReport:
    cfg = cfg or PipelineConfig()
    if part.size < cfg.min_events:
        return _insufficient(part, cfg, f"{part.size} events < min_events={cfg.min_events}")
    sampled = sample_uniform(part, cfg.sample_n, derive_seed(cfg.seed, part.index, 1),
                             cfg.time_scale, cfg.include_polarity)
    unique, inverse, _ = collapse_duplicates(sampled.points)
    n = len(unique)
    if n < cfg.min_events:
        return _insufficient(part, cfg, f"{n} distinct sampled events < min_events")
    graph = build_knn_graph(unique, min(cfg.knn_k, n - 1), cfg.knn_method)
    lo, hi = cfg.k_range
    hi = min(hi, n - 1)
    lo = min(lo, hi)
    sweep = sweep_k(unique, graph, (lo, hi), cfg.solver(derive_seed(cfg.seed, part.index, 2)),
                    cfg.silhouette_space)
    raw = sweep.assignment.labels[inverse]

    # renumber clusters by first appearance in time order
    _, first = np.unique(raw, return_index=True)
    rank = np.argsort(np.argsort(first))
    labels = rank[raw]

    detections, suppressed = [], 0
    out_labels = np.full(len(labels), -1, dtype=np.int64)
    for cid in range(len(first)):
        members = np.flatnonzero(labels == cid)
        if len(members) < cfg.min_cluster_size:
            suppressed += 1
            continue
        box = extract_box(sampled.x[members], sampled.y[members], cfg.trim_fraction,
                          cfg.box_gap or None)
        detections.append(Detection(cluster_id=cid, box=box, event_count=int(len(members)),
                                    member_events=members))
        out_labels[members] = cid
    return DetectionReport(
        partition_index=part.index, chosen_k=sweep.best_k, sc=float(sweep.sc),
        detections=detections, suppressed=suppressed, config_echo=cfg.to_dict(),
        candidates=list(sweep.candidates), sampled=sampled, labels=out_labels,
    )


def detect_stream(stream: EventStream, spec: PartitionSpec | None = None,
                  cfg: PipelineConfig | None = None) -> list:
    cfg = cfg or PipelineConfig()
    if spec is None:
        spec = PartitionSpec.regular(cfg.frame_interval, int(stream.t.max(initial=0)))
    parts = partition(stream, spec)
    if parts.dropped:
        log.warning("%d events after the last frame timestamp were dropped", parts.dropped)
    return [detect_partition(p, cfg) for p in parts]
