"""Moving-object detection in event-camera streams by spectral clustering of k-NN graphs.

Typical use::

    from evmod import PipelineConfig, detect_stream, read_event_stream
    reports = detect_stream(read_event_stream("events.csv"), cfg=PipelineConfig())
"""

from evmod.config import ConfigError, PipelineConfig
from evmod.detect import DetectionReport, detect_partition, detect_stream, extract_box
from evmod.evaluate import BoundingBox, EvalReport, iou, match_and_score
from evmod.events import (Event, EventPartition, EventStream, PartitionSpec, SampledEvents,
                          partition, read_event_stream, sample_uniform, write_event_stream)
from evmod.graph import NeighborGraph, build_knn_graph, connected_components, laplacian
from evmod.model_select import SweepResult, silhouette, sweep_k
from evmod.spectral import SolverSettings, cluster_events, embed, kmeans, solve_eigen
from evmod.synth import (PRESETS, SceneScript, dominant_large, generate, near_touching,
                         well_separated)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox", "ConfigError", "DetectionReport", "EvalReport", "Event", "EventPartition",
    "EventStream", "NeighborGraph", "PRESETS", "PartitionSpec", "PipelineConfig", "SampledEvents",
    "SceneScript", "SolverSettings", "SweepResult", "build_knn_graph", "cluster_events",
    "connected_components", "detect_partition", "detect_stream", "dominant_large", "embed", "extract_box",
    "generate", "iou", "kmeans", "laplacian", "match_and_score", "near_touching", "partition",
    "read_event_stream", "sample_uniform", "silhouette", "solve_eigen", "sweep_k",
    "well_separated", "write_event_stream",
]
