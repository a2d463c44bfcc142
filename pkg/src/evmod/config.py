"""Pipeline configuration (JSON file, echoed into every report)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace

from evmod.graph import DEFAULT_KNN, KNN_PRESETS
from evmod.model_select import SPACES
from evmod.spectral import MODES, SolverSettings


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    knn_k: int = DEFAULT_KNN
    sample_n: int = 1000
    k_range: tuple = (2, 10)
    laplacian_mode: str = "generalized"
    time_scale: object = 1_000_000  # microseconds per unit t_hat, or "auto" (partition span)
    silhouette_space: str = "original_spacetime"
    trim_fraction: float = 0.02
    box_gap: float = 12.0  # pixels; 0 disables the detached-member filter
    min_cluster_size: int = 5
    min_events: int = 16
    seed: int = 0
    restarts: int = 10
    max_iter: int = 300
    include_polarity: bool = False
    frame_interval: int = 33_333  # used when no frame-timestamp file is given
    knn_method: str = "auto"

    def __post_init__(self):
        kr = tuple(int(v) for v in self.k_range)
        object.__setattr__(self, "k_range", kr)
        checks = [
            ("knn_k", self.knn_k >= 1),
            ("sample_n", self.sample_n >= 1),
            ("k_range", len(kr) == 2 and 2 <= kr[0] <= kr[1]),
            ("laplacian_mode", self.laplacian_mode in MODES),
            ("time_scale", self.time_scale == "auto"
             or (isinstance(self.time_scale, (int, float)) and self.time_scale > 0)),
            ("silhouette_space", self.silhouette_space in SPACES),
            ("trim_fraction", 0 <= self.trim_fraction < 0.5),
            ("box_gap", isinstance(self.box_gap, (int, float)) and self.box_gap >= 0),
            ("min_cluster_size", self.min_cluster_size >= 1),
            ("min_events", self.min_events >= 3),
            ("restarts", self.restarts >= 1),
            ("max_iter", self.max_iter >= 1),
            ("frame_interval", self.frame_interval >= 1),
            ("knn_method", self.knn_method in ("auto", "tree", "brute")),
        ]
        for name, ok in checks:
            if not ok:
                raise ConfigError(f"invalid value for {name}: {getattr(self, name)!r}")

    def solver(self, seed=None) -> SolverSettings:
        return SolverSettings(laplacian_mode=self.laplacian_mode, restarts=self.restarts,
                              max_iter=self.max_iter, seed=self.seed if seed is None else seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["k_range"] = list(self.k_range)
        return d

    def with_overrides(self, **kw) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        preset = d.pop("preset", None)
        if preset is not None:
            if preset not in KNN_PRESETS:
                raise ConfigError(f"unknown preset {preset!r}; have {sorted(KNN_PRESETS)}")
            d.setdefault("knn_k", KNN_PRESETS[preset])
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        try:
            return cls.from_dict(doc)
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from None


def parse_k_range(text: str) -> tuple:
    """``"2..10"`` -> (2, 10); a bare ``"3"`` means (3, 3)."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return int(a), int(b)
        return int(text), int(text)
    except ValueError:
        raise ConfigError(f"bad k range {text!r}; expected A..B") from None
