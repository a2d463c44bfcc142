"""Event data model, file I/O, partitioning by frame timestamps, sampling.

Streams are stored column-wise as numpy arrays; :class:`Event` is only the
per-item view.
"""

from __future__ import annotations

import os
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

CSV_HEADER_RE = re.compile(r"^#\s*evmod-events\s+v1\s+width=(\d+)\s+height=(\d+)\s*$")
BINARY_MAGIC = b"EVM1"
BINARY_HEADER = np.dtype([("width", "<u2"), ("height", "<u2"), ("count", "<u8")])
BINARY_RECORD = np.dtype([("x", "<u2"), ("y", "<u2"), ("t", "<u8"), ("p", "i1")])


class EventFormatError(ValueError):
    """Malformed or out-of-bounds event data."""


class Event(NamedTuple):
    x: int
    y: int
    t: int
    polarity: int


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EventStream:
    """Time-sorted events from one sensor of size ``width`` x ``height``."""

    width: int
    height: int
    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        for name, dtype in (("x", np.int64), ("y", np.int64), ("t", np.int64), ("p", np.int8)):
            object.__setattr__(self, name, _frozen(getattr(self, name), dtype))
        n = len(self.x)
        if not (len(self.y) == len(self.t) == len(self.p) == n):
            raise ValueError("event columns have different lengths")
        if self.width <= 0 or self.height <= 0:
            raise EventFormatError(f"invalid sensor size {self.width}x{self.height}")
        bad = (self.x < 0) | (self.x >= self.width) | (self.y < 0) | (self.y >= self.height)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise EventFormatError(
                f"event {i} at ({self.x[i]}, {self.y[i]}) outside sensor {self.width}x{self.height}"
            )
        if (self.t < 0).any():
            raise EventFormatError("negative timestamp")
        if not np.isin(self.p, (-1, 1)).all():
            raise EventFormatError("polarity must be +1 or -1")
        if n > 1 and (np.diff(self.t) < 0).any():
            raise ValueError("events must be sorted by timestamp; use EventStream.sorted()")

    @classmethod
    def sorted(cls, width, height, x, y, t, p) -> "EventStream":
        """Build a stream, stable-sorting by timestamp if needed."""
        t = np.asarray(t, dtype=np.int64)
        if len(t) > 1 and (np.diff(t) < 0).any():
            warnings.warn("events were not time-ordered; sorting", stacklevel=2)
            order = np.argsort(t, kind="stable")
            x, y, t, p = (np.asarray(c)[order] for c in (x, y, t, p))
        return cls(width, height, x, y, t, p)

    @classmethod
    def from_events(cls, width: int, height: int, events: Sequence[Event]) -> "EventStream":
        cols = np.array([tuple(e) for e in events], dtype=np.int64).reshape(-1, 4)
        return cls.sorted(width, height, cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3])

    @property
    def total_count(self) -> int:
        return len(self.t)

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i) -> Event:
        return Event(int(self.x[i]), int(self.y[i]), int(self.t[i]), int(self.p[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]

    def same_events(self, other: "EventStream") -> bool:
        return (
            self.width == other.width
            and self.height == other.height
            and all(np.array_equal(getattr(self, c), getattr(other, c)) for c in "xytp")
        )


# --------------------------------------------------------------------------
# file formats


def read_event_stream(path, format: str | None = None) -> EventStream:
    """Read a ``csv`` or ``binary`` event file; format is sniffed when omitted."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if not data:
        raise EventFormatError(f"{path}: empty file")
    if format is None:
        format = "binary" if data[:4] == BINARY_MAGIC else "csv"
    if format == "csv":
        return _parse_csv(data.decode("utf-8", errors="replace"), path)
    if format == "binary":
        return _parse_binary(data, path)
    raise ValueError(f"unknown event format {format!r}")


def _parse_csv(text, path):
    lines = text.splitlines()
    m = CSV_HEADER_RE.match(lines[0].strip()) if lines else None
    if m is None:
        raise EventFormatError(f"{path}:1: missing or malformed header, expected "
                               "'# evmod-events v1 width=<W> height=<H>'")
    width, height = int(m.group(1)), int(m.group(2))
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise EventFormatError(f"{path}:{lineno}: expected 4 fields x,y,t,p, got {len(parts)}")
        try:
            x, y, t, p = (int(v) for v in parts)
        except ValueError:
            raise EventFormatError(f"{path}:{lineno}: non-integer field in {line!r}") from None
        if not (0 <= x < width and 0 <= y < height):
            raise EventFormatError(
                f"{path}:{lineno}: coordinate ({x}, {y}) outside {width}x{height}")
        if p not in (1, -1):
            raise EventFormatError(f"{path}:{lineno}: polarity {p} not in {{1, -1}}")
        if t < 0:
            raise EventFormatError(f"{path}:{lineno}: negative timestamp {t}")
        rows.append((x, y, t, p))
    cols = np.array(rows, dtype=np.int64).reshape(-1, 4)
    return EventStream.sorted(width, height, cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3])


def _parse_binary(data, path):
    if data[:4] != BINARY_MAGIC:
        raise EventFormatError(f"{path}: bad magic {data[:4]!r}")
    off = 4 + BINARY_HEADER.itemsize
    if len(data) < off:
        raise EventFormatError(f"{path}: truncated header")
    hdr = np.frombuffer(data, BINARY_HEADER, count=1, offset=4)[0]
    count = int(hdr["count"])
    need = off + count * BINARY_RECORD.itemsize
    if len(data) != need:
        raise EventFormatError(
            f"{path}: expected {need} bytes for {count} records, file has {len(data)}")
    rec = np.frombuffer(data, BINARY_RECORD, count=count, offset=off)
    width, height = int(hdr["width"]), int(hdr["height"])
    bad = np.flatnonzero((rec["x"] >= width) | (rec["y"] >= height) | ~np.isin(rec["p"], (-1, 1)))
    if bad.size:
        i = int(bad[0])
        raise EventFormatError(
            f"{path}: record {i} at byte offset {off + i * BINARY_RECORD.itemsize} is invalid "
            f"(x={rec['x'][i]}, y={rec['y'][i]}, p={rec['p'][i]})")
    return EventStream.sorted(width, height, rec["x"], rec["y"], rec["t"].astype(np.int64), rec["p"])


def write_event_stream(stream: EventStream, path, format: str = "csv") -> None:
    """Write atomically (temp file + rename)."""
    path = os.fspath(path)
    tmp = path + ".tmp"
    if format == "csv":
        with open(tmp, "w", newline="\n") as fh:
            fh.write(f"# evmod-events v1 width={stream.width} height={stream.height}\n")
            cols = np.column_stack([stream.x, stream.y, stream.t, stream.p.astype(np.int64)])
            np.savetxt(fh, cols, fmt="%d", delimiter=",")
    elif format == "binary":
        rec = np.empty(len(stream), BINARY_RECORD)
        rec["x"], rec["y"], rec["t"], rec["p"] = stream.x, stream.y, stream.t, stream.p
        hdr = np.array([(stream.width, stream.height, len(stream))], BINARY_HEADER)
        with open(tmp, "wb") as fh:
            fh.write(BINARY_MAGIC + hdr.tobytes() + rec.tobytes())
    else:
        raise ValueError(f"unknown event format {format!r}")
    os.replace(tmp, path)


# --------------------------------------------------------------------------
# partitioning


@dataclass(frozen=True)
class PartitionSpec:
    frame_timestamps: tuple

    def __post_init__(self):
        ts = tuple(int(v) for v in self.frame_timestamps)
        if not ts:
            raise ValueError("partition spec needs at least one frame timestamp")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("frame timestamps must be strictly increasing")
        object.__setattr__(self, "frame_timestamps", ts)

    @property
    def count(self) -> int:
        return len(self.frame_timestamps)

    @classmethod
    def regular(cls, interval: int, end: int, start: int = 0) -> "PartitionSpec":
        """Frames every ``interval`` microseconds after ``start``, covering ``end``."""
        if interval <= 0:
            raise ValueError("frame interval must be positive")
        n = max(1, -(-(end - start) // interval))
        return cls(tuple(start + interval * (i + 1) for i in range(n)))


@dataclass(frozen=True, eq=False)
class EventPartition:
    """Events with ``t_prev < t <= t_frame`` (``t_prev`` is None for the first)."""

    index: int
    width: int
    height: int
    t_prev: int | None
    t_frame: int
    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    p: np.ndarray

    @property
    def size(self) -> int:
        return len(self.t)

    def __len__(self):
        return len(self.t)


class Partitions(list):
    """List of :class:`EventPartition` that also records how many events fell past the last frame."""

    def __init__(self, items, dropped):
        super().__init__(items)
        self.dropped = dropped


def partition(stream: EventStream, spec: PartitionSpec) -> Partitions:
    ts = np.asarray(spec.frame_timestamps, dtype=np.int64)
    # side="left": an event exactly on T_i belongs to partition i
    slot = np.searchsorted(ts, stream.t, side="left")
    bounds = np.searchsorted(slot, np.arange(len(ts) + 1), side="left")
    parts = []
    for i in range(len(ts)):
        lo, hi = bounds[i], bounds[i + 1]
        parts.append(EventPartition(
            index=i + 1,
            width=stream.width,
            height=stream.height,
            t_prev=None if i == 0 else int(ts[i - 1]),
            t_frame=int(ts[i]),
            x=stream.x[lo:hi], y=stream.y[lo:hi], t=stream.t[lo:hi], p=stream.p[lo:hi],
        ))
    dropped = int(len(stream) - bounds[-1])
    return Partitions(parts, dropped)


# --------------------------------------------------------------------------
# sampling


@dataclass(frozen=True, eq=False)
class SampledEvents:
    """N events drawn from one partition with their normalized coordinates.

    ``points`` columns are (x / width, y / height, (t - time_origin) / time_scale),
    with (polarity + 1) / 2 appended when polarity is included.
    """

    partition_index: int
    points: np.ndarray
    source_index: np.ndarray
    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    p: np.ndarray
    rng_seed: int
    width: int
    height: int
    time_origin: int
    time_scale: float
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    def denormalize(self, points=None):
        """Map normalized points back to integer (x, y, t) columns."""
        pts = self.points if points is None else np.asarray(points)
        x = np.rint(pts[:, 0] * self.width).astype(np.int64)
        y = np.rint(pts[:, 1] * self.height).astype(np.int64)
        t = np.rint(pts[:, 2] * self.time_scale).astype(np.int64) + self.time_origin
        return x, y, t


def sample_uniform(part: EventPartition, n: int, seed: int, time_scale="auto",
                   include_polarity: bool = False) -> SampledEvents:
    """Draw ``min(n, P_i)`` events uniformly without replacement.

    ``time_scale="auto"`` uses the partition's time span, so t_hat covers [0, 1].
    """
    if n < 1:
        raise ValueError("sample size must be >= 1")
    size = part.size
    if size == 0:
        raise ValueError(f"partition {part.index} is empty")
    if n >= size:
        idx = np.arange(size)
    else:
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(size, size=n, replace=False))
    x, y, t, p = part.x[idx], part.y[idx], part.t[idx], part.p[idx]
    t0 = int(part.t.min())
    if time_scale in (None, "auto"):
        span = int(part.t.max()) - t0
        scale = float(span) if span > 0 else 1.0
    else:
        scale = float(time_scale)
        if not scale > 0:
            raise ValueError("time_scale must be positive")
    cols = [x / part.width, y / part.height, (t - t0) / scale]
    if include_polarity:
        cols.append((p + 1) / 2.0)
    points = np.column_stack(cols).astype(np.float64)
    points.setflags(write=False)
    return SampledEvents(
        partition_index=part.index, points=points, source_index=idx,
        x=x, y=y, t=t, p=p, rng_seed=seed, width=part.width, height=part.height,
        time_origin=t0, time_scale=scale,
    )
