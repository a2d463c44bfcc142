"""Synthetic event scenes with known ground truth.

Objects are uniformly bright shapes moving over a dark background. In every
simulation step each pixel the shape newly covers fires positive events and
each pixel it leaves fires negative events (Poisson count with the object's
``events_per_pixel_crossing`` mean). Uniform shot noise is added on top.
Ground-truth boxes are the pixel extent the shape occupies during each frame
interval, so every object event lies inside its box.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from evmod.evaluate import BoundingBox, GroundTruthFrame
from evmod.events import EventStream, PartitionSpec


class ScriptError(ValueError):
    """Invalid scene script (bad field, or a trajectory leaving the sensor)."""


@dataclass(frozen=True)
class ObjectScript:
    """``size`` is the radius of a disk or the half-extent(s) of a rectangle, in pixels.

    ``trajectory`` is ``{"kind": "linear", "start": [x, y], "velocity": [vx, vy]}``
    (pixels per second) or ``{"kind": "circular", "center": [x, y], "radius": r,
    "angular_velocity": w, "phase": p}`` (radians per second, radians).
    """

    shape: str
    size: float | tuple
    trajectory: dict
    events_per_pixel_crossing: float = 1.0

    def __post_init__(self):
        if self.shape not in ("disk", "rectangle"):
            raise ScriptError(f"unknown shape {self.shape!r}")
        if self.events_per_pixel_crossing < 0:
            raise ScriptError("events_per_pixel_crossing must be non-negative")
        kind = self.trajectory.get("kind")
        if kind not in ("linear", "circular"):
            raise ScriptError(f"unknown trajectory kind {kind!r}")
        half = self.half_extent
        if min(half) <= 0:
            raise ScriptError("object size must be positive")

    @property
    def half_extent(self):
        if isinstance(self.size, (int, float)):
            return (float(self.size), float(self.size))
        hw, hh = self.size
        return (float(hw), float(hh))

    def position(self, t_us):
        """Centre position at time ``t_us`` (microseconds, scalar or array)."""
        tr = self.trajectory
        s = np.asarray(t_us, dtype=np.float64) * 1e-6
        if tr["kind"] == "linear":
            return tr["start"][0] + tr["velocity"][0] * s, tr["start"][1] + tr["velocity"][1] * s
        ang = tr.get("phase", 0.0) + tr["angular_velocity"] * s
        return (tr["center"][0] + tr["radius"] * np.cos(ang),
                tr["center"][1] + tr["radius"] * np.sin(ang))

    def is_moving(self):
        tr = self.trajectory
        if tr["kind"] == "linear":
            return any(v != 0 for v in tr["velocity"])
        return tr["angular_velocity"] != 0 and tr["radius"] != 0

    def mask(self, cx, cy):
        """Covered pixels as ``(x0, y0, bool array[h, w])``."""
        hw, hh = self.half_extent
        x0, x1 = math.floor(cx - hw), math.ceil(cx + hw)
        y0, y1 = math.floor(cy - hh), math.ceil(cy + hh)
        gx = np.arange(x0, x1 + 1)[None, :]
        gy = np.arange(y0, y1 + 1)[:, None]
        if self.shape == "disk":
            m = (gx - cx) ** 2 + (gy - cy) ** 2 <= hw * hw
        else:
            m = (np.abs(gx - cx) <= hw) & (np.abs(gy - cy) <= hh)
        return x0, y0, m


@dataclass(frozen=True)
class SceneScript:
    objects: tuple
    width: int = 346
    height: int = 260
    duration: int = 100_000  # microseconds
    frame_interval: int = 33_333
    background_rate: float = 0.0  # events per pixel per second
    noise_seed: int = 0
    step: int = 1000  # simulation step, microseconds
    name: str = ""

    def __post_init__(self):
        objs = tuple(o if isinstance(o, ObjectScript) else ObjectScript(**o) for o in self.objects)
        object.__setattr__(self, "objects", objs)
        if self.width <= 0 or self.height <= 0 or self.width > 65535 or self.height > 65535:
            raise ScriptError("sensor size out of range")
        if self.duration <= 0 or self.frame_interval <= 0 or self.step <= 0:
            raise ScriptError("duration, frame_interval and step must be positive")
        if self.background_rate < 0:
            raise ScriptError("background_rate must be non-negative")

    def partition_spec(self) -> PartitionSpec:
        return PartitionSpec.regular(self.frame_interval, self.duration)

    def to_json(self) -> str:
        d = asdict(self)
        d["objects"] = [asdict(o) for o in self.objects]
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> "SceneScript":
        d = dict(d)
        if "noise" in d:  # nested {"noise": {"background_rate", "seed"}} form
            noise = d.pop("noise")
            d.setdefault("background_rate", noise.get("background_rate", 0.0))
            d.setdefault("noise_seed", noise.get("seed", 0))
        objs = []
        for o in d.pop("objects", []):
            o = dict(o)
            if isinstance(o.get("size"), list):
                o["size"] = tuple(o["size"])
            objs.append(ObjectScript(**o))
        try:
            return cls(objects=tuple(objs), **d)
        except TypeError as exc:
            raise ScriptError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "SceneScript":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    stream: EventStream
    truth: list  # GroundTruthFrame per partition
    script_echo: SceneScript
    object_id: np.ndarray = field(default=None)  # per event, -1 for noise

    @property
    def partition_spec(self) -> PartitionSpec:
        return self.script_echo.partition_spec()


def generate(script: SceneScript, seed: int = 0) -> SyntheticScene:
    rng = np.random.default_rng(np.random.SeedSequence([seed, script.noise_seed]))
    spec = script.partition_spec()
    frames = np.asarray(spec.frame_timestamps)
    n_steps = -(-script.duration // script.step)
    times = np.minimum(np.arange(n_steps + 1) * script.step, script.duration)

    cols = {"x": [], "y": [], "t": [], "p": [], "o": []}
    # per partition, per object: [xmin, ymin, xmax, ymax] or None
    boxes = [[None] * len(script.objects) for _ in frames]

    for oid, obj in enumerate(script.objects):
        cx, cy = obj.position(times)
        masks = [obj.mask(float(cx[s]), float(cy[s])) for s in range(n_steps + 1)]
        for s, (x0, y0, m) in enumerate(masks):
            ys, xs = np.nonzero(m)
            if xs.size and (x0 + xs.min() < 0 or y0 + ys.min() < 0
                            or x0 + xs.max() >= script.width or y0 + ys.max() >= script.height):
                raise ScriptError(
                    f"object {oid} leaves the {script.width}x{script.height} sensor "
                    f"at t={int(times[s])}us")
        if not obj.is_moving():
            continue
        for s in range(n_steps):
            t_lo, t_hi = int(times[s]), int(times[s + 1])
            if t_hi <= t_lo:
                continue
            (ax, ay, am), (bx, by_, bm) = masks[s], masks[s + 1]
            gx0, gy0 = min(ax, bx), min(ay, by_)
            gx1 = max(ax + am.shape[1], bx + bm.shape[1])
            gy1 = max(ay + am.shape[0], by_ + bm.shape[0])
            before = np.zeros((gy1 - gy0, gx1 - gx0), dtype=bool)
            after = np.zeros_like(before)
            before[ay - gy0:ay - gy0 + am.shape[0], ax - gx0:ax - gx0 + am.shape[1]] = am
            after[by_ - gy0:by_ - gy0 + bm.shape[0], bx - gx0:bx - gx0 + bm.shape[1]] = bm
            for pol, changed in ((1, after & ~before), (-1, before & ~after)):
                ys, xs = np.nonzero(changed)
                if not xs.size:
                    continue
                counts = rng.poisson(obj.events_per_pixel_crossing, size=xs.size)
                total = int(counts.sum())
                if not total:
                    continue
                cols["x"].append(np.repeat(xs + gx0, counts))
                cols["y"].append(np.repeat(ys + gy0, counts))
                cols["t"].append(rng.integers(t_lo + 1, t_hi + 1, size=total))
                cols["p"].append(np.full(total, pol))
                cols["o"].append(np.full(total, oid))
            # the step's events fall in (t_lo, t_hi]; that span touches these partitions
            first = int(np.searchsorted(frames, t_lo + 1, side="left"))
            last = int(np.searchsorted(frames, t_hi, side="left"))
            occupied = before | after
            ys, xs = np.nonzero(occupied)
            box = [gx0 + xs.min(), gy0 + ys.min(), gx0 + xs.max(), gy0 + ys.max()]
            for i in range(first, min(last, len(frames) - 1) + 1):
                cur = boxes[i][oid]
                boxes[i][oid] = box if cur is None else [
                    min(cur[0], box[0]), min(cur[1], box[1]),
                    max(cur[2], box[2]), max(cur[3], box[3])]

    if script.background_rate > 0:
        mean = script.background_rate * script.width * script.height * script.duration * 1e-6
        n = int(rng.poisson(mean))
        cols["x"].append(rng.integers(0, script.width, size=n))
        cols["y"].append(rng.integers(0, script.height, size=n))
        cols["t"].append(rng.integers(1, script.duration + 1, size=n))
        cols["p"].append(rng.choice(np.array([-1, 1]), size=n))
        cols["o"].append(np.full(n, -1))

    def cat(key, dtype):
        return np.concatenate(cols[key]).astype(dtype) if cols[key] else np.zeros(0, dtype)

    x, y, t, p, o = cat("x", np.int64), cat("y", np.int64), cat("t", np.int64), \
        cat("p", np.int8), cat("o", np.int64)
    order = np.lexsort((p, x, y, t))
    stream = EventStream(script.width, script.height, x[order], y[order], t[order], p[order])
    truth = [
        GroundTruthFrame(partition_index=i + 1,
                         boxes=[BoundingBox(*map(int, b)) for b in row if b is not None])
        for i, row in enumerate(boxes)
    ]
    return SyntheticScene(stream=stream, truth=truth, script_echo=script, object_id=o[order])


# --------------------------------------------------------------------------
# presets (original parameter choices, not taken from any recorded sequence)

PRESET_RADIUS = 14.0
PRESET_SPEED = (350.0, 550.0)  # pixels per second
PRESET_RATE = 1.0
# shot noise at roughly 1% of the object event rate for a 3-object preset scene
PRESET_NOISE = 0.012


def _disk(x, y, vx, vy, r=PRESET_RADIUS, rate=PRESET_RATE):
    return ObjectScript("disk", float(r), {"kind": "linear", "start": [float(x), float(y)],
                                           "velocity": [float(vx), float(vy)]}, rate)


def _segment_gap(p0, p1, q0, q1):
    """Minimum distance between two points moving linearly from p0->p1 and q0->q1."""
    d0 = np.subtract(p0, q0)
    dv = np.subtract(p1, q1) - d0
    denom = float(dv @ dv)
    u = 0.0 if denom == 0 else float(np.clip(-(d0 @ dv) / denom, 0.0, 1.0))
    return float(np.linalg.norm(d0 + u * dv))


def well_separated(m: int, seed: int = 0, radius: float = PRESET_RADIUS,
                   background_rate: float = PRESET_NOISE, duration: int = 33_333,
                   frame_interval: int = 33_333, width: int = 346, height: int = 260,
                   gap_factor: float = 3.0, max_tries: int = 10_000) -> SceneScript:
    """``m`` disks on straight paths whose surfaces stay ``gap_factor * radius`` apart."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7919, m]))
    secs = duration * 1e-6
    margin = radius + 2
    min_centre_gap = 2 * radius + gap_factor * radius
    placed = []
    for _ in range(max_tries):
        if len(placed) == m:
            break
        speed = rng.uniform(*PRESET_SPEED)
        ang = rng.uniform(0, 2 * np.pi)
        vx, vy = speed * np.cos(ang), speed * np.sin(ang)
        x0 = rng.uniform(margin, width - margin)
        y0 = rng.uniform(margin, height - margin)
        x1, y1 = x0 + vx * secs, y0 + vy * secs
        if not (margin <= x1 <= width - margin and margin <= y1 <= height - margin):
            continue
        if all(_segment_gap((x0, y0), (x1, y1), q0, q1) >= min_centre_gap for q0, q1, _ in placed):
            placed.append(((x0, y0), (x1, y1), (vx, vy)))
    else:
        raise ScriptError(f"could not place {m} separated objects")
    objs = tuple(_disk(p0[0], p0[1], v[0], v[1], radius) for p0, _, v in placed)
    return SceneScript(objects=objs, width=width, height=height, duration=duration,
                       frame_interval=frame_interval, background_rate=background_rate,
                       noise_seed=seed, name=f"well_separated_{m}")


def near_touching(seed: int = 0, gap: float = 1.0, radius: float = PRESET_RADIUS,
                  background_rate: float = PRESET_NOISE, duration: int = 33_333) -> SceneScript:
    """Two disks moving side by side ``gap`` pixels apart plus one distant disk (3 objects)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 104729]))
    speed = rng.uniform(*PRESET_SPEED)
    x0 = rng.uniform(40, 80)
    y0 = rng.uniform(60, 120)
    dy = 2 * radius + gap
    objs = (
        _disk(x0, y0, speed, 0.0, radius),
        _disk(x0, y0 + dy, speed, 0.0, radius),
        _disk(rng.uniform(250, 300), rng.uniform(190, 220), -speed, 0.0, radius),
    )
    return SceneScript(objects=objs, duration=duration, frame_interval=duration,
                       background_rate=background_rate, noise_seed=seed, name="near_touching")


def dominant_large(seed: int = 0, large_radius: float = 90.0, small_radius: float = 6.0,
                   background_rate: float = PRESET_NOISE, duration: int = 33_333) -> SceneScript:
    """One disk far larger than the other (2 objects)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1299709]))
    speed = rng.uniform(*PRESET_SPEED)
    objs = (
        _disk(rng.uniform(100, 120), rng.uniform(120, 140), speed, 0.0, large_radius),
        _disk(rng.uniform(290, 320), rng.uniform(20, 40), 0.0, speed * 0.5, small_radius),
    )
    return SceneScript(objects=objs, duration=duration, frame_interval=duration,
                       background_rate=background_rate, noise_seed=seed, name="dominant_large")


PRESETS = {
    "two_objects": lambda seed=0: well_separated(2, seed),
    "three_objects": lambda seed=0: well_separated(3, seed),
    "four_objects": lambda seed=0: well_separated(4, seed),
    "five_objects": lambda seed=0: well_separated(5, seed),
    "near_touching": near_touching,
    "dominant_large": dominant_large,
}
