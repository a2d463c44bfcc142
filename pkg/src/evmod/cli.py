"""Command-line entry point: ``evmod detect|sweep|eval|synth``.

Exit codes: 0 success, 1 configuration error, 2 data error. Only the eval
summary row goes to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import glob
import json
import logging
import os
import sys

from evmod.config import ConfigError, PipelineConfig, parse_k_range
from evmod.detect import detect_partition
from evmod.evaluate import (DEFAULT_IOU_THRESHOLD, load_truth, match_and_score,
                            truth_to_json)
from evmod.events import (EventFormatError, PartitionSpec, partition, read_event_stream,
                          write_event_stream)
from evmod.render import ppm_bytes, render_report
from evmod.synth import PRESETS, SceneScript, ScriptError, generate

log = logging.getLogger("evmod")


class DataError(Exception):
    pass


def _write_atomic(path, data):
    tmp = path + ".tmp"
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as fh:
        fh.write(data)
    os.replace(tmp, path)


def _config(args) -> PipelineConfig:
    try:
        cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    except OSError as exc:
        raise ConfigError(str(exc)) from None
    k_range = parse_k_range(args.k_range) if args.k_range else None
    try:
        return cfg.with_overrides(seed=args.seed, knn_k=args.knn, k_range=k_range)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _read_frames(path):
    try:
        with open(path) as fh:
            values = [int(line) for line in fh if line.strip()]
        return PartitionSpec(tuple(values))
    except (OSError, ValueError) as exc:
        raise DataError(f"{path}: bad frame timestamp file ({exc})") from None


def _partitions(args, cfg):
    try:
        stream = read_event_stream(args.input)
    except (OSError, EventFormatError) as exc:
        raise DataError(str(exc)) from None
    if args.frames:
        spec = _read_frames(args.frames)
    else:
        spec = PartitionSpec.regular(cfg.frame_interval, int(stream.t.max(initial=0)))
    parts = partition(stream, spec)
    if parts.dropped:
        log.warning("%d events after the last frame timestamp were dropped", parts.dropped)
    return stream, parts


def cmd_detect(args):
    cfg = _config(args)
    stream, parts = _partitions(args, cfg)
    os.makedirs(args.out, exist_ok=True)
    for part in parts:
        rep = detect_partition(part, cfg)
        stem = os.path.join(args.out, f"partition_{part.index:04d}")
        _write_atomic(stem + ".json", rep.to_json())
        if args.render:
            _write_atomic(stem + ".ppm", ppm_bytes(render_report(rep, stream.width, stream.height)))
        log.info("partition %d: k=%s, %d detections", part.index, rep.chosen_k,
                 len(rep.detections))
    return 0


def cmd_sweep(args):
    cfg = _config(args)
    _, parts = _partitions(args, cfg)
    os.makedirs(args.out, exist_ok=True)
    for part in parts:
        rep = detect_partition(part, cfg)
        lines = ["k,mean_silhouette"] + [f"{k},{m:.12g}" for k, m in rep.candidates]
        _write_atomic(os.path.join(args.out, f"sweep_{part.index:04d}.csv"), "\n".join(lines) + "\n")
    return 0


def _load_detections(directory):
    dets = {}
    files = sorted(glob.glob(os.path.join(directory, "partition_*.json")))
    if not files:
        raise DataError(f"{directory}: no partition_*.json detection reports")
    for path in files:
        try:
            with open(path) as fh:
                doc = json.load(fh)
            dets[int(doc["partition"])] = [d["box"] for d in doc["detections"]]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise DataError(f"{path}: malformed detection report ({exc})") from None
    return dets


def cmd_eval(args):
    if not 0 <= args.iou_threshold <= 1:
        raise ConfigError("--iou-threshold must be in [0, 1]")
    dets = _load_detections(args.detections)
    try:
        truth = load_truth(args.truth)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None
    try:
        report = match_and_score(dets, truth, args.iou_threshold)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_atomic(os.path.join(args.out, "eval.json"),
                      json.dumps(report.to_dict(), indent=2) + "\n")
    print(report.summary_row())
    return 0


def cmd_synth(args):
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; have {sorted(PRESETS)}")
        script = PRESETS[args.preset](args.seed or 0)
    elif args.script:
        try:
            script = SceneScript.load(args.script)
        except (OSError, json.JSONDecodeError, ScriptError, TypeError) as exc:
            raise ConfigError(f"{args.script}: {exc}") from None
    else:
        raise ConfigError("give a scene script path or --preset")
    try:
        scene = generate(script, args.seed or 0)
    except ScriptError as exc:
        raise ConfigError(str(exc)) from None
    os.makedirs(args.out, exist_ok=True)
    ext = "csv" if args.format == "csv" else "evb"
    write_event_stream(scene.stream, os.path.join(args.out, f"events.{ext}"), args.format)
    _write_atomic(os.path.join(args.out, "truth.json"), truth_to_json(scene.truth) + "\n")
    _write_atomic(os.path.join(args.out, "frames.txt"),
                  "".join(f"{t}\n" for t in scene.partition_spec.frame_timestamps))
    _write_atomic(os.path.join(args.out, "script.json"), script.to_json() + "\n")
    log.info("wrote %d events, %d partitions", len(scene.stream), len(scene.truth))
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    p = argparse.ArgumentParser(prog="evmod", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def pipeline_args(sp):
        sp.add_argument("input", help="event file (csv or binary)")
        sp.add_argument("--config", help="pipeline config JSON")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--k-range", help="cluster-count sweep, e.g. 2..10")
        sp.add_argument("--knn", type=int, help="neighbours per event in the k-NN graph")
        sp.add_argument("--frames", help="frame timestamp file, one microsecond value per line")
        sp.add_argument("--out", required=True)

    d = sub.add_parser("detect", parents=[common], help="detect moving objects per partition")
    pipeline_args(d)
    d.add_argument("--render", action="store_true", help="also write PPM renders")
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("sweep", parents=[common], help="write k vs mean silhouette per partition")
    pipeline_args(s)
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("eval", parents=[common], help="score detection reports against ground truth")
    e.add_argument("detections", help="directory of partition_*.json reports")
    e.add_argument("truth", help="ground-truth JSON")
    e.add_argument("--iou-threshold", type=float, default=DEFAULT_IOU_THRESHOLD)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    y = sub.add_parser("synth", parents=[common], help="generate a synthetic scene")
    y.add_argument("script", nargs="?", help="scene script JSON")
    y.add_argument("--preset", help=f"one of {', '.join(sorted(PRESETS))}")
    y.add_argument("--seed", type=int)
    y.add_argument("--format", choices=("csv", "binary"), default="csv")
    y.add_argument("--out", required=True)
    y.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DataError, EventFormatError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
