"""Raster (binary PPM) rendering of clustered events and their boxes."""

import numpy as np

# fixed palette, indexed by cluster id modulo its length
PALETTE = np.array([
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200), (245, 130, 48),
    (145, 30, 180), (70, 240, 240), (240, 50, 230), (210, 245, 60), (250, 190, 190),
], dtype=np.uint8)
SUPPRESSED = np.array((110, 110, 110), dtype=np.uint8)


def render_report(report, width, height):
    """Image (height x width x 3) of a DetectionReport's sampled events and boxes."""
    img = np.zeros((height, width, 3), dtype=np.uint8)
    sampled = report.sampled
    if sampled is not None and report.labels is not None:
        labels = report.labels
        colors = np.where(labels[:, None] >= 0, PALETTE[labels % len(PALETTE)], SUPPRESSED)
        img[sampled.y, sampled.x] = colors
    for det in report.detections:
        c = PALETTE[det.cluster_id % len(PALETTE)]
        x0, y0, x1, y1 = det.box
        img[y0, x0:x1 + 1] = c
        img[y1, x0:x1 + 1] = c
        img[y0:y1 + 1, x0] = c
        img[y0:y1 + 1, x1] = c
    return img


def ppm_bytes(img) -> bytes:
    h, w = img.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def read_ppm(data: bytes):
    """Parse a binary PPM written by :func:`ppm_bytes`."""
    magic, dims, maxval, rest = data.split(b"\n", 3)
    if magic != b"P6" or maxval != b"255":
        raise ValueError("not an 8-bit binary PPM")
    w, h = (int(v) for v in dims.split())
    return np.frombuffer(rest, dtype=np.uint8).reshape(h, w, 3)
