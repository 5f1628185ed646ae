"""Axis-aligned box geometry: IoU, generalized IoU and coordinate conversions.

Boxes are stored in pixel corner form ``(x1, y1, x2, y2)`` throughout the
dataset pipeline; the matching/loss math works on normalized center form
``(cx, cy, w, h)``.  ``center_to_corner`` / ``corner_to_center`` are the only
place the transform lives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box with strictly positive extent."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for v in (self.x1, self.y1, self.x2, self.y2):
            if not math.isfinite(v):
                raise ValueError(f"box coordinates must be finite, got {self}")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"box must satisfy x1 < x2 and y1 < y2, got {self}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def center(self) -> tuple[float, float]:
        return (self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]

    @classmethod
    def from_list(cls, values) -> "BBox":
        if len(values) != 4:
            raise ValueError(f"box needs 4 coordinates, got {len(values)}")
        return cls(*(float(v) for v in values))


def center_distance(a: BBox, b: BBox) -> float:
    """Euclidean distance between box centers."""
    (ax, ay), (bx, by) = a.center(), b.center()
    return math.hypot(ax - bx, ay - by)


def center_to_corner(boxes: np.ndarray) -> np.ndarray:
    """(..., 4) ``cx, cy, w, h`` -> ``x1, y1, x2, y2``. Owns the transform."""
    boxes = np.asarray(boxes, dtype=float)
    cx, cy, w, h = boxes[..., 0], boxes[..., 1], boxes[..., 2], boxes[..., 3]
    return np.stack([cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2], axis=-1)


def corner_to_center(boxes: np.ndarray) -> np.ndarray:
    """(..., 4) ``x1, y1, x2, y2`` -> ``cx, cy, w, h``. Inverse of center_to_corner."""
    boxes = np.asarray(boxes, dtype=float)
    x1, y1, x2, y2 = boxes[..., 0], boxes[..., 1], boxes[..., 2], boxes[..., 3]
    return np.stack([(x1 + x2) / 2, (y1 + y2) / 2, x2 - x1, y2 - y1], axis=-1)


def iou_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise IoU of corner-form boxes; broadcasts over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_positive_area(a)
    _check_positive_area(b)
    ix1 = np.maximum(a[..., 0], b[..., 0])
    iy1 = np.maximum(a[..., 1], b[..., 1])
    ix2 = np.minimum(a[..., 2], b[..., 2])
    iy2 = np.minimum(a[..., 3], b[..., 3])
    inter = np.clip(ix2 - ix1, 0.0, None) * np.clip(iy2 - iy1, 0.0, None)
    area_a = (a[..., 2] - a[..., 0]) * (a[..., 3] - a[..., 1])
    area_b = (b[..., 2] - b[..., 0]) * (b[..., 3] - b[..., 1])
    union = area_a + area_b - inter
    return inter / union


def giou_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise generalized IoU: IoU minus the empty fraction of the hull.

    Equals IoU for touching/overlapping hull-filling pairs, 1.0 for identical
    boxes, and approaches -1 for far-apart boxes; always in (-1, 1].
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_positive_area(a)
    _check_positive_area(b)
    ix1 = np.maximum(a[..., 0], b[..., 0])
    iy1 = np.maximum(a[..., 1], b[..., 1])
    ix2 = np.minimum(a[..., 2], b[..., 2])
    iy2 = np.minimum(a[..., 3], b[..., 3])
    inter = np.clip(ix2 - ix1, 0.0, None) * np.clip(iy2 - iy1, 0.0, None)
    area_a = (a[..., 2] - a[..., 0]) * (a[..., 3] - a[..., 1])
    area_b = (b[..., 2] - b[..., 0]) * (b[..., 3] - b[..., 1])
    union = area_a + area_b - inter

    hx1 = np.minimum(a[..., 0], b[..., 0])
    hy1 = np.minimum(a[..., 1], b[..., 1])
    hx2 = np.maximum(a[..., 2], b[..., 2])
    hy2 = np.maximum(a[..., 3], b[..., 3])
    hull = (hx2 - hx1) * (hy2 - hy1)
    return inter / union - (hull - union) / hull


def _check_positive_area(boxes: np.ndarray) -> None:
    if boxes.shape[-1] != 4:
        raise ValueError(f"expected (..., 4) box array, got shape {boxes.shape}")
    if not np.all(np.isfinite(boxes)):
        raise ValueError("box coordinates must be finite")
    w = boxes[..., 2] - boxes[..., 0]
    h = boxes[..., 3] - boxes[..., 1]
    if np.any(w <= 0) or np.any(h <= 0):
        raise ValueError("degenerate box: zero or negative area")


def iou(a: BBox, b: BBox) -> float:
    """IoU of two boxes."""
    return float(iou_array(np.array(a.as_list()), np.array(b.as_list())))


def giou(a: BBox, b: BBox) -> float:
    """Generalized IoU of two boxes, in (-1, 1]."""
    return float(giou_array(np.array(a.as_list()), np.array(b.as_list())))
