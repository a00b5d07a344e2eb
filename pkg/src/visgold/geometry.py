"""Axis-aligned bounding boxes and intersection-over-union."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BoundingBox:
    """A box in pixel coordinates: (x, y) is the top-left corner."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"box field {name!r} must be finite, got {v!r}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box must have positive extent, got w={self.w}, h={self.h}")

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes, in [0, 1].

    Computed on continuous rectangle geometry. Returns 0.0 when the
    interiors are disjoint (shared edges have zero-area intersection).
    """
    if a == b:
        return 1.0
    ix = min(a.right, b.right) - max(a.x, b.x)
    iy = min(a.bottom, b.bottom) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    # float rounding on x+w can push inter a hair past union
    return min(1.0, inter / union)


def clamp_box(box: BoundingBox, width: float, height: float) -> BoundingBox:
    """Clamp a box into a [0, width] x [0, height] extent.

    Raises ValueError if nothing of the box remains inside the extent.
    """
    x0 = min(max(box.x, 0.0), width)
    y0 = min(max(box.y, 0.0), height)
    x1 = min(max(box.right, 0.0), width)
    y1 = min(max(box.bottom, 0.0), height)
    if x1 - x0 <= 0 or y1 - y0 <= 0:
        raise ValueError("box lies entirely outside the scene extent")
    return BoundingBox(x0, y0, x1 - x0, y1 - y0)
