"""Non-gold task structures: decomposition into marked sub-tasks and
iterative improvement, plus reassembly of parts into whole-scene
annotations for scoring.

Sub-task markers are ordered left-to-right then top-to-bottom before
chunking so the partition is deterministic. Reassembly never deduplicates:
duplicated boxes become false positives under scoring, which keeps
workflow pathologies visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .dataset import AnnotationSet, Scene
from .geometry import BoundingBox

MAX_TARGETS_PER_SUBTASK = 3
MAX_NEW_BOXES_PER_ITERATION = 3


class MarkerSource(str, Enum):
    ORACLE = "oracle"
    MANUAL = "manual"


@dataclass(frozen=True)
class SubTask:
    scene_id: str
    markers: tuple[tuple[float, float], ...]
    source: MarkerSource

    def __post_init__(self) -> None:
        if not (1 <= len(self.markers) <= MAX_TARGETS_PER_SUBTASK):
            raise ValueError(f"subtask must carry 1..{MAX_TARGETS_PER_SUBTASK} markers")


def decompose(
    scene: Scene,
    variant: MarkerSource,
    marker_noise: float | None = None,
    miss_prob: float = 0.05,
    rng: np.random.Generator | None = None,
) -> list[SubTask]:
    """Split a scene into sub-tasks of at most three point markers.

    Oracle markers sit at ground-truth box centers. Manual markers simulate
    an upstream point-annotation pass: centers plus isotropic noise (sigma
    defaulting to 3% of the scene diagonal), each marker independently
    dropped with ``miss_prob``.
    """
    centers = [b.center for b in scene.gt_boxes]
    if variant is MarkerSource.MANUAL:
        rng = rng if rng is not None else np.random.default_rng()
        diag = math.hypot(scene.width, scene.height)
        sigma = 0.03 * diag if marker_noise is None else marker_noise
        kept: list[tuple[float, float]] = []
        for cx, cy in centers:
            if rng.random() < miss_prob:
                continue
            nx = min(max(cx + rng.normal(0.0, sigma), 0.0), scene.width)
            ny = min(max(cy + rng.normal(0.0, sigma), 0.0), scene.height)
            kept.append((nx, ny))
        centers = kept
    centers.sort(key=lambda p: (p[0], p[1]))
    return [
        SubTask(scene.scene_id, tuple(centers[i : i + MAX_TARGETS_PER_SUBTASK]), variant)
        for i in range(0, len(centers), MAX_TARGETS_PER_SUBTASK)
    ]


@dataclass(frozen=True)
class AddBoxes:
    boxes: tuple[BoundingBox, ...]
    contributor: str

    def __post_init__(self) -> None:
        if len(self.boxes) > MAX_NEW_BOXES_PER_ITERATION:
            raise ValueError(f"at most {MAX_NEW_BOXES_PER_ITERATION} new boxes per iteration")
        if not self.boxes:
            raise ValueError("AddBoxes needs at least one box")


@dataclass(frozen=True)
class Adjust:
    index: int
    new_box: BoundingBox
    contributor: str


@dataclass(frozen=True)
class Complete:
    contributor: str


Contribution = AddBoxes | Adjust | Complete


@dataclass(frozen=True)
class IterationState:
    scene_id: str
    boxes: tuple[tuple[BoundingBox, str], ...] = ()  # (box, contributor)
    completed: bool = False
    iteration_index: int = 0


def iterate(state: IterationState, contribution: Contribution) -> IterationState:
    """Apply one worker pass to the running annotation."""
    if state.completed:
        raise ValueError(f"scene {state.scene_id!r}: iteration already completed")
    nxt = replace(state, iteration_index=state.iteration_index + 1)
    if isinstance(contribution, AddBoxes):
        added = tuple((b, contribution.contributor) for b in contribution.boxes)
        return replace(nxt, boxes=state.boxes + added)
    if isinstance(contribution, Adjust):
        if not (0 <= contribution.index < len(state.boxes)):
            raise ValueError(f"adjust index {contribution.index} out of range")
        boxes = list(state.boxes)
        boxes[contribution.index] = (contribution.new_box, contribution.contributor)
        return replace(nxt, boxes=tuple(boxes))
    if isinstance(contribution, Complete):
        return replace(nxt, completed=True)
    raise TypeError(f"unknown contribution: {contribution!r}")


def reassemble(scene: Scene, parts: list[AnnotationSet | IterationState]) -> AnnotationSet:
    """Union the boxes of sub-task results or a terminal iteration run into
    one whole-scene annotation. Elapsed time is the sum over parts."""
    boxes: list[BoundingBox] = []
    contributors: list[str] = []
    elapsed = 0.0
    for part in parts:
        if part.scene_id != scene.scene_id:
            raise ValueError(
                f"part for scene {part.scene_id!r} cannot join scene {scene.scene_id!r}"
            )
        if isinstance(part, AnnotationSet):
            boxes.extend(part.boxes)
            contributors.append(part.worker_id)
            elapsed += part.elapsed
        else:
            boxes.extend(b for b, _ in part.boxes)
            contributors.extend(c for _, c in part.boxes)
    worker_id = "+".join(dict.fromkeys(contributors)) or "nobody"
    return AnnotationSet(scene.scene_id, tuple(boxes), worker_id, elapsed)
