"""Submission quality metrics: box matching, mIoU, recall and size buckets.

Worker boxes are matched one-to-one to ground-truth boxes by an optimal
linear assignment maximizing total IoU; pairs with zero IoU are never
matched. mIoU averages over ground-truth boxes only, with every unmatched
ground-truth box contributing 0 — false positives are reported but do not
enter the mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .dataset import AnnotationSet, Scene
from .geometry import BoundingBox, iou


@dataclass(frozen=True)
class MatchResult:
    #: (gt_index, worker_index, iou) triples; every matched pair has iou > 0
    pairs: tuple[tuple[int, int, float], ...]
    unmatched_gt: tuple[int, ...]  # false negatives
    unmatched_worker: tuple[int, ...]  # false positives

    @property
    def total_iou(self) -> float:
        return sum(p[2] for p in self.pairs)


@dataclass(frozen=True)
class ScoreReport:
    match: MatchResult
    miou: float  # percent in [0, 100]
    per_gt_iou: tuple[float, ...]  # aligned to gt_boxes; 0.0 for false negatives
    fn_count: int
    fp_count: int


def match_boxes(gt: list[BoundingBox], worker: list[BoundingBox]) -> MatchResult:
    """Optimal one-to-one assignment of worker boxes to ground truth.

    Maximizes the summed IoU over all assignments (Hungarian-style); either
    list may be empty. Zero-IoU pairs are dropped from the result, which
    cannot change the optimal total.
    """
    if not gt or not worker:
        return MatchResult(
            pairs=(),
            unmatched_gt=tuple(range(len(gt))),
            unmatched_worker=tuple(range(len(worker))),
        )
    matrix = np.array([[iou(g, w) for w in worker] for g in gt])
    rows, cols = linear_sum_assignment(matrix, maximize=True)
    pairs = tuple(
        (int(r), int(c), float(matrix[r, c])) for r, c in zip(rows, cols) if matrix[r, c] > 0.0
    )
    matched_gt = {p[0] for p in pairs}
    matched_worker = {p[1] for p in pairs}
    return MatchResult(
        pairs=pairs,
        unmatched_gt=tuple(i for i in range(len(gt)) if i not in matched_gt),
        unmatched_worker=tuple(j for j in range(len(worker)) if j not in matched_worker),
    )


def score(scene: Scene, ann: AnnotationSet) -> ScoreReport:
    """Score one submission against its scene's ground truth."""
    if ann.scene_id != scene.scene_id:
        raise ValueError(
            f"annotation for scene {ann.scene_id!r} scored against scene {scene.scene_id!r}"
        )
    match = match_boxes(list(scene.gt_boxes), list(ann.boxes))
    per_gt = [0.0] * len(scene.gt_boxes)
    for gt_idx, _, value in match.pairs:
        per_gt[gt_idx] = value
    miou = 100.0 * sum(per_gt) / len(per_gt)
    return ScoreReport(
        match=match,
        miou=miou,
        per_gt_iou=tuple(per_gt),
        fn_count=len(match.unmatched_gt),
        fp_count=len(match.unmatched_worker),
    )


def recall_at(scene: Scene, ann: AnnotationSet, tau: float = 0.5) -> float:
    """Fraction of ground-truth boxes matched with IoU strictly above tau."""
    if not (0.0 < tau < 1.0):
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    report = score(scene, ann)
    hits = sum(1 for v in report.per_gt_iou if v > tau)
    return hits / len(report.per_gt_iou)


@dataclass(frozen=True)
class SizeBucket:
    lo: float  # inclusive lower area edge (0 for the first bucket)
    hi: float  # exclusive upper area edge (inf for the last bucket)
    count: int
    mean_iou: float | None  # percent; None for an empty bucket, never fabricated


def size_buckets(
    reports: list[tuple[Scene, ScoreReport]], edges: list[float]
) -> list[SizeBucket]:
    """Mean per-box IoU bucketed by ground-truth box pixel area.

    ``edges`` must be strictly increasing; k edges define k+1 buckets.
    """
    if any(b >= a for a, b in zip(edges[1:], edges)):
        raise ValueError("edges must be strictly increasing")
    bounds = [0.0, *edges, float("inf")]
    sums = [0.0] * (len(edges) + 1)
    counts = [0] * (len(edges) + 1)
    for scene, report in reports:
        for gt_box, value in zip(scene.gt_boxes, report.per_gt_iou):
            idx = int(np.searchsorted(edges, gt_box.area, side="right"))
            sums[idx] += value
            counts[idx] += 1
    return [
        SizeBucket(
            lo=bounds[i],
            hi=bounds[i + 1],
            count=counts[i],
            mean_iou=(100.0 * sums[i] / counts[i]) if counts[i] else None,
        )
        for i in range(len(counts))
    ]
