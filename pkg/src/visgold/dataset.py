"""Scenes, corpora and annotation sets, with file I/O and synthetic generation.

A corpus file is line-delimited JSON: one header record
``{"coords": "absolute"|"normalized"}`` followed by scene records
``{"scene_id": str, "width": int, "height": int, "boxes": [[x,y,w,h], ...]}``.
Normalized boxes are fractions of the scene extent and are scaled on load.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .geometry import BoundingBox, clamp_box, iou

DEFAULT_WIDTH = 1024
DEFAULT_HEIGHT = 768

# 10 scenes per object count 1..14 (140 scenes total).
DEFAULT_COUNT_HISTOGRAM = {n: 10 for n in range(1, 15)}


class CorpusError(ValueError):
    """Raised for malformed corpus files or unsatisfiable generation specs."""


@dataclass(frozen=True)
class Scene:
    """One annotation item. The object count is the scene's effort level."""

    scene_id: str
    width: int
    height: int
    gt_boxes: tuple[BoundingBox, ...]

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"scene {self.scene_id!r}: non-positive extent")
        if len(self.gt_boxes) < 1:
            raise ValueError(f"scene {self.scene_id!r}: needs at least one ground-truth box")
        seen = set()
        for b in self.gt_boxes:
            key = (b.x, b.y, b.w, b.h)
            if key in seen:
                raise ValueError(f"scene {self.scene_id!r}: duplicated ground-truth box {key}")
            seen.add(key)

    @property
    def count(self) -> int:
        return len(self.gt_boxes)


@dataclass(frozen=True)
class Corpus:
    scenes: tuple[Scene, ...]

    def __post_init__(self) -> None:
        ids = [s.scene_id for s in self.scenes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate scene_id in corpus")

    @property
    def count_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for s in self.scenes:
            hist[s.count] = hist.get(s.count, 0) + 1
        return hist

    def by_id(self, scene_id: str) -> Scene:
        for s in self.scenes:
            if s.scene_id == scene_id:
                return s
        raise KeyError(scene_id)


@dataclass(frozen=True)
class AnnotationSet:
    """One worker submission for one scene. ``boxes`` may be empty."""

    scene_id: str
    boxes: tuple[BoundingBox, ...]
    worker_id: str
    elapsed: float

    def __post_init__(self) -> None:
        if self.elapsed < 0:
            raise ValueError("elapsed must be >= 0")


@dataclass
class LoadReport:
    """Soft-issue metadata from a corpus load."""

    clamped_boxes: int = 0
    rejected: list[tuple[str, str]] = field(default_factory=list)  # (scene_id, reason)


def load_corpus(path: str | Path) -> tuple[Corpus, LoadReport]:
    """Parse a corpus file, validating invariants.

    Boxes outside the scene extent are clamped (counted in the report);
    records with non-positive box extents are rejected and listed. Hard
    format errors raise CorpusError naming the offending line.
    """
    path = Path(path)
    report = LoadReport()
    scenes: list[Scene] = []
    coords: str | None = None
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON record: {exc}") from exc
            if coords is None:
                if not isinstance(rec, dict) or rec.get("coords") not in ("absolute", "normalized"):
                    raise CorpusError(
                        f"{path}:{lineno}: first record must be a header "
                        '{"coords": "absolute"|"normalized"}'
                    )
                coords = rec["coords"]
                continue
            scene = _parse_scene_record(rec, coords, path, lineno, report)
            if scene is not None:
                scenes.append(scene)
    if coords is None:
        raise CorpusError(f"{path}: no scenes (missing header)")
    if not scenes:
        raise CorpusError(f"{path}: no scenes")
    return Corpus(tuple(scenes)), report


def _parse_scene_record(
    rec: dict, coords: str, path: Path, lineno: int, report: LoadReport
) -> Scene | None:
    try:
        scene_id = str(rec["scene_id"])
        width = int(rec["width"])
        height = int(rec["height"])
        raw_boxes = rec["boxes"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError(f"{path}:{lineno}: bad scene record: {exc}") from exc
    boxes: list[BoundingBox] = []
    for vals in raw_boxes:
        if len(vals) != 4 or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in vals):
            raise CorpusError(f"{path}:{lineno}: bad box entry {vals!r} in scene {scene_id!r}")
        x, y, w, h = (float(v) for v in vals)
        if coords == "normalized":
            x, y, w, h = x * width, y * height, w * width, h * height
        if w <= 0 or h <= 0:
            report.rejected.append((scene_id, f"box with non-positive extent w={w}, h={h}"))
            return None
        box = BoundingBox(x, y, w, h)
        # tolerate float dust at the borders; only true overhangs are clamped
        eps = 1e-6 * max(width, height)
        if x < -eps or y < -eps or box.right > width + eps or box.bottom > height + eps:
            box = clamp_box(box, width, height)
            report.clamped_boxes += 1
        boxes.append(box)
    try:
        return Scene(scene_id, width, height, tuple(boxes))
    except ValueError as exc:
        report.rejected.append((scene_id, str(exc)))
        return None


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus in the absolute-coordinate line-delimited format."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(json.dumps({"coords": "absolute"}) + "\n")
        for s in corpus.scenes:
            rec = {
                "scene_id": s.scene_id,
                "width": s.width,
                "height": s.height,
                "boxes": [b.as_list() for b in s.gt_boxes],
            }
            fh.write(json.dumps(rec) + "\n")


def load_openimages_csv(path: str | Path, width: int = DEFAULT_WIDTH, height: int = DEFAULT_HEIGHT) -> Corpus:
    """Load boxes from a CSV with ImageID,XMin,XMax,YMin,YMax columns.

    Coordinates are normalized fractions; pixels are never read, so every
    image is assigned the given nominal extent.
    """
    by_image: dict[str, list[BoundingBox]] = {}
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            xmin, xmax = float(row["XMin"]), float(row["XMax"])
            ymin, ymax = float(row["YMin"]), float(row["YMax"])
            box = BoundingBox(xmin * width, ymin * height, (xmax - xmin) * width, (ymax - ymin) * height)
            by_image.setdefault(row["ImageID"], []).append(box)
    scenes = tuple(
        Scene(image_id, width, height, tuple(boxes)) for image_id, boxes in sorted(by_image.items())
    )
    if not scenes:
        raise CorpusError(f"{path}: no scenes")
    return Corpus(scenes)


def load_annotations(path: str | Path) -> list[AnnotationSet]:
    """Parse a predictions file: line-delimited JSON submissions."""
    path = Path(path)
    out: list[AnnotationSet] = []
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
                boxes = tuple(BoundingBox(*map(float, vals)) for vals in rec["boxes"])
                out.append(
                    AnnotationSet(
                        scene_id=str(rec["scene_id"]),
                        boxes=boxes,
                        worker_id=str(rec["worker_id"]),
                        elapsed=float(rec.get("elapsed", 0.0)),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad annotation record: {exc}") from exc
    return out


def save_annotations(annotations: Iterable[AnnotationSet], path: str | Path) -> None:
    with Path(path).open("w") as fh:
        for ann in annotations:
            rec = {
                "scene_id": ann.scene_id,
                "worker_id": ann.worker_id,
                "boxes": [b.as_list() for b in ann.boxes],
                "elapsed": ann.elapsed,
            }
            fh.write(json.dumps(rec) + "\n")


@dataclass(frozen=True)
class BoxSizeModel:
    """Sampling model for synthetic ground-truth boxes.

    Areas are log-uniform between the min/max fractions of the scene area;
    aspect ratio (w/h) is log-uniform in [min_aspect, max_aspect]. Pairwise
    overlap among a scene's boxes is capped at ``overlap_cap`` IoU by
    rejection sampling.
    """

    min_area_frac: float = 0.0015
    max_area_frac: float = 0.035
    min_aspect: float = 0.6
    max_aspect: float = 1.4
    overlap_cap: float = 0.3
    max_scene_attempts: int = 50
    max_box_attempts: int = 200

    def __post_init__(self) -> None:
        if not (0 < self.min_area_frac <= self.max_area_frac <= 1.0):
            raise ValueError("area fractions must satisfy 0 < min <= max <= 1")
        if not (0 < self.min_aspect <= self.max_aspect):
            raise ValueError("aspect bounds must be positive and ordered")
        if not (0.0 <= self.overlap_cap <= 1.0):
            raise ValueError("overlap_cap must be in [0, 1]")


def generate_corpus(
    seed: int,
    spec: dict[int, int] | None = None,
    size_model: BoxSizeModel | None = None,
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
) -> Corpus:
    """Generate a synthetic corpus; a pure function of (seed, spec, size_model).

    ``spec`` maps object count -> number of scenes with that count. The
    default mirrors the standard corpus shape: 10 scenes per count 1..14.
    Raises CorpusError if a scene cannot be packed within the configured
    retry budget.
    """
    spec = dict(DEFAULT_COUNT_HISTOGRAM) if spec is None else spec
    model = size_model or BoxSizeModel()
    if any(v < 0 for v in spec.values()):
        raise ValueError("histogram values must be >= 0")
    if model.max_area_frac * min(width, height) <= 0:
        raise ValueError("size model bounds must fit the scene extent")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5CE7E]))
    scenes: list[Scene] = []
    for count in sorted(spec):
        for k in range(spec[count]):
            scene_id = f"scene-{count:02d}-{k:02d}"
            boxes = _pack_scene(rng, count, width, height, model, scene_id)
            scenes.append(Scene(scene_id, width, height, tuple(boxes)))
    if not scenes:
        raise CorpusError("generation spec produced no scenes")
    return Corpus(tuple(scenes))


def _sample_box(rng: np.random.Generator, width: int, height: int, model: BoxSizeModel) -> BoundingBox | None:
    area = math.exp(rng.uniform(math.log(model.min_area_frac), math.log(model.max_area_frac)))
    area *= width * height
    aspect = math.exp(rng.uniform(math.log(model.min_aspect), math.log(model.max_aspect)))
    w = math.sqrt(area * aspect)
    h = math.sqrt(area / aspect)
    if w > width or h > height:
        return None
    x = rng.uniform(0.0, width - w)
    y = rng.uniform(0.0, height - h)
    return BoundingBox(x, y, w, h)


def _pack_scene(
    rng: np.random.Generator,
    count: int,
    width: int,
    height: int,
    model: BoxSizeModel,
    scene_id: str,
) -> list[BoundingBox]:
    for _ in range(model.max_scene_attempts):
        boxes: list[BoundingBox] = []
        ok = True
        for _ in range(count):
            placed = False
            for _ in range(model.max_box_attempts):
                cand = _sample_box(rng, width, height, model)
                if cand is None:
                    continue
                if all(iou(cand, b) <= model.overlap_cap for b in boxes):
                    boxes.append(cand)
                    placed = True
                    break
            if not placed:
                ok = False
                break
        if ok:
            return boxes
    raise CorpusError(
        f"could not pack scene {scene_id!r}: {count} boxes with overlap cap "
        f"{model.overlap_cap} and area fractions "
        f"[{model.min_area_frac}, {model.max_area_frac}] on {width}x{height}"
    )
