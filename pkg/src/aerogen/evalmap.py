"""Detection scoring: IoU, per-class average precision, mAP at IoU 0.5.

Matching is the standard deterministic greedy pass: detections sorted by
descending confidence (ties broken by frame then box), each matched to the
unmatched ground-truth box of its frame and class with the highest IoU at
or above the threshold.  AP integrates the all-point precision envelope;
mAP averages classes that have at least one ground-truth box.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from . import dataset_io
from .errors import ConfigError, DegenerateBoxError

IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, half-open: x_min <= x < x_max."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise DegenerateBoxError(
                f"degenerate box ({self.x_min}, {self.y_min}, "
                f"{self.x_max}, {self.y_max})")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def astuple(self) -> tuple:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


@dataclass(frozen=True)
class GroundTruth:
    frame_id: int
    class_index: int
    box: Box


@dataclass(frozen=True)
class Detection:
    frame_id: int
    class_index: int
    box: Box
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ConfigError(
                f"confidence {self.confidence} outside [0, 1]")


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def _average_precision(is_tp: np.ndarray, n_gt: int) -> float:
    """All-point interpolated AP from an ordered TP/FP sequence."""
    if n_gt == 0:
        raise ConfigError("average precision undefined without ground truth")
    if is_tp.size == 0:
        return 0.0
    tp_cum = np.cumsum(is_tp)
    k = np.arange(1, is_tp.size + 1)
    precision = tp_cum / k
    recall = tp_cum / n_gt
    # precision envelope: best precision achievable at >= this recall
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(((recall - prev_recall) * envelope).sum())


def _match_class(dets: list, gts: list, threshold: float) -> np.ndarray:
    """TP flags for one class's detections, already sorted."""
    by_frame = {}
    for gi, gt in enumerate(gts):
        by_frame.setdefault(gt.frame_id, []).append(gi)
    taken = np.zeros(len(gts), dtype=bool)
    flags = np.zeros(len(dets), dtype=bool)
    for di, det in enumerate(dets):
        best_iou = 0.0
        best_gi = -1
        for gi in by_frame.get(det.frame_id, ()):
            if taken[gi]:
                continue
            v = iou(det.box, gts[gi].box)
            if v >= threshold and v > best_iou:
                best_iou = v
                best_gi = gi
        if best_gi >= 0:
            taken[best_gi] = True
            flags[di] = True
    return flags


@dataclass
class EvalResult:
    map50: float
    per_class: dict      # class_index -> AP
    gt_counts: dict      # class_index -> number of ground-truth boxes


def _det_sort_key(d: Detection):
    return (-d.confidence, d.frame_id, d.box.astuple())


def evaluate(detections, ground_truths,
             threshold: float = IOU_THRESHOLD) -> EvalResult:
    """mAP over all classes with at least one ground-truth box."""
    if not 0.0 < threshold <= 1.0:
        raise ConfigError(f"IoU threshold {threshold} outside (0, 1]")
    gts_by_class = {}
    for gt in ground_truths:
        gts_by_class.setdefault(gt.class_index, []).append(gt)
    if not gts_by_class:
        raise ConfigError("no ground-truth boxes to evaluate against")
    dets_by_class = {}
    for det in detections:
        dets_by_class.setdefault(det.class_index, []).append(det)
    per_class = {}
    for ci in sorted(gts_by_class):
        dets = sorted(dets_by_class.get(ci, []), key=_det_sort_key)
        flags = _match_class(dets, gts_by_class[ci], threshold)
        per_class[ci] = _average_precision(flags, len(gts_by_class[ci]))
    mean = float(np.mean(list(per_class.values())))
    return EvalResult(
        map50=mean,
        per_class=per_class,
        gt_counts={ci: len(v) for ci, v in gts_by_class.items()},
    )


def load_ground_truth(dataset_root: str, frame_ids=None) -> list:
    """Ground-truth boxes from a dataset's label files, in output pixels."""
    manifest = dataset_io.read_manifest(dataset_root)
    width, height = manifest["image_size"]
    if frame_ids is None:
        frame_ids = range(manifest["frame_count"])
    out = []
    for i in frame_ids:
        for ci, cx, cy, bw, bh in dataset_io.parse_label_file(
                dataset_io.label_path(dataset_root, i)):
            out.append(GroundTruth(
                frame_id=i, class_index=ci,
                box=Box(
                    x_min=(cx - bw / 2) * width,
                    y_min=(cy - bh / 2) * height,
                    x_max=(cx + bw / 2) * width,
                    y_max=(cy + bh / 2) * height,
                )))
    return out


def load_detections(path: str) -> list:
    """Detections from a JSON array of objects with keys
    frame_id, class_index, bbox [x_min, y_min, x_max, y_max], confidence."""
    if not os.path.exists(path):
        raise ConfigError(f"detections file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ConfigError("detections file must hold a JSON array")
    out = []
    for i, rec in enumerate(raw):
        try:
            box = Box(*[float(v) for v in rec["bbox"]])
            out.append(Detection(
                frame_id=int(rec["frame_id"]),
                class_index=int(rec["class_index"]),
                box=box,
                confidence=float(rec["confidence"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"detections[{i}] malformed: {exc}") from exc
    return out
