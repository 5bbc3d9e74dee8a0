"""Detection post-processing: threshold filter, class-aware NMS, fusion."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .model import Candidate, iou


@dataclass(frozen=True)
class PipelineOptions:
    """Post-processing knobs shared by every run mode."""

    nms_iou: float = 0.5
    fusion: bool = False
    roi_mode: str = "overlap"

    def __post_init__(self) -> None:
        if not 0.0 < self.nms_iou <= 1.0:
            raise ValueError(f"nms_iou must be in (0, 1], got {self.nms_iou!r}")
        if self.roi_mode not in ("overlap", "center"):
            raise ValueError(f"roi_mode must be 'overlap' or 'center', got {self.roi_mode!r}")


def filter_by_threshold(candidates: Sequence[Candidate], tau_c: float) -> list[Candidate]:
    """Keep candidates scoring at least tau_c, preserving order."""
    if not 0.0 <= tau_c <= 1.0:
        raise ValueError(f"tau_c must be in [0, 1], got {tau_c!r}")
    return [c for c in candidates if c.score >= tau_c]


def nms(candidates: Sequence[Candidate], iou_threshold: float) -> list[Candidate]:
    """Per-class greedy non-maximum suppression.

    Candidates are visited in descending score order (ties broken by input
    index, so results are stable across platforms); a box survives iff its
    IoU with every already-kept box of the same class stays below the
    threshold. Scores are not modified. Idempotent.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold!r}")
    order = sorted(range(len(candidates)), key=lambda i: (-candidates[i].score, i))
    kept: list[Candidate] = []
    for i in order:
        c = candidates[i]
        if all(iou(c.bbox, k.bbox) < iou_threshold for k in kept if k.class_id == c.class_id):
            kept.append(c)
    return kept


def fuse_cloud_boxes(
    edge_dets: Sequence[Candidate],
    cloud_boxes: Sequence[Candidate],
    iou_threshold: float,
) -> list[Candidate]:
    """Merge edge detections with cloud-reported boxes through NMS.

    The union is suppressed as one list; edge boxes come first so they win
    score ties deterministically.
    """
    return nms(list(edge_dets) + list(cloud_boxes), iou_threshold)
