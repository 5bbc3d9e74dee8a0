"""Detection and semantic evaluation metrics, plus run-level aggregation.

Average precision uses greedy per-frame, per-class matching at IoU 0.5
(each ground truth matched at most once, detections visited in descending
score order with input-index tie-breaks) and the all-point interpolated
area under the precision-recall curve. The same matching rule backs the
thresholded recall/precision/F1 counts.

Run aggregation is an associative, commutative merge: per-frame results are
canonicalized by frame_id before any reduction, so partials can be combined
in any order and still produce an identical report.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import BBox, Candidate, GtBox, Route, SceneTruth, iou
from .router import FrameResult


class MetricsError(ValueError):
    """Raised when a metric is undefined for the given inputs."""


def _match_class(
    dets: list[tuple[str, Candidate, int]],
    gt_boxes: Mapping[str, list[BBox]],
    iou_threshold: float,
) -> list[bool]:
    """Greedy matching for one class: True per detection iff it is a TP.

    dets must already be sorted by descending score (ties by input index).
    Each ground-truth box is consumed by at most one detection; a detection
    matches the unconsumed box of its frame with the highest IoU, provided
    that IoU reaches the threshold.
    """
    used: dict[str, list[bool]] = {fid: [False] * len(boxes) for fid, boxes in gt_boxes.items()}
    flags: list[bool] = []
    for fid, cand, _ in dets:
        boxes = gt_boxes.get(fid, [])
        best, best_iou = -1, 0.0
        for j, box in enumerate(boxes):
            if used[fid][j]:
                continue
            v = iou(cand.bbox, box)
            if v > best_iou:
                best, best_iou = j, v
        if best >= 0 and best_iou >= iou_threshold:
            used[fid][best] = True
            flags.append(True)
        else:
            flags.append(False)
    return flags


def _by_class(
    detections: Sequence[tuple[str, Candidate]],
    gts: Sequence[tuple[str, BBox, int]],
) -> tuple[dict[int, list[tuple[str, Candidate, int]]], dict[int, dict[str, list[BBox]]]]:
    dets_by_class: dict[int, list[tuple[str, Candidate, int]]] = {}
    for idx, (fid, cand) in enumerate(detections):
        dets_by_class.setdefault(cand.class_id, []).append((fid, cand, idx))
    gt_by_class: dict[int, dict[str, list[BBox]]] = {}
    for fid, box, cid in gts:
        gt_by_class.setdefault(cid, {}).setdefault(fid, []).append(box)
    for dets in dets_by_class.values():
        dets.sort(key=lambda d: (-d[1].score, d[2]))
    return dets_by_class, gt_by_class


def _interpolated_ap(tp_flags: Sequence[bool], n_gt: int) -> float:
    """All-point interpolated area under the precision-recall curve."""
    if n_gt == 0:
        raise MetricsError("AP undefined without ground truth")
    if not tp_flags:
        return 0.0
    tp = np.cumsum(np.asarray(tp_flags, dtype=np.float64))
    fp = np.cumsum(1.0 - np.asarray(tp_flags, dtype=np.float64))
    recall = tp / n_gt
    precision = tp / (tp + fp)
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    changed = np.nonzero(mrec[1:] != mrec[:-1])[0] + 1
    return float(np.sum((mrec[changed] - mrec[changed - 1]) * mpre[changed]))


def ap50(
    detections: Sequence[tuple[str, Candidate]],
    gts: Sequence[tuple[str, BBox, int]],
    iou_threshold: float = 0.5,
) -> tuple[dict[int, float], float]:
    """Per-class average precision and their unweighted mean.

    Only classes with at least one ground-truth box enter the mean; a class
    with ground truth but no detections scores 0. Raises MetricsError when
    there is no ground truth at all (the metric is undefined, not zero).
    """
    if not gts:
        raise MetricsError("AP undefined: no ground truth provided")
    dets_by_class, gt_by_class = _by_class(detections, gts)
    per_class: dict[int, float] = {}
    for cid, gt_boxes in gt_by_class.items():
        n_gt = sum(len(b) for b in gt_boxes.values())
        flags = _match_class(dets_by_class.get(cid, []), gt_boxes, iou_threshold)
        per_class[cid] = _interpolated_ap(flags, n_gt)
    mean = sum(per_class.values()) / len(per_class)
    return per_class, mean


def recall_f1(
    detections: Sequence[tuple[str, Candidate]],
    gts: Sequence[tuple[str, BBox, int]],
    score_threshold: float,
    iou_threshold: float = 0.5,
) -> tuple[float, float, float]:
    """(recall, precision, f1) at a score threshold, same matching as ap50.

    Degenerate conventions, stated so F1 is total: precision is 0 when there
    are no detections, and F1 is 0 when precision and recall are both 0.
    """
    if not 0.0 <= score_threshold <= 1.0:
        raise ValueError(f"score_threshold must be in [0, 1], got {score_threshold!r}")
    if not gts:
        raise MetricsError("recall/F1 undefined: no ground truth provided")
    kept = [(fid, c) for fid, c in detections if c.score >= score_threshold]
    dets_by_class, gt_by_class = _by_class(kept, gts)
    tp = 0
    n_det = len(kept)
    n_gt = len(gts)
    for cid, dets in dets_by_class.items():
        flags = _match_class(dets, gt_by_class.get(cid, {}), iou_threshold)
        tp += sum(flags)
    recall = tp / n_gt
    precision = tp / n_det if n_det else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    return recall, precision, f1


def brightness_mse(pairs: Sequence[tuple[float, float]]) -> float:
    """Mean squared error between predicted and true brightness."""
    if not pairs:
        raise MetricsError("MSE undefined for empty input")
    return sum((p - g) ** 2 for p, g in pairs) / len(pairs)


def count_mae(pairs: Sequence[tuple[float, float]]) -> float:
    """Mean absolute error between predicted and true person counts."""
    if not pairs:
        raise MetricsError("MAE undefined for empty input")
    return sum(abs(p - g) for p, g in pairs) / len(pairs)


def scene_f1(pairs: Sequence[tuple[Iterable[str], Iterable[str]]]) -> float:
    """Micro-F1 over scene-label instances pooled across frames."""
    if not pairs:
        raise MetricsError("scene F1 undefined for empty input")
    tp = fp = fn = 0
    for pred, gt in pairs:
        pred, gt = set(pred), set(gt)
        tp += len(pred & gt)
        fp += len(pred - gt)
        fn += len(gt - pred)
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 1.0


@dataclass(frozen=True)
class RunReport:
    """Aggregated accuracy and efficiency metrics for one scenario run.

    Semantic metrics cover only cloud-routed frames with compliant output;
    compliance_excluded counts the frames left out so nothing hides. Fields
    are None when their denominator is empty (e.g. no cloud frames).
    """

    frame_count: int
    failed_frames: int
    cloud_route_fraction: float
    compliance_rate: float | None
    compliance_excluded: int
    semantic_frames: int
    per_class_ap: dict[str, float]
    map50: float
    recall: float
    precision: float
    f1: float
    score_threshold: float | None
    brightness_mse: float | None
    count_mae: float | None
    scene_f1: float | None
    latency_mean_ms: float
    latency_median_ms: float
    latency_p95_ms: float
    fps: float
    total_compute_gflops: float
    compute_gflops_per_frame: float

    __hash__ = None  # type: ignore[assignment]


def aggregate_run(
    results: Sequence[FrameResult],
    gt_by_frame: Mapping[str, Sequence[GtBox]],
    scene_by_frame: Mapping[str, SceneTruth],
    class_table: Mapping[str, int],
    score_threshold: float | None = None,
    failed_frames: int = 0,
) -> RunReport:
    """Fold per-frame results into one report.

    Results are sorted by frame_id before any arithmetic, so the report is
    identical for any input order (merge associativity/commutativity).
    Detections are already at their operating point; score_threshold, when
    given, applies an extra filter for the recall/precision/F1 row and is
    echoed into the report.
    """
    if not results:
        raise MetricsError("cannot aggregate an empty run")
    ordered = sorted(results, key=lambda r: r.frame_id)

    evaluated = {r.frame_id for r in ordered}
    detections = [(r.frame_id, d) for r in ordered for d in r.detections]
    gts = [
        (fid, g.bbox, g.class_id)
        for fid in sorted(gt_by_frame)
        if fid in evaluated
        for g in gt_by_frame[fid]
    ]
    per_class_ids, map50 = ap50(detections, gts)
    id_to_name = {cid: name for name, cid in class_table.items()}
    per_class = {id_to_name.get(cid, str(cid)): ap for cid, ap in per_class_ids.items()}
    per_class = dict(sorted(per_class.items()))
    recall, precision, f1 = recall_f1(detections, gts, score_threshold if score_threshold is not None else 0.0)

    cloud = [r for r in ordered if r.route.route is Route.CLOUD_ENHANCED]
    compliant = [r for r in cloud if r.compliance_ok]
    rate = len(compliant) / len(cloud) if cloud else None
    semantic_pairs = [(r, scene_by_frame[r.frame_id]) for r in compliant if r.semantic is not None]
    b_mse = brightness_mse([(r.semantic.brightness, s.brightness_gt) for r, s in semantic_pairs]) if semantic_pairs else None
    c_mae = count_mae([(r.semantic.person_count, s.person_count_gt) for r, s in semantic_pairs]) if semantic_pairs else None
    s_f1 = scene_f1([(r.semantic.scene_labels, s.scene_labels_gt) for r, s in semantic_pairs]) if semantic_pairs else None

    latencies = np.asarray([r.latency_ms for r in ordered], dtype=np.float64)
    mean_latency = float(np.mean(latencies))
    total_gflops = float(sum(r.compute_gflops for r in ordered))
    n = len(ordered)
    return RunReport(
        frame_count=n,
        failed_frames=failed_frames,
        cloud_route_fraction=len(cloud) / n,
        compliance_rate=rate,
        compliance_excluded=len(cloud) - len(compliant),
        semantic_frames=len(semantic_pairs),
        per_class_ap=per_class,
        map50=map50,
        recall=recall,
        precision=precision,
        f1=f1,
        score_threshold=score_threshold,
        brightness_mse=b_mse,
        count_mae=c_mae,
        scene_f1=s_f1,
        latency_mean_ms=mean_latency,
        latency_median_ms=float(np.median(latencies)),
        latency_p95_ms=float(np.percentile(latencies, 95)),
        fps=1000.0 / mean_latency if mean_latency > 0 else 0.0,
        total_compute_gflops=total_gflops,
        compute_gflops_per_frame=total_gflops / n,
    )
