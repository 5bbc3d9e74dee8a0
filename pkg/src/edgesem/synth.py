"""Deterministic synthetic traces with ground truth known by construction.

Frames come in four scenarios: normal (bright, confident candidates), dark
(low brightness, uniformly depressed scores), crowded (many overlapping
person boxes, depressed scores, high occlusion) and roi_weak (normal
brightness but depressed scores inside cloud-suggested regions). Candidate
boxes coincide with their ground-truth boxes at known scores, so metric
oracles can be checked exactly. A configured fraction of cloud texts is
deliberately malformed (deterministic rounding, deterministic selection).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .model import BBox, Candidate, FrameTrace, GtBox, SceneTruth

DEFAULT_CLASS_NAMES = ("person", "car", "bicycle")
DEFAULT_SCENE_VOCABULARY = ("dark", "daylight", "street", "indoor", "crowded")

_SCENARIO_LABELS = {
    "normal": ("daylight", "street"),
    "dark": ("dark", "street"),
    "crowded": ("crowded", "street"),
    "roi_weak": ("daylight", "indoor"),
}

# One representative per compliance failure kind; cycled deterministically
# over the frames selected to be malformed.
MALFORMED_TEXTS = (
    '{"brightness": 0.5, "occlusion"',
    "The scene is dark with several pedestrians near the curb.",
    '{"brightness": 0.4, "occlusion": 0.2, "scene_labels": ["dark"], "category_prior": {"person": 1.0}, "rois": []}',
    '{"brightness": 1.7, "occlusion": 0.2, "person_count": 2, "scene_labels": [], "category_prior": {"person": 1.0}, "rois": []}',
    '{"brightness": 0.4, "occlusion": 0.2, "person_count": "many", "scene_labels": [], "category_prior": {"person": 1.0}, "rois": []}',
    '{"brightness": 0.4, "occlusion": 0.2, "person_count": 2, "scene_labels": [], "category_prior": {"person": 2.3}, "rois": []}',
    '{"brightness": 0.4, "occlusion": 0.2, "person_count": 2, "scene_labels": [], "category_prior": {"martian": 1.0}, "rois": []}',
)


def _round_count(fraction: float, n: int) -> int:
    # Half-up so a rate of 0.1 over 100 frames is exactly 10.
    return int(fraction * n + 0.5)


@dataclass(frozen=True)
class SynthSpec:
    """Generator parameters. Same spec + seed always yields the same trace."""

    frames: int = 200
    class_names: tuple[str, ...] = DEFAULT_CLASS_NAMES
    scene_vocabulary: tuple[str, ...] = DEFAULT_SCENE_VOCABULARY
    dark_fraction: float = 0.25
    crowded_fraction: float = 0.25
    roi_weak_fraction: float = 0.0
    compliance_error_rate: float = 0.0
    gt_boxes_range: tuple[int, int] = (1, 4)
    crowd_count_range: tuple[int, int] = (12, 16)
    clean_score_range: tuple[float, float] = (0.7, 0.95)
    dark_score_factor: float = 0.55
    crowd_score_factor: float = 0.55
    roi_score_factor: float = 0.42
    roi_cover_fraction: float = 0.7
    noise_count_range: tuple[int, int] = (0, 2)
    noise_score_range: tuple[float, float] = (0.05, 0.12)
    dark_brightness_range: tuple[float, float] = (0.05, 0.28)
    normal_brightness_range: tuple[float, float] = (0.55, 0.95)
    dark_occlusion_range: tuple[float, float] = (0.0, 0.2)
    crowd_occlusion_range: tuple[float, float] = (0.3, 0.6)
    normal_occlusion_range: tuple[float, float] = (0.0, 0.15)
    brightness_error: float = 0.0
    count_error: int = 0
    emit_cloud_boxes: bool = True
    cloud_detection_score: float = 0.9
    seed: int = 0

    def __post_init__(self) -> None:
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if not self.class_names or len(set(self.class_names)) != len(self.class_names):
            raise ValueError("class_names must be a non-empty list of unique names")
        if not self.scene_vocabulary:
            raise ValueError("scene_vocabulary must be non-empty")
        for name in ("dark_fraction", "crowded_fraction", "roi_weak_fraction", "compliance_error_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v!r}")
        if self.dark_fraction + self.crowded_fraction + self.roi_weak_fraction > 1.0 + 1e-9:
            raise ValueError("scenario fractions must sum to at most 1")
        for name in ("dark_score_factor", "crowd_score_factor", "roi_score_factor"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v!r}")
        if not 0.0 < self.roi_cover_fraction <= 1.0:
            raise ValueError("roi_cover_fraction must be in (0, 1]")
        for name in ("gt_boxes_range", "crowd_count_range", "noise_count_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ValueError(f"{name} must satisfy 0 <= lo <= hi, got ({lo}, {hi})")
        if self.crowded_fraction > 0.0:
            if "person" not in self.class_names:
                raise ValueError("crowded frames require a 'person' class")
            if not 1 <= self.crowd_count_range[0] or self.crowd_count_range[1] > 100:
                raise ValueError("crowd_count_range must lie within [1, 100]")
        for name in (
            "clean_score_range",
            "noise_score_range",
            "dark_brightness_range",
            "normal_brightness_range",
            "dark_occlusion_range",
            "crowd_occlusion_range",
            "normal_occlusion_range",
        ):
            lo, hi = getattr(self, name)
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError(f"{name} must satisfy 0 <= lo <= hi <= 1, got ({lo}, {hi})")
        if not 0.0 <= self.cloud_detection_score <= 1.0:
            raise ValueError("cloud_detection_score must be in [0, 1]")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def build_class_table(class_names: tuple[str, ...]) -> dict[str, int]:
    """Class name -> id map in declaration order."""
    return {name: i for i, name in enumerate(class_names)}


def _uniform(rng: np.random.Generator, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return lo if lo == hi else float(rng.uniform(lo, hi))


def _int_between(rng: np.random.Generator, bounds: tuple[int, int]) -> int:
    lo, hi = bounds
    return lo if lo == hi else int(rng.integers(lo, hi + 1))


def _random_box(rng: np.random.Generator) -> BBox:
    w = float(rng.uniform(0.08, 0.3))
    h = float(rng.uniform(0.08, 0.3))
    x1 = float(rng.uniform(0.0, 1.0 - w))
    y1 = float(rng.uniform(0.0, 1.0 - h))
    return BBox(x1, y1, min(1.0, x1 + w), min(1.0, y1 + h))


def _crowd_boxes(rng: np.random.Generator, n: int) -> list[BBox]:
    # Grid with mild jitter: neighbors overlap (IoU ~0.1-0.2) but stay below
    # typical NMS thresholds, so true candidates are not suppressed.
    w = h = 0.12
    stride = 0.09
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    span_x = stride * (cols - 1) + w
    span_y = stride * (rows - 1) + h
    ox = float(rng.uniform(0.0, 1.0 - span_x))
    oy = float(rng.uniform(0.0, 1.0 - span_y))
    boxes = []
    for k in range(n):
        r, c = divmod(k, cols)
        x1 = min(max(ox + c * stride + float(rng.uniform(-0.01, 0.01)), 0.0), 1.0 - w)
        y1 = min(max(oy + r * stride + float(rng.uniform(-0.01, 0.01)), 0.0), 1.0 - h)
        boxes.append(BBox(x1, y1, min(1.0, x1 + w), min(1.0, y1 + h)))
    return boxes


def _expand_roi(box: BBox, margin: float = 0.02) -> BBox:
    return BBox(
        max(0.0, box.x1 - margin),
        max(0.0, box.y1 - margin),
        min(1.0, box.x2 + margin),
        min(1.0, box.y2 + margin),
    )


def _clip01(v: float) -> float:
    return min(1.0, max(0.0, v))


def synth_trace(spec: SynthSpec) -> list[FrameTrace]:
    """Generate one deterministic synthetic trace."""
    rng = np.random.default_rng(spec.seed)
    n = spec.frames
    table = build_class_table(spec.class_names)
    person_id = table.get("person")
    class_ids = list(table.values())

    n_dark = _round_count(spec.dark_fraction, n)
    n_crowd = _round_count(spec.crowded_fraction, n)
    n_roi = _round_count(spec.roi_weak_fraction, n)
    if n_dark + n_crowd + n_roi > n:
        raise ValueError("scenario counts exceed frame count after rounding")
    scenario = ["normal"] * n
    order = [int(i) for i in rng.permutation(n)]
    for i in order[:n_dark]:
        scenario[i] = "dark"
    for i in order[n_dark : n_dark + n_crowd]:
        scenario[i] = "crowded"
    for i in order[n_dark + n_crowd : n_dark + n_crowd + n_roi]:
        scenario[i] = "roi_weak"

    n_bad = _round_count(spec.compliance_error_rate, n)
    malformed = set(int(i) for i in rng.choice(n, size=n_bad, replace=False)) if n_bad else set()

    score_factor = {
        "normal": 1.0,
        "dark": spec.dark_score_factor,
        "crowded": spec.crowd_score_factor,
        "roi_weak": spec.roi_score_factor,
    }

    frames: list[FrameTrace] = []
    bad_counter = 0
    for i in range(n):
        kind = scenario[i]

        if kind == "crowded":
            count = _int_between(rng, spec.crowd_count_range)
            boxes = _crowd_boxes(rng, count)
            gt = [GtBox(b, person_id) for b in boxes]
        else:
            count = _int_between(rng, spec.gt_boxes_range)
            gt = [GtBox(_random_box(rng), class_ids[int(rng.integers(0, len(class_ids)))]) for _ in range(count)]

        factor = score_factor[kind]
        candidates = [
            Candidate(g.bbox, g.class_id, _uniform(rng, spec.clean_score_range) * factor) for g in gt
        ]
        for _ in range(_int_between(rng, spec.noise_count_range)):
            candidates.append(
                Candidate(
                    _random_box(rng),
                    class_ids[int(rng.integers(0, len(class_ids)))],
                    _uniform(rng, spec.noise_score_range),
                )
            )

        if kind == "dark":
            brightness = _uniform(rng, spec.dark_brightness_range)
            occlusion = _uniform(rng, spec.dark_occlusion_range)
        elif kind == "crowded":
            brightness = _uniform(rng, spec.normal_brightness_range)
            occlusion = _uniform(rng, spec.crowd_occlusion_range)
        else:
            brightness = _uniform(rng, spec.normal_brightness_range)
            occlusion = _uniform(rng, spec.normal_occlusion_range)

        person_count = sum(1 for g in gt if g.class_id == person_id) if person_id is not None else 0
        labels = frozenset(l for l in _SCENARIO_LABELS[kind] if l in spec.scene_vocabulary)

        if kind == "crowded" and len(spec.class_names) > 1:
            rest = 0.3 / (len(spec.class_names) - 1)
            prior = {name: (0.7 if name == "person" else rest) for name in spec.class_names}
        else:
            prior = {name: 1.0 / len(spec.class_names) for name in spec.class_names}

        rois: list[BBox] = []
        if kind != "normal" and gt:
            n_cover = math.ceil(spec.roi_cover_fraction * len(gt))
            covered = [int(j) for j in rng.permutation(len(gt))[:n_cover]]
            rois = [_expand_roi(gt[j].bbox) for j in sorted(covered)]

        doc: dict = {
            "brightness": _clip01(brightness + spec.brightness_error),
            "occlusion": occlusion,
            "person_count": max(0, person_count + spec.count_error),
            "scene_labels": sorted(labels),
            "category_prior": prior,
            "rois": [[b.x1, b.y1, b.x2, b.y2] for b in rois],
        }
        if spec.emit_cloud_boxes:
            id_to_name = {cid: name for name, cid in table.items()}
            doc["detections"] = [
                {
                    "bbox": [g.bbox.x1, g.bbox.y1, g.bbox.x2, g.bbox.y2],
                    "class": id_to_name[g.class_id],
                    "score": spec.cloud_detection_score,
                }
                for g in gt
            ]
        if i in malformed:
            cloud_text = MALFORMED_TEXTS[bad_counter % len(MALFORMED_TEXTS)]
            bad_counter += 1
        else:
            cloud_text = json.dumps(doc)

        frames.append(
            FrameTrace(
                frame_id=f"frame_{i:05d}",
                edge_candidates=tuple(candidates),
                cloud_text=cloud_text,
                ground_truth=tuple(gt),
                scene_truth=SceneTruth(
                    brightness_gt=brightness,
                    person_count_gt=person_count,
                    scene_labels_gt=labels,
                ),
            )
        )
    return frames
