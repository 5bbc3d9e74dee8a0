"""Parsing and validation of the cloud model's structured text output.

The contract is a single UTF-8 JSON object with fields, in fixed order:
brightness, occlusion, person_count, scene_labels, category_prior, rois,
and optional detections. Parsing is deterministic: identical input always
yields an identical result, and the first contract violation in field order
is the one reported.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .model import BBox, Candidate, SemanticDescription, validate_bbox

# Raw prior sums inside this window are renormalized; outside it the output
# is judged non-compliant. Tolerates rounding drift without accepting garbage.
PRIOR_WINDOW = (0.5, 1.5)

# Contract field names, in the order violations are reported.
FIELD_ORDER = (
    "brightness",
    "occlusion",
    "person_count",
    "scene_labels",
    "category_prior",
    "rois",
    "detections",
)


class ComplianceKind(Enum):
    NOT_JSON = "not_json"
    MISSING_FIELD = "missing_field"
    FIELD_TYPE = "field_type"
    FIELD_RANGE = "field_range"
    UNKNOWN_CLASS = "unknown_class"
    PRIOR_NOT_NORMALIZABLE = "prior_not_normalizable"


@dataclass(frozen=True)
class ComplianceError:
    """First contract violation found in a cloud output."""

    kind: ComplianceKind
    field: str | None
    detail: str


def _is_number(v: object) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _parse_scalar01(doc: dict, name: str) -> float | ComplianceError:
    if name not in doc:
        return ComplianceError(ComplianceKind.MISSING_FIELD, name, f"required field '{name}' is missing")
    v = doc[name]
    if not _is_number(v):
        return ComplianceError(ComplianceKind.FIELD_TYPE, name, f"'{name}' must be a number, got {type(v).__name__}")
    if not math.isfinite(v) or not 0.0 <= v <= 1.0:
        return ComplianceError(ComplianceKind.FIELD_RANGE, name, f"'{name}' must be in [0, 1], got {v!r}")
    return float(v)


def _parse_count(doc: dict, name: str) -> int | ComplianceError:
    if name not in doc:
        return ComplianceError(ComplianceKind.MISSING_FIELD, name, f"required field '{name}' is missing")
    v = doc[name]
    # JSON does not distinguish 14 from 14.0; accept integral numbers only.
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        return ComplianceError(ComplianceKind.FIELD_TYPE, name, f"'{name}' must be an integer, got {type(v).__name__}")
    if isinstance(v, float):
        if not math.isfinite(v) or v != int(v):
            return ComplianceError(ComplianceKind.FIELD_TYPE, name, f"'{name}' must be an integer, got {v!r}")
        v = int(v)
    if v < 0:
        return ComplianceError(ComplianceKind.FIELD_RANGE, name, f"'{name}' must be >= 0, got {v}")
    return v


def _parse_bbox_array(raw: object, field: str, where: str) -> BBox | ComplianceError:
    if not isinstance(raw, Sequence) or isinstance(raw, (str, bytes)) or len(raw) != 4:
        return ComplianceError(
            ComplianceKind.FIELD_TYPE, field, f"{where} must be a [x1, y1, x2, y2] array"
        )
    if not all(_is_number(v) for v in raw):
        return ComplianceError(ComplianceKind.FIELD_TYPE, field, f"{where} coordinates must be numbers")
    x1, y1, x2, y2 = (float(v) for v in raw)
    violations = validate_bbox(x1, y1, x2, y2)
    if violations:
        return ComplianceError(ComplianceKind.FIELD_RANGE, field, f"{where}: {'; '.join(violations)}")
    return BBox(x1, y1, x2, y2)


def parse_semantic_output(text: str, class_table: Mapping[str, int]) -> SemanticDescription | ComplianceError:
    """Parse one raw cloud output against the structured contract.

    Returns a validated SemanticDescription on success, otherwise the first
    ComplianceError in contract field order. Unknown top-level fields are
    ignored for forward compatibility; unknown class names inside
    category_prior or detections are violations. A non-empty raw prior is
    renormalized to sum 1 iff its raw sum lies inside PRIOR_WINDOW.
    """
    if not class_table:
        raise ValueError("class_table must be non-empty")

    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        return ComplianceError(ComplianceKind.NOT_JSON, None, f"not parseable as JSON: {exc}")
    if not isinstance(doc, dict):
        return ComplianceError(
            ComplianceKind.NOT_JSON, None, f"top-level value must be an object, got {type(doc).__name__}"
        )

    brightness = _parse_scalar01(doc, "brightness")
    if isinstance(brightness, ComplianceError):
        return brightness
    occlusion = _parse_scalar01(doc, "occlusion")
    if isinstance(occlusion, ComplianceError):
        return occlusion
    person_count = _parse_count(doc, "person_count")
    if isinstance(person_count, ComplianceError):
        return person_count

    if "scene_labels" not in doc:
        return ComplianceError(ComplianceKind.MISSING_FIELD, "scene_labels", "required field 'scene_labels' is missing")
    raw_labels = doc["scene_labels"]
    if not isinstance(raw_labels, list) or not all(isinstance(s, str) for s in raw_labels):
        return ComplianceError(
            ComplianceKind.FIELD_TYPE, "scene_labels", "'scene_labels' must be an array of strings"
        )
    # Out-of-vocabulary labels are scored against scene-F1 downstream, not
    # rejected here: compliance is purely structural.
    scene_labels = frozenset(raw_labels)

    if "category_prior" not in doc:
        return ComplianceError(
            ComplianceKind.MISSING_FIELD, "category_prior", "required field 'category_prior' is missing"
        )
    raw_prior = doc["category_prior"]
    if not isinstance(raw_prior, dict):
        return ComplianceError(
            ComplianceKind.FIELD_TYPE, "category_prior", "'category_prior' must be an object of class name -> mass"
        )
    prior: dict[int, float] = {}
    for name, mass in raw_prior.items():
        if name not in class_table:
            return ComplianceError(ComplianceKind.UNKNOWN_CLASS, "category_prior", f"unknown class name {name!r}")
        if not _is_number(mass):
            return ComplianceError(
                ComplianceKind.FIELD_TYPE, "category_prior", f"prior mass for {name!r} must be a number"
            )
        if not math.isfinite(mass) or mass < 0.0:
            return ComplianceError(
                ComplianceKind.FIELD_RANGE, "category_prior", f"prior mass for {name!r} must be >= 0, got {mass!r}"
            )
        prior[class_table[name]] = float(mass)
    total = sum(prior.values())
    if not PRIOR_WINDOW[0] <= total <= PRIOR_WINDOW[1]:
        return ComplianceError(
            ComplianceKind.PRIOR_NOT_NORMALIZABLE,
            "category_prior",
            f"raw prior sums to {total!r}, outside window {PRIOR_WINDOW}",
        )
    prior = {cid: mass / total for cid, mass in prior.items()}

    if "rois" not in doc:
        return ComplianceError(ComplianceKind.MISSING_FIELD, "rois", "required field 'rois' is missing")
    raw_rois = doc["rois"]
    if not isinstance(raw_rois, list):
        return ComplianceError(ComplianceKind.FIELD_TYPE, "rois", "'rois' must be an array of boxes")
    rois: list[BBox] = []
    for i, raw in enumerate(raw_rois):
        box = _parse_bbox_array(raw, "rois", f"rois[{i}]")
        if isinstance(box, ComplianceError):
            return box
        rois.append(box)

    cloud_boxes: tuple[Candidate, ...] | None = None
    if "detections" in doc:
        raw_dets = doc["detections"]
        if not isinstance(raw_dets, list):
            return ComplianceError(ComplianceKind.FIELD_TYPE, "detections", "'detections' must be an array")
        parsed: list[Candidate] = []
        for i, entry in enumerate(raw_dets):
            if not isinstance(entry, dict) or not {"bbox", "class", "score"} <= set(entry):
                return ComplianceError(
                    ComplianceKind.FIELD_TYPE,
                    "detections",
                    f"detections[{i}] must be an object with bbox, class and score",
                )
            box = _parse_bbox_array(entry["bbox"], "detections", f"detections[{i}].bbox")
            if isinstance(box, ComplianceError):
                return box
            name = entry["class"]
            if not isinstance(name, str):
                return ComplianceError(
                    ComplianceKind.FIELD_TYPE, "detections", f"detections[{i}].class must be a string"
                )
            if name not in class_table:
                return ComplianceError(ComplianceKind.UNKNOWN_CLASS, "detections", f"unknown class name {name!r}")
            score = entry["score"]
            if not _is_number(score):
                return ComplianceError(
                    ComplianceKind.FIELD_TYPE, "detections", f"detections[{i}].score must be a number"
                )
            if not math.isfinite(score) or not 0.0 <= score <= 1.0:
                return ComplianceError(
                    ComplianceKind.FIELD_RANGE, "detections", f"detections[{i}].score must be in [0, 1]"
                )
            parsed.append(Candidate(box, class_table[name], float(score)))
        cloud_boxes = tuple(parsed)

    return SemanticDescription(
        brightness=brightness,
        occlusion=occlusion,
        person_count=person_count,
        scene_labels=scene_labels,
        category_prior=prior,
        rois=tuple(rois),
        cloud_boxes=cloud_boxes,
    )


def compliance_rate(texts: Sequence[str], class_table: Mapping[str, int]) -> float:
    """Fraction of inputs that parse and validate against the contract."""
    if not texts:
        raise ValueError("compliance rate is undefined for an empty corpus")
    ok = sum(1 for t in texts if isinstance(parse_semantic_output(t, class_table), SemanticDescription))
    return ok / len(texts)


def render_semantic_json(desc: SemanticDescription, class_table: Mapping[str, int]) -> str:
    """Serialize a description back to contract JSON (inverse of the parser).

    Keys are emitted in contract order with class ids mapped back to names;
    re-parsing the result yields an equal description (prior compared after
    renormalization).
    """
    id_to_name = {cid: name for name, cid in class_table.items()}
    doc: dict = {
        "brightness": desc.brightness,
        "occlusion": desc.occlusion,
        "person_count": desc.person_count,
        "scene_labels": sorted(desc.scene_labels),
        "category_prior": {id_to_name[cid]: mass for cid, mass in sorted(desc.category_prior.items())},
        "rois": [[b.x1, b.y1, b.x2, b.y2] for b in desc.rois],
    }
    if desc.cloud_boxes is not None:
        doc["detections"] = [
            {"bbox": [c.bbox.x1, c.bbox.y1, c.bbox.x2, c.bbox.y2], "class": id_to_name[c.class_id], "score": c.score}
            for c in desc.cloud_boxes
        ]
    return json.dumps(doc)
