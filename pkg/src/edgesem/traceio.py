"""Line-delimited JSON trace files: one frame per line, streamed on read.

Record fields: frame_id, edge_candidates [{bbox: [x1, y1, x2, y2],
class: "<name>", score: s}], cloud_text (string), ground_truth
[{bbox, class}], scene_truth {brightness, person_count, scene_labels}.
Class names are resolved against the run's class table; unknown names,
duplicate frame ids and invariant violations are loading errors that name
the offending line.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .model import BBox, Candidate, FrameTrace, GtBox, SceneTruth, validate_bbox

_RECORD_KEYS = {"frame_id", "edge_candidates", "cloud_text", "ground_truth", "scene_truth"}
_SCENE_KEYS = {"brightness", "person_count", "scene_labels"}


class TraceFormatError(ValueError):
    """Malformed trace file; message carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _bbox_from(raw: object, where: str, line_no: int) -> BBox:
    if not isinstance(raw, list) or len(raw) != 4 or not all(isinstance(v, (int, float)) for v in raw):
        raise TraceFormatError(line_no, f"{where}: bbox must be a [x1, y1, x2, y2] number array")
    x1, y1, x2, y2 = (float(v) for v in raw)
    violations = validate_bbox(x1, y1, x2, y2)
    if violations:
        raise TraceFormatError(line_no, f"{where}: {'; '.join(violations)}")
    return BBox(x1, y1, x2, y2)


def _class_id(name: object, class_table: Mapping[str, int], where: str, line_no: int) -> int:
    if not isinstance(name, str) or name not in class_table:
        raise TraceFormatError(line_no, f"{where}: unknown class {name!r}")
    return class_table[name]


def _frame_from_record(doc: object, class_table: Mapping[str, int], line_no: int) -> FrameTrace:
    if not isinstance(doc, dict):
        raise TraceFormatError(line_no, "record must be a JSON object")
    unknown = set(doc) - _RECORD_KEYS
    if unknown:
        raise TraceFormatError(line_no, f"unknown record fields: {sorted(unknown)}")
    missing = _RECORD_KEYS - set(doc)
    if missing:
        raise TraceFormatError(line_no, f"missing record fields: {sorted(missing)}")

    frame_id = doc["frame_id"]
    if not isinstance(frame_id, str) or not frame_id:
        raise TraceFormatError(line_no, "frame_id must be a non-empty string")

    raw_cands = doc["edge_candidates"]
    if not isinstance(raw_cands, list):
        raise TraceFormatError(line_no, "edge_candidates must be an array")
    candidates = []
    for i, entry in enumerate(raw_cands):
        where = f"edge_candidates[{i}]"
        if not isinstance(entry, dict) or set(entry) != {"bbox", "class", "score"}:
            raise TraceFormatError(line_no, f"{where}: expected bbox, class and score")
        box = _bbox_from(entry["bbox"], f"{where}.bbox", line_no)
        cid = _class_id(entry["class"], class_table, f"{where}.class", line_no)
        score = entry["score"]
        if not isinstance(score, (int, float)) or isinstance(score, bool) or not 0.0 <= score <= 1.0:
            raise TraceFormatError(line_no, f"{where}.score: must be a number in [0, 1]")
        candidates.append(Candidate(box, cid, float(score)))

    if not isinstance(doc["cloud_text"], str):
        raise TraceFormatError(line_no, "cloud_text must be a string")

    raw_gt = doc["ground_truth"]
    if not isinstance(raw_gt, list):
        raise TraceFormatError(line_no, "ground_truth must be an array")
    gt = []
    for i, entry in enumerate(raw_gt):
        where = f"ground_truth[{i}]"
        if not isinstance(entry, dict) or set(entry) != {"bbox", "class"}:
            raise TraceFormatError(line_no, f"{where}: expected bbox and class")
        box = _bbox_from(entry["bbox"], f"{where}.bbox", line_no)
        gt.append(GtBox(box, _class_id(entry["class"], class_table, f"{where}.class", line_no)))

    raw_scene = doc["scene_truth"]
    if not isinstance(raw_scene, dict) or set(raw_scene) != _SCENE_KEYS:
        raise TraceFormatError(line_no, f"scene_truth must be an object with fields {sorted(_SCENE_KEYS)}")
    b = raw_scene["brightness"]
    if not isinstance(b, (int, float)) or isinstance(b, bool) or not 0.0 <= b <= 1.0:
        raise TraceFormatError(line_no, "scene_truth.brightness must be a number in [0, 1]")
    p = raw_scene["person_count"]
    if not isinstance(p, int) or isinstance(p, bool) or p < 0:
        raise TraceFormatError(line_no, "scene_truth.person_count must be a non-negative integer")
    labels = raw_scene["scene_labels"]
    if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
        raise TraceFormatError(line_no, "scene_truth.scene_labels must be an array of strings")

    return FrameTrace(
        frame_id=frame_id,
        edge_candidates=tuple(candidates),
        cloud_text=doc["cloud_text"],
        ground_truth=tuple(gt),
        scene_truth=SceneTruth(float(b), p, frozenset(labels)),
    )


def load_trace(path: str | Path, class_table: Mapping[str, int]) -> list[FrameTrace]:
    """Load and validate a trace file, preserving file order.

    Blank lines are skipped; the first malformed record aborts the load with
    its line number. Duplicate frame ids are rejected by name.
    """
    if not class_table:
        raise ValueError("class_table must be non-empty")
    frames: list[FrameTrace] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceFormatError(line_no, f"not valid JSON: {exc}") from None
            frame = _frame_from_record(doc, class_table, line_no)
            if frame.frame_id in seen:
                raise TraceFormatError(line_no, f"duplicate frame_id {frame.frame_id!r}")
            seen.add(frame.frame_id)
            frames.append(frame)
    return frames


def frame_to_record(frame: FrameTrace, class_table: Mapping[str, int]) -> dict:
    """Trace-file record for one frame (inverse of the loader)."""
    id_to_name = {cid: name for name, cid in class_table.items()}
    return {
        "frame_id": frame.frame_id,
        "edge_candidates": [
            {"bbox": [c.bbox.x1, c.bbox.y1, c.bbox.x2, c.bbox.y2], "class": id_to_name[c.class_id], "score": c.score}
            for c in frame.edge_candidates
        ],
        "cloud_text": frame.cloud_text,
        "ground_truth": [
            {"bbox": [g.bbox.x1, g.bbox.y1, g.bbox.x2, g.bbox.y2], "class": id_to_name[g.class_id]}
            for g in frame.ground_truth
        ],
        "scene_truth": {
            "brightness": frame.scene_truth.brightness_gt,
            "person_count": frame.scene_truth.person_count_gt,
            "scene_labels": sorted(frame.scene_truth.scene_labels_gt),
        },
    }


def write_trace(path: str | Path, frames: Iterable[FrameTrace], class_table: Mapping[str, int]) -> None:
    """Write frames as line-delimited JSON. Round-trips exactly through load."""
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(json.dumps(frame_to_record(frame, class_table)) + "\n")


def dump_trace(frames: Sequence[FrameTrace], class_table: Mapping[str, int]) -> str:
    """Trace file content as a string (used by tests and the CLI)."""
    return "".join(json.dumps(frame_to_record(f, class_table)) + "\n" for f in frames)
