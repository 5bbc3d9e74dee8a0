"""Deterministic report serialization.

Reals are rendered with 6 significant digits; identical reports always
serialize to identical bytes. The JSON form round-trips through
parse_report (equality at the rendered precision); CSV is one row per
class for AP plus a single summary row under a fixed, documented header.
"""

from __future__ import annotations

import csv
import io
import json

from .metrics import RunReport
from .runner import AblationResult

CSV_COLUMNS = (
    "row",
    "class",
    "ap50",
    "map50",
    "recall",
    "precision",
    "f1",
    "score_threshold",
    "brightness_mse",
    "count_mae",
    "scene_f1",
    "compliance_rate",
    "compliance_excluded",
    "semantic_frames",
    "cloud_route_fraction",
    "latency_mean_ms",
    "latency_median_ms",
    "latency_p95_ms",
    "fps",
    "total_compute_gflops",
    "compute_gflops_per_frame",
    "frame_count",
    "failed_frames",
)

ABLATION_CSV_COLUMNS = (
    "subset",
    "threshold_adjust",
    "category_weight",
    "region_focus",
    "map50",
    "recall",
    "precision",
    "f1",
    "cloud_route_fraction",
    "compliance_rate",
    "latency_mean_ms",
    "fps",
    "total_compute_gflops",
    "frame_count",
)


def _sig6(v: float | None) -> float | None:
    if v is None:
        return None
    return float(format(v, ".6g"))


def _cell(v: object) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def report_to_dict(report: RunReport) -> dict:
    """JSON-ready dict with reals rounded to 6 significant digits."""
    return {
        "frame_count": report.frame_count,
        "failed_frames": report.failed_frames,
        "cloud_route_fraction": _sig6(report.cloud_route_fraction),
        "compliance_rate": _sig6(report.compliance_rate),
        "compliance_excluded": report.compliance_excluded,
        "semantic_frames": report.semantic_frames,
        "per_class_ap": {name: _sig6(ap) for name, ap in sorted(report.per_class_ap.items())},
        "map50": _sig6(report.map50),
        "recall": _sig6(report.recall),
        "precision": _sig6(report.precision),
        "f1": _sig6(report.f1),
        "score_threshold": _sig6(report.score_threshold),
        "brightness_mse": _sig6(report.brightness_mse),
        "count_mae": _sig6(report.count_mae),
        "scene_f1": _sig6(report.scene_f1),
        "latency_mean_ms": _sig6(report.latency_mean_ms),
        "latency_median_ms": _sig6(report.latency_median_ms),
        "latency_p95_ms": _sig6(report.latency_p95_ms),
        "fps": _sig6(report.fps),
        "total_compute_gflops": _sig6(report.total_compute_gflops),
        "compute_gflops_per_frame": _sig6(report.compute_gflops_per_frame),
    }


def report_from_dict(doc: dict) -> RunReport:
    """Inverse of report_to_dict."""
    return RunReport(
        frame_count=doc["frame_count"],
        failed_frames=doc["failed_frames"],
        cloud_route_fraction=doc["cloud_route_fraction"],
        compliance_rate=doc["compliance_rate"],
        compliance_excluded=doc["compliance_excluded"],
        semantic_frames=doc["semantic_frames"],
        per_class_ap=dict(doc["per_class_ap"]),
        map50=doc["map50"],
        recall=doc["recall"],
        precision=doc["precision"],
        f1=doc["f1"],
        score_threshold=doc["score_threshold"],
        brightness_mse=doc["brightness_mse"],
        count_mae=doc["count_mae"],
        scene_f1=doc["scene_f1"],
        latency_mean_ms=doc["latency_mean_ms"],
        latency_median_ms=doc["latency_median_ms"],
        latency_p95_ms=doc["latency_p95_ms"],
        fps=doc["fps"],
        total_compute_gflops=doc["total_compute_gflops"],
        compute_gflops_per_frame=doc["compute_gflops_per_frame"],
    )


def _report_csv(report: RunReport) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    blank = {c: None for c in CSV_COLUMNS}
    for name, ap in sorted(report.per_class_ap.items()):
        row = dict(blank, row="class")
        row["class"] = name
        row["ap50"] = ap
        writer.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    doc = report_to_dict(report)
    summary = dict(blank, row="summary")
    for key, value in doc.items():
        if key != "per_class_ap":
            summary[key] = value
    writer.writerow([_cell(summary[c]) for c in CSV_COLUMNS])
    return buf.getvalue().encode("utf-8")


def emit_report(report: RunReport, fmt: str = "json") -> bytes:
    """Serialize one report. Same report in, same bytes out."""
    if fmt == "json":
        return (json.dumps(report_to_dict(report), indent=2) + "\n").encode("utf-8")
    if fmt == "csv":
        return _report_csv(report)
    raise ValueError(f"unknown report format {fmt!r}")


def parse_report(data: bytes | str) -> RunReport:
    """Parse a JSON report back into a RunReport."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return report_from_dict(json.loads(data))


def emit_ablation(result: AblationResult, fmt: str = "json") -> bytes:
    """Serialize an ablation grid, one row per strategy subset."""
    if fmt == "json":
        doc = {
            "rows": [
                {
                    "subset": row.label,
                    "toggles": {
                        "threshold_adjust": row.toggles.threshold_adjust,
                        "category_weight": row.toggles.category_weight,
                        "region_focus": row.toggles.region_focus,
                    },
                    "report": report_to_dict(row.report),
                }
                for row in result.rows
            ]
        }
        return (json.dumps(doc, indent=2) + "\n").encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ABLATION_CSV_COLUMNS)
        for row in result.rows:
            doc = report_to_dict(row.report)
            cells = {
                "subset": row.label,
                "threshold_adjust": row.toggles.threshold_adjust,
                "category_weight": row.toggles.category_weight,
                "region_focus": row.toggles.region_focus,
            }
            for col in ABLATION_CSV_COLUMNS[4:]:
                cells[col] = doc[col]
            writer.writerow([_cell(cells[c]) for c in ABLATION_CSV_COLUMNS])
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")
