"""Confidence-gated edge/cloud dispatch and per-frame orchestration.

A frame stays on the edge when the mean confidence of its candidates
reaches the routing threshold (inclusive); otherwise it goes to the cloud
for semantic enhancement. Non-compliant cloud output never aborts a frame:
the result degrades to the plain edge pipeline with compliance_ok False.

process_frame is stateless with respect to other frames; backends only need
to be safe for concurrent read-only lookups.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

from .backends import account
from .mapping import derive_adjustment, rescore
from .model import (
    Candidate,
    CostModel,
    DetectorAdjustment,
    MappingParams,
    Route,
    RouteDecision,
    RoutingPolicy,
    SemanticDescription,
)
from .pipeline import PipelineOptions, filter_by_threshold, fuse_cloud_boxes, nms
from .semantic_io import parse_semantic_output


class EdgeBackend(Protocol):
    def detect(self, frame_id: str) -> Sequence[Candidate]: ...


class CloudBackend(Protocol):
    def describe(self, frame_id: str) -> str: ...


@dataclass(frozen=True)
class FrameResult:
    """Everything the harness records about one processed frame.

    semantic and adjustment_used are present exactly when the frame went to
    the cloud and its output was compliant. compliance_ok is None when the
    cloud was never consulted.
    """

    frame_id: str
    route: RouteDecision
    detections: tuple[Candidate, ...]
    adjustment_used: DetectorAdjustment | None
    semantic: SemanticDescription | None
    compliance_ok: bool | None
    latency_ms: float
    compute_gflops: float

    def __post_init__(self) -> None:
        enhanced = self.route.route is Route.CLOUD_ENHANCED and self.compliance_ok is True
        if enhanced != (self.semantic is not None) or enhanced != (self.adjustment_used is not None):
            raise ValueError("semantic/adjustment must be present iff the frame was cloud-enhanced and compliant")


def mean_confidence(candidates: Sequence[Candidate], floor: float) -> float:
    """Arithmetic mean of candidate scores at or above the floor; 0 if none."""
    if not 0.0 <= floor <= 1.0:
        raise ValueError(f"floor must be in [0, 1], got {floor!r}")
    scores = [c.score for c in candidates if c.score >= floor]
    if not scores:
        return 0.0
    return sum(scores) / len(scores)


def route_decision(c_bar: float, policy: RoutingPolicy, n_considered: int = 0) -> RouteDecision:
    """Dispatch by mean confidence: edge-only iff c_bar >= tau_route."""
    route = Route.EDGE_ONLY if c_bar >= policy.tau_route else Route.CLOUD_ENHANCED
    return RouteDecision(route=route, mean_confidence=c_bar, n_candidates_considered=n_considered)


def edge_pipeline(candidates: Sequence[Candidate], tau: float, options: PipelineOptions) -> list[Candidate]:
    """Baseline path: threshold at tau, then class-aware NMS."""
    return nms(filter_by_threshold(candidates, tau), options.nms_iou)


def enhanced_pipeline(
    candidates: Sequence[Candidate],
    desc: SemanticDescription,
    params: MappingParams,
    class_table: Mapping[str, int],
    options: PipelineOptions,
) -> tuple[list[Candidate], DetectorAdjustment]:
    """Cloud-guided path: rescore, filter at the adjusted threshold, NMS.

    With fusion enabled, cloud-reported boxes are merged into the final set.
    """
    adj = derive_adjustment(params, desc, class_table, options.roi_mode)
    dets = nms(filter_by_threshold(rescore(candidates, adj), adj.tau_c), options.nms_iou)
    if options.fusion and desc.cloud_boxes:
        dets = fuse_cloud_boxes(dets, desc.cloud_boxes, options.nms_iou)
    return dets, adj


def process_frame(
    frame_id: str,
    edge: EdgeBackend,
    cloud: CloudBackend,
    params: MappingParams,
    policy: RoutingPolicy,
    cost: CostModel,
    options: PipelineOptions,
    class_table: Mapping[str, int],
) -> FrameResult:
    """Run one frame end-to-end through the collaborative pipeline.

    Edge candidates are always fetched first and decide the route. Edge-only
    frames are thresholded at tau0 and suppressed. Cloud-routed frames parse
    the cloud text; compliant output drives the enhanced pipeline, anything
    else falls back to the edge pipeline (availability over enhancement).
    Cost is charged per the route via the simulated cost model.
    """
    candidates = list(edge.detect(frame_id))
    eligible = [c for c in candidates if c.score >= policy.candidate_floor]
    c_bar = sum(c.score for c in eligible) / len(eligible) if eligible else 0.0
    decision = route_decision(c_bar, policy, n_considered=len(eligible))

    semantic: SemanticDescription | None = None
    adjustment: DetectorAdjustment | None = None
    compliance_ok: bool | None = None
    if decision.route is Route.EDGE_ONLY:
        detections = edge_pipeline(candidates, params.tau0, options)
    else:
        parsed = parse_semantic_output(cloud.describe(frame_id), class_table)
        if isinstance(parsed, SemanticDescription):
            detections, adjustment = enhanced_pipeline(candidates, parsed, params, class_table, options)
            semantic = parsed
            compliance_ok = True
        else:
            detections = edge_pipeline(candidates, params.tau0, options)
            compliance_ok = False

    breakdown = account(decision, cost, frame_id)
    return FrameResult(
        frame_id=frame_id,
        route=decision,
        detections=tuple(detections),
        adjustment_used=adjustment,
        semantic=semantic,
        compliance_ok=compliance_ok,
        latency_ms=breakdown.latency_ms,
        compute_gflops=breakdown.compute_gflops,
    )
