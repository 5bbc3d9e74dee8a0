"""Shared domain types for the edge-cloud detection pipeline.

Everything here is a frozen dataclass validated at construction time.
Instances are immutable and safe to share across worker threads; dict
fields (priors, class weights) are never mutated after construction.
Coordinates are normalized to [0, 1] so traces stay resolution-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


def validate_bbox(x1: float, y1: float, x2: float, y2: float) -> list[str]:
    """Return the invariant violations for a candidate box (empty when valid).

    A valid box has finite coordinates inside [0, 1] with strictly positive
    width and height. Violations name the failing field so loaders can report
    them precisely. Total function: never raises.
    """
    violations = []
    for name, v in (("x1", x1), ("y1", y1), ("x2", x2), ("y2", y2)):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            violations.append(f"{name} is not a number")
        elif not math.isfinite(v):
            violations.append(f"{name} is not finite")
        elif not 0.0 <= v <= 1.0:
            violations.append(f"{name} out of range [0, 1]")
    if violations:
        return violations
    if x1 >= x2:
        violations.append("x1 >= x2")
    if y1 >= y2:
        violations.append("y1 >= y2")
    return violations


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in normalized image coordinates, x1 < x2, y1 < y2."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        violations = validate_bbox(self.x1, self.y1, self.x2, self.y2)
        if violations:
            raise ValueError("invalid bbox: " + "; ".join(violations))

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0


def intersection_area(a: BBox, b: BBox) -> float:
    """Overlap area of two boxes; 0.0 when disjoint."""
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union. Symmetric; exactly 1.0 for identical boxes."""
    inter = intersection_area(a, b)
    if inter <= 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


@dataclass(frozen=True)
class Candidate:
    """A scored, class-labeled box (same shape pre- and post-pipeline)."""

    bbox: BBox
    class_id: int
    score: float

    def __post_init__(self) -> None:
        if not isinstance(self.class_id, int) or isinstance(self.class_id, bool) or self.class_id < 0:
            raise ValueError(f"class_id must be a non-negative integer, got {self.class_id!r}")
        if not math.isfinite(self.score) or not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score!r}")


# Tolerance for a normalized category prior to be considered a distribution.
PRIOR_SUM_TOL = 1e-6


@dataclass(frozen=True, eq=True)
class SemanticDescription:
    """Structured scene summary produced by the cloud model.

    ``category_prior`` maps class ids (resolved against the run's class table)
    to non-negative mass; a non-empty prior must sum to 1 within
    ``PRIOR_SUM_TOL``. ``cloud_boxes`` is None when the cloud output carried
    no detections.
    """

    brightness: float
    occlusion: float
    person_count: int
    scene_labels: frozenset[str]
    category_prior: dict[int, float]
    rois: tuple[BBox, ...]
    cloud_boxes: tuple[Candidate, ...] | None = None

    def __post_init__(self) -> None:
        for name, v in (("brightness", self.brightness), ("occlusion", self.occlusion)):
            if not math.isfinite(v) or not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v!r}")
        if not isinstance(self.person_count, int) or isinstance(self.person_count, bool) or self.person_count < 0:
            raise ValueError(f"person_count must be a non-negative integer, got {self.person_count!r}")
        for cid, p in self.category_prior.items():
            if not isinstance(cid, int) or cid < 0:
                raise ValueError(f"category_prior key {cid!r} is not a class id")
            if not math.isfinite(p) or p < 0.0:
                raise ValueError(f"category_prior[{cid}] must be >= 0, got {p!r}")
        if self.category_prior:
            total = sum(self.category_prior.values())
            if abs(total - 1.0) > PRIOR_SUM_TOL:
                raise ValueError(f"category_prior sums to {total!r}, expected 1 +/- {PRIOR_SUM_TOL}")

    # Frozen dataclasses derive __hash__ from fields, but dict fields are
    # unhashable; descriptions are compared, never hashed.
    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class MappingParams:
    """Coefficients of the semantic-to-parameter mapping.

    tau0 is the detector's baseline score threshold. alpha1/alpha2 control how
    far darkness and occlusion lower it. omega0 is the baseline class weight
    raised by crowding (beta1, gated on person count > p_th), occlusion
    (beta2) and the per-class prior (beta3). gamma is the score gain inside
    suggested regions. rho_overlap is the intersection-over-candidate-area
    ratio at which a box counts as inside a region; tau_min is the lower
    clamp that keeps the adjusted threshold meaningful.
    """

    tau0: float = 0.5
    alpha1: float = 0.2
    alpha2: float = 0.1
    omega0: float = 1.0
    beta1: float = 0.1
    beta2: float = 0.15
    beta3: float = 0.2
    p_th: int = 10
    gamma: float = 1.5
    rho_overlap: float = 0.5
    tau_min: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau_min < self.tau0 < 1.0:
            raise ValueError(f"need 0 <= tau_min < tau0 < 1, got tau_min={self.tau_min}, tau0={self.tau0}")
        for name in ("alpha1", "alpha2", "beta1", "beta2", "beta3"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be a non-negative real, got {v!r}")
        if not math.isfinite(self.omega0) or self.omega0 <= 0.0:
            raise ValueError(f"omega0 must be positive, got {self.omega0!r}")
        if not isinstance(self.p_th, int) or isinstance(self.p_th, bool) or self.p_th < 1:
            raise ValueError(f"p_th must be a positive integer, got {self.p_th!r}")
        if not math.isfinite(self.gamma) or self.gamma < 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma!r}")
        if not 0.0 < self.rho_overlap <= 1.0:
            raise ValueError(f"rho_overlap must be in (0, 1], got {self.rho_overlap!r}")


@dataclass(frozen=True, eq=True)
class DetectorAdjustment:
    """Per-frame control signals derived from a semantic description.

    rho_overlap and roi_mode are carried along so rescoring is self-contained.
    roi_mode is "overlap" (intersection-over-candidate-area >= rho_overlap)
    or "center" (candidate center inside a region).
    """

    tau_c: float
    class_weights: dict[int, float]
    rois: tuple[BBox, ...]
    gamma: float
    rho_overlap: float = 0.5
    roi_mode: str = "overlap"

    def __post_init__(self) -> None:
        if not math.isfinite(self.tau_c) or not 0.0 <= self.tau_c <= 1.0:
            raise ValueError(f"tau_c must be in [0, 1], got {self.tau_c!r}")
        for cid, w in self.class_weights.items():
            if not math.isfinite(w) or w < 0.0:
                raise ValueError(f"class weight for {cid} must be finite and >= 0, got {w!r}")
        if not math.isfinite(self.gamma) or self.gamma < 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma!r}")
        if self.roi_mode not in ("overlap", "center"):
            raise ValueError(f"roi_mode must be 'overlap' or 'center', got {self.roi_mode!r}")

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class RoutingPolicy:
    """Confidence gate for the edge/cloud dispatch decision.

    Frames whose mean edge confidence is at least tau_route stay on the edge.
    Candidates scoring below candidate_floor are excluded from the mean so a
    heap of near-zero background boxes cannot drag it down.
    """

    tau_route: float = 0.6
    candidate_floor: float = 0.25

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau_route <= 1.0:
            raise ValueError(f"tau_route must be in [0, 1], got {self.tau_route!r}")
        if not 0.0 <= self.candidate_floor <= 1.0:
            raise ValueError(f"candidate_floor must be in [0, 1], got {self.candidate_floor!r}")


class Route(Enum):
    """Where a frame was processed."""

    EDGE_ONLY = "edge_only"
    CLOUD_ENHANCED = "cloud_enhanced"


@dataclass(frozen=True)
class RouteDecision:
    """Outcome of the per-frame dispatch.

    mean_confidence is the average score of the candidates above the
    policy floor (0.0 when none qualify); n_candidates_considered counts
    them. When a routing policy is in force the route is edge-only exactly
    when mean_confidence reaches its tau_route; forced-mode runs record
    their route here without consulting a policy.
    """

    route: Route
    mean_confidence: float
    n_candidates_considered: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean_confidence) or not 0.0 <= self.mean_confidence <= 1.0:
            raise ValueError(f"mean_confidence must be in [0, 1], got {self.mean_confidence!r}")
        if self.n_candidates_considered < 0:
            raise ValueError("n_candidates_considered must be >= 0")


@dataclass(frozen=True)
class GtBox:
    """One ground-truth annotation."""

    bbox: BBox
    class_id: int

    def __post_init__(self) -> None:
        if not isinstance(self.class_id, int) or isinstance(self.class_id, bool) or self.class_id < 0:
            raise ValueError(f"class_id must be a non-negative integer, got {self.class_id!r}")


@dataclass(frozen=True)
class SceneTruth:
    """Ground truth for the scene-level semantic metrics."""

    brightness_gt: float
    person_count_gt: int
    scene_labels_gt: frozenset[str]

    def __post_init__(self) -> None:
        if not math.isfinite(self.brightness_gt) or not 0.0 <= self.brightness_gt <= 1.0:
            raise ValueError(f"brightness_gt must be in [0, 1], got {self.brightness_gt!r}")
        if (
            not isinstance(self.person_count_gt, int)
            or isinstance(self.person_count_gt, bool)
            or self.person_count_gt < 0
        ):
            raise ValueError(f"person_count_gt must be a non-negative integer, got {self.person_count_gt!r}")


@dataclass(frozen=True)
class FrameTrace:
    """One replayable frame: recorded backend outputs plus ground truth.

    edge_candidates are the detector's raw, pre-threshold candidates;
    cloud_text is the cloud model's raw output for this frame, kept verbatim
    even when malformed (compliance is measured downstream).
    """

    frame_id: str
    edge_candidates: tuple[Candidate, ...]
    cloud_text: str
    ground_truth: tuple[GtBox, ...]
    scene_truth: SceneTruth

    def __post_init__(self) -> None:
        if not self.frame_id:
            raise ValueError("frame_id must be a non-empty string")


@dataclass(frozen=True)
class CostModel:
    """Parametric per-stage latency and compute accounting.

    Stage durations are configuration, not measurements; jitter_sigma_ms = 0
    disables jitter. seed keys the counter-based jitter generator so draws
    depend only on (seed, frame_id), never on evaluation order.
    """

    edge_latency_ms: float = 150.0
    cloud_latency_ms: float = 4900.0
    network_rtt_ms: float = 80.0
    mapping_overhead_ms: float = 20.0
    edge_gflops: float = 12.0
    cloud_gflops: float = 100.0
    jitter_sigma_ms: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in (
            "edge_latency_ms",
            "cloud_latency_ms",
            "network_rtt_ms",
            "mapping_overhead_ms",
            "edge_gflops",
            "cloud_gflops",
            "jitter_sigma_ms",
        ):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be a non-negative real, got {v!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")
