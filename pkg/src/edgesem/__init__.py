"""Edge-cloud collaborative object detection on replayable traces.

A lightweight edge detector handles confident frames; uncertain frames
consult a cloud scene-understanding model whose structured output is mapped
into detector control signals (dynamic threshold, class weights, region
gains). Backends are trace-driven and timing is simulated, so every run is
deterministic and desk-scale.
"""

from .backends import CostBreakdown, TraceStore, UnknownFrameError, account, jitter_ms
from .config import ConfigError, Mode, ScenarioConfig, load_config, load_synth_config, parse_config
from .mapping import (
    StrategyToggles,
    adjust_threshold,
    apply_toggles,
    category_weight,
    derive_adjustment,
    region_gain,
    rescore,
)
from .metrics import (
    MetricsError,
    RunReport,
    aggregate_run,
    ap50,
    brightness_mse,
    count_mae,
    recall_f1,
    scene_f1,
)
from .model import (
    BBox,
    Candidate,
    CostModel,
    DetectorAdjustment,
    FrameTrace,
    GtBox,
    MappingParams,
    Route,
    RouteDecision,
    RoutingPolicy,
    SceneTruth,
    SemanticDescription,
    intersection_area,
    iou,
    validate_bbox,
)
from .pipeline import PipelineOptions, filter_by_threshold, fuse_cloud_boxes, nms
from .reports import emit_ablation, emit_report, parse_report
from .router import FrameResult, mean_confidence, process_frame, route_decision
from .runner import AblationResult, RunError, RunOutput, run_ablation, run_scenario
from .semantic_io import ComplianceError, ComplianceKind, compliance_rate, parse_semantic_output, render_semantic_json
from .synth import DEFAULT_SCENE_VOCABULARY, SynthSpec, build_class_table, synth_trace
from .traceio import TraceFormatError, dump_trace, load_trace, write_trace

__version__ = "0.1.0"
