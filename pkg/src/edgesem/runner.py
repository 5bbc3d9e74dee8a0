"""Scenario and ablation execution.

Three modes share one accounting law and one aggregation path:

* edge: every frame through the baseline edge pipeline at tau0; edge cost.
* cloud: routing ignored, every frame consults the cloud. With fusion off
  the cloud-reported boxes are the detection source (rescored and filtered
  at the adjusted threshold); with fusion on the enhanced edge detections
  are merged with the cloud boxes. Non-compliant output yields an empty
  detection set for that frame — there is no silent edge fallback in a
  cloud-only run. Full cloud-path cost either way.
* collab: per-frame confidence-gated dispatch (see router.process_frame).

Frames are independent; with workers > 1 they are dispatched to a thread
pool and results are merged back in trace order, so reports are
byte-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .backends import TraceStore, UnknownFrameError, account
from .config import Mode, ScenarioConfig
from .mapping import StrategyToggles, apply_toggles
from .metrics import RunReport, aggregate_run
from .model import FrameTrace, Route, RouteDecision, SemanticDescription
from .router import FrameResult, edge_pipeline, enhanced_pipeline, mean_confidence, process_frame
from .semantic_io import parse_semantic_output
from .traceio import load_trace


class RunError(RuntimeError):
    """Every frame of a run failed."""


@dataclass(frozen=True)
class RunOutput:
    """Report plus per-frame results (trace order) and collected errors."""

    report: RunReport
    frames: tuple[FrameResult, ...]
    errors: tuple[tuple[str, str], ...]

    __hash__ = None  # type: ignore[assignment]


def _edge_mode_frame(store: TraceStore, config: ScenarioConfig) -> Callable[[str], FrameResult]:
    params = config.mapping

    def run(frame_id: str) -> FrameResult:
        candidates = store.detect(frame_id)
        eligible = [c for c in candidates if c.score >= config.routing.candidate_floor]
        c_bar = mean_confidence(candidates, config.routing.candidate_floor)
        decision = RouteDecision(Route.EDGE_ONLY, c_bar, len(eligible))
        dets = edge_pipeline(candidates, params.tau0, config.pipeline)
        breakdown = account(decision, config.cost, frame_id)
        return FrameResult(
            frame_id=frame_id,
            route=decision,
            detections=tuple(dets),
            adjustment_used=None,
            semantic=None,
            compliance_ok=None,
            latency_ms=breakdown.latency_ms,
            compute_gflops=breakdown.compute_gflops,
        )

    return run


def _cloud_mode_frame(store: TraceStore, config: ScenarioConfig) -> Callable[[str], FrameResult]:
    params = apply_toggles(config.mapping, config.strategies)

    def run(frame_id: str) -> FrameResult:
        candidates = store.detect(frame_id)
        eligible = [c for c in candidates if c.score >= config.routing.candidate_floor]
        c_bar = mean_confidence(candidates, config.routing.candidate_floor)
        decision = RouteDecision(Route.CLOUD_ENHANCED, c_bar, len(eligible))
        parsed = parse_semantic_output(store.describe(frame_id), config.class_table)
        if isinstance(parsed, SemanticDescription):
            source = candidates if config.pipeline.fusion else list(parsed.cloud_boxes or ())
            dets, adj = enhanced_pipeline(source, parsed, params, config.class_table, config.pipeline)
            semantic, ok = parsed, True
        else:
            dets, adj, semantic, ok = [], None, None, False
        breakdown = account(decision, config.cost, frame_id)
        return FrameResult(
            frame_id=frame_id,
            route=decision,
            detections=tuple(dets),
            adjustment_used=adj,
            semantic=semantic,
            compliance_ok=ok,
            latency_ms=breakdown.latency_ms,
            compute_gflops=breakdown.compute_gflops,
        )

    return run


def _collab_frame(store: TraceStore, config: ScenarioConfig) -> Callable[[str], FrameResult]:
    params = apply_toggles(config.mapping, config.strategies)

    def run(frame_id: str) -> FrameResult:
        return process_frame(
            frame_id,
            edge=store,
            cloud=store,
            params=params,
            policy=config.routing,
            cost=config.cost,
            options=config.pipeline,
            class_table=config.class_table,
        )

    return run


def run_scenario(
    config: ScenarioConfig,
    traces: Sequence[FrameTrace] | None = None,
    workers: int = 1,
) -> RunOutput:
    """Execute one scenario over a trace and aggregate the report.

    traces may be passed directly (e.g. freshly synthesized); otherwise
    config.trace_path is loaded. Per-frame failures are collected, not
    fatal — the run fails only when every frame fails.
    """
    if traces is None:
        if config.trace_path is None:
            raise ValueError("no trace: config.trace_path unset and no traces passed")
        traces = load_trace(config.trace_path, config.class_table)
    if not traces:
        raise RunError("trace is empty")
    if workers < 1:
        raise ValueError("workers must be >= 1")

    store = TraceStore(traces)
    run_one = {
        Mode.EDGE: _edge_mode_frame,
        Mode.CLOUD: _cloud_mode_frame,
        Mode.COLLAB: _collab_frame,
    }[config.mode](store, config)

    frame_ids = [t.frame_id for t in traces]
    outcomes: list[FrameResult | tuple[str, str]] = [None] * len(frame_ids)  # type: ignore[list-item]

    def attempt(i: int, fid: str) -> None:
        try:
            outcomes[i] = run_one(fid)
        except UnknownFrameError as exc:
            outcomes[i] = (fid, str(exc))

    if workers == 1:
        for i, fid in enumerate(frame_ids):
            attempt(i, fid)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(attempt, range(len(frame_ids)), frame_ids))

    results = tuple(o for o in outcomes if isinstance(o, FrameResult))
    errors = tuple(o for o in outcomes if not isinstance(o, FrameResult))
    if not results:
        raise RunError(f"all {len(frame_ids)} frames failed; first error: {errors[0][1]}")

    report = aggregate_run(
        results,
        gt_by_frame={t.frame_id: t.ground_truth for t in traces},
        scene_by_frame={t.frame_id: t.scene_truth for t in traces},
        class_table=config.class_table,
        score_threshold=config.score_threshold,
        failed_frames=len(errors),
    )
    return RunOutput(report=report, frames=results, errors=errors)


# All 8 strategy subsets in deterministic order: by size, then by the fixed
# (threshold, category, region) toggle order.
ABLATION_SUBSETS: tuple[tuple[str, ...], ...] = (
    (),
    ("threshold_adjust",),
    ("category_weight",),
    ("region_focus",),
    ("threshold_adjust", "category_weight"),
    ("threshold_adjust", "region_focus"),
    ("category_weight", "region_focus"),
    ("threshold_adjust", "category_weight", "region_focus"),
)

_SUBSET_SHORT = {"threshold_adjust": "threshold", "category_weight": "category", "region_focus": "region"}


def subset_label(subset: tuple[str, ...]) -> str:
    if not subset:
        return "none"
    if len(subset) == 3:
        return "all"
    return "+".join(_SUBSET_SHORT[s] for s in subset)


@dataclass(frozen=True)
class AblationRow:
    label: str
    toggles: StrategyToggles
    report: RunReport
    output: RunOutput

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class AblationResult:
    rows: tuple[AblationRow, ...]

    __hash__ = None  # type: ignore[assignment]

    def row(self, label: str) -> AblationRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)


def run_ablation(
    config: ScenarioConfig,
    traces: Sequence[FrameTrace] | None = None,
    workers: int = 1,
) -> AblationResult:
    """Run every strategy-toggle subset on the same trace and seed."""
    if traces is None:
        if config.trace_path is None:
            raise ValueError("no trace: config.trace_path unset and no traces passed")
        traces = load_trace(config.trace_path, config.class_table)

    rows = []
    for subset in ABLATION_SUBSETS:
        toggles = StrategyToggles(
            threshold_adjust="threshold_adjust" in subset,
            category_weight="category_weight" in subset,
            region_focus="region_focus" in subset,
        )
        output = run_scenario(replace(config, strategies=toggles), traces=traces, workers=workers)
        rows.append(AblationRow(subset_label(subset), toggles, output.report, output))
    return AblationResult(tuple(rows))
