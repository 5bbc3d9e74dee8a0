"""Semantic-to-parameter mapping: scene description in, detector controls out.

Three independent strategies:
  * threshold adjustment — the score threshold drops linearly with darkness
    (1 - brightness) and occlusion, clamped to [tau_min, tau0];
  * category weighting — per-class multiplier raised by crowding (person
    count strictly above p_th), occlusion, and the class prior;
  * region focus — candidates overlapping a suggested region get gain gamma.

A candidate's adjusted score is min(1, raw * weight * gain), compared
against the adjusted threshold. Multiplication preserves ranking within a
class and keeps each strategy independently ablatable: with all alphas and
betas zero and gamma = 1 (and omega0 = 1) the whole mapping is a no-op.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .model import BBox, Candidate, DetectorAdjustment, MappingParams, SemanticDescription, intersection_area


def adjust_threshold(params: MappingParams, b: float, o: float) -> float:
    """Adjusted score threshold for a frame with brightness b and occlusion o.

    Equals tau0 - alpha1*(1-b) - alpha2*o clamped into [tau_min, tau0]: the
    raw adjustment can go negative for large coefficients, which would admit
    every candidate, and it never rises above the baseline.
    """
    raw = params.tau0 - params.alpha1 * (1.0 - b) - params.alpha2 * o
    return min(params.tau0, max(params.tau_min, raw))


def category_weight(params: MappingParams, p: int, o: float, prior_c: float) -> float:
    """Weight for one class given person count p, occlusion o and its prior.

    omega0 + beta1*[p > p_th] + beta2*o + beta3*prior_c; the crowding
    indicator uses strict inequality, so p == p_th contributes nothing.
    """
    crowd = 1.0 if p > params.p_th else 0.0
    return params.omega0 + params.beta1 * crowd + params.beta2 * o + params.beta3 * prior_c


def region_gain(
    candidate: BBox,
    rois: Sequence[BBox],
    gamma: float,
    rho_overlap: float,
    mode: str = "overlap",
) -> float:
    """Score gain for a candidate box against suggested regions.

    Two-valued: returns gamma when the candidate counts as inside some
    region, else 1. "overlap" mode requires intersection-over-candidate-area
    >= rho_overlap; "center" mode requires the candidate center to fall
    inside a region (bounds inclusive). Empty regions always give 1.
    """
    if not rois:
        return 1.0
    if mode == "center":
        cx, cy = candidate.center
        for r in rois:
            if r.x1 <= cx <= r.x2 and r.y1 <= cy <= r.y2:
                return gamma
        return 1.0
    if mode != "overlap":
        raise ValueError(f"unknown roi mode {mode!r}")
    area = candidate.area
    for r in rois:
        if intersection_area(candidate, r) / area >= rho_overlap:
            return gamma
    return 1.0


def derive_adjustment(
    params: MappingParams,
    desc: SemanticDescription,
    class_table: Mapping[str, int],
    roi_mode: str = "overlap",
) -> DetectorAdjustment:
    """Turn one scene description into per-frame detector control signals.

    Every class in the table gets a weight; classes absent from the prior
    contribute prior mass 0 (absence of evidence is not evidence). Regions
    and gamma pass through for rescoring.
    """
    tau_c = adjust_threshold(params, desc.brightness, desc.occlusion)
    weights = {
        cid: category_weight(params, desc.person_count, desc.occlusion, desc.category_prior.get(cid, 0.0))
        for cid in class_table.values()
    }
    return DetectorAdjustment(
        tau_c=tau_c,
        class_weights=weights,
        rois=desc.rois,
        gamma=params.gamma,
        rho_overlap=params.rho_overlap,
        roi_mode=roi_mode,
    )


def rescore(candidates: Sequence[Candidate], adj: DetectorAdjustment) -> list[Candidate]:
    """Apply class weights and region gains to candidate scores.

    Scores become min(1, score * weight * gain); order is preserved and the
    input is left untouched. A candidate whose class is missing from the
    adjustment is a configuration error and raises KeyError.
    """
    out = []
    for c in candidates:
        gain = region_gain(c.bbox, adj.rois, adj.gamma, adj.rho_overlap, adj.roi_mode)
        score = min(1.0, c.score * adj.class_weights[c.class_id] * gain)
        out.append(Candidate(c.bbox, c.class_id, score))
    return out


@dataclass(frozen=True)
class StrategyToggles:
    """Which mapping strategies are active. Disabled ones become identities."""

    threshold_adjust: bool = True
    category_weight: bool = True
    region_focus: bool = True


def apply_toggles(params: MappingParams, toggles: StrategyToggles) -> MappingParams:
    """Replace disabled strategies with their identity coefficients.

    threshold_adjust off -> alphas 0 (threshold stays tau0); category_weight
    off -> betas 0 (every weight is omega0); region_focus off -> gamma 1.
    """
    updates: dict = {}
    if not toggles.threshold_adjust:
        updates.update(alpha1=0.0, alpha2=0.0)
    if not toggles.category_weight:
        updates.update(beta1=0.0, beta2=0.0, beta3=0.0)
    if not toggles.region_focus:
        updates.update(gamma=1.0)
    return replace(params, **updates) if updates else params
