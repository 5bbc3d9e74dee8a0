"""Trace-driven backends and the deterministic cost accounting model.

Both backend contracts are plain synchronous lookups keyed by frame_id:
``detect`` returns recorded edge candidates, ``describe`` returns the
recorded cloud text verbatim (malformed text included — compliance is
measured downstream). Stores are immutable after construction and safe for
concurrent readers.

Timing is simulated, never measured: latency and compute come from the
configured cost model, and the optional jitter is drawn from a counter-based
generator keyed by (seed, frame_id), so results are reproducible under any
evaluation order or worker count.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import Candidate, CostModel, FrameTrace, Route, RouteDecision

STAGES = ("edge_infer", "uplink", "cloud_infer", "downlink", "mapping")


class UnknownFrameError(KeyError):
    """A backend was asked for a frame_id it has no record of."""

    def __init__(self, frame_id: str):
        super().__init__(frame_id)
        self.frame_id = frame_id

    def __str__(self) -> str:
        return f"unknown frame_id {self.frame_id!r}"


class TraceStore:
    """In-memory frame store serving both backend contracts."""

    def __init__(self, frames: Iterable[FrameTrace]):
        self._frames: dict[str, FrameTrace] = {}
        self._order: list[str] = []
        for f in frames:
            if f.frame_id in self._frames:
                raise ValueError(f"duplicate frame_id {f.frame_id!r}")
            self._frames[f.frame_id] = f
            self._order.append(f.frame_id)

    def __len__(self) -> int:
        return len(self._frames)

    @property
    def frame_ids(self) -> list[str]:
        """Frame ids in insertion (file) order."""
        return list(self._order)

    def frame(self, frame_id: str) -> FrameTrace:
        try:
            return self._frames[frame_id]
        except KeyError:
            raise UnknownFrameError(frame_id) from None

    def detect(self, frame_id: str) -> list[Candidate]:
        """Edge backend: the frame's recorded raw candidates, unmodified."""
        return list(self.frame(frame_id).edge_candidates)

    def describe(self, frame_id: str) -> str:
        """Cloud backend: the frame's recorded output text, verbatim."""
        return self.frame(frame_id).cloud_text


def jitter_ms(seed: int, frame_id: str, sigma: float) -> float:
    """Zero-mean Gaussian latency jitter for one frame.

    Counter-based: the Philox counter is derived from a hash of frame_id and
    the key from seed, so the draw depends only on (seed, frame_id).
    """
    if sigma <= 0.0:
        return 0.0
    digest = hashlib.sha256(frame_id.encode("utf-8")).digest()
    counter = int.from_bytes(digest[:16], "little")
    gen = np.random.Generator(np.random.Philox(key=np.uint64(seed), counter=counter))
    return float(gen.normal(0.0, sigma))


@dataclass(frozen=True)
class CostBreakdown:
    """Per-frame latency decomposition plus compute charge.

    latency_ms always equals the sum of the stage components; jitter is
    folded into the edge_infer stage and floored there, which keeps both the
    decomposition identity and non-negativity exact.
    """

    latency_ms: float
    compute_gflops: float
    components: dict[str, float]


def account(decision: RouteDecision, cost: CostModel, frame_id: str) -> CostBreakdown:
    """Charge one frame according to its route.

    Edge-only frames pay the edge stage alone; cloud-enhanced frames pay
    edge inference, the round trip (split evenly into uplink and downlink),
    cloud inference and the mapping overhead. Compute is edge_gflops plus,
    for cloud frames, cloud_gflops.
    """
    edge = cost.edge_latency_ms
    if cost.jitter_sigma_ms > 0.0:
        edge = max(0.0, edge + jitter_ms(cost.seed, frame_id, cost.jitter_sigma_ms))
    if decision.route is Route.EDGE_ONLY:
        components = {"edge_infer": edge, "uplink": 0.0, "cloud_infer": 0.0, "downlink": 0.0, "mapping": 0.0}
        compute = cost.edge_gflops
    else:
        half_rtt = cost.network_rtt_ms / 2.0
        components = {
            "edge_infer": edge,
            "uplink": half_rtt,
            "cloud_infer": cost.cloud_latency_ms,
            "downlink": half_rtt,
            "mapping": cost.mapping_overhead_ms,
        }
        compute = cost.edge_gflops + cost.cloud_gflops
    return CostBreakdown(sum(components.values()), compute, components)
