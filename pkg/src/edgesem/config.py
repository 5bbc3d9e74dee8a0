"""Scenario configuration: a JSON document mirroring the dataclasses 1:1.

Top-level keys: mode, seed, trace, class_table, scene_vocabulary, mapping,
routing, cost, pipeline, strategies, score_threshold. Section keys mirror
the corresponding dataclass fields exactly; unknown keys anywhere are errors
(this catches typos in coefficient names). seed is mandatory — there is no
wall-clock entropy anywhere in a run. cost.seed defaults to the run seed.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .mapping import StrategyToggles
from .model import CostModel, MappingParams, RoutingPolicy
from .pipeline import PipelineOptions
from .synth import DEFAULT_SCENE_VOCABULARY, SynthSpec


class ConfigError(ValueError):
    """Invalid or unparseable scenario configuration."""


class Mode(Enum):
    EDGE = "edge"
    CLOUD = "cloud"
    COLLAB = "collab"


@dataclass(frozen=True)
class ScenarioConfig:
    """One runnable scenario. CLOUD and EDGE modes ignore the routing gate."""

    mode: Mode
    seed: int
    class_table: dict[str, int]
    trace_path: str | None = None
    scene_vocabulary: tuple[str, ...] = DEFAULT_SCENE_VOCABULARY
    mapping: MappingParams = field(default_factory=MappingParams)
    routing: RoutingPolicy = field(default_factory=RoutingPolicy)
    cost: CostModel = field(default_factory=CostModel)
    pipeline: PipelineOptions = field(default_factory=PipelineOptions)
    strategies: StrategyToggles = field(default_factory=StrategyToggles)
    score_threshold: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not self.class_table:
            raise ConfigError("class_table must be non-empty")
        ids = list(self.class_table.values())
        if len(set(ids)) != len(ids):
            raise ConfigError("class_table ids must be unique")
        for name, cid in self.class_table.items():
            if not isinstance(name, str) or not name:
                raise ConfigError(f"class name {name!r} must be a non-empty string")
            if not isinstance(cid, int) or isinstance(cid, bool) or cid < 0:
                raise ConfigError(f"class id for {name!r} must be a non-negative integer")
        if self.score_threshold is not None and not 0.0 <= self.score_threshold <= 1.0:
            raise ConfigError(f"score_threshold must be in [0, 1], got {self.score_threshold!r}")

    __hash__ = None  # type: ignore[assignment]


def _build_section(cls: type, doc: dict, section: str) -> object:
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - names
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]!r} in section {section!r}")
    kwargs = {}
    for key, value in doc.items():
        # JSON arrays arrive as lists; tuple-typed fields expect tuples.
        kwargs[key] = tuple(value) if isinstance(value, list) else value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid section {section!r}: {exc}") from None


_SECTIONS = {
    "mapping": MappingParams,
    "routing": RoutingPolicy,
    "cost": CostModel,
    "pipeline": PipelineOptions,
    "strategies": StrategyToggles,
}
_TOP_KEYS = {"mode", "seed", "trace", "class_table", "scene_vocabulary", "score_threshold", *_SECTIONS}


def parse_config(doc: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key {sorted(unknown)[0]!r}")
    for key in ("mode", "seed", "class_table"):
        if key not in doc:
            raise ConfigError(f"missing required key {key!r}")

    raw_mode = doc["mode"]
    try:
        mode = Mode(raw_mode)
    except ValueError:
        raise ConfigError(f"mode must be one of {[m.value for m in Mode]}, got {raw_mode!r}") from None

    seed = doc["seed"]
    sections = {}
    for name, cls in _SECTIONS.items():
        raw = doc.get(name, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"section {name!r} must be an object")
        if name == "cost" and "seed" not in raw and isinstance(seed, int):
            raw = {**raw, "seed": seed}
        sections[name] = _build_section(cls, raw, name)

    vocabulary = doc.get("scene_vocabulary", list(DEFAULT_SCENE_VOCABULARY))
    if not isinstance(vocabulary, list) or not all(isinstance(s, str) for s in vocabulary):
        raise ConfigError("scene_vocabulary must be an array of strings")
    raw_table = doc["class_table"]
    if not isinstance(raw_table, dict):
        raise ConfigError("class_table must be an object of class name -> id")

    try:
        return ScenarioConfig(
            mode=mode,
            seed=seed,
            class_table=dict(raw_table),
            trace_path=doc.get("trace"),
            scene_vocabulary=tuple(vocabulary),
            score_threshold=doc.get("score_threshold"),
            **sections,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> ScenarioConfig:
    """Read and parse a scenario config file."""
    return parse_config(_load_json(path))


def parse_synth_config(doc: dict) -> SynthSpec:
    """Build a SynthSpec from a parsed JSON document (seed mandatory)."""
    if not isinstance(doc, dict):
        raise ConfigError("synth config must be a JSON object")
    if "seed" not in doc:
        raise ConfigError("missing required key 'seed'")
    return _build_section(SynthSpec, doc, "synth")  # type: ignore[return-value]


def load_synth_config(path: str | Path) -> SynthSpec:
    """Read and parse a synthetic-trace generator config file."""
    return parse_synth_config(_load_json(path))


def _load_json(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None


def config_to_dict(config: ScenarioConfig) -> dict:
    """Round-trippable JSON form of a config (used by scripts and tests)."""
    doc: dict = {
        "mode": config.mode.value,
        "seed": config.seed,
        "class_table": dict(config.class_table),
        "scene_vocabulary": list(config.scene_vocabulary),
        "mapping": dataclasses.asdict(config.mapping),
        "routing": dataclasses.asdict(config.routing),
        "cost": dataclasses.asdict(config.cost),
        "pipeline": dataclasses.asdict(config.pipeline),
        "strategies": dataclasses.asdict(config.strategies),
    }
    if config.trace_path is not None:
        doc["trace"] = config.trace_path
    if config.score_threshold is not None:
        doc["score_threshold"] = config.score_threshold
    return doc
