"""Run manifests: the declarative description of a pipeline run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import SOURCES

# Canonical stage order. Decontamination stays last on purpose: it guards
# benchmark fairness, so nothing may run after it and reintroduce overlap.
CANONICAL_STAGE_ORDER = ("heuristic", "recall", "dedup", "quality", "decontaminate")


@dataclass
class StageConfig:
    name: str
    enabled: bool = True
    options: dict = field(default_factory=dict)


@dataclass
class SourceSpec:
    path: str
    source: str
    weight: float = 1.0


@dataclass
class RunManifest:
    """Stages, sources, target mixing ratios, and the run seed.

    mixing_ratios maps source kind -> fraction of the final corpus; the
    fractions must sum to 1 within 1e-9.
    """

    stages: list[StageConfig] = field(default_factory=list)
    sources: list[SourceSpec] = field(default_factory=list)
    mixing_ratios: dict[str, float] = field(default_factory=dict)
    seed: int = 0

    def stage(self, name: str) -> StageConfig | None:
        for s in self.stages:
            if s.name == name:
                return s
        return None


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_manifest(manifest: RunManifest, allow_reorder: bool = False) -> ValidationReport:
    """List every violated invariant; an empty report means valid."""
    v: list[str] = []
    if manifest.mixing_ratios:
        total = sum(manifest.mixing_ratios.values())
        if abs(total - 1.0) > 1e-9:
            v.append(f"ratios sum to {total:g}")
        for source, ratio in manifest.mixing_ratios.items():
            if ratio < 0:
                v.append(f"ratio for {source!r} is negative")
            if source not in SOURCES:
                v.append(f"ratio names unknown source {source!r}")
    seen: set[str] = set()
    for stage in manifest.stages:
        if stage.name in seen:
            v.append(f"duplicate stage name {stage.name!r}")
        seen.add(stage.name)
        if stage.name not in CANONICAL_STAGE_ORDER:
            v.append(f"unknown stage {stage.name!r}")
    if not allow_reorder:
        named = [s.name for s in manifest.stages if s.name in CANONICAL_STAGE_ORDER]
        expected = [n for n in CANONICAL_STAGE_ORDER if n in named]
        if named != expected:
            v.append(
                f"stage order {named} deviates from canonical {list(expected)}"
                " (pass allow_reorder to acknowledge)"
            )
    for src in manifest.sources:
        if src.weight < 0:
            v.append(f"source {src.path!r} has negative weight")
        if src.source not in SOURCES:
            v.append(f"source {src.path!r} has unknown kind {src.source!r}")
    if not -(2**63) <= manifest.seed < 2**64:
        v.append("seed does not fit in 64 bits")
    return ValidationReport(v)


def manifest_to_dict(manifest: RunManifest) -> dict:
    return {
        "stages": [
            {"name": s.name, "enabled": s.enabled, "options": s.options}
            for s in manifest.stages
        ],
        "sources": [
            {"path": s.path, "source": s.source, "weight": s.weight}
            for s in manifest.sources
        ],
        "mixing_ratios": manifest.mixing_ratios,
        "seed": manifest.seed,
    }


def manifest_from_dict(data: dict) -> RunManifest:
    return RunManifest(
        stages=[
            StageConfig(
                name=s["name"],
                enabled=bool(s.get("enabled", True)),
                options=dict(s.get("options") or {}),
            )
            for s in data.get("stages", [])
        ],
        sources=[
            SourceSpec(
                path=s["path"], source=s["source"], weight=float(s.get("weight", 1.0))
            )
            for s in data.get("sources", [])
        ],
        mixing_ratios={k: float(val) for k, val in (data.get("mixing_ratios") or {}).items()},
        seed=int(data.get("seed", 0)),
    )


def load_manifest(path: str | Path) -> RunManifest:
    with open(path, encoding="utf-8") as fh:
        return manifest_from_dict(json.load(fh))


def save_manifest(manifest: RunManifest, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest_to_dict(manifest), fh, indent=2, sort_keys=False)
        fh.write("\n")
