"""Pipeline configuration and seed-set loading."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ShapeScriptError
from .model import Part


@dataclass(frozen=True)
class PipelineConfig:
    """Every numeric constant the pipeline depends on, with defaults."""

    K_A: int = 5
    K_I: int = 4
    tau_match: float = 0.25
    float_gap: float = 0.025
    max_combos: int = 10_000
    dof_weight: float = 1.0
    geo_weight: float = 10.0
    min_validations: int = 2
    voxel_res: int = 64
    n_points: int = 2048
    fscore_tau: float = 0.03
    noise_sigma: float = 0.05
    infer_samples: int = 1000
    infer_timeout_s: float = 4.0
    top_p: float = 0.9  # reserved for future neural candidate streams
    feedback_rounds: int = 2

    def __post_init__(self):
        assert self.K_A >= 1 and self.K_I >= 1
        assert 0 < self.top_p <= 1
        for f in dataclasses.fields(self):
            assert getattr(self, f.name) > 0, f"{f.name} must be positive"

    def replace(self, **kwargs) -> "PipelineConfig":
        return dataclasses.replace(self, **kwargs)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "PipelineConfig":
        names = {f.name: f.type for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            if key not in names:
                raise ShapeScriptError(f"unknown config key {key!r}")
            kind = names[key]
            kwargs[key] = int(value) if kind == "int" else float(value)
        return cls(**kwargs)

    @classmethod
    def from_config_file(cls, path) -> "PipelineConfig":
        mapping = {}
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ShapeScriptError(f"bad config line {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            mapping[key] = value
        return cls.from_mapping(mapping)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class SeedShape:
    shape_id: str
    parts: list[Part]
    render_path: str | None = None
    description: str | None = None


@dataclass
class SeedSet:
    shapes: list[SeedShape] = field(default_factory=list)

    def __post_init__(self):
        if not (1 <= len(self.shapes) <= 64):
            raise ShapeScriptError(f"seed sets hold 1-64 shapes, got {len(self.shapes)}")
        ids = [s.shape_id for s in self.shapes]
        if len(set(ids)) != len(ids):
            raise ShapeScriptError("duplicate shape ids in seed set")


def load_seed_set(path) -> SeedSet:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    shapes = []
    for entry in data["shapes"]:
        parts = [Part(p.get("label", ""), tuple(p["dims"]), tuple(p["center"])) for p in entry["parts"]]
        shapes.append(
            SeedShape(entry["id"], parts, entry.get("render_path"), entry.get("description"))
        )
    return SeedSet(shapes)


def save_seed_set(seed_set: SeedSet, path) -> None:
    data = {
        "shapes": [
            {
                "id": s.shape_id,
                "parts": [
                    {"label": p.label, "dims": list(p.dims), "center": list(p.center)} for p in s.parts
                ],
                **({"render_path": s.render_path} if s.render_path else {}),
                **({"description": s.description} if s.description else {}),
            }
            for s in seed_set.shapes
        ]
    }
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
