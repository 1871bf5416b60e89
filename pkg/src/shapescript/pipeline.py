"""End-to-end library design: interface -> proposals -> implementations ->
geometric validation -> seed programs -> label voter -> samplers."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from .ast import Library, LibraryFunction, ShapeProgram
from .config import PipelineConfig, SeedSet
from .errors import ProviderError
from .geometry import normalize_parts
from .llm.provider import Provider
from .llm.stages import (
    stage_applications,
    stage_implementations,
    stage_interface,
    stage_sampler,
)
from .model import Part
from .parser import parse_library
from .printer import print_canonical
from .validation import (
    LabelVoter,
    ValidatedApplication,
    ValidationReport,
    assemble_seed_programs,
    build_label_voter,
    select_implementation,
    validate_function,
)

log = logging.getLogger(__name__)


@dataclass
class DesignResult:
    library: Library
    seed_programs: dict[str, ShapeProgram]
    validated: list[ValidatedApplication]
    reports: list[ValidationReport]
    voter: LabelVoter
    samplers: list[LibraryFunction]
    shapes: dict[str, list[Part]]  # unit-sphere normalized seed shapes
    warnings: list[str] = field(default_factory=list)
    removed_functions: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)


def run_design_pipeline(
    seed_set: SeedSet,
    descriptions: list[str],
    provider: Provider,
    cfg: PipelineConfig = PipelineConfig(),
    seed: int = 0,
) -> DesignResult:
    timings: dict[str, float] = {}

    def mark(stage: str, start: float) -> None:
        timings[stage] = round(time.monotonic() - start, 3)

    t0 = time.monotonic()
    shapes: dict[str, list[Part]] = {}
    for shape in seed_set.shapes:
        normalized, _ = normalize_parts(shape.parts, "unit-sphere")
        shapes[shape.shape_id] = normalized
    mark("normalize", t0)

    t0 = time.monotonic()
    interface_lib = stage_interface(descriptions, provider)
    mark("interface", t0)

    warnings: list[str] = []
    t0 = time.monotonic()
    proposals = []
    for shape in seed_set.shapes:
        proposals.extend(
            stage_applications(shape, shapes[shape.shape_id], interface_lib, provider, cfg, warnings)
        )
    mark("applications", t0)

    final_lib = Library()
    validated: list[ValidatedApplication] = []
    reports: list[ValidationReport] = []
    removed: list[str] = []
    t0 = time.monotonic()
    for fn in interface_lib.functions.values():
        fn_proposals = [p for p in proposals if p.fn_name == fn.name]
        if not fn_proposals:
            removed.append(fn.name)
            warnings.append(f"{fn.name}: no surviving proposals, removed")
            continue
        try:
            impls = stage_implementations(fn, fn_proposals, shapes, provider, cfg, seed=seed)
        except ProviderError as exc:
            removed.append(fn.name)
            warnings.append(f"{fn.name}: {exc}")
            continue
        pool = fn_proposals + impls.extra_proposals
        report = validate_function(final_lib, fn.name, impls.bodies, pool, shapes, cfg, seed=seed)
        reports.append(report)
        winner = select_implementation(report, cfg)
        if winner is None:
            removed.append(fn.name)
            warnings.append(f"{fn.name}: no implementation reached {cfg.min_validations} validated shapes")
            continue
        final_lib.functions[fn.name] = impls.bodies[winner]
        validated.extend(report.impls[winner].validated)
    mark("validation", t0)

    t0 = time.monotonic()
    seed_programs = assemble_seed_programs(validated, shapes, final_lib, cfg)
    voter = build_label_voter(validated, shapes)
    mark("assembly", t0)

    t0 = time.monotonic()
    samplers = stage_sampler(
        final_lib, seed_programs, provider, cfg, validated, shapes, seed=seed
    )
    mark("sampler", t0)

    return DesignResult(
        final_lib,
        seed_programs,
        validated,
        reports,
        voter,
        samplers,
        shapes,
        warnings,
        removed,
        timings,
    )


# ---------------------------------------------------------------------------
# Artifact writing


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_design_outputs(
    result: DesignResult,
    out_dir,
    cfg: PipelineConfig,
    seed: int,
    provider_mode: str,
    input_hashes: dict[str, str],
) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "library.ss").write_text(print_canonical(result.library), encoding="utf-8")
    programs_dir = out / "programs"
    programs_dir.mkdir(exist_ok=True)
    for shape_id, prog in sorted(result.seed_programs.items()):
        (programs_dir / f"{shape_id}.ss").write_text(print_canonical(prog), encoding="utf-8")
    sampler_lib = Library()
    for sampler in result.samplers:
        sampler_lib.functions[sampler.name] = sampler
    (out / "samplers.ss").write_text(print_canonical(sampler_lib), encoding="utf-8")
    report_payload = [r.to_json() for r in result.reports]
    (out / "validation_report.json").write_text(
        json.dumps(report_payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out / "voter.json").write_text(
        json.dumps(result.voter.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if result.warnings:
        (out / "warnings.log").write_text("\n".join(result.warnings) + "\n", encoding="utf-8")
    output_hashes = {
        name: _sha256_file(out / name)
        for name in ("library.ss", "samplers.ss", "validation_report.json", "voter.json")
    }
    for path in sorted(programs_dir.glob("*.ss")):
        output_hashes[f"programs/{path.name}"] = _sha256_file(path)
    manifest = {
        "config": cfg.to_dict(),
        "input_hashes": input_hashes,
        "provider_mode": provider_mode,
        "seed": seed,
        "stage_timings": result.timings,
        "output_hashes": output_hashes,
        "removed_functions": sorted(result.removed_functions),
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest


def load_library(path) -> Library:
    return parse_library(Path(path).read_text(encoding="utf-8"))


def load_samplers(path) -> list[LibraryFunction]:
    lib = load_library(path)
    return [fn for fn in lib.functions.values() if fn.body is not None and not fn.params]
