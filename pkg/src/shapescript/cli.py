"""Command-line driver for the library-design pipeline and DSL utilities."""

from __future__ import annotations

import hashlib
import json
import math
import random
import sys
from pathlib import Path

import click

from .config import PipelineConfig, load_seed_set
from .deform import check_edit_correspondence, deform_mesh, load_obj, save_obj
from .errors import ShapeScriptError
from .geometry import INFINITE, match_error, read_voxels, read_xyz
from .interpreter import execute_program, group_parts, run_sampler
from .llm.provider import provider_from_spec
from .model import CoordFrame, Part
from .parser import parse_library, parse_program
from .pipeline import load_library, load_samplers, run_design_pipeline, write_design_outputs
from .printer import count_dof_tokens, print_canonical
from .search import SearchBudget, TargetObservation, infer_program, save_inference
from .validation import ValidatedApplication


def _fail(exc: ShapeScriptError, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps({"error": exc.payload()}), err=True)
    else:
        click.echo(f"error: {exc}", err=True)
    sys.exit(1)


def _load_config(config_path, overrides) -> PipelineConfig:
    cfg = PipelineConfig.from_config_file(config_path) if config_path else PipelineConfig()
    if overrides:
        mapping = cfg.to_dict()
        for item in overrides:
            key, _, value = item.partition("=")
            mapping[key.strip()] = value.strip()
        cfg = PipelineConfig.from_mapping(mapping)
    return cfg


def _resolve_seed(seed) -> int:
    if seed is not None:
        return seed
    return random.SystemRandom().getrandbits(32)


@click.group()
def main():
    """Design, validate, and use libraries of cuboid shape abstractions."""


@main.command()
@click.option("--seed-set", "seed_set_path", required=True, type=click.Path(exists=True))
@click.option("--descriptions", "descriptions_path", required=True, type=click.Path(exists=True))
@click.option("--provider", "provider_spec", required=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--set", "overrides", multiple=True, help="config override key=value")
@click.option("--seed", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
def design(seed_set_path, descriptions_path, provider_spec, out_dir, config_path, overrides, seed, as_json):
    """Run the full library-design pipeline and write its artifacts."""
    try:
        cfg = _load_config(config_path, overrides)
        seed = _resolve_seed(seed)
        seed_set = load_seed_set(seed_set_path)
        descriptions = [
            line.strip()
            for line in Path(descriptions_path).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        record_to = Path(out_dir) / "transcript.jsonl" if provider_spec.startswith("live:") else None
        provider = provider_from_spec(provider_spec, record_to=record_to)
        result = run_design_pipeline(seed_set, descriptions, provider, cfg, seed)
        input_hashes = {
            "seed_set": hashlib.sha256(Path(seed_set_path).read_bytes()).hexdigest(),
            "descriptions": hashlib.sha256(Path(descriptions_path).read_bytes()).hexdigest(),
        }
        manifest = write_design_outputs(result, out_dir, cfg, seed, provider_spec, input_hashes)
        click.echo(
            json.dumps(
                {
                    "library_functions": sorted(result.library.functions),
                    "removed": manifest["removed_functions"],
                    "seed_programs": len(result.seed_programs),
                    "samplers": len(result.samplers),
                    "out": str(out_dir),
                }
            )
        )
    except ShapeScriptError as exc:
        _fail(exc, as_json)


@main.command()
@click.option("--lib", "lib_path", required=True, type=click.Path(exists=True))
@click.option("--seed-set", "seed_set_path", required=True, type=click.Path(exists=True))
@click.option("--report", "report_path", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def validate(lib_path, seed_set_path, report_path, as_json):
    """Replay recorded validations against the library and seed set."""
    from .geometry import normalize_parts

    try:
        lib = load_library(lib_path)
        seed_set = load_seed_set(seed_set_path)
        shapes = {
            s.shape_id: normalize_parts(s.parts, "unit-sphere")[0] for s in seed_set.shapes
        }
        if report_path is None:
            report_path = Path(lib_path).parent / "validation_report.json"
        reports = json.loads(Path(report_path).read_text(encoding="utf-8"))
        cfg = PipelineConfig()
        from .interpreter import execute_function

        checked = mismatches = 0
        for report in reports:
            fn_name = report["fn_name"]
            if fn_name not in lib.functions:
                continue
            for impl in report["impls"]:
                for record in impl["validated"]:
                    shape_id = record["shape_id"]
                    if shape_id not in shapes:
                        continue
                    group = [shapes[shape_id][i] for i in record["part_group"]]
                    cf = group_parts(group)
                    try:
                        out = execute_function(lib, fn_name, cf, record["params"])
                        err = match_error(out, group, cfg.tau_match)
                    except ShapeScriptError:
                        err = INFINITE
                    checked += 1
                    if math.isinf(err) or abs(err - record["error"]) > 1e-6:
                        mismatches += 1
        click.echo(json.dumps({"checked": checked, "mismatches": mismatches}))
        if mismatches:
            sys.exit(1)
    except ShapeScriptError as exc:
        _fail(exc, as_json)


def _load_target(path: str) -> TargetObservation:
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        entries = data["parts"] if isinstance(data, dict) else data
        parts = [Part(p.get("label", ""), tuple(p["dims"]), tuple(p["center"])) for p in entries]
        return TargetObservation("primitives", parts)
    if path.suffix == ".xyz":
        return TargetObservation("pointcloud", read_xyz(path))
    if path.suffix in (".bin", ".vox"):
        return TargetObservation("voxels", read_voxels(path))
    raise ShapeScriptError(f"cannot infer target modality from {path.suffix!r}")


@main.command()
@click.option("--lib", "lib_path", required=True, type=click.Path(exists=True))
@click.option("--samplers", "samplers_path", required=True, type=click.Path(exists=True))
@click.option("--target", "target_path", required=True, type=click.Path(exists=True))
@click.option("--budget", type=int, default=1000)
@click.option("--timeout", type=float, default=4.0)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_path", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def infer(lib_path, samplers_path, target_path, budget, timeout, seed, out_path, as_json):
    """Infer a program for a target layout, point cloud, or voxel grid."""
    try:
        lib = load_library(lib_path)
        samplers = load_samplers(samplers_path)
        target = _load_target(target_path)
        result = infer_program(
            target, samplers, lib, SearchBudget(budget, timeout, _resolve_seed(seed)), PipelineConfig()
        )
        if out_path:
            save_inference(result, out_path)
        payload = result.to_json()
        payload["score"] = None if math.isinf(result.score) else result.score
        click.echo(json.dumps(payload))
    except ShapeScriptError as exc:
        _fail(exc, as_json)


@main.command()
@click.option("--lib", "lib_path", required=True, type=click.Path(exists=True))
@click.option("--samplers", "samplers_path", required=True, type=click.Path(exists=True))
@click.option("--n", "count", type=int, default=10)
@click.option("--seed", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
def sample(lib_path, samplers_path, count, seed, as_json):
    """Draw programs from the samplers and print their executed layouts."""
    try:
        lib = load_library(lib_path)
        samplers = load_samplers(samplers_path)
        if not samplers:
            raise ShapeScriptError("no samplers found")
        seed = _resolve_seed(seed)
        cf = CoordFrame((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
        out = []
        for i in range(count):
            sampler = samplers[i % len(samplers)]
            prog = run_sampler(lib, sampler, cf, seed + i)
            execution = execute_program(lib, prog)
            out.append(
                {
                    "sampler": sampler.name,
                    "seed": seed + i,
                    "program": print_canonical(prog),
                    "parts": [
                        {"label": p.label, "dims": list(p.dims), "center": list(p.center)}
                        for p in execution.parts
                    ],
                }
            )
        click.echo(json.dumps(out, indent=2))
    except ShapeScriptError as exc:
        _fail(exc, as_json)


@main.command()
@click.option("--lib", "lib_path", required=True, type=click.Path(exists=True))
@click.option("--program", "program_path", required=True, type=click.Path(exists=True))
@click.option("--request", required=True)
@click.option("--provider", "provider_spec", required=True)
@click.option("--json", "as_json", is_flag=True)
def edit(lib_path, program_path, request, provider_spec, as_json):
    """Apply a natural-language edit to a program via the provider."""
    from .llm.stages import stage_edit

    try:
        lib = load_library(lib_path)
        prog = parse_program(Path(program_path).read_text(encoding="utf-8"), lib)
        provider = provider_from_spec(provider_spec)
        edited = stage_edit(prog, request, lib, provider)
        click.echo(print_canonical(edited), nl=False)
    except ShapeScriptError as exc:
        _fail(exc, as_json)


@main.command()
@click.option("--mesh", "mesh_path", required=True, type=click.Path(exists=True))
@click.option("--lib", "lib_path", required=True, type=click.Path(exists=True))
@click.option("--from", "from_path", required=True, type=click.Path(exists=True))
@click.option("--to", "to_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def deform(mesh_path, lib_path, from_path, to_path, out_path, as_json):
    """Deform a mesh between the layouts of two program versions."""
    try:
        lib = load_library(lib_path)
        prog_a = parse_program(Path(from_path).read_text(encoding="utf-8"), lib)
        prog_b = parse_program(Path(to_path).read_text(encoding="utf-8"), lib)
        check_edit_correspondence(prog_a, prog_b)
        parts_a = execute_program(lib, prog_a).parts
        parts_b = execute_program(lib, prog_b).parts
        mesh = load_obj(mesh_path)
        deformed = deform_mesh(mesh, parts_a, parts_b)
        save_obj(deformed, out_path)
        click.echo(json.dumps({"out": str(out_path), "vertices": len(deformed.vertices)}))
    except ShapeScriptError as exc:
        _fail(exc, as_json)


@main.command()
@click.option("--lib", "lib_path", required=True, type=click.Path(exists=True))
@click.option("--samplers", "samplers_path", type=click.Path(exists=True))
@click.option("--provider", "provider_spec", default=None)
@click.option("--data-dir", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8096)
def serve(lib_path, samplers_path, provider_spec, data_dir, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    lib = load_library(lib_path)
    samplers = load_samplers(samplers_path) if samplers_path else []
    provider = provider_from_spec(provider_spec) if provider_spec else None
    app = create_app(lib, samplers, provider, data_dir)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--lib", "lib_path", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def fmt(path, lib_path, as_json):
    """Reprint a library or program file in canonical form."""
    try:
        text = Path(path).read_text(encoding="utf-8")
        if lib_path:
            node = parse_program(text, load_library(lib_path))
        else:
            node = parse_library(text)
        click.echo(print_canonical(node), nl=False)
    except ShapeScriptError as exc:
        _fail(exc, as_json)


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--lib", "lib_path", required=True, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def dof(path, lib_path, as_json):
    """Count degree-of-freedom tokens of a program."""
    try:
        lib = load_library(lib_path)
        prog = parse_program(Path(path).read_text(encoding="utf-8"), lib)
        click.echo(str(count_dof_tokens(prog)))
    except ShapeScriptError as exc:
        _fail(exc, as_json)


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--lib", "lib_path", required=True, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def run(path, lib_path, as_json):
    """Execute a program and print the produced parts."""
    try:
        lib = load_library(lib_path)
        prog = parse_program(Path(path).read_text(encoding="utf-8"), lib)
        execution = execute_program(lib, prog)
        click.echo(
            json.dumps(
                {
                    "parts": [
                        {
                            "label": p.label,
                            "dims": list(p.dims),
                            "center": list(p.center),
                            "statement_index": prov[0],
                            "fn_name": prov[1],
                        }
                        for p, prov in zip(execution.parts, execution.provenance)
                    ],
                    "flags": execution.flags,
                }
            )
        )
    except ShapeScriptError as exc:
        _fail(exc, as_json)


if __name__ == "__main__":
    main()
