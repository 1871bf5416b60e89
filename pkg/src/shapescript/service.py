"""HTTP facade: execute, infer, edit, deform, and browse named assets."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from .ast import Library, LibraryFunction, ParamKind, ShapeProgram
from .config import PipelineConfig
from .deform import check_edit_correspondence, deform_mesh, load_obj, save_obj
from .errors import GeometryError, ProviderError, ShapeScriptError, SourceError
from .geometry import PointCloud, VoxelGrid
from .interpreter import execute_program
from .llm.provider import Provider
from .llm.stages import stage_edit
from .model import Part
from .parser import parse_program
from .printer import print_canonical, print_function
from .search import InferenceResult, SearchBudget, TargetObservation, infer_program


def _error_response(exc: ShapeScriptError) -> JSONResponse:
    status = 400
    if isinstance(exc, GeometryError) and exc.code == "LayoutMismatch":
        status = 409
    if isinstance(exc, ProviderError) and exc.code != "ReplayMiss":
        status = 503
    return JSONResponse(status_code=status, content={"error": exc.payload()})


def _part_json(part: Part, provenance: tuple[int, str]) -> dict:
    return {
        "label": part.label,
        "dims": list(part.dims),
        "center": list(part.center),
        "statement_index": provenance[0],
        "fn_name": provenance[1],
    }


def _fn_json(fn: LibraryFunction) -> dict:
    params = []
    for name, ptype in fn.params:
        entry = {"name": name, "type": ptype.kind.value}
        if ptype.kind is ParamKind.ENUM:
            entry["options"] = list(ptype.enum_options)
        params.append(entry)
    return {
        "name": fn.name,
        "frame_param": fn.frame_param,
        "params": params,
        "doc": {
            "description": fn.doc.description,
            "parts": fn.doc.parts_spec,
            "valid_options": list(fn.doc.valid_options),
            "parameters": dict(fn.doc.parameters_spec),
        },
        "has_body": fn.body is not None,
    }


def _parse_target(body: dict) -> TargetObservation:
    modality = body.get("modality", "primitives")
    payload = body.get("payload")
    if modality == "primitives":
        parts = [Part(p.get("label", ""), tuple(p["dims"]), tuple(p["center"])) for p in payload]
        return TargetObservation("primitives", parts)
    if modality == "pointcloud":
        return TargetObservation("pointcloud", PointCloud(np.array(payload, dtype=float).reshape(-1, 3)))
    if modality == "voxels":
        res = int(payload["resolution"])
        bounds = tuple(payload["bounds"])
        occ = np.zeros(res**3, dtype=bool)
        occ[np.asarray(payload["occupied"], dtype=int)] = True
        return TargetObservation("voxels", VoxelGrid(res, bounds, occ.reshape(res, res, res)))
    raise ShapeScriptError(f"unknown modality {modality!r}")


def _program_diff(before: str, after: str) -> list[str]:
    import difflib

    return list(
        difflib.unified_diff(before.splitlines(), after.splitlines(), lineterm="", n=1)
    )


def create_app(
    library: Library,
    samplers: list[LibraryFunction] | None = None,
    provider: Provider | None = None,
    data_dir=None,
    cfg: PipelineConfig = PipelineConfig(),
) -> FastAPI:
    app = FastAPI(title="shapescript service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    data = Path(data_dir) if data_dir else None
    samplers = samplers or []

    @app.exception_handler(ShapeScriptError)
    async def _handle(request: Request, exc: ShapeScriptError):  # noqa: ARG001
        return _error_response(exc)

    @app.get("/library")
    def get_library():
        return {
            "source": print_canonical(library),
            "functions": [_fn_json(fn) for fn in library.functions.values()],
            "samplers": [fn.name for fn in samplers],
        }

    @app.post("/execute")
    def post_execute(body: dict):
        prog = parse_program(body.get("program", ""), library)
        execution = execute_program(library, prog)
        return {
            "parts": [_part_json(p, prov) for p, prov in zip(execution.parts, execution.provenance)],
            "flags": execution.flags,
            "canonical": print_canonical(prog),
        }

    def _run_inference(body: dict, progress=None) -> InferenceResult:
        target = _parse_target(body)
        budget_body = body.get("budget", {})
        budget = SearchBudget(
            max_samples=int(budget_body.get("max_samples", cfg.infer_samples)),
            timeout_s=float(budget_body.get("timeout_s", cfg.infer_timeout_s)),
            seed=int(budget_body.get("seed", 0)),
        )
        if not samplers:
            raise ShapeScriptError("service has no samplers loaded")
        return infer_program(target, samplers, library, budget, cfg, progress=progress)

    @app.post("/infer")
    def post_infer(body: dict):
        result = _run_inference(body)
        return _finite_json(result.to_json())

    @app.post("/infer/stream")
    def post_infer_stream(body: dict):
        def events():
            updates: list[dict] = []

            def progress(samples: int, score: float, text: str):
                updates.append({"samples": samples, "score": _finite(score), "program": text})

            result = _run_inference(body, progress=progress)
            for update in updates:
                yield f"event: progress\ndata: {json.dumps(update)}\n\n"
            yield f"event: result\ndata: {json.dumps(_finite_json(result.to_json()))}\n\n"

        return StreamingResponse(events(), media_type="text/event-stream")

    @app.post("/edit")
    def post_edit(body: dict):
        if provider is None:
            raise ProviderError("no provider configured for /edit")
        prog = parse_program(body.get("program", ""), library)
        edited = stage_edit(prog, body.get("request", ""), library, provider)
        before = print_canonical(prog)
        after = print_canonical(edited)
        return {"program": after, "diff": _program_diff(before, after)}

    @app.post("/deform")
    def post_deform(body: dict):
        if data is None:
            raise ShapeScriptError("service has no data directory for meshes")
        mesh_ref = body["mesh"]
        mesh = load_obj(data / mesh_ref)
        prog_a = parse_program(body["program_a"], library)
        prog_b = parse_program(body["program_b"], library)
        check_edit_correspondence(prog_a, prog_b)
        parts_a = execute_program(library, prog_a).parts
        parts_b = execute_program(library, prog_b).parts
        if len(parts_a) != len(parts_b):
            raise GeometryError("edited program changes the part count", code="LayoutMismatch")
        deformed = deform_mesh(mesh, parts_a, parts_b)
        out_ref = f"{Path(mesh_ref).stem}_deformed.obj"
        save_obj(deformed, data / out_ref)
        return {"mesh": out_ref, "vertices": len(deformed.vertices)}

    @app.get("/shapes")
    def get_shapes():
        if data is None:
            return {"shapes": []}
        return {"shapes": sorted(p.name for p in data.glob("*.obj"))}

    @app.get("/programs")
    def get_programs():
        if data is None:
            return {"programs": []}
        out = {}
        for path in sorted(data.glob("*.ss")):
            out[path.name] = path.read_text(encoding="utf-8")
        return {"programs": out}

    return app


def _finite(x):
    if isinstance(x, float) and math.isinf(x):
        return None
    return x


def _finite_json(data):
    if isinstance(data, dict):
        return {k: _finite_json(v) for k, v in data.items()}
    if isinstance(data, list):
        return [_finite_json(v) for v in data]
    return _finite(data)
