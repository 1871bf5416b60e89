"""Compression objective and sampler-driven program inference."""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field

from . import ast, geometry
from .ast import Library, LibraryFunction, ShapeProgram
from .config import PipelineConfig
from .errors import ShapeScriptError
from .geometry import INFINITE, PointCloud, VoxelGrid, chamfer, fscore, iou, match_error
from .interpreter import execute_program, group_parts, run_sampler
from .model import CoordFrame, ExecLimits, Part
from .printer import count_dof_tokens, print_canonical
from .validation import LabelVoter


@dataclass(frozen=True)
class Objective:
    dof_term: float
    geo_term: float
    total: float


@dataclass(frozen=True)
class TargetObservation:
    modality: str  # primitives | pointcloud | voxels
    payload: object  # list[Part] | PointCloud | VoxelGrid

    def __post_init__(self):
        kinds = {"primitives": list, "pointcloud": PointCloud, "voxels": VoxelGrid}
        if self.modality not in kinds:
            raise ShapeScriptError(f"unknown modality {self.modality!r}")
        if not isinstance(self.payload, kinds[self.modality]):
            raise ShapeScriptError(f"payload does not match modality {self.modality!r}")


@dataclass(frozen=True)
class SearchBudget:
    max_samples: int = 1000
    timeout_s: float = 4.0
    seed: int = 0

    def __post_init__(self):
        assert self.max_samples > 0 and self.timeout_s > 0


def objective(
    prog: ShapeProgram,
    target: list[Part],
    lib: Library,
    cfg: PipelineConfig,
    limits: ExecLimits = ExecLimits(),
) -> Objective:
    """dof_weight * token count + geo_weight * graded matching error."""
    dof = count_dof_tokens(prog)
    try:
        parts = execute_program(lib, prog, limits).parts
    except ShapeScriptError:
        return Objective(float(dof), INFINITE, INFINITE)
    geo = match_error(parts, target, tau=INFINITE)
    if math.isinf(geo):
        return Objective(float(dof), INFINITE, INFINITE)
    return Objective(float(dof), geo, cfg.dof_weight * dof + cfg.geo_weight * geo)


@dataclass
class InferenceResult:
    program: ShapeProgram
    score: float
    metrics: dict
    samples: int
    elapsed_s: float
    seed: int
    timed_out: bool = False

    def to_json(self) -> dict:
        return {
            "program": print_canonical(self.program),
            "score": self.score,
            "metrics": self.metrics,
            "samples": self.samples,
            "elapsed_s": round(self.elapsed_s, 3),
            "seed": self.seed,
            "timed_out": self.timed_out,
        }


def _target_frame(target: TargetObservation) -> CoordFrame:
    if target.modality == "primitives":
        return group_parts(target.payload)
    if target.modality == "pointcloud":
        pts = target.payload.points
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        dims = tuple(max(float(b - a), 1e-6) for a, b in zip(lo, hi))
        center = tuple(float((a + b) / 2) for a, b in zip(lo, hi))
        return CoordFrame(center, dims)
    lo, hi = target.payload.bounds
    side = hi - lo
    return CoordFrame(((lo + hi) / 2,) * 3, (side,) * 3)


def _score_candidate(
    parts: list[Part], prog: ShapeProgram, target: TargetObservation, lib: Library, cfg: PipelineConfig
) -> float:
    """Lower is better for every modality (IoU is negated)."""
    if target.modality == "primitives":
        geo = match_error(parts, target.payload, tau=INFINITE)
        if math.isinf(geo):
            return INFINITE
        return cfg.dof_weight * count_dof_tokens(prog) + cfg.geo_weight * geo
    if not parts:
        return INFINITE
    if target.modality == "pointcloud":
        cloud = geometry.sample_points(parts, cfg.n_points, seed=0)
        return chamfer(cloud, target.payload)
    grid = geometry.voxelize(parts, target.payload.resolution, target.payload.bounds)
    return -iou(grid, target.payload)


def infer_program(
    target: TargetObservation,
    samplers: list[LibraryFunction],
    lib: Library,
    budget: SearchBudget,
    cfg: PipelineConfig,
    limits: ExecLimits = ExecLimits(),
    progress=None,
) -> InferenceResult:
    """Draw seeded sampler programs, keep the best-scoring, merge-improve
    non-best candidates in the primitives modality."""
    if not samplers:
        raise ShapeScriptError("inference requires at least one sampler")
    if target.modality == "primitives" and not target.payload:
        raise ShapeScriptError("inference requires a nonempty target")
    rng = random.Random(budget.seed)
    cf = _target_frame(target)
    best_prog: ShapeProgram | None = None
    best_score = INFINITE
    seen_scores: dict[str, float] = {}
    start = time.monotonic()
    samples = 0
    timed_out = False
    for _ in range(budget.max_samples):
        if time.monotonic() - start > budget.timeout_s:
            timed_out = True
            break
        sampler = samplers[rng.randrange(len(samplers))]
        draw_seed = rng.getrandbits(63)
        samples += 1
        try:
            prog = run_sampler(lib, sampler, cf, draw_seed, limits)
        except ShapeScriptError:
            continue
        text = print_canonical(prog)
        if text in seen_scores:
            continue
        try:
            parts = execute_program(lib, prog, limits).parts
            score = _score_candidate(parts, prog, target, lib, cfg)
        except ShapeScriptError:
            score = INFINITE
        seen_scores[text] = score
        if score < best_score:
            best_prog, best_score = prog, score
            if progress is not None:
                progress(samples, best_score, text)
        elif best_prog is not None and target.modality == "primitives" and not math.isinf(score):
            merged = merge_improve(best_prog, prog, target.payload, lib, cfg, limits)
            if merged is not best_prog:
                merged_score = _score_candidate(
                    execute_program(lib, merged, limits).parts, merged, target, lib, cfg
                )
                if merged_score < best_score:
                    best_prog, best_score = merged, merged_score
    if best_prog is None:
        raise ShapeScriptError("search produced no executable candidate")
    elapsed = time.monotonic() - start
    metrics = score_reconstruction(best_prog, target, lib, cfg, limits)
    return InferenceResult(best_prog, best_score, metrics, samples, elapsed, budget.seed, timed_out)


def _assign_to_target(parts: list[Part], target: list[Part]) -> list[int]:
    """Assign each part to a distinct target index minimizing total mmcd."""
    import numpy as np
    from scipy.optimize import linear_sum_assignment

    cost = np.array([[geometry.mmcd(p, t) for t in target] for p in parts])
    rows, cols = linear_sum_assignment(cost)
    out = [-1] * len(parts)
    for r, c in zip(rows, cols):
        out[r] = int(c)
    return out


def merge_improve(
    best: ShapeProgram,
    candidate: ShapeProgram,
    target: list[Part],
    lib: Library,
    cfg: PipelineConfig,
    limits: ExecLimits = ExecLimits(),
) -> ShapeProgram:
    """Splice candidate calls into the best program when doing so strictly
    lowers the objective. Never returns a worse-scoring program."""
    current = best
    current_obj = objective(current, target, lib, cfg, limits).total
    for stmt in candidate.statements:
        if not isinstance(stmt, ast.Call):
            continue
        try:
            stmt_parts = execute_program(lib, ShapeProgram((stmt,)), limits).parts
        except ShapeScriptError:
            continue
        if not stmt_parts or len(stmt_parts) > len(target):
            continue
        covered = set(_assign_to_target(stmt_parts, target))
        try:
            current_exec = execute_program(lib, current, limits)
        except ShapeScriptError:
            continue
        if len(current_exec.parts) <= len(target):
            part_assign = _assign_to_target(current_exec.parts, target)
        else:
            continue
        remove: set[int] = set()
        for (stmt_index, _), tgt in zip(current_exec.provenance, part_assign):
            if tgt in covered:
                remove.add(stmt_index)
        kept = [s for i, s in enumerate(current.statements) if i not in remove]
        insert_at = min(remove) if remove else len(kept)
        trial = ShapeProgram(tuple(kept[:insert_at] + [stmt] + kept[insert_at:]))
        trial_obj = objective(trial, target, lib, cfg, limits).total
        if trial_obj < current_obj:
            current, current_obj = trial, trial_obj
    return current


def score_reconstruction(
    prog: ShapeProgram,
    target: TargetObservation,
    lib: Library,
    cfg: PipelineConfig,
    limits: ExecLimits = ExecLimits(),
) -> dict:
    """Per-modality reconstruction metrics for a program against a target."""
    parts = execute_program(lib, prog, limits).parts
    if target.modality == "primitives":
        obj = objective(prog, target.payload, lib, cfg, limits)
        return {
            "match_error": match_error(parts, target.payload, tau=INFINITE),
            "objective": obj.total,
            "dof": obj.dof_term,
        }
    if target.modality == "pointcloud":
        if not parts:
            return {"chamfer": INFINITE, "fscore": 0.0}
        cloud = geometry.sample_points(parts, cfg.n_points, seed=0)
        return {
            "chamfer": chamfer(cloud, target.payload),
            "fscore": fscore(cloud, target.payload, cfg.fscore_tau),
        }
    if not parts:
        empty = geometry.voxelize([], target.payload.resolution, target.payload.bounds)
        return {"iou": iou(empty, target.payload)}
    grid = geometry.voxelize(parts, target.payload.resolution, target.payload.bounds)
    return {"iou": iou(grid, target.payload)}


def assign_labels(execution, voter: LabelVoter) -> list[Part]:
    """Relabel executed parts with each producing function's winning label."""
    labeled: list[Part] = []
    for part, (_, fn_name) in zip(execution.parts, execution.provenance):
        if fn_name == "make_part":
            labeled.append(part)
        else:
            labeled.append(Part(voter.winner(fn_name), part.dims, part.center))
    return labeled


def save_inference(result: InferenceResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
