"""Geometric grounding of LLM proposals: parameter expansion, implementation
validation and selection, greedy seed-program assembly, and label voting."""

from __future__ import annotations

import itertools
import json
import random
from collections import Counter
from dataclasses import dataclass, field

from . import ast
from .ast import Library, LibraryFunction, ShapeProgram
from .config import PipelineConfig
from .errors import ShapeScriptError
from .geometry import INFINITE, match_error
from .interpreter import execute_function, group_parts
from .model import ExecLimits, Part
from .printer import count_dof_tokens, fmt_float

Masked = None  # masked argument sentinel inside proposals


@dataclass(frozen=True)
class ApplicationProposal:
    shape_id: str
    fn_name: str
    args: tuple  # literal per non-frame parameter; None where masked
    part_group: tuple[int, ...]  # indices into the shape's part list
    proposal_round: int = 1

    def __post_init__(self):
        assert self.part_group, "part_group must be nonempty"
        assert len(set(self.part_group)) == len(self.part_group)

    def is_concrete(self) -> bool:
        return all(a is not None for a in self.args)


@dataclass(frozen=True)
class ValidatedApplication:
    shape_id: str
    fn_name: str
    params: tuple
    part_group: tuple[int, ...]
    error: float
    impl_index: int


@dataclass
class ImplementationStats:
    impl_index: int
    validated: list[ValidatedApplication] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def shapes_covered(self) -> set[str]:
        return {v.shape_id for v in self.validated}

    @property
    def mean_error(self) -> float:
        if not self.validated:
            return INFINITE
        return sum(v.error for v in self.validated) / len(self.validated)


@dataclass
class ValidationReport:
    fn_name: str
    impls: list[ImplementationStats] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "fn_name": self.fn_name,
            "impls": [
                {
                    "impl_index": s.impl_index,
                    "validated": [
                        {
                            "shape_id": v.shape_id,
                            "params": list(v.params),
                            "part_group": list(v.part_group),
                            "error": v.error,
                        }
                        for v in s.validated
                    ],
                    "distinct_shapes": sorted(s.shapes_covered),
                    "mean_error": s.mean_error if s.validated else None,
                    "failures": s.failures[:20],
                }
                for s in self.impls
            ],
        }


def prune_proposal(proposal: ApplicationProposal, doc: ast.DocString) -> tuple[bool, str]:
    """Accept iff the group size is one of the documented valid options."""
    size = len(proposal.part_group)
    if size not in doc.valid_options:
        return False, f"group of {size} parts not in valid options {list(doc.valid_options)}"
    return True, ""


def _float_dedup(values: list[float], gap: float) -> list[float]:
    kept: list[float] = []
    for v in values:
        if all(abs(v - k) >= gap for k in kept):
            kept.append(v)
    return kept


def expand_parameter_sets(
    proposals: list[ApplicationProposal],
    params: tuple[tuple[str, ast.ParamType], ...],
    cfg: PipelineConfig,
    seed: int = 0,
) -> list[tuple]:
    """Expand observed per-parameter values into capped candidate vectors.

    LLM-proposed fully-concrete vectors come first and are always retained;
    the Cartesian product of per-parameter unique values fills the rest, with
    seeded subsampling above the combo cap.
    """
    if not proposals:
        raise ShapeScriptError("no proposals to expand")
    per_param: list[list] = []
    for i, (_, ptype) in enumerate(params):
        if ptype.kind is ast.ParamKind.BOOL:
            per_param.append([True, False])
            continue
        if ptype.kind is ast.ParamKind.ENUM:
            per_param.append(list(ptype.enum_options))
            continue
        observed = []
        for prop in proposals:
            value = prop.args[i] if i < len(prop.args) else None
            if value is None:
                continue
            if ptype.kind is ast.ParamKind.FLOAT:
                value = float(value)
            if value not in observed:
                observed.append(value)
        if ptype.kind is ast.ParamKind.FLOAT:
            observed = _float_dedup(observed, cfg.float_gap)
        per_param.append(observed)

    proposed: list[tuple] = []
    seen: set[tuple] = set()
    for prop in proposals:
        if prop.is_concrete() and len(prop.args) == len(params):
            vec = tuple(
                float(a) if t.kind is ast.ParamKind.FLOAT else a
                for a, (_, t) in zip(prop.args, params)
            )
            if vec not in seen:
                seen.add(vec)
                proposed.append(vec)

    vectors = list(proposed)
    if all(per_param):
        extras = [v for v in itertools.product(*per_param) if v not in seen]
        budget = max(cfg.max_combos - len(proposed), 0)
        if len(extras) > budget:
            rng = random.Random(seed)
            keep = sorted(rng.sample(range(len(extras)), budget))
            extras = [extras[i] for i in keep]
        vectors.extend(extras)
    return vectors


def validate_function(
    lib: Library,
    fn_name: str,
    impls: list[LibraryFunction],
    proposals: list[ApplicationProposal],
    seed_shapes: dict[str, list[Part]],
    cfg: PipelineConfig,
    seed: int = 0,
    limits: ExecLimits = ExecLimits(),
) -> ValidationReport:
    """Sweep (implementation x parameter vector x proposed group) and record
    every finite-error match as a validated application."""
    if not impls:
        return ValidationReport(fn_name)
    params = impls[0].params
    vectors = expand_parameter_sets(proposals, params, cfg, seed)
    groups: list[tuple[str, tuple[int, ...]]] = []
    for prop in proposals:
        key = (prop.shape_id, tuple(sorted(prop.part_group)))
        if key not in groups and prop.shape_id in seed_shapes:
            groups.append(key)
    report = ValidationReport(fn_name)
    for impl_index, impl in enumerate(impls):
        stats = ImplementationStats(impl_index)
        exec_lib = Library(dict(lib.functions))
        exec_lib.functions[fn_name] = impl
        for shape_id, group in groups:
            shape_parts = seed_shapes[shape_id]
            target = [shape_parts[i] for i in group]
            cf = group_parts(target)
            best: tuple[float, tuple] | None = None
            for vec in vectors:
                try:
                    out = execute_function(exec_lib, fn_name, cf, list(vec), limits)
                    err = match_error(out, target, cfg.tau_match)
                except ShapeScriptError as exc:
                    stats.failures.append(f"{shape_id}:{vec}: {exc}")
                    continue
                if err < INFINITE and (best is None or err < best[0]):
                    best = (err, vec)
                    if err == 0.0:
                        break
            if best is not None:
                stats.validated.append(
                    ValidatedApplication(shape_id, fn_name, best[1], group, best[0], impl_index)
                )
        report.impls.append(stats)
    return report


def select_implementation(report: ValidationReport, cfg: PipelineConfig) -> int | None:
    """Pick the winning implementation, or None when the function is removed.

    Ranking: most distinct validated shapes, then most validated groups,
    then lowest mean error, then lowest implementation index.
    """
    if not report.impls:
        return None
    ranked = sorted(
        report.impls,
        key=lambda s: (-len(s.shapes_covered), -len(s.validated), s.mean_error, s.impl_index),
    )
    winner = ranked[0]
    if len(winner.shapes_covered) < cfg.min_validations:
        return None
    return winner.impl_index


def _call_for_application(app: ValidatedApplication, shape_parts: list[Part]) -> ast.Call:
    cf = group_parts([shape_parts[i] for i in app.part_group])
    frame = ast.FrameLit(
        *(ast.snap_float(v) for v in (*cf.dims, *cf.center))
    )
    args = tuple(ast.snap_float(a) if isinstance(a, float) else a for a in app.params)
    return ast.Call(app.fn_name, frame, args)


def application_score(app: ValidatedApplication, shape_parts: list[Part], cfg: PipelineConfig) -> float:
    call = _call_for_application(app, shape_parts)
    dof = count_dof_tokens(ShapeProgram((call,)))
    return (cfg.dof_weight * dof + cfg.geo_weight * app.error) / len(app.part_group)


def assemble_seed_programs(
    validated: list[ValidatedApplication],
    shapes: dict[str, list[Part]],
    lib: Library,
    cfg: PipelineConfig,
) -> dict[str, ShapeProgram]:
    """Greedy per-shape set cover over validated applications, cheapest first;
    uncovered parts fall back to make_part statements."""
    programs: dict[str, ShapeProgram] = {}
    for shape_id, parts in shapes.items():
        apps = [a for a in validated if a.shape_id == shape_id]
        scored = sorted(
            apps,
            key=lambda a: (application_score(a, parts, cfg), a.fn_name, a.part_group),
        )
        covered: set[int] = set()
        statements: list[ast.ProgStmt] = []
        for app in scored:
            if covered & set(app.part_group):
                continue
            statements.append(_call_for_application(app, parts))
            covered.update(app.part_group)
        for index, part in enumerate(parts):
            if index in covered:
                continue
            frame = ast.FrameLit(*(ast.snap_float(v) for v in (*part.dims, *part.center)))
            statements.append(ast.MakePart(frame, part.label))
        programs[shape_id] = ShapeProgram(tuple(statements))
    return programs


@dataclass
class LabelVoter:
    histograms: dict[str, Counter] = field(default_factory=dict)

    def winner(self, fn_name: str) -> str:
        hist = self.histograms.get(fn_name)
        if not hist:
            return ""
        top = max(hist.values())
        return min(label for label, count in hist.items() if count == top)

    def to_json(self) -> dict:
        return {
            fn: {"histogram": dict(sorted(hist.items())), "winner": self.winner(fn)}
            for fn, hist in sorted(self.histograms.items())
        }

    @classmethod
    def from_json(cls, data: dict) -> "LabelVoter":
        voter = cls()
        for fn, entry in data.items():
            voter.histograms[fn] = Counter(entry["histogram"])
        return voter


def build_label_voter(
    validated: list[ValidatedApplication], shapes: dict[str, list[Part]]
) -> LabelVoter:
    """Per-function histogram of the labels of every part the function explained."""
    voter = LabelVoter()
    for app in validated:
        hist = voter.histograms.setdefault(app.fn_name, Counter())
        for index in app.part_group:
            hist[shapes[app.shape_id][index].label] += 1
    return voter


def save_report(reports: list[ValidationReport], path) -> None:
    payload = [r.to_json() for r in reports]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
