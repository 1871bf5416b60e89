"""The LLM-facing pipeline stages, all behind the Provider abstraction."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

import numpy as np

from .. import ast
from ..ast import Library, LibraryFunction, ShapeProgram
from ..config import PipelineConfig, SeedShape
from ..errors import ProviderError, ShapeScriptError, SourceError
from ..geometry import INFINITE, match_error, normalize_parts
from ..interface import validate_interface
from ..interpreter import execute_program, run_sampler
from ..model import CoordFrame, ExecLimits, Part
from ..parser import parse_library, parse_library_lenient, parse_program
from ..printer import print_canonical, print_function
from ..validation import ApplicationProposal, ValidatedApplication
from . import prompts
from .proposals import (
    MaskedExample,
    parse_application_response,
    render_part_list,
)
from .provider import Provider

log = logging.getLogger(__name__)


def _strip_fences(text: str) -> str:
    lines = [l for l in text.splitlines() if not l.strip().startswith("```")]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Stage 1: interface creation


def stage_interface(descriptions: list[str], provider: Provider) -> Library:
    """Turn function descriptions into a signature-only library, with one
    violation-repair round; still-violating functions are dropped."""
    if not descriptions:
        raise ProviderError("no function descriptions given", code="EmptyIntent")
    prompt = prompts.INTERFACE.format(
        version=prompts.PROMPT_VERSION,
        descriptions="\n".join(f"- {d}" for d in descriptions),
    )
    response = provider.complete("interface", prompt)
    lib, errors = parse_library_lenient(_strip_fences(response))
    violations = validate_interface(lib)
    if errors or violations:
        problems = [f"parse error: {e}" for e in errors] + [
            f"{v.fn_name}: {v.code}: {v.message}" for v in violations
        ]
        repair_prompt = prompts.INTERFACE_REPAIR.format(
            version=prompts.PROMPT_VERSION,
            violations="\n".join(f"- {p}" for p in problems),
            previous=response,
        )
        repaired = provider.complete("interface", repair_prompt)
        lib2, errors2 = parse_library_lenient(_strip_fences(repaired))
        if lib2.functions:
            lib, errors = lib2, errors2
        violations = validate_interface(lib)
        bad = {v.fn_name for v in violations}
        for name in bad:
            log.warning("dropping function %r: interface violations remain after repair", name)
            lib.functions.pop(name, None)
    if not lib.functions:
        raise ProviderError("interface response unparseable after repair", code="UnparseableResponse")
    return lib


# ---------------------------------------------------------------------------
# Stage 2: application proposal


def stage_applications(
    shape: SeedShape,
    shape_parts: list[Part],
    lib: Library,
    provider: Provider,
    cfg: PipelineConfig,
    warnings: list[str] | None = None,
) -> list[ApplicationProposal]:
    """Run K_A proposal rounds for one shape; parse, resolve groups, prune."""
    from ..validation import prune_proposal

    interface_text = print_canonical(_signatures_only(lib))
    accepted: list[ApplicationProposal] = []
    description = ""
    if shape.description:
        description = f"\nShape description:\n{shape.description}\n"
    for round_index in range(1, cfg.K_A + 1):
        # round 1 targets the stronger / vision-capable provider configuration
        stage_tag = "applications" if round_index > 1 else "applications-strong"
        prompt = prompts.APPLICATIONS.format(
            version=prompts.PROMPT_VERSION,
            shape_id=shape.shape_id,
            round=round_index,
            interface=interface_text,
            parts=render_part_list(shape_parts),
            shape_description=description,
        )
        try:
            response = provider.complete(stage_tag, prompt)
        except ProviderError as exc:
            if warnings is not None:
                warnings.append(f"round {round_index} failed: {exc}")
            continue
        proposals = parse_application_response(
            _strip_fences(response), lib, shape.shape_id, shape_parts, round_index, warnings
        )
        for prop in proposals:
            fn = lib.functions[prop.fn_name]
            ok, reason = prune_proposal(prop, fn.doc)
            if ok:
                accepted.append(prop)
            elif warnings is not None:
                warnings.append(f"pruned {prop.fn_name} on {shape.shape_id}: {reason}")
    return accepted


def _signatures_only(lib: Library) -> Library:
    out = Library()
    for fn in lib.functions.values():
        out.functions[fn.name] = LibraryFunction(fn.name, fn.frame_param, fn.params, fn.doc, None)
    return out


# ---------------------------------------------------------------------------
# Stage 3: implementation proposal


@dataclass
class ImplementationStageResult:
    bodies: list[LibraryFunction] = field(default_factory=list)
    extra_proposals: list[ApplicationProposal] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)


def pick_masked_examples(
    fn: LibraryFunction,
    proposals: list[ApplicationProposal],
    shapes: dict[str, list[Part]],
    max_examples: int = 4,
    seed: int = 0,
) -> list[MaskedExample]:
    """Choose up to four in-context examples, spread evenly across shapes."""
    by_shape: dict[str, list[ApplicationProposal]] = {}
    for prop in proposals:
        if prop.fn_name == fn.name and prop.shape_id in shapes:
            by_shape.setdefault(prop.shape_id, []).append(prop)
    rng = random.Random(seed)
    shape_ids = sorted(by_shape)
    rng.shuffle(shape_ids)
    examples: list[MaskedExample] = []
    cursor = 0
    seen_groups: set[tuple[str, tuple[int, ...]]] = set()
    while len(examples) < max_examples and shape_ids:
        shape_id = shape_ids[cursor % len(shape_ids)]
        pool = [
            p for p in by_shape[shape_id] if (shape_id, p.part_group) not in seen_groups
        ]
        if pool:
            prop = pool[rng.randrange(len(pool))]
            seen_groups.add((shape_id, prop.part_group))
            output = tuple(shapes[shape_id][i] for i in prop.part_group)
            examples.append(
                MaskedExample(fn.name, shape_id, prop.part_group, output, len(fn.params))
            )
        else:
            shape_ids.remove(shape_id)
            continue
        cursor += 1
    return examples


def _parse_reparams(
    response: str, fn: LibraryFunction, examples: list[MaskedExample]
) -> list[ApplicationProposal]:
    out = []
    for line in response.splitlines():
        line = line.strip()
        if not line.startswith("reparam"):
            continue
        head, _, rest = line.partition(":")
        try:
            index = int(head.split()[1])
        except (IndexError, ValueError):
            continue
        if not (0 <= index < len(examples)):
            continue
        chunks = [c.strip() for c in rest.split(",")]
        if len(chunks) != len(fn.params):
            continue
        values = []
        ok = True
        for chunk, (_, ptype) in zip(chunks, fn.params):
            try:
                value = _coerce_chunk(chunk, ptype)
            except ValueError:
                ok = False
                break
            values.append(value)
        if not ok:
            continue
        ex = examples[index]
        out.append(ApplicationProposal(ex.shape_id, fn.name, tuple(values), ex.part_group, 0))
    return out


def _coerce_chunk(chunk: str, ptype: ast.ParamType):
    if ptype.kind is ast.ParamKind.BOOL:
        if chunk in ("true", "false"):
            return chunk == "true"
        raise ValueError(chunk)
    if ptype.kind is ast.ParamKind.ENUM:
        value = chunk.strip('"')
        if value in ptype.enum_options:
            return value
        raise ValueError(chunk)
    if ptype.kind is ast.ParamKind.INT:
        return int(chunk)
    return ast.snap_float(float(chunk))


def stage_implementations(
    fn: LibraryFunction,
    proposals: list[ApplicationProposal],
    shapes: dict[str, list[Part]],
    provider: Provider,
    cfg: PipelineConfig,
    seed: int = 0,
) -> ImplementationStageResult:
    """Request K_I candidate bodies plus re-parameterizations for a function."""
    result = ImplementationStageResult()
    fn_proposals = [p for p in proposals if p.fn_name == fn.name]
    if not fn_proposals:
        return result
    examples = pick_masked_examples(fn, fn_proposals, shapes, seed=seed)
    interface_text = print_function(
        LibraryFunction(fn.name, fn.frame_param, fn.params, fn.doc, None)
    )
    example_text = "\n\n".join(ex.render(i) for i, ex in enumerate(examples))
    for impl_index in range(cfg.K_I):
        prompt = prompts.IMPLEMENTATIONS.format(
            version=prompts.PROMPT_VERSION,
            fn_name=fn.name,
            impl_index=impl_index,
            interface=interface_text,
            examples=example_text,
        )
        response = provider.complete("implementations", prompt)
        body_fn, error = _parse_impl_response(response, fn)
        if body_fn is None:
            retry_prompt = prompts.IMPLEMENTATIONS_RETRY.format(
                version=prompts.PROMPT_VERSION,
                fn_name=fn.name,
                impl_index=impl_index,
                error=error,
                previous=response,
            )
            response = provider.complete("implementations", retry_prompt)
            body_fn, error = _parse_impl_response(response, fn)
        if body_fn is None:
            result.failures.append(f"impl {impl_index}: {error}")
            continue
        result.bodies.append(body_fn)
        result.extra_proposals.extend(_parse_reparams(response, fn, examples))
    if not result.bodies:
        raise ProviderError(
            f"all implementation candidates for {fn.name} unparseable",
            code="AllCandidatesUnparseable",
        )
    return result


def _parse_impl_response(response: str, fn: LibraryFunction):
    source = "\n".join(
        line for line in _strip_fences(response).splitlines() if not line.strip().startswith("reparam")
    )
    try:
        lib, errors = parse_library_lenient(source)
    except SourceError as exc:
        return None, str(exc)
    candidate = lib.functions.get(fn.name)
    if candidate is None:
        reason = str(errors[0]) if errors else f"response defines no function named {fn.name}"
        return None, reason
    if candidate.body is None:
        return None, "response has a signature but no body"
    if [p for p, _ in candidate.params] != [p for p, _ in fn.params]:
        return None, "parameter names do not match the interface"
    # implementations keep the agreed interface doc and types
    return LibraryFunction(fn.name, candidate.frame_param, fn.params, fn.doc, candidate.body), ""


# ---------------------------------------------------------------------------
# Stage 4/5: sampler authoring with coverage feedback


@dataclass
class CoverageReport:
    functions_used: set[str] = field(default_factory=set)
    unused_functions: set[str] = field(default_factory=set)
    enum_values_unused: dict[str, list[str]] = field(default_factory=dict)
    valid_option_counts_seen: dict[str, set[int]] = field(default_factory=dict)
    structure_gap_flags: list[tuple[str, float]] = field(default_factory=list)

    def issues(self) -> list[str]:
        out = []
        for name in sorted(self.unused_functions):
            out.append(f"library function {name} was never called")
        for key, values in sorted(self.enum_values_unused.items()):
            out.append(f"enum values never used for {key}: {', '.join(values)}")
        for key, counts in sorted(self.valid_option_counts_seen.items()):
            out.append(f"part counts produced by {key}: {sorted(counts)}")
        for structure_id, error in self.structure_gap_flags:
            out.append(f"validated structure {structure_id} never matched (min error {error:.3f})")
        return out


def coverage_report(
    samplers: list[LibraryFunction],
    lib: Library,
    n_samples: int = 256,
    seed: int = 0,
    validated: list[ValidatedApplication] | None = None,
    shapes: dict[str, list[Part]] | None = None,
    cfg: PipelineConfig = PipelineConfig(),
    limits: ExecLimits = ExecLimits(),
) -> CoverageReport:
    """Aggregate function/enum/part-count coverage over seeded sampler draws."""
    report = CoverageReport()
    enum_seen: dict[str, set[str]] = {}
    cf = CoordFrame((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    structures: list[tuple[str, list[Part]]] = []
    if validated and shapes:
        for app in validated:
            sid = f"{app.shape_id}:{app.fn_name}:{','.join(map(str, app.part_group))}"
            struct_parts = [shapes[app.shape_id][i] for i in app.part_group]
            structures.append((sid, normalize_parts(struct_parts, "unit-sphere")[0]))
    gap_best = {sid: INFINITE for sid, _ in structures}
    for i in range(n_samples):
        sampler = samplers[i % len(samplers)]
        try:
            prog = run_sampler(lib, sampler, cf, seed + i, limits)
            execution = execute_program(lib, prog, limits)
        except ShapeScriptError:
            continue
        parts_by_stmt: dict[int, list[Part]] = {}
        for part, (stmt_index, _) in zip(execution.parts, execution.provenance):
            parts_by_stmt.setdefault(stmt_index, []).append(part)
        for stmt_index, stmt in enumerate(prog.statements):
            if not isinstance(stmt, ast.Call):
                continue
            fn = lib.functions[stmt.fn_name]
            report.functions_used.add(stmt.fn_name)
            count = len(parts_by_stmt.get(stmt_index, []))
            report.valid_option_counts_seen.setdefault(stmt.fn_name, set()).add(count)
            for value, (pname, ptype) in zip(stmt.args, fn.params):
                if ptype.kind is ast.ParamKind.ENUM:
                    enum_seen.setdefault(f"{stmt.fn_name}.{pname}", set()).add(value)
            produced = parts_by_stmt.get(stmt_index, [])
            if produced and structures:
                try:
                    a, _ = normalize_parts(produced, "unit-sphere")
                except ShapeScriptError:
                    continue
                for sid, struct_parts in structures:
                    if len(struct_parts) != len(a):
                        continue
                    err = match_error(a, struct_parts, tau=INFINITE)
                    if err < gap_best[sid]:
                        gap_best[sid] = err
    report.unused_functions = set(lib.functions) - report.functions_used
    for fn in lib.functions.values():
        for pname, ptype in fn.params:
            if ptype.kind is ast.ParamKind.ENUM:
                key = f"{fn.name}.{pname}"
                unused = sorted(set(ptype.enum_options) - enum_seen.get(key, set()))
                if unused:
                    report.enum_values_unused[key] = unused
    for sid, best in gap_best.items():
        if best > cfg.tau_match:
            report.structure_gap_flags.append((sid, best))
    return report


def stage_sampler(
    lib: Library,
    seed_programs: dict[str, ShapeProgram],
    provider: Provider,
    cfg: PipelineConfig,
    validated: list[ValidatedApplication] | None = None,
    shapes: dict[str, list[Part]] | None = None,
    n_coverage_samples: int = 256,
    seed: int = 0,
) -> list[LibraryFunction]:
    """Author samplers: one initial version plus one per feedback round."""
    library_text = print_canonical(lib)
    program_text = "\n\n".join(
        f"// shape {shape_id}\n{print_canonical(prog)}" for shape_id, prog in sorted(seed_programs.items())
    )
    samplers: list[LibraryFunction] = []
    feedback = ""
    for round_index in range(cfg.feedback_rounds + 1):
        prompt = prompts.SAMPLER.format(
            version=prompts.PROMPT_VERSION,
            round=round_index + 1,
            library=library_text,
            seed_programs=program_text,
            feedback=feedback,
        )
        response = provider.complete("sampler", prompt)
        sampler = _parse_sampler_response(response, lib, provider, prompt)
        if sampler is not None and all(s.body != sampler.body for s in samplers):
            samplers.append(sampler)
        if round_index == cfg.feedback_rounds:
            break
        report = coverage_report(
            samplers or [], lib, n_coverage_samples, seed + round_index, validated, shapes, cfg
        ) if samplers else None
        issues = report.issues() if report else ["previous sampler was unusable"]
        if not issues:
            issues = ["no gaps detected; explore a different part of the seed space"]
        feedback = prompts.SAMPLER_FEEDBACK.format(issues="\n".join(f"- {i}" for i in issues))
    if not samplers:
        raise ProviderError("no sampler could be parsed", code="SamplerUnparseable")
    return samplers


def _parse_sampler_response(response: str, lib: Library, provider: Provider, prompt: str):
    for attempt in range(2):
        try:
            parsed = parse_library(_strip_fences(response))
        except SourceError as exc:
            if attempt == 0:
                response = provider.complete("sampler", prompt + f"\n## retry: 1\n(previous error: {exc})")
                continue
            return None
        for fn in parsed.functions.values():
            if fn.body is not None and not fn.params:
                return fn
        if attempt == 0:
            response = provider.complete(
                "sampler", prompt + "\n## retry: 1\n(previous response had no frame-only sampler)"
            )
    return None


# ---------------------------------------------------------------------------
# Training-data perturbation


def perturb_parts(parts: list[Part], sigma: float = 0.05, seed: int = 0) -> list[Part]:
    """Add independent N(0, sigma^2) offsets to all six cuboid parameters."""
    if sigma == 0:
        return list(parts)
    rng = np.random.default_rng(seed)
    out = []
    for part in parts:
        noise = rng.normal(0.0, sigma, size=6)
        dims = tuple(max(d + n, 0.01) for d, n in zip(part.dims, noise[:3]))
        center = tuple(c + n for c, n in zip(part.center, noise[3:]))
        out.append(Part(part.label, dims, center))
    return out


# ---------------------------------------------------------------------------
# Program editing


def stage_edit(
    prog: ShapeProgram, request: str, lib: Library, provider: Provider
) -> ShapeProgram:
    """Ask the provider to edit a program; one repair round on parse failure."""
    if not request.strip():
        raise ProviderError("empty edit request", code="EmptyRequest")
    interface_text = print_canonical(_signatures_only(lib))
    prompt = prompts.EDIT.format(
        version=prompts.PROMPT_VERSION,
        program=print_canonical(prog),
        interface=interface_text,
        request=request,
    )
    response = provider.complete("edit", prompt)
    try:
        return parse_program(_strip_fences(response), lib)
    except SourceError as exc:
        repair = prompts.EDIT_REPAIR.format(
            version=prompts.PROMPT_VERSION, error=str(exc), previous=response
        )
        response = provider.complete("edit", repair)
        try:
            return parse_program(_strip_fences(response), lib)
        except SourceError as exc2:
            raise ProviderError(f"edit response unparseable: {exc2}", code="EditUnparseable") from exc2
