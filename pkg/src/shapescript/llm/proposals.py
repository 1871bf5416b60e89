"""Parsing of application-proposal responses and masked-example rendering."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .. import ast
from ..geometry import mmcd, normalize_parts
from ..model import Part
from ..printer import fmt_float, fmt_literal
from ..validation import ApplicationProposal

# how close an LLM-listed box must be to a shape part to count as that part
GROUP_MATCH_TOL = 0.05

_CALL_RE = re.compile(
    r"^\s*(?P<fn>[A-Za-z_]\w*)\s*\(\s*group_parts\s*\(\s*\[(?P<parts>.*?)\]\s*\)\s*"
    r"(?:,(?P<args>.*?))?\)\s*;?\s*$"
)
_PART_RE = re.compile(r"part\s*\(([^)]*)\)")


@dataclass
class ProposalLine:
    fn_name: str
    boxes: list[Part]
    args: tuple  # None per masked slot


def _parse_literal(text: str):
    text = text.strip()
    if text == "?":
        return None
    if text in ("true", "false"):
        return text == "true"
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    try:
        if re.fullmatch(r"-?\d+", text):
            return int(text)
        return ast.snap_float(float(text))
    except ValueError:
        raise ValueError(f"bad literal {text!r}")


def parse_proposal_line(line: str) -> ProposalLine | None:
    match = _CALL_RE.match(line)
    if not match:
        return None
    boxes = []
    for chunk in _PART_RE.findall(match.group("parts")):
        nums = [float(x) for x in chunk.split(",")]
        if len(nums) != 6:
            raise ValueError(f"part literal needs 6 numbers, got {len(nums)}")
        boxes.append(Part("", tuple(nums[:3]), tuple(nums[3:])))
    if not boxes:
        return None
    args_text = match.group("args")
    args: tuple = ()
    if args_text and args_text.strip():
        args = tuple(_parse_literal(chunk) for chunk in args_text.split(","))
    return ProposalLine(match.group("fn"), boxes, args)


def resolve_part_group(boxes: list[Part], shape_parts: list[Part]) -> tuple[int, ...] | None:
    """Map LLM-listed boxes to shape part indices by nearest-box matching.

    Matching happens in unit-sphere coordinates; each box must land within
    GROUP_MATCH_TOL of a distinct shape part, else the proposal is rejected.
    """
    normalized, tf = normalize_parts(shape_parts, "unit-sphere")
    scaled_boxes = [tf.apply_part(b) for b in boxes]
    taken: set[int] = set()
    indices: list[int] = []
    for box in scaled_boxes:
        best_index, best_dist = -1, float("inf")
        for i, cand in enumerate(normalized):
            if i in taken:
                continue
            d = mmcd(box, cand)
            if d < best_dist:
                best_index, best_dist = i, d
        if best_index < 0 or best_dist > GROUP_MATCH_TOL:
            return None
        taken.add(best_index)
        indices.append(best_index)
    return tuple(indices)


def parse_application_response(
    response: str,
    lib: ast.Library,
    shape_id: str,
    shape_parts: list[Part],
    proposal_round: int,
    warnings: list[str] | None = None,
) -> list[ApplicationProposal]:
    proposals = []
    for raw in response.splitlines():
        line = raw.strip()
        if not line or line.startswith(("#", "//")):
            continue
        try:
            parsed = parse_proposal_line(line)
        except ValueError as exc:
            if warnings is not None:
                warnings.append(f"unparseable proposal line {line!r}: {exc}")
            continue
        if parsed is None:
            if warnings is not None:
                warnings.append(f"skipped non-proposal line {line!r}")
            continue
        fn = lib.functions.get(parsed.fn_name)
        if fn is None:
            if warnings is not None:
                warnings.append(f"proposal calls unknown function {parsed.fn_name!r}")
            continue
        args = parsed.args
        if len(args) != len(fn.params):
            if len(args) < len(fn.params):
                args = args + (None,) * (len(fn.params) - len(args))
            else:
                if warnings is not None:
                    warnings.append(f"proposal for {fn.name} has too many arguments")
                continue
        coerced = []
        bad = False
        for value, (pname, ptype) in zip(args, fn.params):
            if value is not None:
                if ptype.kind is ast.ParamKind.FLOAT and isinstance(value, int) and not isinstance(value, bool):
                    value = float(value)
                if not ptype.accepts(value):
                    bad = True
                    break
            coerced.append(value)
        if bad:
            if warnings is not None:
                warnings.append(f"proposal for {fn.name} has an ill-typed argument")
            continue
        group = resolve_part_group(parsed.boxes, shape_parts)
        if group is None:
            if warnings is not None:
                warnings.append(f"could not resolve part group for {fn.name} on {shape_id}")
            continue
        proposals.append(
            ApplicationProposal(shape_id, fn.name, tuple(coerced), group, proposal_round)
        )
    return proposals


@dataclass(frozen=True)
class MaskedExample:
    fn_name: str
    shape_id: str
    part_group: tuple[int, ...]
    output: tuple[Part, ...]
    n_params: int

    def render(self, index: int) -> str:
        masked = ", ".join(["?"] * self.n_params)
        call = f"{self.fn_name}(CF{', ' if masked else ''}{masked})"
        lines = [f"example {index} (shape {self.shape_id}):", f"  call: {call}", "  output parts:"]
        for part in self.output:
            nums = ", ".join(fmt_float(v) for v in (*part.dims, *part.center))
            lines.append(f"    part({nums})")
        return "\n".join(lines)


def render_part_list(parts: list[Part]) -> str:
    lines = []
    for i, part in enumerate(parts):
        nums = ", ".join(fmt_float(v) for v in (*part.dims, *part.center))
        lines.append(f"  {i}: part({nums}) label={fmt_literal(part.label)}")
    return "\n".join(lines)
