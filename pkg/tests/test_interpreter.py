"""Execution semantics: builtins, limits, flags, provenance, sampler traces."""

import pytest

from shapescript.errors import ExecError
from shapescript.interpreter import (
    execute_function,
    execute_program,
    group_parts,
    run_sampler,
)
from shapescript.model import CoordFrame, ExecLimits, Part
from shapescript.parser import parse_library, parse_program
from shapescript.printer import print_canonical

FRAME = CoordFrame((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))

LIB_SRC = """\
/// @description A horizontal row of cubes.
/// @parts one per slot
/// @valid_options [2, 3, 4]
/// @param n: number of cubes
fn row(cf: Frame, n: int) -> PartList {
    let parts = [];
    let w = cf.w / (2 * n - 1);
    for i in range(n) {
        let x = cf.x - cf.w / 2 + w / 2 + 2 * w * i;
        append(parts, make_part(frame(w, cf.h, cf.d, x, cf.y, cf.z), "cube"));
    }
    return parts;
}

/// @description A pair of mirrored panels.
/// @parts two panels
/// @valid_options [2]
/// @param thick: whether panels are thick
fn panels(cf: Frame, thick: bool) -> PartList {
    let pw = 0.1 * cf.w;
    if thick {
        pw = 0.2 * cf.w;
    }
    let parts = [];
    append(parts, make_part(frame(pw, cf.h, cf.d, cf.x - (cf.w - pw) / 2, cf.y, cf.z), "p"));
    append(parts, make_part(frame(pw, cf.h, cf.d, cf.x + (cf.w - pw) / 2, cf.y, cf.z), "p"));
    return parts;
}
"""


@pytest.fixture(scope="module")
def lib():
    return parse_library(LIB_SRC)


class TestGroupParts:
    def test_two_unit_cubes(self):
        parts = [
            Part("", (1, 1, 1), (-0.5, 0.0, 0.0)),
            Part("", (1, 1, 1), (0.5, 0.0, 0.0)),
        ]
        cf = group_parts(parts)
        assert cf.center == pytest.approx((0.0, 0.0, 0.0))
        assert cf.dims == pytest.approx((2.0, 1.0, 1.0))

    def test_empty_raises(self):
        with pytest.raises(ExecError, match="empty"):
            group_parts([])

    def test_degenerate_axis_floored(self):
        cf = group_parts([Part("", (1, 1, 1), (0, 0, 0)), Part("", (1, 1, 1), (0, 0, 0))])
        assert min(cf.dims) >= 1e-9


class TestExecuteFunction:
    def test_row_part_layout(self, lib):
        parts = execute_function(lib, "row", FRAME, [3])
        assert len(parts) == 3
        assert all(p.label == "cube" for p in parts)
        assert parts[0].dims[0] == pytest.approx(0.2)
        assert parts[0].center[0] == pytest.approx(-0.4)
        assert parts[2].center[0] == pytest.approx(0.4)

    def test_unknown_function(self, lib):
        with pytest.raises(ExecError) as e:
            execute_function(lib, "nope", FRAME, [])
        assert e.value.code == "UnknownFunction"

    def test_type_mismatch(self, lib):
        with pytest.raises(ExecError) as e:
            execute_function(lib, "panels", FRAME, ["thick"])
        assert e.value.code == "TypeMismatch"

    def test_int_promoted_to_float_param(self):
        src = (
            "/// @description x\n/// @parts x\n/// @valid_options [2, 3]\n"
            "/// @param s: scale\n"
            "fn one(cf: Frame, s: float) -> PartList {\n"
            "    return make_part(frame(cf.w * s, cf.h, cf.d, cf.x, cf.y, cf.z), \"a\");\n"
            "}\n"
        )
        parts = execute_function(parse_library(src), "one", FRAME, [1])
        assert parts[0].dims[0] == pytest.approx(1.0)

    def test_random_builtin_rejected_without_rng(self):
        src = (
            "/// @description x\n/// @parts x\n/// @valid_options [2, 3]\n"
            "fn r(cf: Frame) -> PartList {\n"
            "    let u = uniform(0, 1);\n"
            "    return make_part(frame(1, 1, 1, u, 0, 0), \"a\");\n"
            "}\n"
        )
        with pytest.raises(ExecError) as e:
            execute_function(parse_library(src), "r", FRAME, [])
        assert e.value.code == "RandomInDeterministic"

    def test_division_by_zero(self):
        src = (
            "/// @description x\n/// @parts x\n/// @valid_options [2, 3]\n"
            "fn z(cf: Frame) -> PartList {\n"
            "    let v = 1 / (cf.w - cf.w);\n"
            "    return make_part(frame(v, 1, 1, 0, 0, 0), \"a\");\n"
            "}\n"
        )
        with pytest.raises(ExecError) as e:
            execute_function(parse_library(src), "z", FRAME, [])
        assert e.value.code == "NonFiniteValue"


class TestLimits:
    def _lib(self, body):
        return parse_library(
            "/// @description x\n/// @parts x\n/// @valid_options [2, 3]\n"
            f"fn f(cf: Frame) -> PartList {{\n{body}\n}}\n"
        )

    def test_loop_limit(self):
        lib = self._lib("    let parts = [];\n    for i in range(65) {\n        let a = 1;\n    }\n    return parts;")
        with pytest.raises(ExecError) as e:
            execute_function(lib, "f", FRAME, [])
        assert e.value.code == "LoopLimitExceeded"

    def test_part_limit(self):
        lib = self._lib(
            "    let parts = [];\n"
            "    for i in range(10) {\n"
            "        append(parts, make_part(frame(1, 1, 1, i, 0, 0), \"a\"));\n"
            "    }\n"
            "    return parts;"
        )
        with pytest.raises(ExecError) as e:
            execute_function(lib, "f", FRAME, [], limits=ExecLimits(max_parts=4))
        assert e.value.code == "PartLimitExceeded"

    def test_step_limit(self):
        lib = self._lib(
            "    let parts = [];\n"
            "    for i in range(64) {\n        for j in range(64) {\n            let a = i + j;\n        }\n    }\n"
            "    return parts;"
        )
        with pytest.raises(ExecError) as e:
            execute_function(lib, "f", FRAME, [], limits=ExecLimits(max_steps=100))
        assert e.value.code == "StepLimitExceeded"

    def test_recursion_rejected(self):
        lib = parse_library(
            "/// @description x\n/// @parts x\n/// @valid_options [2, 3]\n"
            "fn f(cf: Frame) -> PartList {\n    return f(cf);\n}\n"
        )
        with pytest.raises(ExecError) as e:
            execute_function(lib, "f", FRAME, [])
        assert e.value.code == "RecursionNotAllowed"


class TestFlags:
    def test_valid_options_mismatch_flagged(self, lib):
        # row's contract says 2-4 parts; calling with n outside the list is
        # executable but flagged
        src = "row(frame(1, 1, 1, 0, 0, 0), 4);"
        flags = []
        execute_function(lib, "row", FRAME, [4], flags=flags)
        assert flags == []
        flags = []
        lib2 = parse_library(LIB_SRC.replace("[2, 3, 4]", "[2, 3]", 1))
        execute_function(lib2, "row", FRAME, [4], flags=flags)
        assert flags == ["ValidOptionsMismatch:row:4"]

    def test_frame_overflow_flagged(self):
        src = (
            "/// @description x\n/// @parts x\n/// @valid_options [2, 3]\n"
            "fn big(cf: Frame) -> PartList {\n"
            "    return make_part(frame(cf.w * 3, cf.h, cf.d, cf.x, cf.y, cf.z), \"a\");\n"
            "}\n"
        )
        flags = []
        execute_function(parse_library(src), "big", FRAME, [], flags=flags)
        assert "FrameOverflow:big" in flags


class TestExecuteProgram:
    def test_parts_and_provenance(self, lib):
        prog = parse_program(
            "row(frame(1, 1, 1, 0, 0, 0), 2);\n"
            "make_part(frame(1, 0.1, 1, 0, 0.5, 0), \"top\");\n"
            "panels(frame(1, 1, 1, 0, 0, 0), true);\n",
            lib,
        )
        ex = execute_program(lib, prog)
        assert len(ex.parts) == 5
        assert ex.provenance == [(0, "row"), (0, "row"), (1, "make_part"), (2, "panels"), (2, "panels")]

    def test_unknown_function_in_program(self, lib):
        import shapescript.ast as ast

        prog = ast.ShapeProgram((ast.Call("ghost", ast.FrameLit(1, 1, 1, 0, 0, 0), ()),))
        with pytest.raises(ExecError) as e:
            execute_program(lib, prog)
        assert e.value.code == "UnknownFunction"


SAMPLER_SRC = LIB_SRC + """
fn sample(cf: Frame) -> PartList {
    let parts = [];
    let n = randint(2, 4);
    append(parts, row(frame(cf.w, cf.h * 0.5, cf.d, cf.x, cf.y + cf.h * 0.25, cf.z), n));
    if bernoulli(0.5) {
        append(parts, panels(frame(cf.w, cf.h * 0.5, cf.d, cf.x, cf.y - cf.h * 0.25, cf.z), bernoulli(0.5)));
    }
    append(parts, make_part(frame(cf.w, cf.h * 0.1, cf.d, cf.x, cf.y - cf.h * 0.45, cf.z), "base"));
    return parts;
}
"""


@pytest.fixture(scope="module")
def slib():
    return parse_library(SAMPLER_SRC)


class TestRunSampler:

    def test_trace_replays_identically(self, slib):
        sam = slib.functions["sample"]
        a = run_sampler(slib, sam, FRAME, 42)
        b = run_sampler(slib, sam, FRAME, 42)
        assert print_canonical(a) == print_canonical(b)

    def test_different_seeds_differ(self, slib):
        sam = slib.functions["sample"]
        texts = {print_canonical(run_sampler(slib, sam, FRAME, s)) for s in range(40)}
        assert len(texts) > 1

    def test_trace_executes_to_same_parts(self, slib):
        sam = slib.functions["sample"]
        prog = run_sampler(slib, sam, FRAME, 7)
        ex = execute_program(slib, prog)
        # every traced statement is a library call or make_part that the
        # deterministic interpreter reproduces
        assert len(ex.parts) >= 3

    def test_statement_streams_are_independent(self, slib):
        # extra draws inside statement i must not shift the draws seen by
        # statement j: compare the final make_part of a sampler whose first
        # statement consumes a different number of draws
        extra = SAMPLER_SRC.replace(
            "let n = randint(2, 4);",
            "let n = randint(2, 4) + floor(uniform(0, 1) * 0) + floor(uniform(0, 1) * 0);",
        )
        lib_extra = parse_library(extra)
        for seed in range(10):
            base_prog = run_sampler(slib, slib.functions["sample"], FRAME, seed)
            extra_prog = run_sampler(lib_extra, lib_extra.functions["sample"], FRAME, seed)
            assert print_canonical(base_prog) == print_canonical(extra_prog)

    def test_sampler_with_params_rejected(self, slib):
        with pytest.raises(ExecError, match="only the frame"):
            run_sampler(slib, slib.functions["row"], FRAME, 0)

    def test_empty_trace_rejected(self):
        src = (
            "/// @description x\n/// @parts x\n/// @valid_options [2, 3]\n"
            "fn s(cf: Frame) -> PartList {\n    let a = 1;\n    return [];\n}\n"
        )
        lib = parse_library(src)
        with pytest.raises(ExecError) as e:
            run_sampler(lib, lib.functions["s"], FRAME, 0)
        assert e.value.code == "SamplerReturnedEmpty"

    def test_trace_floats_snapped(self, slib):
        prog = run_sampler(slib, slib.functions["sample"], CoordFrame((0, 0, 0), (1 / 3, 1.0, 1.0)), 3)
        text = print_canonical(prog)
        for token in text.replace("(", " ").replace(")", " ").replace(",", " ").split():
            try:
                float(token)
            except ValueError:
                continue
            assert len(token.replace("-", "").replace(".", "").replace("e", "").lstrip("0")) <= 7
