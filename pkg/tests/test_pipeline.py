"""End-to-end design pipeline against the deterministic oracle provider."""

import json

import pytest

from shapescript import ast
from shapescript.config import PipelineConfig
from shapescript.geometry import match_error
from shapescript.interpreter import execute_program
from shapescript.llm.provider import RecordingProvider, ReplayProvider
from shapescript.pipeline import (
    load_library,
    load_samplers,
    run_design_pipeline,
    write_design_outputs,
)
from shapescript.printer import print_canonical

from synthetic import DESCRIPTIONS, OracleProvider, build_seed_set

CFG = PipelineConfig()


@pytest.fixture(scope="module")
def design():
    return run_design_pipeline(build_seed_set(), DESCRIPTIONS, OracleProvider(), CFG, seed=0)


class TestDesignResult:
    def test_correct_functions_retained(self, design):
        assert sorted(design.library.functions) == ["four_legs", "side_panels", "slat_row"]

    def test_unvalidatable_function_removed(self, design):
        assert design.removed_functions == ["arm_rests"]
        assert any("arm_rests" in w for w in design.warnings)

    def test_each_function_validated_on_two_plus_shapes(self, design):
        shapes_per_fn = {}
        for app in design.validated:
            shapes_per_fn.setdefault(app.fn_name, set()).add(app.shape_id)
        for fn in design.library.functions:
            assert len(shapes_per_fn[fn]) >= 2

    def test_validated_errors_replay(self, design):
        from shapescript.interpreter import execute_function, group_parts

        for app in design.validated[:20]:
            target = [design.shapes[app.shape_id][i] for i in app.part_group]
            out = execute_function(design.library, app.fn_name, group_parts(target), list(app.params))
            assert abs(match_error(out, target, CFG.tau_match) - app.error) <= 1e-9

    def test_seed_programs_reproduce_shapes(self, design):
        for shape_id, prog in design.seed_programs.items():
            ex = execute_program(design.library, prog)
            err = match_error(ex.parts, design.shapes[shape_id], tau=CFG.tau_match)
            assert err <= 0.05

    def test_coverage_at_least_90_percent(self, design):
        total = covered = 0
        for shape_id, prog in design.seed_programs.items():
            n_make = sum(1 for s in prog.statements if isinstance(s, ast.MakePart))
            total += len(design.shapes[shape_id])
            covered += len(design.shapes[shape_id]) - n_make
        assert covered / total >= 0.9

    def test_voter_winners(self, design):
        assert design.voter.winner("four_legs") == "leg"
        assert design.voter.winner("side_panels") == "panel"
        assert design.voter.winner("slat_row") in ("slat", "stretcher")

    def test_samplers_returned(self, design):
        assert 1 <= len(design.samplers) <= CFG.feedback_rounds + 1
        assert all(not s.params for s in design.samplers)

    def test_timings_cover_stages(self, design):
        assert set(design.timings) == {
            "normalize",
            "interface",
            "applications",
            "validation",
            "assembly",
            "sampler",
        }


class TestArtifacts:
    def test_outputs_and_manifest(self, design, tmp_path):
        manifest = write_design_outputs(design, tmp_path, CFG, seed=0, provider_mode="test", input_hashes={})
        for name in ("library.ss", "samplers.ss", "validation_report.json", "voter.json", "manifest.json"):
            assert (tmp_path / name).exists()
        assert set(manifest["output_hashes"]) >= {"library.ss", "samplers.ss"}
        assert manifest["removed_functions"] == ["arm_rests"]
        on_disk = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk["output_hashes"] == manifest["output_hashes"]

    def test_library_round_trips_from_disk(self, design, tmp_path):
        write_design_outputs(design, tmp_path, CFG, seed=0, provider_mode="test", input_hashes={})
        lib = load_library(tmp_path / "library.ss")
        assert sorted(lib.functions) == sorted(design.library.functions)
        assert print_canonical(lib) == print_canonical(design.library)
        samplers = load_samplers(tmp_path / "samplers.ss")
        assert [s.name for s in samplers] == [s.name for s in design.samplers]


class TestRecordReplay:
    def test_replay_is_byte_deterministic(self, tmp_path):
        record_dir = tmp_path / "record"
        replay_dir_a = tmp_path / "replay_a"
        replay_dir_b = tmp_path / "replay_b"

        recorder = RecordingProvider(OracleProvider(), tmp_path / "transcript.jsonl")
        result = run_design_pipeline(build_seed_set(), DESCRIPTIONS, recorder, CFG, seed=0)
        recorder.close()
        recorded = write_design_outputs(result, record_dir, CFG, 0, "record", {})

        manifests = []
        for out_dir in (replay_dir_a, replay_dir_b):
            replay = ReplayProvider(tmp_path / "transcript.jsonl")
            res = run_design_pipeline(build_seed_set(), DESCRIPTIONS, replay, CFG, seed=0)
            manifests.append(write_design_outputs(res, out_dir, CFG, 0, "replay", {}))

        assert manifests[0]["output_hashes"] == manifests[1]["output_hashes"]
        assert recorded["output_hashes"] == manifests[0]["output_hashes"]
