"""Pipeline configuration defaults, overrides, and seed-set IO."""

import pytest

from shapescript.config import (
    PipelineConfig,
    SeedSet,
    SeedShape,
    load_seed_set,
    save_seed_set,
)
from shapescript.errors import ShapeScriptError
from shapescript.model import Part


class TestDefaults:
    def test_documented_defaults(self):
        cfg = PipelineConfig()
        assert cfg.K_A == 5
        assert cfg.K_I == 4
        assert cfg.tau_match == 0.25
        assert cfg.float_gap == 0.025
        assert cfg.max_combos == 10000
        assert cfg.dof_weight == 1.0
        assert cfg.geo_weight == 10.0
        assert cfg.min_validations == 2
        assert cfg.voxel_res == 64
        assert cfg.n_points == 2048
        assert cfg.fscore_tau == 0.03
        assert cfg.noise_sigma == 0.05
        assert cfg.infer_samples == 1000
        assert cfg.infer_timeout_s == 4.0
        assert cfg.top_p == 0.9
        assert cfg.feedback_rounds == 2

    def test_replace(self):
        cfg = PipelineConfig().replace(K_A=2)
        assert cfg.K_A == 2
        assert cfg.K_I == 4

    def test_invalid_values_rejected(self):
        with pytest.raises(AssertionError):
            PipelineConfig(K_A=0)
        with pytest.raises(AssertionError):
            PipelineConfig(top_p=1.5)


class TestMapping:
    def test_from_mapping_coerces_types(self):
        cfg = PipelineConfig.from_mapping({"K_A": "3", "tau_match": "0.3"})
        assert cfg.K_A == 3 and isinstance(cfg.K_A, int)
        assert cfg.tau_match == 0.3

    def test_unknown_key_rejected(self):
        with pytest.raises(ShapeScriptError, match="unknown config key"):
            PipelineConfig.from_mapping({"K_Z": "1"})

    def test_config_file(self, tmp_path):
        path = tmp_path / "cfg"
        path.write_text("# comment\nK_A = 2\ntau_match = 0.2  # inline\n\n")
        cfg = PipelineConfig.from_config_file(path)
        assert cfg.K_A == 2
        assert cfg.tau_match == 0.2

    def test_bad_config_line(self, tmp_path):
        path = tmp_path / "cfg"
        path.write_text("K_A 2\n")
        with pytest.raises(ShapeScriptError):
            PipelineConfig.from_config_file(path)

    def test_round_trip_dict(self):
        cfg = PipelineConfig(K_A=3)
        assert PipelineConfig.from_mapping(cfg.to_dict()).K_A == 3


class TestSeedSet:
    def _set(self):
        return SeedSet(
            [
                SeedShape("a", [Part("leg", (1, 1, 1), (0, 0, 0))], description="a stool"),
                SeedShape("b", [Part("top", (2, 0.2, 2), (0, 1, 0))]),
            ]
        )

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ShapeScriptError, match="duplicate"):
            SeedSet([SeedShape("a", []), SeedShape("a", [])])

    def test_empty_rejected(self):
        with pytest.raises(ShapeScriptError):
            SeedSet([])

    def test_save_load_round_trip(self, tmp_path):
        path = tmp_path / "seed.json"
        save_seed_set(self._set(), path)
        back = load_seed_set(path)
        assert [s.shape_id for s in back.shapes] == ["a", "b"]
        assert back.shapes[0].parts[0].label == "leg"
        assert back.shapes[0].description == "a stool"
        assert back.shapes[1].description is None
