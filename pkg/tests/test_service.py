"""HTTP facade: routes, error mapping, and the SSE inference stream."""

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from shapescript.config import PipelineConfig
from shapescript.deform import Mesh, save_obj
from shapescript.interpreter import execute_program, run_sampler
from shapescript.llm.provider import CallbackProvider
from shapescript.model import CoordFrame
from shapescript.parser import parse_library
from shapescript.service import create_app

CFG = PipelineConfig()

LIB_SRC = """\
/// @description A ladder of horizontal rungs filling the frame.
/// @parts one per rung
/// @valid_options [2, 3, 4]
/// @param n: rung count
fn ladder_back(cf: Frame, n: int) -> PartList {
    let parts = [];
    let h = cf.h / (2 * n - 1);
    for i in range(n) {
        let y = cf.y - cf.h / 2 + h / 2 + 2 * h * i;
        append(parts, make_part(frame(cf.w, h, cf.d, cf.x, y, cf.z), "rung"));
    }
    return parts;
}

fn sample(cf: Frame) -> PartList {
    let parts = [];
    append(parts, ladder_back(frame(cf.w, cf.h, cf.d, cf.x, cf.y, cf.z), randint(2, 4)));
    return parts;
}
"""


@pytest.fixture(scope="module")
def lib():
    return parse_library(LIB_SRC)


@pytest.fixture()
def client(lib, tmp_path):
    mesh = Mesh(np.array([[0.0, 0.0, 0.0], [0.2, 0.0, 0.0], [0.0, 0.2, 0.0]]), np.array([[0, 1, 2]]))
    save_obj(mesh, tmp_path / "tri.obj")
    (tmp_path / "chair.ss").write_text("ladder_back(frame(1, 1, 1, 0, 0, 0), 2);\n")
    provider = CallbackProvider(
        lambda stage, prompt: "ladder_back(frame(1, 1, 1, 0, 0, 0), 4);"
    )
    app = create_app(
        lib,
        samplers=[lib.functions["sample"]],
        provider=provider,
        data_dir=tmp_path,
        cfg=CFG,
    )
    return TestClient(app)


class TestLibrary:
    def test_library_listing(self, client):
        data = client.get("/library").json()
        assert "fn ladder_back" in data["source"]
        names = [f["name"] for f in data["functions"]]
        assert "ladder_back" in names
        fn = next(f for f in data["functions"] if f["name"] == "ladder_back")
        assert fn["params"] == [{"name": "n", "type": "int"}]
        assert fn["doc"]["valid_options"] == [2, 3, 4]
        assert data["samplers"] == ["sample"]


class TestExecute:
    def test_execute_program(self, client):
        resp = client.post("/execute", json={"program": "ladder_back(frame(1, 1, 1, 0, 0, 0), 3);"})
        assert resp.status_code == 200
        data = resp.json()
        assert len(data["parts"]) == 3
        assert data["parts"][0]["fn_name"] == "ladder_back"
        assert data["parts"][0]["statement_index"] == 0
        assert data["canonical"].startswith("ladder_back(")

    def test_parse_error_is_400_with_diagnostic(self, client):
        resp = client.post("/execute", json={"program": "ladder_back(frame(1, 1, 1, 0, 0, 0), );"})
        assert resp.status_code == 400
        err = resp.json()["error"]
        assert err["line"] >= 1 and err["column"] >= 1
        assert err["message"]

    def test_unknown_function_400(self, client):
        resp = client.post("/execute", json={"program": "ghost(frame(1, 1, 1, 0, 0, 0), 1);"})
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "UnknownFunction"


class TestInfer:
    def _target(self, lib):
        prog = run_sampler(lib, lib.functions["sample"], CoordFrame((0, 0, 0), (1.0, 1.0, 1.0)), 11)
        parts = execute_program(lib, prog).parts
        return [{"label": p.label, "dims": list(p.dims), "center": list(p.center)} for p in parts]

    def test_infer_primitives(self, client, lib):
        resp = client.post(
            "/infer",
            json={
                "modality": "primitives",
                "payload": self._target(lib),
                "budget": {"max_samples": 100, "timeout_s": 30.0, "seed": 3},
            },
        )
        assert resp.status_code == 200
        data = resp.json()
        assert data["metrics"]["match_error"] <= 1e-9
        assert data["samples"] <= 100

    def test_infer_stream_events(self, client, lib):
        with client.stream(
            "POST",
            "/infer/stream",
            json={
                "modality": "primitives",
                "payload": self._target(lib),
                "budget": {"max_samples": 50, "timeout_s": 30.0, "seed": 3},
            },
        ) as resp:
            assert resp.status_code == 200
            assert resp.headers["content-type"].startswith("text/event-stream")
            body = "".join(resp.iter_text())
        assert "event: progress" in body
        assert "event: result" in body
        result_line = [l for l in body.splitlines() if l.startswith("data: ")][-1]
        payload = json.loads(result_line[len("data: "):])
        assert payload["metrics"]["match_error"] is not None

    def test_unknown_modality_400(self, client):
        resp = client.post("/infer", json={"modality": "hologram", "payload": []})
        assert resp.status_code == 400


class TestEdit:
    def test_edit_round_trip(self, client):
        resp = client.post(
            "/edit",
            json={"program": "ladder_back(frame(1, 1, 1, 0, 0, 0), 2);", "request": "more rungs"},
        )
        assert resp.status_code == 200
        data = resp.json()
        assert "4" in data["program"]
        assert any(line.startswith("-") for line in data["diff"])
        assert any(line.startswith("+") for line in data["diff"])

    def test_edit_without_provider_503(self, lib):
        app = create_app(lib)
        client = TestClient(app)
        resp = client.post(
            "/edit", json={"program": "ladder_back(frame(1, 1, 1, 0, 0, 0), 2);", "request": "x"}
        )
        assert resp.status_code == 503

    def test_unparseable_edit_response_503(self, lib, tmp_path):
        app = create_app(lib, provider=CallbackProvider(lambda s, p: "garbage"))
        client = TestClient(app)
        resp = client.post(
            "/edit", json={"program": "ladder_back(frame(1, 1, 1, 0, 0, 0), 2);", "request": "x"}
        )
        assert resp.status_code == 503
        assert resp.json()["error"]["code"] == "EditUnparseable"


class TestDeform:
    def test_deform_writes_mesh(self, client):
        resp = client.post(
            "/deform",
            json={
                "mesh": "tri.obj",
                "program_a": "ladder_back(frame(1, 1, 1, 0, 0, 0), 2);",
                "program_b": "ladder_back(frame(1, 1, 1, 0.5, 0, 0), 2);",
            },
        )
        assert resp.status_code == 200
        data = resp.json()
        assert data["mesh"] == "tri_deformed.obj"
        assert data["vertices"] == 3

    def test_structure_change_409(self, client):
        resp = client.post(
            "/deform",
            json={
                "mesh": "tri.obj",
                "program_a": "ladder_back(frame(1, 1, 1, 0, 0, 0), 2);",
                "program_b": "ladder_back(frame(1, 1, 1, 0, 0, 0), 2);\n"
                "make_part(frame(1, 1, 1, 3, 0, 0), \"x\");",
            },
        )
        assert resp.status_code == 409
        assert resp.json()["error"]["code"] == "LayoutMismatch"

    def test_part_count_change_409(self, client):
        resp = client.post(
            "/deform",
            json={
                "mesh": "tri.obj",
                "program_a": "ladder_back(frame(1, 1, 1, 0, 0, 0), 2);",
                "program_b": "ladder_back(frame(1, 1, 1, 0, 0, 0), 3);",
            },
        )
        assert resp.status_code == 409


class TestAssets:
    def test_shapes_lists_objs(self, client):
        assert "tri.obj" in client.get("/shapes").json()["shapes"]

    def test_programs_lists_sources(self, client):
        programs = client.get("/programs").json()["programs"]
        assert "chair.ss" in programs
        assert programs["chair.ss"].startswith("ladder_back(")
