"""Regenerate the committed fixtures from the synthetic chair corpus.

Usage: python3 fixtures/generate.py

Writes, next to this script:
  seed_set.json       ten chair layouts used as pipeline input
  descriptions.txt    one free-text description per seed shape
  transcript.jsonl    recorded provider transcript for replay runs
  design/             full design-pipeline output (library, programs, manifest)
  chair.obj           a simple cuboid mesh of the first seed chair
"""

import sys
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent / "tests"))
sys.path.insert(0, str(HERE.parent / "src"))

from synthetic import DESCRIPTIONS, OracleProvider, build_seed_set  # noqa: E402

from shapescript.config import PipelineConfig, save_seed_set  # noqa: E402
from shapescript.deform import Mesh, save_obj  # noqa: E402
from shapescript.llm.provider import RecordingProvider  # noqa: E402
from shapescript.pipeline import run_design_pipeline, write_design_outputs  # noqa: E402

CUBE_CORNERS = np.array(
    [[x, y, z] for x in (-0.5, 0.5) for y in (-0.5, 0.5) for z in (-0.5, 0.5)]
)
CUBE_FACES = [
    (0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1),
    (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3),
]


def parts_to_mesh(parts) -> Mesh:
    verts, faces = [], []
    for part in parts:
        base = len(verts)
        verts.extend(CUBE_CORNERS * np.asarray(part.dims) + np.asarray(part.center))
        for a, b, c, d in CUBE_FACES:
            faces.append((base + a, base + b, base + c))
            faces.append((base + a, base + c, base + d))
    return Mesh(np.array(verts), np.array(faces))


def main() -> None:
    seed_set = build_seed_set()
    save_seed_set(seed_set, HERE / "seed_set.json")
    (HERE / "descriptions.txt").write_text("\n".join(DESCRIPTIONS) + "\n")

    provider = RecordingProvider(OracleProvider(), HERE / "transcript.jsonl")
    cfg = PipelineConfig()
    result = run_design_pipeline(seed_set, DESCRIPTIONS, provider, cfg, seed=0)
    write_design_outputs(
        result,
        HERE / "design",
        cfg,
        seed=0,
        provider_mode="replay:fixtures",
        input_hashes={},
    )
    save_obj(parts_to_mesh(seed_set.shapes[0].parts), HERE / "chair.obj")
    # a few programs at the top level so `serve --data-dir fixtures` lists them
    for program in sorted((HERE / "design" / "programs").glob("*.ss"))[:3]:
        (HERE / program.name).write_text(program.read_text())
    print("fixtures written to", HERE)


if __name__ == "__main__":
    main()
