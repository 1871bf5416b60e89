"""Cage-style deformation: program edits move meshes between cuboid layouts."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ast
from .errors import GeometryError
from .model import Part


@dataclass
class Mesh:
    vertices: np.ndarray  # (n, 3) float
    faces: np.ndarray  # (m, 3) int

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=int).reshape(-1, 3)
        if len(self.faces) and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise GeometryError("face indices out of range", code="ParseError")


@dataclass
class LayoutPair:
    source: list[Part]
    edited: list[Part]

    def __post_init__(self):
        if len(self.source) != len(self.edited):
            raise GeometryError(
                f"layouts must correspond one-to-one ({len(self.source)} vs {len(self.edited)})",
                code="LayoutMismatch",
            )


def local_coords(p, c: Part) -> np.ndarray:
    """Per-axis (p - center) / dims + 0.5; inside the box iff within [0, 1]."""
    return (np.asarray(p, dtype=float) - np.asarray(c.center)) / np.asarray(c.dims) + 0.5


def _surface_distances(points: np.ndarray, layout: list[Part]) -> tuple[np.ndarray, np.ndarray]:
    """Unsigned distance to each cuboid surface and an inside mask, (n, k)."""
    n, k = len(points), len(layout)
    dist = np.empty((n, k))
    inside = np.empty((n, k), dtype=bool)
    for j, part in enumerate(layout):
        q = np.abs(points - np.asarray(part.center)) - np.asarray(part.dims) / 2
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        inner = -np.minimum(q.max(axis=1), 0.0)  # distance to surface from within
        inside[:, j] = np.all(q <= 0.0, axis=1)
        dist[:, j] = np.where(inside[:, j], inner, outside)
    return dist, inside


def compute_weights(mesh: Mesh, layout: list[Part], eps: float = 1e-6) -> np.ndarray:
    """Per-vertex convex weights over cuboids.

    A vertex strictly inside a single cuboid binds fully to it; otherwise the
    weights follow the inverse of the distance to each cuboid surface.
    """
    if not layout:
        raise GeometryError("cannot weight against an empty layout", code="EmptyLayout")
    dist, inside = _surface_distances(mesh.vertices, layout)
    weights = np.zeros_like(dist)
    n_inside = inside.sum(axis=1)
    single = n_inside == 1
    weights[single] = inside[single].astype(float)
    blend = ~single
    inv = 1.0 / (dist[blend] + eps)
    weights[blend] = inv / inv.sum(axis=1, keepdims=True)
    return weights


def apply_deformation(mesh: Mesh, weights: np.ndarray, pair: LayoutPair) -> Mesh:
    """Map each vertex through every edited cuboid's affine frame, averaged by
    its weight row; faces pass through unchanged."""
    if weights.shape != (len(mesh.vertices), len(pair.source)):
        raise GeometryError("weight matrix does not match mesh/layout", code="LayoutMismatch")
    new_vertices = np.zeros_like(mesh.vertices)
    for j, (src, dst) in enumerate(zip(pair.source, pair.edited)):
        local = local_coords(mesh.vertices, src)  # (n, 3)
        mapped = np.asarray(dst.center) + (local - 0.5) * np.asarray(dst.dims)
        new_vertices += weights[:, j : j + 1] * mapped
    return Mesh(new_vertices, mesh.faces.copy())


def deform_mesh(mesh: Mesh, source: list[Part], edited: list[Part], eps: float = 1e-6) -> Mesh:
    pair = LayoutPair(source, edited)
    weights = compute_weights(mesh, source, eps)
    return apply_deformation(mesh, weights, pair)


def check_edit_correspondence(before: ast.ShapeProgram, after: ast.ShapeProgram) -> None:
    """Deformation requires edits that change literals only, never structure."""
    if len(before.statements) != len(after.statements):
        raise GeometryError(
            "program edit changed the statement count; deformation needs a one-to-one layout",
            code="LayoutMismatch",
        )
    for a, b in zip(before.statements, after.statements):
        same_kind = type(a) is type(b)
        if same_kind and isinstance(a, ast.Call) and a.fn_name != b.fn_name:
            same_kind = False
        if not same_kind:
            raise GeometryError(
                "program edit changed call structure; deformation needs a one-to-one layout",
                code="LayoutMismatch",
            )


# ---------------------------------------------------------------------------
# OBJ in/out


def load_obj(path) -> Mesh:
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "v":
            if len(fields) < 4:
                raise GeometryError(f"line {lineno}: bad vertex", code="ParseError")
            vertices.append([float(fields[1]), float(fields[2]), float(fields[3])])
        elif fields[0] == "f":
            indices = []
            for ref in fields[1:]:
                idx = int(ref.split("/")[0])
                indices.append(idx - 1 if idx > 0 else len(vertices) + idx)
            if len(indices) < 3:
                raise GeometryError(f"line {lineno}: face with fewer than 3 vertices", code="ParseError")
            for i in range(1, len(indices) - 1):  # fan-triangulate polygons
                faces.append([indices[0], indices[i], indices[i + 1]])
    if not vertices:
        raise GeometryError("OBJ file contains no vertices", code="ParseError")
    return Mesh(np.array(vertices), np.array(faces, dtype=int).reshape(-1, 3))


def save_obj(mesh: Mesh, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in mesh.vertices:
            fh.write(f"v {x:.9g} {y:.9g} {z:.9g}\n")
        for a, b, c in mesh.faces:
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")
