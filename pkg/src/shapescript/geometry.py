"""Geometric measurement: corner matching, normalization, voxels, point metrics."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .errors import GeometryError
from .model import Part, Vec3

INFINITE = math.inf

DEFAULT_VOXEL_RES = 64
DEFAULT_VOXEL_BOUNDS = (-0.75, 0.75)
DEFAULT_N_POINTS = 2048
DEFAULT_FSCORE_TAU = 0.03
DEFAULT_MATCH_TAU = 0.25


def corners_array(part: Part) -> np.ndarray:
    return np.array(part.corners(), dtype=float)


def mmcd(a: Part, b: Part) -> float:
    """Symmetric maximum over corners of the minimum corner-to-corner distance."""
    ca, cb = corners_array(a), corners_array(b)
    d = cdist(ca, cb)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def _mmcd_matrix(pred: list[Part], target: list[Part]) -> np.ndarray:
    pc = np.stack([corners_array(p) for p in pred])  # (n, 8, 3)
    tc = np.stack([corners_array(t) for t in target])  # (m, 8, 3)
    d = np.linalg.norm(pc[:, None, :, None, :] - tc[None, :, None, :, :], axis=-1)
    return np.maximum(d.min(axis=3).max(axis=2), d.min(axis=2).max(axis=2))


def match_error(pred: list[Part], target: list[Part], tau: float = DEFAULT_MATCH_TAU) -> float:
    """Mean matched corner error under an optimal assignment; inf on mismatch.

    Cardinality mismatch or any matched pair beyond ``tau`` yields infinity.
    """
    if len(pred) != len(target):
        return INFINITE
    if not pred:
        return 0.0
    cost = _mmcd_matrix(pred, target)
    rows, cols = linear_sum_assignment(cost)
    matched = cost[rows, cols]
    if matched.max() > tau:
        return INFINITE
    return float(matched.mean())


def match_error_brute(pred: list[Part], target: list[Part], tau: float = DEFAULT_MATCH_TAU) -> float:
    """Brute-force oracle over all assignments; only practical for small n."""
    import itertools

    if len(pred) != len(target):
        return INFINITE
    if not pred:
        return 0.0
    cost = _mmcd_matrix(pred, target)
    n = len(pred)
    best_perm = None
    best_total = INFINITE
    for perm in itertools.permutations(range(n)):
        total = sum(cost[i, perm[i]] for i in range(n))
        if total < best_total:
            best_total = total
            best_perm = perm
    if max(cost[i, best_perm[i]] for i in range(n)) > tau:
        return INFINITE
    return best_total / n


@dataclass(frozen=True)
class Transform:
    """Uniform scale-then-translate map: p' = p * scale + offset."""

    scale: float
    offset: Vec3

    def apply_point(self, p: Vec3) -> Vec3:
        return tuple(c * self.scale + o for c, o in zip(p, self.offset))

    def apply_part(self, part: Part) -> Part:
        return Part(part.label, tuple(s * self.scale for s in part.dims), self.apply_point(part.center))

    def inverse(self) -> "Transform":
        inv = 1.0 / self.scale
        return Transform(inv, tuple(-o * inv for o in self.offset))


def _bbox(parts: list[Part]) -> tuple[np.ndarray, np.ndarray]:
    lo = np.min([p.lo() for p in parts], axis=0)
    hi = np.max([p.hi() for p in parts], axis=0)
    return lo, hi


def normalization_transform(parts: list[Part], mode: str) -> Transform:
    if not parts:
        raise GeometryError("cannot normalize empty geometry", code="EmptyGeometry")
    lo, hi = _bbox(parts)
    extent = hi - lo
    if float(np.linalg.norm(extent)) <= 0:
        raise GeometryError("degenerate extent", code="DegenerateExtent")
    center = (lo + hi) / 2
    if mode == "unit-sphere":
        corners = np.concatenate([corners_array(p) for p in parts]) - center
        radius = float(np.linalg.norm(corners, axis=1).max())
        scale = 1.0 / radius
    elif mode == "unit-bbox":
        scale = 1.0 / float(extent.max())
    else:
        raise GeometryError(f"unknown normalization mode {mode!r}")
    offset = tuple((-center * scale).tolist())
    return Transform(scale, offset)


def normalize_parts(parts: list[Part], mode: str) -> tuple[list[Part], Transform]:
    """Uniformly rescale/recenter parts into the requested canonical volume."""
    tf = normalization_transform(parts, mode)
    return [tf.apply_part(p) for p in parts], tf


# ---------------------------------------------------------------------------
# Voxels


@dataclass
class VoxelGrid:
    resolution: int
    bounds: tuple[float, float]  # cubic bounds, same [lo, hi] on every axis
    occupancy: np.ndarray  # bool array of shape (res, res, res)

    def __post_init__(self):
        assert self.resolution >= 1
        assert self.occupancy.shape == (self.resolution,) * 3

    def count(self) -> int:
        return int(self.occupancy.sum())


def _cell_centers(resolution: int, bounds: tuple[float, float]) -> np.ndarray:
    lo, hi = bounds
    edge = (hi - lo) / resolution
    axis = lo + edge * (np.arange(resolution) + 0.5)
    gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
    return np.stack([gx, gy, gz], axis=-1).reshape(-1, 3)


def voxelize(
    parts: list[Part],
    resolution: int = DEFAULT_VOXEL_RES,
    bounds: tuple[float, float] = DEFAULT_VOXEL_BOUNDS,
) -> VoxelGrid:
    """Occupancy: cell center inside any cuboid, or within half a voxel of one."""
    lo, hi = bounds
    if hi <= lo:
        raise GeometryError("voxel bounds must be increasing")
    edge = (hi - lo) / resolution
    centers = _cell_centers(resolution, bounds)
    occ = np.zeros(centers.shape[0], dtype=bool)
    for part in parts:
        q = np.abs(centers - np.asarray(part.center)) - np.asarray(part.dims) / 2
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        occ |= outside < edge / 2  # inside gives distance 0, always occupied
    return VoxelGrid(resolution, bounds, occ.reshape(resolution, resolution, resolution))


def iou(a: VoxelGrid, b: VoxelGrid) -> float:
    if a.resolution != b.resolution or a.bounds != b.bounds:
        raise GeometryError("voxel grids have mismatched resolution or bounds", code="GridMismatch")
    union = int(np.logical_or(a.occupancy, b.occupancy).sum())
    if union == 0:
        return 1.0
    inter = int(np.logical_and(a.occupancy, b.occupancy).sum())
    return inter / union


# ---------------------------------------------------------------------------
# Point clouds


@dataclass
class PointCloud:
    points: np.ndarray  # (n, 3)

    def __len__(self) -> int:
        return len(self.points)


def _face_data(part: Part) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    w, h, d = part.dims
    c = np.asarray(part.center)
    # (origin corner, edge u, edge v) per face; area-proportional sampling
    faces = []
    areas = []
    half = np.array([w, h, d]) / 2
    for axis in range(3):
        u_axis, v_axis = [i for i in range(3) if i != axis]
        for sign in (-1, 1):
            origin = c - half
            origin = origin.copy()
            origin[axis] = c[axis] + sign * half[axis]
            u = np.zeros(3)
            u[u_axis] = part.dims[u_axis]
            v = np.zeros(3)
            v[v_axis] = part.dims[v_axis]
            faces.append((origin, u, v))
            areas.append(part.dims[u_axis] * part.dims[v_axis])
    origins = np.array([f[0] for f in faces])
    us = np.array([f[1] for f in faces])
    vs = np.array([f[2] for f in faces])
    return origins, us, vs, np.array(areas)


def sample_points(parts: list[Part], n: int = DEFAULT_N_POINTS, seed: int = 0) -> PointCloud:
    """Draw n surface points area-proportionally over all cuboid faces."""
    if not parts:
        raise GeometryError("cannot sample points from empty geometry", code="EmptyGeometry")
    if n == 0:
        return PointCloud(np.zeros((0, 3)))
    origins_all, us_all, vs_all, areas_all = [], [], [], []
    for part in parts:
        o, u, v, a = _face_data(part)
        origins_all.append(o)
        us_all.append(u)
        vs_all.append(v)
        areas_all.append(a)
    origins = np.concatenate(origins_all)
    us = np.concatenate(us_all)
    vs = np.concatenate(vs_all)
    areas = np.concatenate(areas_all)
    rng = np.random.default_rng(seed)
    face_idx = rng.choice(len(areas), size=n, p=areas / areas.sum())
    su = rng.random(n)[:, None]
    sv = rng.random(n)[:, None]
    pts = origins[face_idx] + su * us[face_idx] + sv * vs[face_idx]
    return PointCloud(pts)


def chamfer(a: PointCloud, b: PointCloud) -> float:
    """Symmetric mean nearest-neighbor distance between two clouds."""
    if len(a) == 0 or len(b) == 0:
        raise GeometryError("chamfer distance of an empty cloud", code="EmptyCloud")
    da = cKDTree(b.points).query(a.points)[0]
    db = cKDTree(a.points).query(b.points)[0]
    return float((da.mean() + db.mean()) / 2)


def fscore(a: PointCloud, b: PointCloud, tau: float = DEFAULT_FSCORE_TAU) -> float:
    """Harmonic mean of precision/recall at threshold tau, as a percentage."""
    if len(a) == 0 or len(b) == 0:
        raise GeometryError("f-score of an empty cloud", code="EmptyCloud")
    da = cKDTree(b.points).query(a.points)[0]
    db = cKDTree(a.points).query(b.points)[0]
    precision = float((da <= tau).mean())
    recall = float((db <= tau).mean())
    if precision + recall == 0:
        return 0.0
    return 100.0 * 2 * precision * recall / (precision + recall)


# ---------------------------------------------------------------------------
# File formats (documented in docs/formats.md)


def write_xyz(cloud: PointCloud, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in cloud.points:
            fh.write(f"{x:.9g} {y:.9g} {z:.9g}\n")


def read_xyz(path) -> PointCloud:
    points = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            xs = line.split()
            if len(xs) < 3:
                raise GeometryError(f"bad XYZ line: {line!r}", code="ParseError")
            points.append([float(xs[0]), float(xs[1]), float(xs[2])])
    return PointCloud(np.array(points).reshape(-1, 3))


_VOX_MAGIC = b"VOXB"


def write_voxels(grid: VoxelGrid, path) -> None:
    flat = np.packbits(grid.occupancy.reshape(-1).astype(np.uint8))
    with open(path, "wb") as fh:
        fh.write(_VOX_MAGIC)
        fh.write(struct.pack("<i2d", grid.resolution, grid.bounds[0], grid.bounds[1]))
        fh.write(flat.tobytes())


def read_voxels(path) -> VoxelGrid:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _VOX_MAGIC:
            raise GeometryError("not a voxel file", code="ParseError")
        res, lo, hi = struct.unpack("<i2d", fh.read(4 + 16))
        packed = np.frombuffer(fh.read(), dtype=np.uint8)
    bits = np.unpackbits(packed)[: res**3].astype(bool)
    return VoxelGrid(res, (lo, hi), bits.reshape(res, res, res))
