"""Geometric measurement: mmcd, matching, normalization, voxels, point metrics."""

import math
import random

import numpy as np
import pytest

from shapescript.geometry import (
    INFINITE,
    PointCloud,
    VoxelGrid,
    chamfer,
    fscore,
    iou,
    match_error,
    match_error_brute,
    mmcd,
    normalize_parts,
    read_voxels,
    read_xyz,
    sample_points,
    voxelize,
    write_voxels,
    write_xyz,
)
from shapescript.errors import GeometryError
from shapescript.model import Part

from conftest import random_part

UNIT = Part("", (1.0, 1.0, 1.0), (0.0, 0.0, 0.0))


class TestMmcd:
    def test_identical_is_zero(self):
        assert mmcd(UNIT, UNIT) == 0.0

    def test_translated_unit_cube(self):
        shifted = Part("", (1.0, 1.0, 1.0), (0.1, 0.0, 0.0))
        assert mmcd(UNIT, shifted) == pytest.approx(0.1, abs=1e-12)

    def test_stretched_same_center(self):
        wide = Part("", (2.0, 1.0, 1.0), (0.0, 0.0, 0.0))
        assert mmcd(UNIT, wide) == pytest.approx(0.5, abs=1e-12)

    def test_symmetric(self, rng):
        for _ in range(20):
            a, b = random_part(rng), random_part(rng)
            assert mmcd(a, b) == pytest.approx(mmcd(b, a), abs=1e-12)

    def test_label_ignored(self):
        assert mmcd(Part("a", (1, 1, 1), (0, 0, 0)), Part("b", (1, 1, 1), (0, 0, 0))) == 0.0


class TestMatchError:
    def test_empty_lists(self):
        assert match_error([], []) == 0.0

    def test_cardinality_mismatch(self):
        assert match_error([UNIT], [UNIT, UNIT]) == INFINITE

    def test_exact_match_permuted(self, rng):
        parts = [random_part(rng) for _ in range(5)]
        shuffled = list(parts)
        rng.shuffle(shuffled)
        assert match_error(parts, shuffled, tau=INFINITE) == pytest.approx(0.0, abs=1e-12)

    def test_threshold_straddle(self):
        for eps in (0.01, 0.001):
            below = Part("", (1, 1, 1), (0.25 - eps, 0.0, 0.0))
            above = Part("", (1, 1, 1), (0.25 + eps, 0.0, 0.0))
            assert match_error([UNIT], [below]) == pytest.approx(0.25 - eps, abs=1e-12)
            assert match_error([UNIT], [above]) == INFINITE

    def test_agrees_with_brute_oracle(self, rng):
        for trial in range(200):
            n = rng.randint(1, 6)
            pred = [random_part(rng) for _ in range(n)]
            if trial % 3 == 0:
                target = [random_part(rng) for _ in range(n)]
            else:
                # near-copies so assignments genuinely compete
                target = [
                    Part(p.label, p.dims, tuple(c + rng.uniform(-0.1, 0.1) for c in p.center))
                    for p in pred
                ]
                rng.shuffle(target)
            fast = match_error(pred, target)
            brute = match_error_brute(pred, target)
            if math.isinf(fast) or math.isinf(brute):
                assert fast == brute
            else:
                assert fast == pytest.approx(brute, abs=1e-9)

    def test_mean_over_matched_pairs(self):
        pred = [UNIT, Part("", (1, 1, 1), (5.0, 0.0, 0.0))]
        target = [Part("", (1, 1, 1), (0.1, 0.0, 0.0)), Part("", (1, 1, 1), (5.2, 0.0, 0.0))]
        assert match_error(pred, target, tau=INFINITE) == pytest.approx(0.15, abs=1e-9)


class TestNormalization:
    def test_unit_sphere_radius(self, rng):
        parts = [random_part(rng) for _ in range(4)]
        normed, tf = normalize_parts(parts, "unit-sphere")
        corners = np.concatenate([np.array(p.corners()) for p in normed])
        assert float(np.linalg.norm(corners, axis=1).max()) == pytest.approx(1.0, abs=1e-9)

    def test_unit_bbox_extent(self, rng):
        parts = [random_part(rng) for _ in range(4)]
        normed, _ = normalize_parts(parts, "unit-bbox")
        lo = np.min([p.lo() for p in normed], axis=0)
        hi = np.max([p.hi() for p in normed], axis=0)
        assert float((hi - lo).max()) == pytest.approx(1.0, abs=1e-9)
        assert np.allclose((lo + hi) / 2, 0.0, atol=1e-9)

    def test_round_trip(self, rng):
        parts = [random_part(rng) for _ in range(3)]
        normed, tf = normalize_parts(parts, "unit-sphere")
        inv = tf.inverse()
        for orig, p in zip(parts, normed):
            back = inv.apply_part(p)
            assert np.allclose(back.center, orig.center, atol=1e-9)
            assert np.allclose(back.dims, orig.dims, atol=1e-9)

    def test_empty_raises(self):
        with pytest.raises(GeometryError):
            normalize_parts([], "unit-sphere")

    def test_unknown_mode(self):
        with pytest.raises(GeometryError):
            normalize_parts([UNIT], "unit-cube")


def analytic_voxels(parts, resolution, bounds):
    """Independent clamp-formulation oracle for cuboid occupancy."""
    lo, hi = bounds
    edge = (hi - lo) / resolution
    occ = np.zeros((resolution, resolution, resolution), dtype=bool)
    axis = lo + edge * (np.arange(resolution) + 0.5)
    for ix, x in enumerate(axis):
        for iy, y in enumerate(axis):
            for iz, z in enumerate(axis):
                p = (x, y, z)
                for part in parts:
                    nearest = tuple(
                        min(max(c, pc - s / 2), pc + s / 2)
                        for c, pc, s in zip(p, part.center, part.dims)
                    )
                    dist = math.dist(p, nearest)
                    if dist < edge / 2:
                        occ[ix, iy, iz] = True
                        break
    return occ


class TestVoxels:
    def test_matches_analytic_oracle(self, rng):
        # coarse grids keep the pure-Python oracle affordable; the acceptance
        # suite covers the full 64-cube resolution
        for _ in range(10):
            parts = [random_part(rng) for _ in range(rng.randint(1, 5))]
            grid = voxelize(parts, resolution=16)
            assert np.array_equal(grid.occupancy, analytic_voxels(parts, 16, grid.bounds))

    def test_spanning_cuboid_fills_grid(self):
        big = Part("", (1.5, 1.5, 1.5), (0.0, 0.0, 0.0))
        grid = voxelize([big], resolution=16)
        assert grid.count() == 16**3

    def test_empty_parts_empty_grid(self):
        assert voxelize([], resolution=8).count() == 0

    def test_iou_identical(self):
        g = voxelize([UNIT], resolution=16)
        assert iou(g, g) == 1.0

    def test_iou_half_overlapping_slabs(self):
        # equal-size slabs sharing half their cells: overlap 2, union 6 -> 1/3
        res, bounds = 8, (-0.75, 0.75)
        occ_a = np.zeros((res, res, res), dtype=bool)
        occ_b = np.zeros((res, res, res), dtype=bool)
        occ_a[0:4] = True
        occ_b[2:6] = True
        a = VoxelGrid(res, bounds, occ_a)
        b = VoxelGrid(res, bounds, occ_b)
        assert iou(a, b) == pytest.approx(1 / 3, abs=1e-12)

    def test_iou_disjoint(self):
        res, bounds = 4, (-0.75, 0.75)
        occ_a = np.zeros((res, res, res), dtype=bool)
        occ_b = np.zeros((res, res, res), dtype=bool)
        occ_a[0] = True
        occ_b[3] = True
        assert iou(VoxelGrid(res, bounds, occ_a), VoxelGrid(res, bounds, occ_b)) == 0.0

    def test_iou_empty_grids(self):
        g = voxelize([], resolution=8)
        assert iou(g, g) == 1.0

    def test_iou_mismatched_grids(self):
        with pytest.raises(GeometryError):
            iou(voxelize([UNIT], resolution=8), voxelize([UNIT], resolution=16))


class TestPoints:
    def test_count_and_on_surface(self, rng):
        parts = [random_part(rng) for _ in range(3)]
        cloud = sample_points(parts, 500, seed=7)
        assert len(cloud) == 500
        for pt in cloud.points:
            on_any = False
            for part in parts:
                rel = np.abs(np.asarray(pt) - np.asarray(part.center)) - np.asarray(part.dims) / 2
                if np.all(rel <= 1e-9) and np.any(np.abs(rel) <= 1e-9):
                    on_any = True
                    break
            assert on_any

    def test_deterministic_per_seed(self):
        a = sample_points([UNIT], 128, seed=3)
        b = sample_points([UNIT], 128, seed=3)
        c = sample_points([UNIT], 128, seed=4)
        assert np.array_equal(a.points, b.points)
        assert not np.array_equal(a.points, c.points)

    def test_area_proportional(self):
        # slab with two dominant faces: z-faces have area 1 each, the four
        # side faces total 0.04; ~98% of samples should land on z-faces
        slab = Part("", (1.0, 1.0, 0.01), (0.0, 0.0, 0.0))
        cloud = sample_points([slab], 10000, seed=0)
        frac = float((np.abs(np.abs(cloud.points[:, 2]) - 0.005) < 1e-12).mean())
        p = 2.0 / 2.04
        sigma = math.sqrt(p * (1 - p) / 10000)
        assert abs(frac - p) < 4 * sigma

    def test_empty_raises(self):
        with pytest.raises(GeometryError):
            sample_points([], 10)


class TestChamferFscore:
    def test_chamfer_hand_enumerated(self):
        a = PointCloud(np.array([[0.0, 0, 0], [1.0, 0, 0]]))
        b = PointCloud(np.array([[0.0, 0, 0], [2.0, 0, 0]]))
        # a->b: 0, 1; b->a: 0, 1 -> (0.5 + 0.5) / 2
        assert chamfer(a, b) == pytest.approx(0.5, abs=1e-12)

    def test_chamfer_identical_zero(self, rng):
        pts = np.array([[rng.random() for _ in range(3)] for _ in range(50)])
        cloud = PointCloud(pts)
        assert chamfer(cloud, cloud) == 0.0

    def test_fscore_perfect(self):
        cloud = PointCloud(np.array([[0.0, 0, 0], [1.0, 0, 0]]))
        assert fscore(cloud, cloud) == 100.0

    def test_fscore_zero(self):
        a = PointCloud(np.array([[0.0, 0, 0]]))
        b = PointCloud(np.array([[10.0, 0, 0]]))
        assert fscore(a, b) == 0.0

    def test_fscore_half(self):
        # half of each cloud within tau of the other: P = R = 0.5 -> 50
        a = PointCloud(np.array([[0.0, 0, 0], [5.0, 0, 0]]))
        b = PointCloud(np.array([[0.0, 0, 0], [9.0, 0, 0]]))
        assert fscore(a, b, tau=0.03) == pytest.approx(50.0)

    def test_empty_raises(self):
        with pytest.raises(GeometryError):
            chamfer(PointCloud(np.zeros((0, 3))), PointCloud(np.zeros((1, 3))))


class TestIO:
    def test_xyz_round_trip(self, tmp_path, rng):
        cloud = sample_points([random_part(rng)], 64, seed=1)
        path = tmp_path / "c.xyz"
        write_xyz(cloud, path)
        back = read_xyz(path)
        assert np.allclose(back.points, cloud.points, atol=1e-8)

    def test_xyz_bad_line(self, tmp_path):
        path = tmp_path / "bad.xyz"
        path.write_text("1.0 2.0\n")
        with pytest.raises(GeometryError):
            read_xyz(path)

    def test_voxb_round_trip(self, tmp_path, rng):
        grid = voxelize([random_part(rng)], resolution=16)
        path = tmp_path / "g.vox"
        write_voxels(grid, path)
        back = read_voxels(path)
        assert back.resolution == grid.resolution
        assert back.bounds == grid.bounds
        assert np.array_equal(back.occupancy, grid.occupancy)

    def test_voxb_bad_magic(self, tmp_path):
        path = tmp_path / "bad.vox"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(GeometryError):
            read_voxels(path)
