"""Core geometric value types shared by the interpreter and geometry code."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

Vec3 = tuple[float, float, float]


def _finite3(v: Vec3) -> bool:
    return all(math.isfinite(c) for c in v)


@dataclass(frozen=True)
class Part:
    """Axis-aligned cuboid primitive with a semantic label (may be empty)."""

    label: str
    dims: Vec3  # width (x), height (y), depth (z)
    center: Vec3

    def __post_init__(self):
        if not (_finite3(self.dims) and _finite3(self.center)):
            raise ValueError("part has non-finite values")
        if min(self.dims) <= 0:
            raise ValueError(f"part dims must be positive, got {self.dims}")

    def corners(self) -> list[Vec3]:
        (w, h, d), (x, y, z) = self.dims, self.center
        return [
            (x + sx * w / 2, y + sy * h / 2, z + sz * d / 2)
            for sx in (-1, 1)
            for sy in (-1, 1)
            for sz in (-1, 1)
        ]

    def lo(self) -> Vec3:
        return tuple(c - s / 2 for c, s in zip(self.center, self.dims))

    def hi(self) -> Vec3:
        return tuple(c + s / 2 for c, s in zip(self.center, self.dims))


@dataclass(frozen=True)
class CoordFrame:
    """Axis-aligned bounding volume; the implicit first argument of every call."""

    center: Vec3
    dims: Vec3

    def __post_init__(self):
        if not (_finite3(self.dims) and _finite3(self.center)):
            raise ValueError("frame has non-finite values")
        if min(self.dims) <= 0:
            raise ValueError(f"frame dims must be positive, got {self.dims}")

    def diagonal(self) -> float:
        return math.sqrt(sum(s * s for s in self.dims))


@dataclass(frozen=True)
class ExecLimits:
    max_steps: int = 100_000
    max_parts: int = 64
    max_loop_iters: int = 64

    def __post_init__(self):
        assert self.max_steps > 0 and self.max_parts > 0 and self.max_loop_iters > 0


@dataclass
class Execution:
    parts: list[Part] = field(default_factory=list)
    provenance: list[tuple[int, str]] = field(default_factory=list)  # (statement index, fn name)
    rng_seed: int = 0
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        assert len(self.parts) == len(self.provenance)
