"""Windows and regions: vectorized ball/region intersection predicates.

Regions serve both as observation windows for sampling and as the A/B sets of
connection events.  Predicates compare squared distances where possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Ball",
    "Sphere",
    "Box",
    "BoxBoundary",
    "Shell",
    "SlabRegion",
    "Point",
    "unit_ball_volume",
    "ball",
    "box",
    "slab",
]


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _as_points(z) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=float))
    return z


@dataclass(frozen=True)
class Ball:
    """Closed ball of given radius; the default center is the origin."""

    radius: float
    d: int = 2
    center: tuple = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.center is None:
            object.__setattr__(self, "center", (0.0,) * self.d)
        else:
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))
            object.__setattr__(self, "d", len(self.center))

    def _dist(self, z):
        return np.linalg.norm(_as_points(z) - np.asarray(self.center), axis=1)

    def contains(self, z):
        return self._dist(z) <= self.radius

    def intersects_balls(self, centers, radii):
        return self._dist(centers) <= self.radius + np.asarray(radii)

    def contains_balls(self, centers, radii):
        return self._dist(centers) + np.asarray(radii) <= self.radius

    def bbox(self, pad: float = 0.0):
        c = np.asarray(self.center)
        return c - self.radius - pad, c + self.radius + pad

    def circumradius(self) -> float:
        return float(np.linalg.norm(self.center)) + self.radius

    def volume(self) -> float:
        return unit_ball_volume(self.d) * self.radius ** self.d


@dataclass(frozen=True)
class Sphere:
    """Boundary of a ball: the set of points at exact distance ``radius``."""

    radius: float
    d: int = 2
    center: tuple = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.center is None:
            object.__setattr__(self, "center", (0.0,) * self.d)
        else:
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))
            object.__setattr__(self, "d", len(self.center))

    def _dist(self, z):
        return np.linalg.norm(_as_points(z) - np.asarray(self.center), axis=1)

    def contains(self, z):
        return self._dist(z) == self.radius

    def intersects_balls(self, centers, radii):
        return np.abs(self._dist(centers) - self.radius) <= np.asarray(radii)

    def contains_balls(self, centers, radii):
        return np.zeros(len(_as_points(centers)), dtype=bool)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by per-axis half extents around a center."""

    halves: tuple
    center: tuple = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "halves", tuple(float(h) for h in self.halves))
        if self.center is None:
            object.__setattr__(self, "center", (0.0,) * len(self.halves))
        else:
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def d(self) -> int:
        return len(self.halves)

    def _excess(self, z):
        # per-axis distance beyond the faces; <= 0 inside
        return np.abs(_as_points(z) - np.asarray(self.center)) - np.asarray(self.halves)

    def contains(self, z):
        return np.all(self._excess(z) <= 0, axis=1)

    def intersects_balls(self, centers, radii):
        out = np.maximum(self._excess(centers), 0.0)
        return np.einsum("ij,ij->i", out, out) <= np.asarray(radii) ** 2

    def contains_balls(self, centers, radii):
        return np.all(self._excess(centers) + np.asarray(radii)[:, None] <= 0, axis=1)

    def bbox(self, pad: float = 0.0):
        c = np.asarray(self.center)
        h = np.asarray(self.halves)
        return c - h - pad, c + h + pad

    def circumradius(self) -> float:
        return float(np.linalg.norm(self.center)) + float(np.linalg.norm(self.halves))

    def volume(self) -> float:
        return float(np.prod(2 * np.asarray(self.halves)))


@dataclass(frozen=True)
class BoxBoundary:
    """Topological boundary of an axis-aligned box."""

    halves: tuple
    center: tuple = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "halves", tuple(float(h) for h in self.halves))
        if self.center is None:
            object.__setattr__(self, "center", (0.0,) * len(self.halves))
        else:
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def d(self) -> int:
        return len(self.halves)

    @property
    def _box(self) -> Box:
        return Box(self.halves, self.center)

    def contains(self, z):
        excess = self._box._excess(z)
        return np.all(excess <= 0, axis=1) & np.any(excess == 0, axis=1)

    def intersects_balls(self, centers, radii):
        # reaches the box but is not strictly interior
        radii = np.asarray(radii)
        excess = self._box._excess(centers)
        out = np.maximum(excess, 0.0)
        reaches = np.einsum("ij,ij->i", out, out) <= radii ** 2
        margin = -np.max(excess, axis=1)  # inradius margin, < 0 outside
        return reaches & (margin <= radii)

    def contains_balls(self, centers, radii):
        return np.zeros(len(_as_points(centers)), dtype=bool)


@dataclass(frozen=True)
class Shell:
    """Closed annulus inner < ||z - c|| <= outer (the outer ball minus the inner one)."""

    inner: float
    outer: float
    d: int = 2
    center: tuple = None  # type: ignore[assignment]

    def __post_init__(self):
        if not 0 <= self.inner < self.outer:
            raise ValueError("need 0 <= inner < outer")
        if self.center is None:
            object.__setattr__(self, "center", (0.0,) * self.d)
        else:
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))
            object.__setattr__(self, "d", len(self.center))

    def _dist(self, z):
        return np.linalg.norm(_as_points(z) - np.asarray(self.center), axis=1)

    def contains(self, z):
        dist = self._dist(z)
        return (dist > self.inner) & (dist <= self.outer)

    def intersects_balls(self, centers, radii):
        dist = self._dist(centers)
        radii = np.asarray(radii)
        return (dist <= self.outer + radii) & (dist + radii > self.inner)

    def contains_balls(self, centers, radii):
        dist = self._dist(centers)
        radii = np.asarray(radii)
        return (dist + radii <= self.outer) & (dist - radii > self.inner)

    def bbox(self, pad: float = 0.0):
        c = np.asarray(self.center)
        return c - self.outer - pad, c + self.outer + pad

    def circumradius(self) -> float:
        return float(np.linalg.norm(self.center)) + self.outer

    def volume(self) -> float:
        return unit_ball_volume(self.d) * (self.outer ** self.d - self.inner ** self.d)


@dataclass(frozen=True)
class Point:
    """A single point (e.g. the origin for 0 <-> dB_r events)."""

    x: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(c) for c in self.x))

    @property
    def d(self) -> int:
        return len(self.x)

    def contains(self, z):
        return np.all(_as_points(z) == np.asarray(self.x), axis=1)

    def intersects_balls(self, centers, radii):
        diff = _as_points(centers) - np.asarray(self.x)
        return np.einsum("ij,ij->i", diff, diff) <= np.asarray(radii) ** 2

    def contains_balls(self, centers, radii):
        return np.zeros(len(_as_points(centers)), dtype=bool)


@dataclass(frozen=True)
class SlabRegion:
    """R^2 x [-k, k]^(d-2): unbounded in the first two axes."""

    k: float
    d: int

    def __post_init__(self):
        if self.d < 3:
            raise ValueError("slabs need d >= 3")

    def _excess(self, z):
        return np.abs(_as_points(z)[:, 2:]) - self.k

    def contains(self, z):
        return np.all(self._excess(z) <= 0, axis=1)

    def intersects_balls(self, centers, radii):
        out = np.maximum(self._excess(centers), 0.0)
        return np.einsum("ij,ij->i", out, out) <= np.asarray(radii) ** 2

    def contains_balls(self, centers, radii):
        return np.all(self._excess(centers) + np.asarray(radii)[:, None] <= 0, axis=1)


def ball(radius: float, d: int = 2, center=None) -> Ball:
    return Ball(radius=radius, d=d, center=center)


def box(half: float, d: int = 2, center=None) -> Box:
    return Box(halves=(half,) * d, center=center)


def slab(k: float, half: float, d: int) -> Box:
    """Finite piece of the slab R^2 x [-k, k]^(d-2): [-half, half]^2 x [-k, k]^(d-2)."""
    if d < 3:
        raise ValueError("slabs need d >= 3")
    return Box(halves=(half, half) + (k,) * (d - 2))
