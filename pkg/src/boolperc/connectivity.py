"""Ball-intersection graph, clipped connectivity queries, and event indicators.

Balls are convex, so connectivity of the occupied set equals connectivity of
the graph whose edges join pairwise-intersecting balls.  A two-level structure
(uniform grid for small balls, direct checks for the few large ones) keeps the
heavy-tailed case out of quadratic territory.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Ball, Box, BoxBoundary, Point, Shell, Sphere
from .sampling import Configuration

__all__ = [
    "WindowTooSmall",
    "ClusterIndex",
    "Connection",
    "Crossing",
    "Seed",
    "GeneralSeed",
    "TwoArm",
    "BigBall",
    "evaluate_event",
    "add_ball",
]


class WindowTooSmall(ValueError):
    def __init__(self, required: float, actual: float):
        super().__init__(f"event needs window inradius >= {required}, got {actual}")
        self.required = required
        self.actual = actual


class _DSU:
    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)

    def find(self, i: int) -> int:
        p = self.parent
        root = i
        while p[root] != root:
            root = p[root]
        while p[i] != root:
            p[i], i = root, p[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[rj] = ri


class ClusterIndex:
    """Union-find over ball intersections, optionally clipped.

    Only balls whose center lies in ``clip`` participate; queries about other
    balls behave as if those balls were absent.
    """

    def __init__(self, cfg: Configuration, clip=None):
        self.cfg = cfg
        centers, radii = cfg.centers, cfg.radii
        if clip is not None and len(radii):
            participating = np.asarray(clip.contains(centers), dtype=bool)
        else:
            participating = np.ones(len(radii), dtype=bool)
        self.participating = participating
        self.index = np.flatnonzero(participating)
        self.z = centers[self.index]
        self.r = radii[self.index]
        m = len(self.index)
        self.dsu = _DSU(m)
        if m > 1:
            self._build()

    def _build(self) -> None:
        z, r = self.z, self.r
        m = len(r)
        h = float(np.median(r))
        cell = 2.0 * max(h, 1e-9)
        small = np.flatnonzero(r <= h)
        large = np.flatnonzero(r > h)
        d = z.shape[1]
        grid: dict = {}
        keys = np.floor(z[small] / cell).astype(np.int64)
        for local, i in enumerate(small):
            grid.setdefault(tuple(keys[local]), []).append(i)
        offsets = list(itertools.product((-1, 0, 1), repeat=d))
        for key, members in grid.items():
            cand = []
            for off in offsets:
                cand.extend(grid.get(tuple(k + o for k, o in zip(key, off)), []))
            cand = np.asarray(cand)
            members = np.asarray(members)
            diff = z[members][:, None, :] - z[cand][None, :, :]
            dist2 = np.einsum("ijk,ijk->ij", diff, diff)
            reach = (r[members][:, None] + r[cand][None, :]) ** 2
            hit_i, hit_j = np.nonzero(dist2 <= reach)
            for a, b in zip(members[hit_i], cand[hit_j]):
                if a < b:
                    self.dsu.union(int(a), int(b))
        for i in large:
            diff = z - z[i]
            dist2 = np.einsum("ij,ij->i", diff, diff)
            hits = np.flatnonzero(dist2 <= (r + r[i]) ** 2)
            for j in hits:
                if j != i:
                    self.dsu.union(int(i), int(j))

    def roots(self) -> np.ndarray:
        return np.asarray([self.dsu.find(i) for i in range(len(self.r))], dtype=np.int64)

    def _touch_roots(self, region) -> set:
        if len(self.r) == 0:
            return set()
        touch = np.asarray(region.intersects_balls(self.z, self.r), dtype=bool)
        return {self.dsu.find(int(i)) for i in np.flatnonzero(touch)}

    def connected(self, a, b) -> bool:
        """True iff some cluster's occupied set meets both regions."""
        return bool(self._touch_roots(a) & self._touch_roots(b))

    def cluster_of(self, a) -> np.ndarray:
        """Global ball indices of all clusters whose occupied set meets region a."""
        roots_a = self._touch_roots(a)
        if not roots_a:
            return np.empty(0, dtype=np.int64)
        local = [i for i in range(len(self.r)) if self.dsu.find(i) in roots_a]
        return self.index[local]

    def edges(self) -> list:
        """Intersection-graph edges among participating balls (for debug dumps)."""
        out = []
        z, r = self.z, self.r
        for i in range(len(r)):
            diff = z[i + 1:] - z[i]
            dist2 = np.einsum("ij,ij->i", diff, diff)
            hits = np.flatnonzero(dist2 <= (r[i + 1:] + r[i]) ** 2)
            out.extend((int(self.index[i]), int(self.index[i + 1 + j])) for j in hits)
        return out

    def edges_csv(self) -> str:
        lines = ["i,j"] + [f"{i},{j}" for i, j in self.edges()]
        return "\n".join(lines) + "\n"


def build_index(cfg: Configuration, clip=None) -> ClusterIndex:
    return ClusterIndex(cfg, clip)


def add_ball(cfg: Configuration, z, r: float) -> Configuration:
    """Configuration with one extra ball (for pivotality estimators)."""
    centers = np.concatenate([cfg.centers, np.asarray(z, dtype=float).reshape(1, -1)])
    radii = np.concatenate([cfg.radii, [float(r)]])
    return Configuration(centers, radii, cfg.window, cfg.r_max, cfg.lam,
                         cfg.seed, cfg.truncation_tail)


# --- event specifications ----------------------------------------------------

@dataclass(frozen=True)
class Connection:
    """A <-> B through balls centered in ``clip`` (None: all balls)."""

    a: object
    b: object
    clip: object = None
    reach: float = 0.0  # circumradius of the dependence region, for window checks

    def dependence_radius(self) -> float:
        radii = [self.reach]
        for reg in (self.a, self.b, self.clip):
            if reg is not None and hasattr(reg, "circumradius"):
                radii.append(reg.circumradius())
        return max(radii)

    def evaluate(self, cfg: Configuration) -> bool:
        return ClusterIndex(cfg, self.clip).connected(self.a, self.b)


@dataclass(frozen=True)
class Crossing:
    """B_inner <-> boundary of B_outer; inner = 0 means the covered origin."""

    inner: float
    outer: float
    d: int = 2
    clip: object = None

    def dependence_radius(self) -> float:
        return self.outer

    def evaluate(self, cfg: Configuration) -> bool:
        src = Point((0.0,) * cfg.d) if self.inner <= 0 else Ball(self.inner, d=cfg.d)
        return ClusterIndex(cfg, self.clip).connected(src, Sphere(self.outer, d=cfg.d))


@dataclass(frozen=True)
class Seed:
    """B_n connects, inside B_(rho+1/2)N, to a ball of radius >= n centered in
    the annulus between rho N and (rho+1/2) N."""

    n: float
    N: float
    rho: float = 1.0

    def __post_init__(self):
        if self.rho < 1 or self.N < 2 * self.n:
            raise ValueError("seed events need rho >= 1 and N >= 2n")

    def dependence_radius(self) -> float:
        return (self.rho + 0.5) * self.N

    def evaluate(self, cfg: Configuration) -> bool:
        d = cfg.d
        R = (self.rho + 0.5) * self.N
        clip = Ball(R, d=d)
        idx = ClusterIndex(cfg, clip)
        if len(idx.r) == 0:
            return False
        shell = Shell(self.rho * self.N, R, d=d)
        big = np.asarray(shell.contains(idx.z), dtype=bool) & (idx.r >= self.n)
        if not big.any():
            return False
        cluster = set(idx.cluster_of(Ball(self.n, d=d)).tolist())
        return any(int(idx.index[i]) in cluster for i in np.flatnonzero(big))


@dataclass(frozen=True)
class GeneralSeed:
    """Some ball of radius >= min_radius centered in E connects to B inside F."""

    b: object
    e: object
    f: object
    min_radius: float

    def dependence_radius(self) -> float:
        radii = []
        for reg in (self.b, self.e, self.f):
            if hasattr(reg, "circumradius"):
                radii.append(reg.circumradius())
        return max(radii) if radii else 0.0

    def evaluate(self, cfg: Configuration) -> bool:
        idx = ClusterIndex(cfg, self.f)
        if len(idx.r) == 0:
            return False
        big = np.asarray(self.e.contains(idx.z), dtype=bool) & (idx.r >= self.min_radius)
        if not big.any():
            return False
        cluster = set(idx.cluster_of(self.b).tolist())
        return any(int(idx.index[i]) in cluster for i in np.flatnonzero(big))


@dataclass(frozen=True)
class BigBall:
    """A ball of radius >= threshold centered inside B_n exists."""

    n: float
    threshold: float

    def dependence_radius(self) -> float:
        return self.n

    def evaluate(self, cfg: Configuration) -> bool:
        if len(cfg) == 0:
            return False
        inside = np.asarray(Ball(self.n, d=cfg.d).contains(cfg.centers), dtype=bool)
        return bool(np.any(inside & (cfg.radii >= self.threshold)))


def _segment_meets_box(p: np.ndarray, q: np.ndarray, half: float) -> bool:
    """Does the segment [p, q] meet the centered box of half-side ``half``?"""
    t0, t1 = 0.0, 1.0
    direction = q - p
    for axis in range(len(p)):
        lo, hi = -half, half
        dv = direction[axis]
        if dv == 0:
            if not lo <= p[axis] <= hi:
                return False
            continue
        ta = (lo - p[axis]) / dv
        tb = (hi - p[axis]) / dv
        if ta > tb:
            ta, tb = tb, ta
        t0, t1 = max(t0, ta), min(t1, tb)
        if t0 > t1:
            return False
    return True


@dataclass(frozen=True)
class TwoArm:
    """Two disjoint clusters of good balls crossing from Lambda_k to the
    boundary of Lambda_K, after removing the bad-ball set of Lambda_K.

    Bad balls are those meeting Lambda_K whose (center, radius) falls outside
    Lambda_2K x [0, K].  Cluster connectivity is restricted to Lambda_K: an
    edge counts only if the overlap segment of the two balls meets the box.
    """

    k: float
    K: float
    d: int = 2

    def dependence_radius(self) -> float:
        return 2 * self.K * math.sqrt(self.d)  # needs all of Lambda_2K

    def evaluate(self, cfg: Configuration) -> bool:
        d = cfg.d
        box_K = Box(halves=(self.K,) * d)
        if len(cfg) == 0:
            return False
        meets_K = np.asarray(box_K.intersects_balls(cfg.centers, cfg.radii), dtype=bool)
        in_2K = np.asarray(Box(halves=(2 * self.K,) * d).contains(cfg.centers), dtype=bool)
        bad = meets_K & ~(in_2K & (cfg.radii <= self.K))
        good = meets_K & ~bad
        idx = np.flatnonzero(good)
        if len(idx) == 0:
            return False
        z, r = cfg.centers[idx], cfg.radii[idx]
        m = len(idx)
        dsu = _DSU(m)
        for i in range(m):
            for j in range(i + 1, m):
                diff = z[j] - z[i]
                dist2 = float(diff @ diff)
                if dist2 > (r[i] + r[j]) ** 2:
                    continue
                dist = math.sqrt(dist2)
                if dist == 0:
                    p, q = z[i], z[i]
                else:
                    u0 = max(0.0, (dist - r[j]) / dist)
                    u1 = min(1.0, r[i] / dist)
                    p = z[i] + u0 * diff
                    q = z[i] + u1 * diff
                if _segment_meets_box(p, q, self.K):
                    dsu.union(i, j)
        touches_inner = np.asarray(Box(halves=(self.k,) * d).intersects_balls(z, r), dtype=bool)
        touches_outer = np.asarray(BoxBoundary(halves=(self.K,) * d).intersects_balls(z, r), dtype=bool)
        arms = set()
        for i in range(m):
            root = dsu.find(i)
            if touches_inner[i]:
                arms.add((root, "in"))
            if touches_outer[i]:
                arms.add((root, "out"))
        full = {root for root, side in arms if side == "in"} & \
               {root for root, side in arms if side == "out"}
        return len(full) >= 2


def evaluate_event(cfg: Configuration, ev) -> bool:
    """Exact indicator of the event on one configuration."""
    required = ev.dependence_radius()
    win = cfg.window
    if isinstance(win, Ball) and win.center == (0.0,) * win.d:
        inradius = win.radius
    elif isinstance(win, Box) and win.center == (0.0,) * win.d:
        inradius = min(win.halves)
    else:
        inradius = win.circumradius()
    if required > inradius + 1e-9:
        raise WindowTooSmall(required=required, actual=inradius)
    return ev.evaluate(cfg)
