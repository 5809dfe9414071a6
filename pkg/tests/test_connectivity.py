import math

import numpy as np
import pytest

from boolperc.connectivity import (BigBall, ClusterIndex, Connection,
                                   Crossing, GeneralSeed, Seed, TwoArm,
                                   WindowTooSmall, add_ball, evaluate_event)
from boolperc.geometry import Ball, Box, Point, SlabRegion, Sphere
from boolperc.measures import PointMass, PowerLaw
from boolperc.rng import stream
from boolperc.sampling import Configuration, sample


def make_cfg(centers, radii, window=None, d=2):
    window = window if window is not None else Ball(100.0, d=d)
    return Configuration(np.asarray(centers, dtype=float).reshape(-1, d),
                         np.asarray(radii, dtype=float), window, 100.0, 1.0, 0)


def brute_components(centers, radii):
    """Transitive closure of the intersection graph, for oracle comparison."""
    m = len(radii)
    adj = np.zeros((m, m), dtype=bool)
    for i in range(m):
        for j in range(m):
            d2 = sum((a - b) ** 2 for a, b in zip(centers[i], centers[j]))
            adj[i, j] = d2 <= (radii[i] + radii[j]) ** 2
    reach = adj.copy()
    for k in range(m):
        reach |= reach[:, k][:, None] & reach[k, :][None, :]
    labels = [-1] * m
    comp = 0
    for i in range(m):
        if labels[i] < 0:
            for j in range(m):
                if reach[i, j]:
                    labels[j] = comp
            comp += 1
    return labels


class TestClusterIndex:
    def test_matches_brute_force(self):
        rng = stream(21, "brute")
        for trial in range(300):
            m = int(rng.integers(0, 13))
            centers = rng.uniform(-10, 10, size=(m, 2))
            radii = rng.uniform(0.2, 4.0, size=m)
            idx = ClusterIndex(make_cfg(centers, radii))
            roots = idx.roots()
            labels = brute_components(centers, radii)
            for i in range(m):
                for j in range(m):
                    assert (roots[i] == roots[j]) == (labels[i] == labels[j])

    def test_heavy_tail_radii(self):
        # one giant ball merging many small ones
        rng = stream(22, "heavy")
        centers = rng.uniform(-50, 50, size=(60, 2))
        radii = rng.uniform(0.1, 0.5, size=60)
        centers[0] = (0.0, 0.0)
        radii[0] = 80.0
        idx = ClusterIndex(make_cfg(centers, radii))
        roots = idx.roots()
        assert len(set(roots.tolist())) == 1

    def test_clip_excludes_balls(self):
        # chain 0-1-2 broken when the middle ball's center is clipped out
        cfg = make_cfg([[0, 0], [2, 0], [4, 0]], [1.1, 1.1, 1.1])
        assert ClusterIndex(cfg).connected(Point((0.0, 0.0)), Point((4.0, 0.0)))
        clip = Ball(1.0, d=2)
        assert not ClusterIndex(cfg, clip).connected(Point((0.0, 0.0)),
                                                     Point((4.0, 0.0)))

    def test_cluster_of(self):
        cfg = make_cfg([[0, 0], [2, 0], [10, 0]], [1.1, 1.1, 1.0])
        got = set(ClusterIndex(cfg).cluster_of(Point((0.0, 0.0))).tolist())
        assert got == {0, 1}

    def test_edges_csv(self):
        cfg = make_cfg([[0, 0], [1.5, 0]], [1.0, 1.0])
        assert ClusterIndex(cfg).edges_csv() == "i,j\n0,1\n"

    def test_empty(self):
        cfg = make_cfg(np.empty((0, 2)), [])
        assert not ClusterIndex(cfg).connected(Ball(1.0, d=2), Ball(2.0, d=2))


class TestEvents:
    def test_connection(self):
        cfg = make_cfg([[0, 0], [3, 0]], [1.6, 1.6])
        ev = Connection(a=Ball(0.5, d=2), b=Sphere(4.0, d=2), reach=4.0)
        assert ev.evaluate(cfg)
        assert not ev.evaluate(make_cfg([[0, 0]], [1.0]))

    def test_crossing_origin_mode(self):
        # inner = 0 requires the origin to be covered
        ev = Crossing(inner=0.0, outer=3.0, d=2)
        assert ev.evaluate(make_cfg([[0.5, 0], [2.5, 0]], [1.2, 1.2]))
        # origin not covered even though B_1 would be hit
        assert not ev.evaluate(make_cfg([[1.5, 0], [2.5, 0]], [1.2, 1.2]))

    def test_crossing_annulus_mode(self):
        ev = Crossing(inner=1.0, outer=3.0, d=2)
        assert ev.evaluate(make_cfg([[1.5, 0], [2.8, 0]], [0.6, 0.8]))
        assert not ev.evaluate(make_cfg([[2.0, 0]], [0.5]))

    def test_crossing_slab_clip(self):
        # d=3 chain through a ball centered outside the slab is cut
        clip = SlabRegion(k=0.5, d=3)
        ev = Crossing(inner=1.0, outer=4.0, d=3, clip=clip)
        chain = make_cfg([[1.2, 0, 0], [2.4, 0, 2.0], [3.6, 0, 0]],
                         [0.7, 1.6, 0.7], window=Ball(100.0, d=3), d=3)
        assert not ev.evaluate(chain)
        flat = make_cfg([[1.2, 0, 0], [2.4, 0, 0], [3.6, 0, 0]],
                        [0.7, 0.7, 0.7], window=Ball(100.0, d=3), d=3)
        assert ev.evaluate(flat)

    def test_seed(self):
        # B_2 connected to a radius >= 2 ball centered in the annulus [6, 9]
        ev = Seed(n=2, N=6, rho=1.0)
        good = make_cfg([[1, 0], [4, 0], [7, 0]], [1.5, 2.0, 2.5])
        assert ev.evaluate(good)
        small_seed = make_cfg([[1, 0], [4, 0], [7, 0]], [1.5, 2.0, 1.5])
        assert not ev.evaluate(small_seed)
        disconnected = make_cfg([[7, 0]], [2.5])
        assert not ev.evaluate(disconnected)

    def test_seed_validation(self):
        with pytest.raises(ValueError):
            Seed(n=2, N=3)
        with pytest.raises(ValueError):
            Seed(n=1, N=4, rho=0.5)

    def test_seed_outside_clip_ignored(self):
        # connection passing through a ball centered beyond (rho+1/2)N is cut
        ev = Seed(n=2, N=6, rho=1.0)
        cfg = make_cfg([[1, 0], [10, 0], [8, 0]], [1.5, 8.0, 2.5])
        assert not ev.evaluate(cfg)

    def test_general_seed(self):
        target_box = Box(halves=(2.0, 2.0), center=(8.0, 0.0))
        halo = Ball(15.0, d=2)
        ev = GeneralSeed(b=Ball(1.0, d=2), e=target_box, f=halo, min_radius=2.0)
        assert ev.evaluate(make_cfg([[0.5, 0], [4, 0], [7, 0]],
                                    [1.0, 2.8, 2.1]))
        assert not ev.evaluate(make_cfg([[0.5, 0], [4, 0], [7, 0]],
                                        [1.0, 2.8, 1.9]))

    def test_big_ball(self):
        ev = BigBall(n=4.0, threshold=2.0)
        assert ev.evaluate(make_cfg([[1, 0]], [2.0]))
        assert not ev.evaluate(make_cfg([[1, 0]], [1.9]))
        # qualifying radius but center outside B_n
        assert not ev.evaluate(make_cfg([[5, 0]], [3.0]))

    def test_add_ball(self):
        cfg = make_cfg([[0, 0]], [1.0])
        out = add_ball(cfg, [3.0, 0.0], 2.0)
        assert len(out) == 2
        assert out.radii[-1] == 2.0
        assert len(cfg) == 1


class TestTwoArm:
    def test_two_disjoint_arms(self):
        # two horizontal chains crossing from Lambda_1 to the boundary of
        # Lambda_4 at y = +-2, never touching each other
        pts, radii = [], []
        for y in (-2.0, 2.0):
            for x in np.arange(-4.5, 5.0, 1.0):
                pts.append([x, y])
                radii.append(0.7)
        cfg = make_cfg(pts, radii)
        assert not TwoArm(k=1.0, K=4.0).evaluate(cfg)  # chains miss Lambda_1
        for y in (-2.0, 2.0):
            pts.append([0.0, y / 2])
            radii.append(0.9)
        cfg = make_cfg(pts, radii)
        assert TwoArm(k=1.0, K=4.0).evaluate(cfg)

    def test_single_arm_insufficient(self):
        pts = [[x, 0.0] for x in np.arange(-4.5, 5.0, 1.0)]
        cfg = make_cfg(pts, [0.7] * len(pts))
        assert not TwoArm(k=1.0, K=4.0).evaluate(cfg)

    def test_bad_ball_merges_arms(self):
        # a ball with radius > K meeting Lambda_K is removed as bad, so the
        # event survives; the same ball with admissible radius joins the arms
        pts, radii = [], []
        for y in (-2.0, 2.0):
            for x in np.arange(-4.5, 5.0, 1.0):
                pts.append([x, y])
                radii.append(0.7)
            pts.append([0.0, y / 2])
            radii.append(0.9)
        bridge_bad = pts + [[0.0, 0.0]]
        cfg = make_cfg(bridge_bad, radii + [4.5])
        assert TwoArm(k=1.0, K=4.0).evaluate(cfg)
        cfg = make_cfg(bridge_bad, radii + [2.5])
        assert not TwoArm(k=1.0, K=4.0).evaluate(cfg)

    def test_outside_connection_does_not_merge(self):
        # two arms joined only by balls outside Lambda_K still count as two
        pts, radii = [], []
        for y in (-2.0, 2.0):
            for x in np.arange(-4.5, 5.0, 1.0):
                pts.append([x, y])
                radii.append(0.7)
            pts.append([0.0, y / 2])
            radii.append(0.9)
        # bridge at x = 6, outside Lambda_4, radius small enough to be good
        for y in np.arange(-2.0, 2.5, 1.0):
            pts.append([6.0, y])
            radii.append(0.8)
        cfg = make_cfg(pts, radii)
        assert TwoArm(k=1.0, K=4.0).evaluate(cfg)


class TestEvaluateEvent:
    def test_window_guard(self):
        ev = Crossing(inner=1.0, outer=5.0, d=2)
        cfg = sample(1.0, PowerLaw(delta=1.0, d=2), Ball(3.0, d=2), seed=0)
        with pytest.raises(WindowTooSmall):
            evaluate_event(cfg, ev)

    def test_window_ok(self):
        ev = Crossing(inner=1.0, outer=3.0, d=2)
        cfg = sample(1.0, PowerLaw(delta=1.0, d=2), Ball(3.0, d=2), seed=0)
        assert evaluate_event(cfg, ev) in (True, False)

    def test_box_window_uses_inradius(self):
        ev = Crossing(inner=1.0, outer=3.0, d=2)
        cfg = sample(1.0, PointMass(radius=1.0, d=2),
                     Box(halves=(2.0, 2.0)), seed=0)
        with pytest.raises(WindowTooSmall):
            evaluate_event(cfg, ev)
