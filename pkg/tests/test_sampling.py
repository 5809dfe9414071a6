import math

import numpy as np
import pytest
from scipy import stats

from boolperc.geometry import Ball, Box
from boolperc.measures import CellLaw, PointMass, PowerLaw, Truncated
from boolperc.rng import stream, tag_entropy
from boolperc.sampling import (Configuration, TruncationBudgetExceeded,
                               _hazard, default_r_max, project_level, sample,
                               sample_encoded, sprinkle, thin,
                               truncation_tail)


class TestStream:
    def test_deterministic(self):
        a = stream(1, "x", 0).uniform(size=5)
        b = stream(1, "x", 0).uniform(size=5)
        assert np.array_equal(a, b)

    def test_keys_independent(self):
        a = stream(1, "x", 0).uniform(size=5)
        assert not np.array_equal(a, stream(2, "x", 0).uniform(size=5))
        assert not np.array_equal(a, stream(1, "y", 0).uniform(size=5))
        assert not np.array_equal(a, stream(1, "x", 1).uniform(size=5))

    def test_tag_entropy_stable(self):
        assert tag_entropy("sample") == tag_entropy("sample")
        assert tag_entropy("sample") != tag_entropy("thin")


class TestSample:
    def test_deterministic(self):
        mu = PowerLaw(delta=1.0, d=2)
        a = sample(1.0, mu, Ball(4.0, d=2), seed=3)
        b = sample(1.0, mu, Ball(4.0, d=2), seed=3)
        assert np.array_equal(a.centers, b.centers)
        assert np.array_equal(a.radii, b.radii)

    def test_every_ball_meets_window(self):
        mu = PowerLaw(delta=1.0, d=2)
        cfg = sample(2.0, mu, Ball(5.0, d=2), seed=11)
        assert cfg.window.intersects_balls(cfg.centers, cfg.radii).all()
        assert (cfg.radii >= 1.0).all()
        assert (cfg.radii <= cfg.r_max).all()

    def test_enlarge_false_confines_centers(self):
        mu = PowerLaw(delta=1.0, d=2)
        win = Box(halves=(3.0, 3.0))
        cfg = sample(2.0, mu, win, seed=5, enlarge=False)
        assert win.contains(cfg.centers).all()

    def test_r_min_restricts(self):
        mu = PowerLaw(delta=1.0, d=2)
        cfg = sample(5.0, mu, Ball(6.0, d=2), seed=7, r_min=2.0)
        assert len(cfg) > 0
        assert (cfg.radii >= 2.0).all()

    def test_count_mean_enlarge_false(self):
        # centers confined to the box: count ~ Poisson(lam * vol * total mass)
        mu = PowerLaw(delta=1.0, d=2)
        win = Box(halves=(2.0, 2.0))
        lam = 3.0
        counts = [len(sample(lam, mu, win, seed=42, enlarge=False, index=i))
                  for i in range(400)]
        mean = lam * win.volume() * mu.mass(0, math.inf)
        se = math.sqrt(mean / 400)
        assert abs(np.mean(counts) - mean) < 4 * se

    def test_pointmass_count_mean(self):
        mu = PointMass(radius=1.0, d=2)
        win = Box(halves=(2.0, 2.0))
        counts = [len(sample(2.0, mu, win, seed=9, enlarge=False, index=i))
                  for i in range(400)]
        mean = 2.0 * win.volume()
        assert abs(np.mean(counts) - mean) < 4 * math.sqrt(mean / 400)

    def test_configuration_read_only(self):
        cfg = sample(1.0, PowerLaw(delta=1.0, d=2), Ball(3.0, d=2), seed=1)
        with pytest.raises(ValueError):
            cfg.radii[:] = 0.0
        with pytest.raises(ValueError):
            cfg.centers[:] = 0.0


class TestTruncation:
    def test_tail_decreases(self):
        mu = PowerLaw(delta=1.0, d=2)
        win = Ball(4.0, d=2)
        t8 = truncation_tail(1.0, mu, win, 8.0)
        t64 = truncation_tail(1.0, mu, win, 64.0)
        assert 0 < t64 < t8

    def test_tail_zero_for_bounded_support(self):
        mu = Truncated(base=PowerLaw(delta=1.0, d=2), cutoff=4.0)
        assert truncation_tail(1.0, mu, Ball(4.0, d=2), 4.0) == 0.0

    def test_default_r_max_meets_budget(self):
        mu = PowerLaw(delta=1.0, d=2)
        win = Ball(4.0, d=2)
        m = default_r_max(1.0, mu, win, budget=1e-3)
        assert truncation_tail(1.0, mu, win, m) <= 1e-3
        assert truncation_tail(1.0, mu, win, m / 2) > 1e-3

    def test_budget_enforced(self):
        mu = PowerLaw(delta=1.0, d=2)
        with pytest.raises(TruncationBudgetExceeded):
            sample(1.0, mu, Ball(4.0, d=2), r_max=4.0, seed=0,
                   tail_budget=1e-6)


class TestThin:
    def test_monotone_coupling(self):
        # shared uniforms: larger keep probability keeps a superset
        mu = PowerLaw(delta=1.0, d=2)
        base = sample(4.0, mu, Ball(5.0, d=2), seed=13)
        small = thin(base, lambda r: np.full(len(r), 0.3), seed=1)
        large = thin(base, lambda r: np.full(len(r), 0.7), seed=1)
        key = lambda cfg: {tuple(z) + (r,) for z, r in zip(cfg.centers, cfg.radii)}
        assert key(small) <= key(large) <= key(base)

    def test_keep_fraction(self):
        mu = PowerLaw(delta=1.0, d=2)
        kept = total = 0
        for i in range(100):
            base = sample(4.0, mu, Ball(5.0, d=2), seed=17, index=i)
            total += len(base)
            kept += len(thin(base, lambda r: np.full(len(r), 0.5), seed=i))
        assert abs(kept / total - 0.5) < 4 * math.sqrt(0.25 / total)


class TestSprinkle:
    def test_union_and_region(self):
        mu = PointMass(radius=1.0, d=2)
        base = sample(1.0, mu, Box(halves=(6.0, 6.0)), seed=3, enlarge=False)
        region = Ball(2.0, d=2)
        out = sprinkle(base, 2.0, mu, region, seed=3)
        assert len(out) >= len(base)
        extra = out.centers[len(base):]
        assert region.contains(extra).all()

    def test_zero_rate_identity(self):
        mu = PointMass(radius=1.0, d=2)
        base = sample(1.0, mu, Box(halves=(3.0, 3.0)), seed=3)
        assert sprinkle(base, 0.0, mu, Ball(1.0, d=2), seed=3) is base


class TestHazard:
    def test_chain_reconstructs_poisson(self):
        # product of hazards p(0,t)...p(k-1,t) = P(Poisson(t) >= k)
        t = 0.7
        prod = 1.0
        for k in range(6):
            prod *= _hazard(k, t)
            assert prod == pytest.approx(stats.poisson.sf(k, t), rel=1e-12)


class TestProjection:
    @pytest.mark.parametrize("K", [4, 8])
    def test_projection_error_bound(self, K):
        law = CellLaw(n=1, delta=1.0, d=2)
        rng = stream(99, "proj")
        r = law.inverse_cdf(rng.uniform(size=2000))
        z = rng.uniform(-5, 5, size=(2000, 2))
        pz, pr = project_level(z, r, law, K)
        err = r - pr
        assert (err >= -1e-12).all()
        assert (err <= law.lipschitz_inverse * 2.0 ** -K + 1e-12).all()
        assert (z - pz >= -1e-12).all()
        assert (z - pz <= 2.0 ** -K + 1e-12).all()


class TestEncodedSampler:
    def test_decoded_fields_consistent(self):
        cells = [((0, 0), 1), ((1, 0), 2), ((0, 1), 1)]
        encoded, cfg = sample_encoded(2.0, 1.0, cells, seed=4)
        assert sum(c.count for c in encoded) == len(cfg)
        for c in encoded:
            assert (c.radii >= c.n).all() and (c.radii <= c.n + 1).all()
            lo = np.asarray(c.x) - 0.5
            hi = np.asarray(c.x) + 0.5
            assert ((c.centers >= lo) & (c.centers < hi)).all()
            # presence chain consistent with the decoded count
            assert int(c.alpha.sum()) == c.count

    def test_deterministic(self):
        cells = [((0, 0), 1)]
        _, a = sample_encoded(2.0, 1.0, cells, seed=4)
        _, b = sample_encoded(2.0, 1.0, cells, seed=4)
        assert np.array_equal(a.radii, b.radii)

    def test_count_law_matches_poisson(self):
        # per-cell count follows Poisson(lam * g(n)) by construction of the
        # hazard chain; compare frequencies of {0, 1, >=2}
        lam, delta = 2.0, 1.0
        law = CellLaw(n=1, delta=delta, d=2)
        t = lam * law.g
        counts = []
        for i in range(3000):
            enc, _ = sample_encoded(lam, delta, [((0, 0), 1)], seed=1000 + i)
            counts.append(enc[0].count)
        counts = np.asarray(counts)
        for k, p in [(0, math.exp(-t)), (1, t * math.exp(-t))]:
            freq = np.mean(counts == k)
            assert abs(freq - p) < 4 * math.sqrt(p * (1 - p) / 3000)

    def test_radius_law_matches_direct(self):
        # decoded radii vs direct band draws, two-sample KS
        lam, delta = 3.0, 1.0
        law = CellLaw(n=1, delta=delta, d=2)
        enc_r = []
        for i in range(600):
            enc, _ = sample_encoded(lam, delta, [((0, 0), 1)], seed=5000 + i)
            enc_r.extend(enc[0].radii.tolist())
        direct = law.inverse_cdf(stream(77, "direct").uniform(size=len(enc_r)))
        assert stats.ks_2samp(enc_r, direct).pvalue > 1e-3
