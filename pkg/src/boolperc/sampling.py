"""Sampling of the Poisson ball process on finite windows.

Centers are drawn band-wise in radius: the band [lo, hi) is sampled on the
window's bounding box enlarged by hi, then thinned to balls that actually
reach the window.  This is exact in law for the restriction of the process to
{(z, r): ball(z, r) meets the window} and avoids oversampling small radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .geometry import unit_ball_volume
from .measures import CellLaw, PointMass, RadiusMeasure
from .rng import stream

__all__ = [
    "TruncationBudgetExceeded",
    "Configuration",
    "EncodedCell",
    "sample",
    "sample_encoded",
    "sprinkle",
    "thin",
    "default_r_max",
    "truncation_tail",
    "project_level",
]


class TruncationBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Configuration:
    """One sample of the ball process: centers (m, d), radii (m,)."""

    centers: np.ndarray
    radii: np.ndarray
    window: object
    r_max: float
    lam: float
    seed: int
    truncation_tail: float = 0.0

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float).reshape(-1, self.window.d)
        radii = np.asarray(self.radii, dtype=float).reshape(-1)
        centers.setflags(write=False)
        radii.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    def __len__(self) -> int:
        return len(self.radii)

    @property
    def d(self) -> int:
        return self.window.d

    def restrict(self, keep: np.ndarray) -> "Configuration":
        return Configuration(self.centers[keep], self.radii[keep], self.window,
                             self.r_max, self.lam, self.seed, self.truncation_tail)


def truncation_tail(lam: float, mu: RadiusMeasure, window, r_max: float) -> float:
    """Expected number of discarded balls (radius > r_max) meeting the window."""
    if r_max >= mu.support_max():
        return 0.0
    d = window.d
    rw = window.circumradius()
    alpha = unit_ball_volume(d)
    # vol(window (+) B_r) <= alpha_d (rw + r)^d, expanded binomially
    total = 0.0
    for k in range(d + 1):
        total += math.comb(d, k) * rw ** (d - k) * mu.moment_tail(k, r_max)
    return lam * alpha * total


def default_r_max(lam: float, mu: RadiusMeasure, window, budget: float = 1e-3) -> float:
    """Smallest power-of-two truncation whose discarded expected count is <= budget."""
    if math.isfinite(mu.support_max()):
        return mu.support_max()
    m = 2.0
    while truncation_tail(lam, mu, window, m) > budget:
        m *= 2.0
        if m > 2**40:
            raise TruncationBudgetExceeded("no affordable truncation radius")
    return m


def _bands(mu: RadiusMeasure, r_min: float, r_max: float) -> list:
    """Radius bands [(lo, hi), ...] covering support(mu) within [r_min, r_max]."""
    if isinstance(mu, PointMass):
        r = mu.radius
        return [(r, r)] if r_min <= r <= r_max else []
    lo = max(r_min, 1.0)
    hi_total = min(r_max, mu.support_max())
    if lo >= hi_total:
        return []
    cuts = [lo]
    cur = math.floor(lo) + 1.0
    while cur < hi_total and cur <= 16:
        if cur > lo:
            cuts.append(cur)
        cur += 1.0
    while cur < hi_total:
        cuts.append(cur)
        cur *= 2.0
    cuts.append(hi_total)
    return list(zip(cuts[:-1], cuts[1:]))


def sample(lam: float, mu: RadiusMeasure, window, r_max: float | None = None,
           seed: int = 0, *, r_min: float = 0.0, enlarge: bool = True,
           tail_budget: float | None = None, tag: str = "sample",
           index: int = 0) -> Configuration:
    """Draw the process of intensity lam dz (x) mu restricted to balls meeting the window.

    With enlarge=False, centers are restricted to the window itself (no
    boundary correction); this is the right mode for sprinkling on a region.
    """
    if r_max is None:
        r_max = default_r_max(lam, mu, window, budget=tail_budget or 1e-3)
    tail = truncation_tail(lam, mu, window, r_max)
    if tail_budget is not None and tail > tail_budget:
        raise TruncationBudgetExceeded(
            f"expected discarded ball count {tail:.3g} exceeds budget {tail_budget:.3g}")
    rng = stream(seed, tag, index)
    d = window.d
    all_z, all_r = [], []
    for band_i, (lo, hi) in enumerate(_bands(mu, r_min, r_max)):
        pad = hi if enlarge else 0.0
        bb_lo, bb_hi = window.bbox(pad)
        vol = float(np.prod(bb_hi - bb_lo))
        band_mass = mu.mass(lo, hi) if hi > lo else mu.mass(lo, lo)
        mean = lam * vol * band_mass
        count = rng.poisson(mean)
        if count == 0:
            continue
        z = rng.uniform(bb_lo, bb_hi, size=(count, d))
        r = np.asarray(mu.band_quantile(lo, hi, rng.uniform(size=count)), dtype=float)
        keep = window.intersects_balls(z, r) if enlarge else window.contains(z)
        all_z.append(z[keep])
        all_r.append(r[keep])
    if all_z:
        centers = np.concatenate(all_z)
        radii = np.concatenate(all_r)
    else:
        centers = np.empty((0, d))
        radii = np.empty(0)
    return Configuration(centers, radii, window, r_max, lam, seed, tail)


def thin(cfg: Configuration, keep_prob, seed: int, tag: str = "thin") -> Configuration:
    """Independent thinning with per-ball keep probability keep_prob(r).

    Using the same (seed, tag) for several thinnings of one base configuration
    couples them monotonically: pointwise-larger keep probabilities keep a
    superset of balls.
    """
    u = stream(seed, tag, 0).uniform(size=len(cfg))
    return cfg.restrict(u < np.asarray(keep_prob(cfg.radii), dtype=float))


def sprinkle(base: Configuration, beta_xi: float, mu: RadiusMeasure, region,
             seed: int, tag: str = "sprinkle", index: int = 0) -> Configuration:
    """Union of base with an independent process of intensity beta_xi dz 1_region (x) mu."""
    if beta_xi <= 0:
        return base
    extra = sample(beta_xi, mu, region, r_max=base.r_max, seed=seed,
                   enlarge=False, tag=tag, index=index)
    centers = np.concatenate([base.centers, extra.centers])
    radii = np.concatenate([base.radii, extra.radii])
    return Configuration(centers, radii, base.window, base.r_max, base.lam,
                         base.seed, base.truncation_tail + extra.truncation_tail)


def _hazard(k: int, t: float) -> float:
    """p(k, t) = P(Poisson(t) >= k+1 | Poisson(t) >= k)."""
    if k == 0:
        return -math.expm1(-t)
    return stats.poisson.sf(k, t) / stats.poisson.sf(k - 1, t)


def project_level(z, r, law: CellLaw, K: int):
    """Level-K dyadic projection of a point of the cell: floors z and the radius rank."""
    scale = 2.0 ** K
    pz = np.floor(np.asarray(z) * scale) / scale
    t = np.clip(law.cdf(r), 0.0, 1.0)
    pr = law.inverse_cdf(np.floor(t * scale) / scale)
    return pz, pr


@dataclass(frozen=True)
class EncodedCell:
    """Bit encoding of one cell S_n^x: presence chain, radius bits, position bits."""

    x: tuple
    n: int
    alpha: np.ndarray          # presence chain, length K
    beta: np.ndarray           # (count, K) radius bits
    gamma: np.ndarray          # (count, d, K) position bits
    centers: np.ndarray        # decoded (count, d)
    radii: np.ndarray          # decoded (count,)

    @property
    def count(self) -> int:
        return len(self.radii)


def sample_encoded(lam: float, delta: float, cells, K: int = 53, seed: int = 0,
                   d: int = 2, tag: str = "encoded") -> tuple:
    """Bit-encoded sampler over lattice cells (x, n) = (x + [-1/2,1/2)^d) x [n, n+1).

    Returns (encoded cells, decoded Configuration).  At K = 53 the decoded law
    agrees with sample() restricted to the cells at double-precision
    granularity.
    """
    if K < 1:
        raise ValueError("bit depth K must be >= 1")
    from .geometry import Box  # local to avoid cycle at import time

    weights = 2.0 ** -(1 + np.arange(K))
    encoded = []
    all_z, all_r = [], []
    max_n = 1
    centers_hull = []
    for i, (x, n) in enumerate(cells):
        x = tuple(float(c) for c in x)
        law = CellLaw(n=int(n), delta=delta, d=d)
        rng = stream(seed, tag, i)
        t_mean = lam * law.g
        alpha = np.zeros(K, dtype=np.int8)
        count = 0
        while count < K:
            bit = rng.uniform() < _hazard(count, t_mean)
            alpha[count] = bit
            if not bit:
                break
            count += 1
        beta = (rng.uniform(size=(count, K)) < 0.5).astype(np.int8)
        gamma = (rng.uniform(size=(count, d, K)) < 0.5).astype(np.int8)
        radii = law.inverse_cdf(beta @ weights)
        centers = np.asarray(x) + gamma @ weights - 0.5
        encoded.append(EncodedCell(x=x, n=int(n), alpha=alpha, beta=beta,
                                   gamma=gamma, centers=centers, radii=radii))
        all_z.append(centers)
        all_r.append(radii)
        max_n = max(max_n, int(n))
        centers_hull.append(x)
    hull = np.asarray(centers_hull)
    half = float(np.max(np.abs(hull))) + 0.5 if len(hull) else 0.5
    window = Box(halves=(half,) * d)
    centers = np.concatenate(all_z) if all_z else np.empty((0, d))
    radii = np.concatenate(all_r) if all_r else np.empty(0)
    cfg = Configuration(centers, radii, window, float(max_n + 1), lam, seed, 0.0)
    return encoded, cfg
