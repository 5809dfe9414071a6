"""Monte Carlo estimators for the Boolean model.

Covers event probabilities, the connection functional phi and the derived
correlation length, critical-intensity searches, pivotality integrals, the
derivative of event probabilities in the tail exponent, and two-arm decay.
All estimators are deterministic given (seed, replicas) and merge associatively
across replica partitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .connectivity import (BigBall, ClusterIndex, Crossing, add_ball,
                           evaluate_event)
from .geometry import (Ball, Box, BoxBoundary, SlabRegion, Sphere,
                       unit_ball_volume)
from .measures import CellLaw, PowerLaw, RadiusMeasure, Truncated
from .rng import stream
from .sampling import Configuration, _bands, sample, thin

__all__ = [
    "Estimate",
    "BracketInvalid",
    "CriticalSearch",
    "estimate_event",
    "estimate_event_lambda_curve",
    "estimate_event_delta_curve",
    "estimate_phi",
    "correlation_length",
    "critical_search",
    "estimate_pivotal",
    "delta_derivative",
    "talagrand_diagnostic",
    "two_arm_decay",
    "bad_ball_mass",
    "mecke_check",
]

_Z95 = 1.959963984540054


class BracketInvalid(ValueError):
    pass


@dataclass(frozen=True)
class Estimate:
    """A merged Monte Carlo estimate with a 95% confidence interval.

    Bernoulli estimands get Wilson intervals; general means get normal
    approximation.  (total, total_sq) are kept so that estimates over disjoint
    replica sets merge exactly, independent of scheduling.
    """

    value: float
    stderr: float
    ci: tuple
    replicas: int
    seed: int
    bias_note: str = ""
    kind: str = "bernoulli"
    total: float = 0.0
    total_sq: float = 0.0

    def __post_init__(self):
        if not self.ci[0] <= self.value <= self.ci[1]:
            raise ValueError("confidence interval must contain the estimate")
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")

    @classmethod
    def from_bernoulli(cls, successes: int, replicas: int, seed: int,
                       bias_note: str = "") -> "Estimate":
        if replicas < 1:
            raise ValueError("need at least one replica")
        n, k, z = replicas, successes, _Z95
        p = k / n
        denom = 1 + z * z / n
        center = (p + z * z / (2 * n)) / denom
        half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
        # clamp against roundoff so the interval always contains p
        lo = min(p, max(0.0, center - half))
        hi = max(p, min(1.0, center + half))
        return cls(value=p, stderr=math.sqrt(p * (1 - p) / n), ci=(lo, hi),
                   replicas=n, seed=seed, bias_note=bias_note,
                   kind="bernoulli", total=float(k))

    @classmethod
    def from_values(cls, values, seed: int, bias_note: str = "") -> "Estimate":
        values = np.asarray(values, dtype=float)
        n = len(values)
        if n < 1:
            raise ValueError("need at least one replica")
        total = float(values.sum())
        total_sq = float((values * values).sum())
        return cls._from_moments(total, total_sq, n, seed, bias_note)

    @classmethod
    def _from_moments(cls, total: float, total_sq: float, n: int, seed: int,
                      bias_note: str = "") -> "Estimate":
        mean = total / n
        var = max(total_sq - total * total / n, 0.0) / (n - 1) if n > 1 else 0.0
        se = math.sqrt(var / n)
        return cls(value=mean, stderr=se, ci=(mean - _Z95 * se, mean + _Z95 * se),
                   replicas=n, seed=seed, bias_note=bias_note, kind="mean",
                   total=total, total_sq=total_sq)

    def merge(self, other: "Estimate") -> "Estimate":
        if self.kind != other.kind:
            raise ValueError("cannot merge estimates of different kinds")
        note = self.bias_note or other.bias_note
        n = self.replicas + other.replicas
        if self.kind == "bernoulli":
            return Estimate.from_bernoulli(int(self.total + other.total), n,
                                           self.seed, note)
        return Estimate._from_moments(self.total + other.total,
                                      self.total_sq + other.total_sq, n,
                                      self.seed, note)


def _event_r_min(ev) -> float:
    return ev.threshold if isinstance(ev, BigBall) else 0.0


def _default_window(ev, d: int):
    return Ball(ev.dependence_radius(), d=d)


def estimate_event(ev, lam: float, mu: RadiusMeasure, replicas: int, seed: int,
                   *, window=None, r_max: float | None = None,
                   tag: str = "event", replica_offset: int = 0) -> Estimate:
    """Empirical frequency of the event over independent configurations.

    Replica i uses the stream keyed (seed, tag, replica_offset + i), so a run
    split into offset chunks merges to exactly the unsplit result.
    """
    if replicas < 1:
        raise ValueError("need at least one replica")
    window = window if window is not None else _default_window(ev, mu.d)
    r_min = _event_r_min(ev)
    successes = 0
    tail = 0.0
    for i in range(replica_offset, replica_offset + replicas):
        cfg = sample(lam, mu, window, r_max=r_max, seed=seed, r_min=r_min,
                     tag=tag, index=i)
        tail = cfg.truncation_tail
        successes += evaluate_event(cfg, ev)
    note = f"truncation tail <= {tail:.3g}" if tail > 0 else ""
    return Estimate.from_bernoulli(successes, replicas, seed, note)


def estimate_event_lambda_curve(ev, lams, mu: RadiusMeasure, replicas: int,
                                seed: int, *, window=None,
                                tag: str = "lcurve") -> list:
    """Estimates at several intensities from one coupled set of draws.

    Each replica is drawn once at max(lams) and thinned with shared uniforms,
    so larger intensities keep supersets of balls and the empirical frequencies
    are nondecreasing in lambda, replica by replica.
    """
    lams = [float(v) for v in lams]
    top = max(lams)
    window = window if window is not None else _default_window(ev, mu.d)
    succ = {v: 0 for v in lams}
    for i in range(replicas):
        base = sample(top, mu, window, r_min=_event_r_min(ev), seed=seed,
                      tag=tag, index=i)
        for v in lams:
            cfg = thin(base, lambda r, v=v: np.full(len(r), v / top if top else 1.0),
                       seed=seed + i, tag=f"{tag}:thin")
            cfg = replace(cfg, lam=v)
            succ[v] += evaluate_event(cfg, ev)
    return [Estimate.from_bernoulli(succ[v], replicas, seed) for v in lams]


def estimate_event_delta_curve(ev, deltas, lam: float, replicas: int, seed: int,
                               *, d: int = 2, window=None,
                               tag: str = "dcurve") -> list:
    """Coupled estimates across tail exponents, heaviest tail first drawn.

    Thinning the delta_min process with keep probability r^(delta_min - delta)
    is an exact density-ratio coupling, monotone in delta for radii >= 1.
    """
    deltas = [float(v) for v in deltas]
    base_delta = min(deltas)
    mu = PowerLaw(delta=base_delta, d=d)
    window = window if window is not None else _default_window(ev, d)
    succ = {v: 0 for v in deltas}
    for i in range(replicas):
        base = sample(lam, mu, window, r_min=_event_r_min(ev), seed=seed,
                      tag=tag, index=i)
        for v in deltas:
            cfg = thin(base, lambda r, v=v: r ** (base_delta - v),
                       seed=seed + i, tag=f"{tag}:thin")
            succ[v] += evaluate_event(cfg, ev)
    return [Estimate.from_bernoulli(succ[v], replicas, seed) for v in deltas]


def _region_boundary(s):
    if isinstance(s, Ball):
        return Sphere(radius=s.radius, d=s.d, center=s.center)
    if isinstance(s, Box):
        return BoxBoundary(halves=s.halves, center=s.center)
    raise TypeError(f"no boundary predicate for region {type(s).__name__}")


def _phi_count(cfg: Configuration, n: float, region) -> int:
    if len(cfg) == 0:
        return 0
    boundary = _region_boundary(region)
    meets = np.asarray(boundary.intersects_balls(cfg.centers, cfg.radii), dtype=bool)
    if not meets.any():
        return 0
    d = cfg.d
    inside = np.asarray(region.contains_balls(cfg.centers, cfg.radii), dtype=bool)
    sub = cfg.restrict(inside)
    idx = ClusterIndex(sub)
    cluster = idx.cluster_of(Ball(n, d=d))
    zc, rc = cfg.centers[meets], cfg.radii[meets]
    ok = np.asarray(Ball(n, d=d).intersects_balls(zc, rc), dtype=bool)
    if len(cluster):
        cz, cr = sub.centers[cluster], sub.radii[cluster]
        diff = zc[:, None, :] - cz[None, :, :]
        dist2 = np.einsum("ijk,ijk->ij", diff, diff)
        ok |= (dist2 <= (rc[:, None] + cr[None, :]) ** 2).any(axis=1)
    return int(ok.sum())


def estimate_phi(n: float, region, lam: float, mu: RadiusMeasure, replicas: int,
                 seed: int, *, tag: str = "phi") -> Estimate:
    """Mean number of balls meeting the boundary of the region that connect to
    B_n through balls lying entirely inside the region (radii capped at n)."""
    d = mu.d
    if not np.all(region.contains_balls(np.zeros((1, d)), np.asarray([n]))):
        raise ValueError("B_n must be contained in the region")
    if mu.support_max() > n:
        mu = Truncated(base=mu, cutoff=float(n))
    window = Ball(region.circumradius(), d=d)
    values = np.empty(replicas)
    for i in range(replicas):
        cfg = sample(lam, mu, window, seed=seed, tag=tag, index=i)
        values[i] = _phi_count(cfg, n, region)
    return Estimate.from_values(values, seed)


def correlation_length(n: float, lam: float, mu: RadiusMeasure, ell_max: float,
                       replicas: int, seed: int, *, ratio: float = math.sqrt(2),
                       tag: str = "corrlen") -> Estimate:
    """Smallest scale s on a geometric grid in [n, ell_max] with
    upper-CI(phi(B_s)) <= 1/e; +inf sentinel if no grid scale qualifies.

    Only concentric balls B_s are searched, so the result is an upper bound
    for the infimum over all intermediate regions.
    """
    if ell_max < n:
        raise ValueError("ell_max must be >= n")
    grid = [float(n)]
    while grid[-1] * ratio < ell_max:
        grid.append(grid[-1] * ratio)
    if grid[-1] < ell_max:
        grid.append(float(ell_max))
    d = mu.d
    note = "upper bound: only concentric balls searched"
    for j, s in enumerate(grid):
        est = estimate_phi(n, Ball(s, d=d), lam, mu, replicas, seed,
                           tag=f"{tag}:{j}")
        if est.ci[1] <= 1.0 / math.e:
            return Estimate(value=s, stderr=0.0, ci=(s, s), replicas=replicas,
                            seed=seed, bias_note=note, kind="mean", total=s,
                            total_sq=s * s)
        note = f"upper bound; phi({s:.3g}) = {est.value:.3g}"
    inf = math.inf
    return Estimate(value=inf, stderr=0.0, ci=(inf, inf), replicas=replicas,
                    seed=seed, bias_note=note, kind="mean", total=inf,
                    total_sq=inf)


@dataclass(frozen=True)
class CriticalSearch:
    """Bisection problem for a critical intensity.

    The decision statistic is the crossing probability at the top of the
    scale ladder, compared against the threshold theta.
    """

    bracket: tuple
    tolerance: float
    ladder: tuple
    theta: float = 0.5

    def __post_init__(self):
        lo, hi = self.bracket
        if not 0 <= lo < hi:
            raise ValueError("bracket must satisfy 0 <= lo < hi")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        ladder = tuple(float(r) for r in self.ladder)
        if any(a >= b for a, b in zip(ladder, ladder[1:])) or not ladder:
            raise ValueError("ladder must be nonempty and increasing")
        object.__setattr__(self, "ladder", ladder)
        object.__setattr__(self, "bracket", (float(lo), float(hi)))


def _mode_event(mode: str, r: float, d: int, slab_k: float | None):
    if mode == "lambda_c":
        return Crossing(inner=0.0, outer=r, d=d), Ball(r, d=d)
    if mode == "lambda_hat_c":
        return Crossing(inner=r, outer=2 * r, d=d), Ball(2 * r, d=d)
    if mode == "slab":
        if slab_k is None:
            raise ValueError("slab mode needs slab_k")
        clip = SlabRegion(k=float(slab_k), d=d)
        return Crossing(inner=r, outer=2 * r, d=d, clip=clip), Ball(2 * r, d=d)
    raise ValueError(f"unknown mode {mode!r}")


def critical_search(cs: CriticalSearch, mu: RadiusMeasure, mode: str,
                    replicas: int, seed: int, *, slab_k: float | None = None,
                    r_max: float | None = None) -> dict:
    """Bisect for the intensity where the top-ladder crossing probability
    passes theta.  Endpoints must be CI-separated from theta on entry."""
    d = mu.d

    def probe(lam: float, label: str) -> list:
        out = []
        for r in cs.ladder:
            ev, window = _mode_event(mode, r, d, slab_k)
            out.append((r, estimate_event(ev, lam, mu, replicas, seed,
                                          window=window, r_max=r_max,
                                          tag=f"crit:{label}:{r}")))
        return out

    lo, hi = cs.bracket
    trace = []
    lo_est = probe(lo, "lo")[-1][1]
    if not lo_est.ci[1] < cs.theta:
        raise BracketInvalid(
            f"crossing at lambda_lo={lo} is {lo_est.value:.3f} "
            f"(ci {lo_est.ci}), not separated below theta={cs.theta}")
    hi_est = probe(hi, "hi")[-1][1]
    if not hi_est.ci[0] > cs.theta:
        raise BracketInvalid(
            f"crossing at lambda_hi={hi} is {hi_est.value:.3f} "
            f"(ci {hi_est.ci}), not separated above theta={cs.theta}")
    trace.append({"lam": lo, "estimate": lo_est.value, "ci": lo_est.ci,
                  "separated": True, "verdict": "sub"})
    trace.append({"lam": hi, "estimate": hi_est.value, "ci": hi_est.ci,
                  "separated": True, "verdict": "super"})
    step = 0
    while hi - lo > cs.tolerance:
        mid = 0.5 * (lo + hi)
        est = probe(mid, f"mid{step}")[-1][1]
        separated = est.ci[0] > cs.theta or est.ci[1] < cs.theta
        above = est.value >= cs.theta
        trace.append({"lam": mid, "estimate": est.value, "ci": est.ci,
                      "separated": separated,
                      "verdict": "super" if above else "sub"})
        if above:
            hi = mid
        else:
            lo = mid
        step += 1
    return {"interval": (lo, hi), "mode": mode, "theta": cs.theta,
            "ladder": cs.ladder, "trace": trace}


def estimate_pivotal(ev, cell, lam: float, delta: float, replicas: int,
                     insertion_draws: int, seed: int, *, d: int = 2,
                     window=None, r_max: float | None = None,
                     tag: str = "piv") -> Estimate:
    """Pivotality mass of one lattice-band cell for an increasing event.

    Per replica, configurations not in the event receive insertion_draws
    independent points of the cell's normalized law; the fraction that turn
    the event on, scaled by the cell's intensity mass g(n), estimates the
    pivotality integral over the cell.
    """
    x, n = cell
    x = np.asarray(x, dtype=float)
    law = CellLaw(n=int(n), delta=delta, d=d)
    mu = PowerLaw(delta=delta, d=d)
    window = window if window is not None else _default_window(ev, d)
    values = np.zeros(replicas)
    for i in range(replicas):
        cfg = sample(lam, mu, window, r_max=r_max, seed=seed,
                     r_min=_event_r_min(ev), tag=f"{tag}:base", index=i)
        if evaluate_event(cfg, ev):
            continue
        rng = stream(seed, f"{tag}:ins", i)
        z = x + rng.uniform(-0.5, 0.5, size=(insertion_draws, d))
        r = law.inverse_cdf(rng.uniform(size=insertion_draws))
        hits = sum(evaluate_event(add_ball(cfg, z[j], r[j]), ev)
                   for j in range(insertion_draws))
        values[i] = law.g * hits / insertion_draws
    return Estimate.from_values(values, seed)


def _log_moment_tail(k: int, m: float, q: float) -> float:
    """Integral of r^k log(r) r^-(q+1) dr over [m, inf), for k < q."""
    s = q + 1 - k
    return m ** (1 - s) * (math.log(m) + 1.0 / (s - 1)) / (s - 1)


def _uniform_in_ball(rng, count: int, radius: float, d: int) -> np.ndarray:
    direction = rng.normal(size=(count, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return direction * radius * rng.uniform(size=(count, 1)) ** (1.0 / d)


def delta_derivative(ev, lam: float, delta: float, replicas: int, seed: int,
                     *, d: int = 2, insertion_draws: int = 4, n_max: int = 8,
                     window=None, r_max: float | None = None,
                     tag: str = "ddelta") -> Estimate:
    """Derivative of P(event) in the tail exponent delta.

    Estimates -lambda * integral of P(config not in event, config + ball in
    event) * log r over (z, r), stratified by integer radius bands n' <= n_max
    with insertion points drawn inside the ball of radius dep + n' + 1 (an
    insertion further out cannot affect the event).  The discarded band tail
    is bounded in closed form and reported in bias_note.
    """
    mu = PowerLaw(delta=delta, d=d)
    dep = ev.dependence_radius()
    window = window if window is not None else _default_window(ev, d)
    bands = []
    for nb in range(1, n_max + 1):
        law = CellLaw(n=nb, delta=delta, d=d)
        radius = dep + nb + 1
        bands.append((law, radius, unit_ball_volume(d) * radius ** d * law.g))
    values = np.zeros(replicas)
    for i in range(replicas):
        cfg = sample(lam, mu, window, r_max=r_max, seed=seed,
                     r_min=_event_r_min(ev), tag=f"{tag}:base", index=i)
        if evaluate_event(cfg, ev):
            continue
        rng = stream(seed, f"{tag}:ins", i)
        acc = 0.0
        for law, radius, weight in bands:
            z = _uniform_in_ball(rng, insertion_draws, radius, d)
            r = law.inverse_cdf(rng.uniform(size=insertion_draws))
            for j in range(insertion_draws):
                if evaluate_event(add_ball(cfg, z[j], r[j]), ev):
                    acc += weight * math.log(r[j]) / insertion_draws
        values[i] = -lam * acc
    q = d + delta
    alpha = unit_ball_volume(d)
    tail = lam * alpha * sum(math.comb(d, k) * dep ** (d - k)
                             * _log_moment_tail(k, n_max + 1, q)
                             for k in range(d + 1))
    note = f"band tail (n > {n_max}) bounded by {tail:.3g}"
    return Estimate.from_values(values, seed, bias_note=note)


def talagrand_diagnostic(ev, lam: float, delta: float, cell_budget: int,
                         replicas: int, seed: int, *, d: int = 2,
                         insertion_draws: int = 4, tag: str = "tal") -> dict:
    """Empirical constant in the log-weighted pivotality lower bound.

    Estimates L = sum over cells of log(n) * Piv, p = P(event), and the
    maximal cell pivotality, and reports the implied constant
    C0 = L / (p (1-p) log(1/max Piv)).
    """
    dep = ev.dependence_radius()
    cells = []
    nb = 1
    while len(cells) < cell_budget:
        reach = dep + nb + 1 + 0.5 * math.sqrt(d)
        half = int(math.floor(reach))
        lattice = sorted(
            x for x in np.ndindex(*((2 * half + 1,) * d))
            if np.linalg.norm(np.asarray(x) - half) <= reach)
        for x in lattice:
            cells.append((tuple(int(c) - half for c in x), nb))
            if len(cells) >= cell_budget:
                break
        nb += 1
    p_est = estimate_event(ev, lam, PowerLaw(delta=delta, d=d), replicas, seed,
                           tag=f"{tag}:p")
    piv = []
    for x, n in cells:
        est = estimate_pivotal(ev, (x, n), lam, delta, replicas,
                               insertion_draws, seed, d=d,
                               tag=f"{tag}:{n}:{x}")
        piv.append(((x, n), est))
    lhs = sum(math.log(n) * est.value for (x, n), est in piv)
    max_piv = max((est.value for _, est in piv), default=0.0)
    p = p_est.value
    if max_piv > 0 and 0 < p < 1:
        rhs_factor = p * (1 - p) * math.log(1.0 / max_piv)
        c0 = lhs / rhs_factor if rhs_factor > 0 else math.inf
    else:
        c0 = math.inf  # deterministic event or no pivotal cell found
    return {"lhs": lhs, "p": p_est, "max_piv": max_piv, "c0": c0,
            "cells": piv}


def bad_ball_mass(mu: RadiusMeasure, K: float, d: int,
                  r_hi: float = math.inf) -> float:
    """Intensity mass (dz x mu) of balls meeting Lambda_K that are not
    (center in Lambda_2K, radius <= K), with radii capped at r_hi.

    For r <= K such a ball cannot be bad, so the mass is the integral over
    r in (K, r_hi] of vol(Lambda_K + B_r), by the Steiner formula for boxes.
    """
    total = 0.0
    for j in range(d + 1):
        moment = mu.moment_tail(j, K)
        if math.isfinite(r_hi):
            moment -= mu.moment_tail(j, r_hi)
        total += math.comb(d, j) * (2 * K) ** (d - j) * unit_ball_volume(j) * moment
    return total


def two_arm_decay(k: float, K_list, lam: float, mu: RadiusMeasure,
                  replicas: int, seed: int, *, r_max: float | None = None,
                  tag: str = "twoarm") -> list:
    """P(two disjoint good crossings of the annulus Lambda_K minus Lambda_k)
    for each K, together with the bad-ball probability (empirical and exact)."""
    from .connectivity import TwoArm  # local import keeps module header light
    d = mu.d
    results = []
    for K in K_list:
        K = float(K)
        ev = TwoArm(k=float(k), K=K, d=d)
        window = Ball(ev.dependence_radius(), d=d)
        a2_succ = 0
        bad_succ = 0
        eff_r_max = 0.0
        for i in range(replicas):
            cfg = sample(lam, mu, window, r_max=r_max, seed=seed,
                         tag=f"{tag}:{K}", index=i)
            eff_r_max = cfg.r_max
            a2_succ += evaluate_event(cfg, ev)
            if len(cfg):
                meets = Box(halves=(K,) * d).intersects_balls(cfg.centers, cfg.radii)
                in2k = Box(halves=(2 * K,) * d).contains(cfg.centers)
                bad_succ += bool(np.any(meets & ~(in2k & (cfg.radii <= K))))
        mass = lam * bad_ball_mass(mu, K, d, r_hi=eff_r_max)
        results.append({
            "K": K,
            "a2": Estimate.from_bernoulli(a2_succ, replicas, seed),
            "bad": Estimate.from_bernoulli(bad_succ, replicas, seed),
            "bad_exact": 1.0 - math.exp(-mass),
        })
    return results


def mecke_check(h, lam: float, mu: RadiusMeasure, window: Box, replicas: int,
                seed: int, *, r_max: float | None = None,
                tag: str = "mecke") -> tuple:
    """Both sides of the Mecke identity for a functional h(z, r, config).

    Left: E sum over points of h evaluated with the point removed.  Right:
    lambda * integral of E h(z, r, config) over the window and radii, via one
    uniformly weighted draw per replica.  Centers are confined to the window
    on both sides so the two integrals range over the same domain.
    """
    if not isinstance(window, Box):
        raise TypeError("mecke_check needs a Box window")
    bands = _bands(mu, 0.0, r_max if r_max is not None else mu.support_max())
    if not bands and r_max is None:
        # unbounded support: cap like the sampler would
        from .sampling import default_r_max
        r_max = default_r_max(lam, mu, window)
        bands = _bands(mu, 0.0, r_max)
    masses = np.asarray([mu.mass(lo, hi) if hi > lo else mu.mass(lo, lo)
                         for lo, hi in bands])
    total_mass = float(masses.sum())
    bb_lo, bb_hi = window.bbox(0.0)
    vol = float(np.prod(bb_hi - bb_lo))
    lhs = np.empty(replicas)
    rhs = np.empty(replicas)
    for i in range(replicas):
        cfg = sample(lam, mu, window, r_max=r_max, seed=seed, enlarge=False,
                     tag=f"{tag}:lhs", index=i)
        acc = 0.0
        for j in range(len(cfg)):
            mask = np.ones(len(cfg), dtype=bool)
            mask[j] = False
            acc += h(cfg.centers[j], cfg.radii[j], cfg.restrict(mask))
        lhs[i] = acc
        cfg2 = sample(lam, mu, window, r_max=r_max, seed=seed, enlarge=False,
                      tag=f"{tag}:rhs", index=i)
        rng = stream(seed, f"{tag}:draw", i)
        z = rng.uniform(bb_lo, bb_hi)
        band = rng.choice(len(bands), p=masses / total_mass)
        lo_b, hi_b = bands[band]
        r = float(np.asarray(mu.band_quantile(lo_b, hi_b, rng.uniform())))
        rhs[i] = lam * vol * total_mass * h(z, r, cfg2)
    return Estimate.from_values(lhs, seed), Estimate.from_values(rhs, seed)
