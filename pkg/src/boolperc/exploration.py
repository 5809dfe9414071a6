"""Dynamic renormalization: exploration of Z^2 renormalized boxes.

A site x carries the box Lambda_x = 2Nx + [-N, N]^d and the halo
Btilde_x = 2Nx + B(4 sqrt(d) N).  The exploration accepts a site when the
previously recorded seed ball connects, inside the halo and after a local
sprinkle, to a ball of radius >= n centered in the site's box.  An abstract
variant replaces the geometric test with Bernoulli(q) draws so the skeleton
can be compared against site percolation.
"""

from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .connectivity import ClusterIndex, Connection, GeneralSeed
from .geometry import Ball, Box
from .measures import RadiusMeasure
from .rng import stream
from .sampling import Configuration, sample, sprinkle

__all__ = [
    "P_C_SITE",
    "ConditioningTooRare",
    "SprinkleParams",
    "ExplorationState",
    "run_exploration",
    "run_abstract_exploration",
    "sprinkling_gain",
    "covering_seed_boost",
    "covering_number",
    "measured_overlap",
]

# Critical probability of Bernoulli site percolation on Z^2 (literature value,
# used only as a threshold parameter).
P_C_SITE = 0.592746

_DIRS = ((-1, 0), (0, -1), (0, 1), (1, 0))


class ConditioningTooRare(RuntimeError):
    pass


@dataclass(frozen=True)
class SprinkleParams:
    """Sprinkling intensity parameters: each queried site receives an extra
    process of intensity beta * xi on its halo."""

    beta: float
    xi: float

    def __post_init__(self):
        if self.beta < 0 or self.xi <= 0:
            raise ValueError("need beta >= 0 and xi > 0")

    @property
    def rate(self) -> float:
        return self.beta * self.xi

    @classmethod
    def from_epsilon(cls, eps: float, lam: float, covering: int,
                     beta: float) -> "SprinkleParams":
        """xi solving eps^(1/covering) = exp(-3 lambda / xi)."""
        if not 0 < eps < 1:
            raise ValueError("eps must be in (0, 1)")
        xi = 3.0 * lam * covering / (-math.log(eps))
        params = cls(beta=beta, xi=xi)
        floor = 1 - math.exp(-beta) - eps ** (1.0 / (3 * covering))
        if floor <= P_C_SITE:
            raise ValueError(
                f"acceptance floor {floor:.4f} does not clear the site"
                f" percolation threshold {P_C_SITE}")
        return params


@dataclass
class ExplorationState:
    """Accepted/rejected sites plus an incrementally maintained frontier.

    The frontier is the set of (source in A, direction) pairs whose target is
    unexplored; the next queried edge is always its lexicographic minimum.
    A lazy heap realizes the minimum; an exact edge count is kept separately
    so traces can report the frontier size without rescanning."""

    accepted: dict       # site -> seed ball (or None for the abstract walk)
    rejected: set
    t: int = 0
    _heap: list = field(default_factory=list)
    _frontier_count: int = 0

    def __post_init__(self):
        for site in self.accepted:
            self._open_site(site)

    def _neighbors(self, site):
        for direction in _DIRS:
            yield direction, (site[0] + direction[0], site[1] + direction[1])

    def _closed(self, site) -> bool:
        return site in self.accepted or site in self.rejected

    def _open_site(self, site) -> None:
        for direction, target in self._neighbors(site):
            if not self._closed(target):
                heapq.heappush(self._heap, (site, direction))
                self._frontier_count += 1

    def close(self, target, seed_ball, accepted: bool) -> None:
        # edges from accepted neighbors into the target die with it
        self._frontier_count -= sum(
            1 for _, nb in self._neighbors(target) if nb in self.accepted)
        if accepted:
            self.accepted[target] = seed_ball
            self._open_site(target)
        else:
            self.rejected.add(target)

    def frontier_size(self) -> int:
        return self._frontier_count

    def next_edge(self):
        """Smallest (source, direction) with unexplored target, or None."""
        while self._heap:
            source, direction = self._heap[0]
            target = (source[0] + direction[0], source[1] + direction[1])
            if self._closed(target):
                heapq.heappop(self._heap)
                continue
            return source, direction
        return None


def _site_center(site, N: float, d: int) -> np.ndarray:
    center = np.zeros(d)
    center[0] = 2 * N * site[0]
    center[1] = 2 * N * site[1]
    return center


def _pick_seed_ball(cfg: Configuration, source_ball, site, n: float, N: float):
    """Deterministic choice among qualifying seed balls of a freshly accepted
    site: largest radius, ties broken by lexicographic center."""
    d = cfg.d
    center = _site_center(site, N, d)
    halo = Ball(4 * math.sqrt(d) * N, d=d, center=tuple(center))
    idx = ClusterIndex(cfg, clip=halo)
    cluster = idx.cluster_of(source_ball)
    if not len(cluster):
        return None
    box = Box(halves=(N,) * d, center=tuple(center))
    z, r = cfg.centers[cluster], cfg.radii[cluster]
    good = np.asarray(box.contains(z), dtype=bool) & (r >= n)
    if not good.any():
        return None
    candidates = sorted(
        ((float(r[i]), tuple(float(c) for c in z[i])) for i in np.flatnonzero(good)),
        key=lambda it: (-it[0], it[1]))
    radius, ball_center = candidates[0]
    return Ball(radius=radius, d=d, center=ball_center)


def run_exploration(lam: float, mu: RadiusMeasure, n: float, N: float, M: int,
                    sprinkle_params: SprinkleParams, seed: int, *,
                    base: Configuration | None = None,
                    r_max: float | None = None, max_steps: int | None = None,
                    tag: str = "explore") -> dict:
    """Explore renormalized sites outward from the origin.

    Halts when the frontier is empty or an accepted site reaches the L-inf
    boundary at M.  Returns a summary with the per-step trace.
    """
    if N < n:
        raise ValueError("need N >= n")
    if M < 4:
        raise ValueError("need M >= 4")
    d = mu.d
    halo_r = 4 * math.sqrt(d) * N
    window = Box(halves=(2 * N * M + halo_r,) * d)
    if base is None:
        cfg = sample(lam, mu, window, r_max=r_max, seed=seed,
                     tag=f"{tag}:base")
    else:
        cfg = base
    origin_seed = Ball(radius=float(n), d=d)
    state = ExplorationState(accepted={(0, 0): origin_seed}, rejected=set())
    trace = []
    reached = False
    limit = max_steps if max_steps is not None else 4 * (2 * M + 1) ** 2
    while state.t < limit:
        edge = state.next_edge()
        if edge is None:
            break
        frontier_size = state.frontier_size()
        source, direction = edge
        target = (source[0] + direction[0], source[1] + direction[1])
        center = _site_center(target, N, d)
        halo = Ball(halo_r, d=d, center=tuple(center))
        if sprinkle_params.rate > 0:
            cfg = sprinkle(cfg, sprinkle_params.rate, mu, halo, seed,
                           tag=f"{tag}:sprinkle", index=state.t)
        source_ball = state.accepted[source]
        event = GeneralSeed(b=source_ball,
                            e=Box(halves=(N,) * d, center=tuple(center)),
                            f=halo, min_radius=float(n))
        accepted = bool(event.evaluate(cfg))
        seed_ball = None
        if accepted:
            seed_ball = _pick_seed_ball(cfg, source_ball, target, n, N)
            accepted = seed_ball is not None
        state.close(target, seed_ball, accepted)
        trace.append({
            "t": state.t, "x_t": list(target), "accepted": accepted,
            "seed_ball": ([*seed_ball.center, seed_ball.radius]
                          if seed_ball else None),
            "frontier_size": frontier_size,
        })
        state.t += 1
        if accepted and max(abs(target[0]), abs(target[1])) >= M:
            reached = True
            break
    return {"reached_boundary": reached, "accepted": len(state.accepted),
            "rejected": len(state.rejected), "steps": state.t,
            "trace": trace, "sites": state}


def site_uniform(seed: int, site) -> float:
    """Deterministic uniform attached to a lattice site; keyed hashing makes
    runs at different q values monotonically coupled under one seed."""
    digest = hashlib.blake2b(f"{seed}:{site[0]}:{site[1]}".encode(),
                             digest_size=8).digest()
    return int.from_bytes(digest, "little") / 2.0 ** 64


def run_abstract_exploration(q_oracle, M: int, seed: int, *,
                             max_steps: int | None = None,
                             trace_limit: int | None = None) -> dict:
    """Exploration skeleton with site acceptance decided by Bernoulli draws.

    Each site's uniform is keyed by its coordinates, so runs at different q
    values with the same seed are monotonically coupled.
    """
    if M < 1:
        raise ValueError("need M >= 1")
    get_q = q_oracle if callable(q_oracle) else (lambda site: float(q_oracle))
    state = ExplorationState(accepted={(0, 0): None}, rejected=set())
    trace = []
    reached = False
    limit = max_steps if max_steps is not None else 4 * (2 * M + 1) ** 2
    while state.t < limit:
        edge = state.next_edge()
        if edge is None:
            break
        frontier_size = state.frontier_size()
        source, direction = edge
        target = (source[0] + direction[0], source[1] + direction[1])
        q = get_q(target)
        if not 0 <= q <= 1:
            raise ValueError("q must be in [0, 1]")
        accepted = site_uniform(seed, target) < q
        state.close(target, None, accepted)
        if trace_limit is None or len(trace) < trace_limit:
            trace.append({"t": state.t, "x_t": list(target),
                          "accepted": accepted, "seed_ball": None,
                          "frontier_size": frontier_size})
        state.t += 1
        if accepted and max(abs(target[0]), abs(target[1])) >= M:
            reached = True
            break
    return {"reached_boundary": reached, "accepted": len(state.accepted),
            "rejected": len(state.rejected), "steps": state.t,
            "trace": trace, "sites": state}


def sprinkling_gain(a_region, lam: float, beta: float, xi: float, target,
                    mu: RadiusMeasure, window: Box, replicas: int, seed: int,
                    *, r_max: float | None = None, max_attempts: int = 200_000,
                    tag: str = "sgain") -> dict:
    """Connection probability from a region to a target, before and after a
    sprinkle of intensity beta*xi, conditioned on no ball crossing the
    region's boundary.

    The conditioning is done by rejection; if fewer than one draw in a
    thousand satisfies it, ConditioningTooRare is raised.
    """
    from .estimators import Estimate, _region_boundary
    boundary = _region_boundary(a_region)
    ev = Connection(a=a_region, b=target)
    attempts = 0
    index = 0
    before = 0
    after = 0
    kept = 0
    while kept < replicas:
        if attempts >= max_attempts:
            raise ConditioningTooRare(
                f"conditioning acceptance {kept / max(attempts, 1):.2e} after"
                f" {attempts} draws")
        cfg = sample(lam, mu, window, r_max=r_max, seed=seed, enlarge=False,
                     tag=f"{tag}:base", index=index)
        index += 1
        attempts += 1
        if len(cfg) and bool(np.any(boundary.intersects_balls(cfg.centers,
                                                              cfg.radii))):
            if attempts >= 1000 and kept / attempts < 1e-3:
                raise ConditioningTooRare(
                    f"conditioning acceptance {kept / attempts:.2e}")
            continue
        before += ev.evaluate(cfg)
        if beta * xi > 0:
            boosted = sprinkle(cfg, beta * xi, mu, window, seed,
                               tag=f"{tag}:sprinkle", index=index)
        else:
            boosted = cfg
        after += ev.evaluate(boosted)
        kept += 1
    rate = kept / attempts
    return {
        "p_before": Estimate.from_bernoulli(before, replicas, seed),
        "p_after": Estimate.from_bernoulli(after, replicas, seed),
        "conditioning_rate": rate,
        "floor": 1 - math.exp(-beta) - math.exp(-lam / xi) if beta * xi > 0
                 else None,
    }


def covering_number(d: int, rho: float, *, net: int = 4096,
                    seed: int = 7) -> int:
    """Constructive count of N-balls centered on the sphere of radius rho*N
    needed to cover the shell between rho*N and (rho+1/2)*N (scale-free, so
    computed at N = 1).  Greedy set cover over a dense point net."""
    if not 1 <= rho <= math.sqrt(d) + 2:
        raise ValueError("rho out of range")
    rng = stream(seed, f"cover:{d}:{rho}")
    # dense net of shell points to cover
    z = rng.normal(size=(net, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    radii = rho + 0.5 * rng.uniform(size=(net, 1)) ** (1.0 / d)
    points = z * radii
    # candidate centers on the sphere of radius rho
    c = rng.normal(size=(net, d))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    centers = c * rho
    # slightly shrunken radius so the count stays valid for the true shell
    cover = np.linalg.norm(points[:, None, :] - centers[None, :, :],
                           axis=2) <= 0.98
    if not cover.any(axis=1).all():
        raise RuntimeError("net point not coverable; rho too large?")
    uncovered = np.ones(net, dtype=bool)
    count = 0
    while uncovered.any():
        gains = cover[uncovered].sum(axis=0)
        best = int(np.argmax(gains))
        uncovered &= ~cover[:, best]
        count += 1
    return count


def covering_seed_boost(n: float, N: float, rho: float, lam: float,
                        mu: RadiusMeasure, replicas: int, seed: int, *,
                        z=None, r_max: float | None = None,
                        tag: str = "boost") -> dict:
    """Estimates the annulus seed event and the translated-box seed event the
    square-root trick derives from it, along with the covering count."""
    from .estimators import estimate_event
    d = mu.d
    if not 1 <= rho <= math.sqrt(d) + 2:
        raise ValueError("rho must lie in [1, sqrt(d) + 2]")
    from .connectivity import Seed
    annulus_ev = Seed(n=float(n), N=float(N), rho=float(rho))
    if z is None:
        z = np.zeros(d)
        z[0] = rho * N
    z = np.asarray(z, dtype=float)
    norm = float(np.linalg.norm(z))
    if not N <= norm <= (math.sqrt(d) + 2) * N:
        raise ValueError("need N <= |z| <= (sqrt(d) + 2) N")
    box_ev = GeneralSeed(b=Ball(float(n), d=d),
                         e=Box(halves=(float(N),) * d, center=tuple(z)),
                         f=Ball(3 * math.sqrt(d) * N, d=d),
                         min_radius=float(n))
    window = Ball(max((rho + 0.5) * N, norm + math.sqrt(d) * N,
                      3 * math.sqrt(d) * N), d=d)
    annulus = estimate_event(annulus_ev, lam, mu, replicas, seed,
                             window=window, r_max=r_max, tag=f"{tag}:ann")
    box = estimate_event(box_ev, lam, mu, replicas, seed, window=window,
                         r_max=r_max, tag=f"{tag}:box")
    return {"annulus": annulus, "box": box,
            "covering": covering_number(d, rho)}


def measured_overlap(sites, N: float, d: int) -> int:
    """Maximal multiplicity of the halos {Btilde_x} over the given sites,
    probed at the halo centers."""
    sites = list(sites)
    if not sites:
        return 0
    centers = np.asarray([_site_center(s, N, d) for s in sites])
    reach = 4 * math.sqrt(d) * N
    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    return int((dist <= reach).sum(axis=1).max())
