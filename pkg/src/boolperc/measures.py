"""Radius measures for the Boolean model.

The intensity of the point process is ``lambda * dz (x) mu`` where ``mu`` is a
measure on radii that is generally *not* a probability measure.  Masses and
moments are closed-form; samplers normalize lazily per radius band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DivergentMoment",
    "RadiusMeasure",
    "PowerLaw",
    "Truncated",
    "PointMass",
    "CellLaw",
    "measure_from_config",
]


class DivergentMoment(ValueError):
    """The d-moment of the requested measure is infinite (Hall condition fails)."""


class RadiusMeasure:
    """Base class; concrete measures implement closed-form masses and moments."""

    d: int

    def mass(self, a: float, b: float) -> float:
        """mu([a, b]) with 0 <= a <= b <= inf."""
        raise NotImplementedError

    def d_moment(self) -> float:
        """Integral of t^d dmu(t)."""
        raise NotImplementedError

    def moment_tail(self, k: int, m: float) -> float:
        """Integral of t^k dmu(t) over [m, inf)."""
        raise NotImplementedError

    def tail_mass(self, m: float) -> float:
        return self.mass(m, math.inf)

    def support_max(self) -> float:
        """Supremum of the support (inf for untruncated power laws)."""
        raise NotImplementedError

    def band_quantile(self, lo: float, hi: float, t):
        """Inverse CDF of mu conditioned to [lo, hi]; t scalar or array in [0,1]."""
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


def _check_interval(a: float, b: float) -> None:
    if not (0 <= a <= b):
        raise ValueError(f"bad interval [{a}, {b}]")


@dataclass(frozen=True)
class PowerLaw(RadiusMeasure):
    """Unnormalized measure with density r^-(d+1+delta) on r >= 1."""

    delta: float
    d: int = 2

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension must be >= 2")
        if self.delta <= 0:
            raise DivergentMoment(f"power law with delta={self.delta} has infinite d-moment")

    @property
    def exponent(self) -> float:
        return self.d + self.delta

    def mass(self, a: float, b: float) -> float:
        _check_interval(a, b)
        q = self.exponent
        a = max(a, 1.0)
        b = max(b, 1.0)
        hi = 0.0 if math.isinf(b) else b ** -q
        return max(a ** -q - hi, 0.0) / q

    def d_moment(self) -> float:
        return 1.0 / self.delta

    def moment_tail(self, k: int, m: float) -> float:
        # integral of t^(k-d-1-delta) over [m, inf); finite for k <= d
        if k > self.d:
            raise DivergentMoment(f"moment of order {k} diverges for delta={self.delta}")
        m = max(m, 1.0)
        s = self.d + self.delta - k
        return m ** -s / s

    def support_max(self) -> float:
        return math.inf

    def band_quantile(self, lo: float, hi: float, t):
        q = self.exponent
        lo = max(lo, 1.0)
        a = lo ** -q
        b = 0.0 if math.isinf(hi) else hi ** -q
        t = np.asarray(t, dtype=float)
        return (a - t * (a - b)) ** (-1.0 / q)

    def to_config(self) -> dict:
        return {"kind": "powerlaw", "delta": self.delta}


@dataclass(frozen=True)
class Truncated(RadiusMeasure):
    """Restriction of a base measure to [0, cutoff]."""

    base: RadiusMeasure
    cutoff: float

    def __post_init__(self):
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")

    @property
    def d(self) -> int:  # type: ignore[override]
        return self.base.d

    def mass(self, a: float, b: float) -> float:
        _check_interval(a, b)
        if a > self.cutoff:
            return 0.0
        return self.base.mass(a, min(b, self.cutoff))

    def d_moment(self) -> float:
        return self.base.d_moment() - self.base.moment_tail(self.base.d, self.cutoff)

    def moment_tail(self, k: int, m: float) -> float:
        if m > self.cutoff:
            return 0.0
        return self.base.moment_tail(k, m) - self.base.moment_tail(k, self.cutoff)

    def support_max(self) -> float:
        return min(self.cutoff, self.base.support_max())

    def band_quantile(self, lo: float, hi: float, t):
        return self.base.band_quantile(lo, min(hi, self.cutoff), t)

    def to_config(self) -> dict:
        cfg = self.base.to_config()
        if cfg["kind"] != "powerlaw":
            return {"kind": "truncated", "base": cfg, "cutoff": self.cutoff}
        return {"kind": "truncated", "delta": cfg["delta"], "cutoff": self.cutoff}


@dataclass(frozen=True)
class PointMass(RadiusMeasure):
    """Unit atom at a fixed radius."""

    radius: float
    d: int = 2

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def mass(self, a: float, b: float) -> float:
        _check_interval(a, b)
        return 1.0 if a <= self.radius <= b else 0.0

    def d_moment(self) -> float:
        return self.radius ** self.d

    def moment_tail(self, k: int, m: float) -> float:
        return self.radius ** k if m <= self.radius else 0.0

    def support_max(self) -> float:
        return self.radius

    def band_quantile(self, lo: float, hi: float, t):
        if not (lo <= self.radius <= hi):
            raise ValueError("band does not contain the atom")
        return np.full_like(np.asarray(t, dtype=float), self.radius)

    def to_config(self) -> dict:
        return {"kind": "pointmass", "radius": self.radius}


def measure_from_config(cfg: dict, d: int = 2) -> RadiusMeasure:
    """Build a measure from the CLI config schema."""
    kind = cfg.get("kind")
    if kind == "powerlaw":
        return PowerLaw(delta=float(cfg["delta"]), d=d)
    if kind == "truncated":
        if "base" in cfg:
            base = measure_from_config(cfg["base"], d=d)
        else:
            base = PowerLaw(delta=float(cfg["delta"]), d=d)
        return Truncated(base=base, cutoff=float(cfg["cutoff"]))
    if kind == "pointmass":
        return PointMass(radius=float(cfg["radius"]), d=d)
    raise ValueError(f"unknown measure kind: {kind!r}")


@dataclass(frozen=True)
class CellLaw:
    """Conditional radius law of a power-law band [n, n+1).

    F is the normalized power-law CDF 1 - t^-(d+delta); the cell mass is
    g(n) = (F(n+1) - F(n)) / (d+delta) and the conditional CDF on the band is
    (F(s) - F(n)) / (F(n+1) - F(n)).
    """

    n: int
    delta: float
    d: int = 2

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("band index must be >= 1")
        if self.delta <= 0:
            raise DivergentMoment("delta must be positive")

    @property
    def q(self) -> float:
        return self.d + self.delta

    def F(self, t):
        return 1.0 - np.asarray(t, dtype=float) ** -self.q

    @property
    def g(self) -> float:
        """Radius mass of the cell: mu_delta([n, n+1))."""
        return (self.n ** -self.q - (self.n + 1) ** -self.q) / self.q

    def cdf(self, s):
        """Normalized conditional CDF on [n, n+1)."""
        lo = self.n ** -self.q
        hi = (self.n + 1) ** -self.q
        return (lo - np.asarray(s, dtype=float) ** -self.q) / (lo - hi)

    def inverse_cdf(self, t):
        """F_n^{-1}: exact inverse of the normalized conditional CDF."""
        lo = self.n ** -self.q
        hi = (self.n + 1) ** -self.q
        t = np.asarray(t, dtype=float)
        return (lo - t * (lo - hi)) ** (-1.0 / self.q)

    @property
    def lipschitz_inverse(self) -> float:
        """Sup of d/dt F_n^{-1}(t): |F_n^{-1}(t1) - F_n^{-1}(t0)| <= c |t1 - t0|."""
        band = self.n ** -self.q - (self.n + 1) ** -self.q
        return band / (self.q * (self.n + 1) ** -(self.q + 1))

    @property
    def lipschitz_forward(self) -> float:
        """Sup of the normalized conditional density: |t1 - t0| <= c |s1 - s0|."""
        band = self.n ** -self.q - (self.n + 1) ** -self.q
        return self.q * self.n ** -(self.q + 1) / band

    @property
    def lipschitz(self) -> float:
        """A single constant valid for both regularity directions."""
        return max(self.lipschitz_inverse, self.lipschitz_forward)


def inverse_cdf_cell(law: CellLaw, t):
    return law.inverse_cdf(t)
