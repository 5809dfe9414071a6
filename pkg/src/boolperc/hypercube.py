"""Exact finite-hypercube analysis under inhomogeneous product measures.

Influences, the log-weighted influence functional, and the reduction that
rewrites a Bernoulli(p) bit with dyadic p as a threshold of fair bits.  All
probabilities are exact rationals; logarithms enter only in the reported
functionals, never in identity assertions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "DegenerateVariance",
    "BooleanFunction",
    "DyadicBit",
    "influence",
    "prob_one",
    "variance",
    "talagrand_check",
    "lift",
    "lifted_bit_position",
    "encoding_bounds_check",
    "russo_derivative",
    "pivotal_probability",
    "all_functions",
]

MAX_BITS = 24


class DegenerateVariance(ValueError):
    """Var(f) = 0: the functional inequality is vacuous for this function."""


def _as_fraction(p) -> Fraction:
    return p if isinstance(p, Fraction) else Fraction(p).limit_denominator(1 << 30)


@dataclass(frozen=True)
class BooleanFunction:
    """A function {0,1}^n -> {0,1} with per-bit probabilities p_i in (0, 1/2].

    The truth table is indexed by x = sum x_i 2^i.
    """

    n: int
    table: tuple
    p: tuple

    def __post_init__(self):
        if not 1 <= self.n <= MAX_BITS:
            raise ValueError(f"n must be in [1, {MAX_BITS}]")
        table = tuple(int(bool(v)) for v in self.table)
        if len(table) != 1 << self.n:
            raise ValueError("truth table must have 2^n entries")
        p = tuple(_as_fraction(v) for v in self.p)
        if len(p) != self.n:
            raise ValueError("need one probability per bit")
        if any(not 0 < v <= Fraction(1, 2) for v in p):
            raise ValueError("probabilities must lie in (0, 1/2]")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "p", p)

    def __call__(self, x: int) -> int:
        return self.table[x]


@lru_cache(maxsize=256)
def _weights(p: tuple, n: int) -> tuple:
    out = []
    for x in range(1 << n):
        w = Fraction(1)
        for i in range(n):
            w *= p[i] if (x >> i) & 1 else 1 - p[i]
        out.append(w)
    return tuple(out)


def prob_one(f: BooleanFunction) -> Fraction:
    w = _weights(f.p, f.n)
    return sum((w[x] for x in range(1 << f.n) if f.table[x]), Fraction(0))


def variance(f: BooleanFunction) -> Fraction:
    q = prob_one(f)
    return q * (1 - q)


def influence(f: BooleanFunction, i: int) -> Fraction:
    """P(f differs under a flip of bit i); exact enumeration."""
    if not 0 <= i < f.n:
        raise IndexError("bit index out of range")
    bit = 1 << i
    if all(v == Fraction(1, 2) for v in f.p):
        # uniform measure: influence is a bit count over the table
        table = np.asarray(f.table, dtype=np.uint8)
        flipped = np.arange(len(table)) ^ bit
        return Fraction(int(np.count_nonzero(table != table[flipped])),
                        len(table))
    w = _weights(f.p, f.n)
    return sum((w[x] for x in range(1 << f.n) if f.table[x] != f.table[x ^ bit]),
               Fraction(0))


def talagrand_check(f: BooleanFunction, strict: bool = False):
    """(lhs, var, maxterm, implied_C) for the log-weighted influence bound
    sum_i p_i |log p_i| Inf_i >= C Var(f) log(1/max_i p_i Inf_i).

    Var(f) = 0 gives implied_C = +inf (or DegenerateVariance when strict).
    """
    infs = [influence(f, i) for i in range(f.n)]
    lhs = sum(float(f.p[i]) * abs(math.log(float(f.p[i]))) * float(infs[i])
              for i in range(f.n))
    var = variance(f)
    maxterm = max((f.p[i] * infs[i] for i in range(f.n)), default=Fraction(0))
    if var == 0:
        if strict:
            raise DegenerateVariance("constant-variance function")
        return lhs, var, maxterm, math.inf
    denom = float(var) * math.log(1.0 / float(maxterm)) if maxterm > 0 else 0.0
    implied = lhs / denom if denom > 0 else math.inf
    return lhs, var, maxterm, implied


@dataclass(frozen=True)
class DyadicBit:
    """One variable with dyadic probability p = m / 2^ell, encoded by ell fair
    bits X_1..X_ell: Y = 1 iff sum X_j 2^-j >= 1 - p."""

    i: int
    p: Fraction

    def __post_init__(self):
        p = _as_fraction(self.p)
        if not 0 < p <= Fraction(1, 2):
            raise ValueError("p must lie in (0, 1/2]")
        if p.denominator & (p.denominator - 1):
            raise ValueError(f"{p} is not dyadic")
        object.__setattr__(self, "p", p)

    @property
    def ell(self) -> int:
        return self.p.denominator.bit_length() - 1

    @property
    def j_threshold(self) -> int:
        """Largest j with 2^-j >= p."""
        j = 1
        while Fraction(1, 1 << (j + 1)) >= self.p:
            j += 1
        return j

    def y_table(self) -> np.ndarray:
        """Y as a function of the chunk integer a = sum X_j 2^(ell-j)."""
        size = 1 << self.ell
        a = np.arange(size)
        return (a >= size - self.p.numerator).astype(np.uint8)

    def flip_prob(self, j: int) -> Fraction:
        """P(Y changes when fair bit j is flipped); exact enumeration."""
        if not 1 <= j <= self.ell:
            raise IndexError("fair-bit index out of range")
        y = self.y_table()
        a = np.arange(len(y))
        flipped = a ^ (1 << (self.ell - j))
        return Fraction(int(np.count_nonzero(y != y[flipped])), len(y))


def _dyadic_bits(f: BooleanFunction) -> list:
    return [DyadicBit(i=i, p=f.p[i]) for i in range(f.n)]


def lifted_bit_position(f: BooleanFunction, i: int, j: int) -> int:
    """Global index of fair bit X_{i,j} in the lifted function's input."""
    bits = _dyadic_bits(f)
    if not 1 <= j <= bits[i].ell:
        raise IndexError("fair-bit index out of range")
    return sum(b.ell for b in bits[:i]) + (j - 1)


def lift(f: BooleanFunction) -> BooleanFunction:
    """Rewrite f over fair bits: each input i with p_i = m/2^ell becomes the
    indicator that its ell fair bits, read as a binary fraction, reach 1 - p_i.

    The lifted input layout places X_{i,j} at lifted_bit_position(f, i, j);
    bit j has weight 2^-j in the fraction.  The pushforward law of the decoded
    inputs is exactly the original product measure, so variances agree.
    """
    bits = _dyadic_bits(f)
    total = sum(b.ell for b in bits)
    if total > MAX_BITS:
        raise ValueError(f"lift needs {total} fair bits; cap is {MAX_BITS}")
    idx = np.arange(1 << total, dtype=np.int64)
    decoded = np.zeros_like(idx)
    offset = 0
    for b in bits:
        # chunk value a with X_{i,1} as the most significant of ell bits
        a = np.zeros_like(idx)
        for j in range(1, b.ell + 1):
            a |= ((idx >> (offset + j - 1)) & 1) << (b.ell - j)
        y = a >= (1 << b.ell) - b.p.numerator
        decoded |= y.astype(np.int64) << b.i
        offset += b.ell
    table = np.asarray(f.table, dtype=np.uint8)[decoded]
    return BooleanFunction(n=total, table=tuple(int(v) for v in table),
                           p=(Fraction(1, 2),) * total)


def encoding_bounds_check(f: BooleanFunction, i: int) -> dict:
    """Exact audit of the fair-bit encoding of variable i.

    Verifies, with rational arithmetic, that each lifted influence factors as
    Inf_{i,j} = P(Y_i flips under bit j) * Inf_i(f), that the flip probability
    obeys 2^-(j-1) (for j >= j_threshold) and 2 p_i (below it), and that the
    lifted influences of variable i sum to at most 4 p_i |log p_i| Inf_i(f).
    """
    bit = _dyadic_bits(f)[i]
    lifted = lift(f)
    inf_i = influence(f, i)
    per_j = []
    identity_ok = True
    bounds_ok = True
    agg = Fraction(0)
    for j in range(1, bit.ell + 1):
        pos = lifted_bit_position(f, i, j)
        inf_ij = influence(lifted, pos)
        q_j = bit.flip_prob(j)
        bound = (Fraction(1, 1 << (j - 1)) if j >= bit.j_threshold
                 else 2 * bit.p)
        identity_ok &= inf_ij == q_j * inf_i
        bounds_ok &= q_j <= bound
        agg += inf_ij
        per_j.append({"j": j, "inf": inf_ij, "flip_prob": q_j, "bound": bound})
    rhs = 4 * float(bit.p) * abs(math.log(float(bit.p))) * float(inf_i)
    report = {
        "i": i, "p": bit.p, "j_threshold": bit.j_threshold,
        "per_bit": per_j, "identity_ok": identity_ok, "bounds_ok": bounds_ok,
        "aggregate": agg, "aggregate_bound": rhs,
        "aggregate_ok": float(agg) <= rhs,
    }
    if not (identity_ok and bounds_ok and report["aggregate_ok"]):
        raise AssertionError(f"encoding bounds violated for bit {i}: {report}")
    return report


def _conditional_prob_one(f: BooleanFunction, i: int, value: int) -> Fraction:
    rest = [f.p[j] for j in range(f.n) if j != i]
    w = _weights(tuple(rest), f.n - 1)
    total = Fraction(0)
    bit = 1 << i
    for y in range(1 << (f.n - 1)):
        low = y & (bit - 1)
        x = low | ((y >> i) << (i + 1)) | (value << i)
        if f.table[x]:
            total += w[y]
    return total


def russo_derivative(f: BooleanFunction, i: int) -> Fraction:
    """d/dp_i P(f=1): exact, since P(f=1) is affine in each p_i."""
    return _conditional_prob_one(f, i, 1) - _conditional_prob_one(f, i, 0)


def pivotal_probability(f: BooleanFunction, i: int) -> Fraction:
    """P(flipping bit i changes f); equals influence(f, i)."""
    return influence(f, i)


def all_functions(n: int, p) -> list:
    """Every Boolean function on n bits with the given probability vector."""
    if n > 4:
        raise ValueError("exhaustive enumeration capped at n = 4")
    size = 1 << n
    p = tuple(p) if isinstance(p, (tuple, list)) else (p,) * n
    out = []
    for fid in range(1 << size):
        table = tuple((fid >> x) & 1 for x in range(size))
        out.append(BooleanFunction(n=n, table=table, p=p))
    return out
