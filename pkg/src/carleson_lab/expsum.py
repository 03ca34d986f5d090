"""Exponential sums with phases xi2*floor(n^c) + xi1*n, the floor-removal
series and the constant-free bound envelopes.

Sums are accumulated with math.fsum on the real and imaginary parts, which
is an error-free compensated summation: the result is the correctly
rounded value of the sum of the computed terms and does not depend on
the chunking used to build the terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_math import (
    DomainError,
    centered_frac,
    floor_powers,
    frac_powers,
    frac_product,
    phase_of_turns,
)

_CHUNK = 1 << 18


def compensated_sum(z) -> complex:
    z = np.asarray(z)
    return complex(math.fsum(z.real.tolist()), math.fsum(z.imag.tolist()))


def _check_c(c):
    if not 1 < c < 2:
        raise DomainError(f"constraint c ∈ (1,2) violated: c={c}")


def floor_phase_terms(n, xi1: float, xi2: float, c: float):
    """e(xi2*floor(n^c) + xi1*n) for an integer array n."""
    F = floor_powers(n, c)
    return phase_of_turns(centered_frac(frac_product(xi2, F) + frac_product(xi1, n)))


def exp_sum(N: int, xi1: float, xi2: float, c: float = 1.5) -> complex:
    """S_N = sum_{n=1..N} e(xi2*floor(n^c) + xi1*n)."""
    N = int(N)
    if N < 1:
        raise DomainError("exp_sum needs N >= 1")
    _check_c(c)
    re, im = [], []
    for lo in range(1, N + 1, _CHUNK):
        n = np.arange(lo, min(N, lo + _CHUNK - 1) + 1, dtype=np.int64)
        z = floor_phase_terms(n, xi1, xi2, c)
        re.extend(z.real.tolist())
        im.extend(z.imag.tolist())
    return complex(math.fsum(re), math.fsum(im))


def power_phase_turns(t, n, c):
    # frac(t * n^c) split as t*floor(n^c) (exact) + t*{n^c}
    return centered_frac(frac_product(t, floor_powers(n, c)) + t * frac_powers(n, c))


def exp_sum_dyadic(P: int, Pprime: int, t: float, xi: float, c: float = 1.5) -> complex:
    """Block sum over P <= n <= P' of e(t*n^c + xi*n)."""
    P, Pprime = int(P), int(Pprime)
    if P < 1:
        raise DomainError("exp_sum_dyadic needs P >= 1")
    if Pprime < P:
        raise DomainError(f"empty range: P'={Pprime} < P={P}")
    n = np.arange(P, Pprime + 1, dtype=np.int64)
    theta = centered_frac(power_phase_turns(t, n, c) + frac_product(xi, n))
    return compensated_sum(phase_of_turns(theta))


def distance_to_integer(v):
    v = np.asarray(v, dtype=np.float64)
    return np.abs(v - np.rint(v))


def nearest_int_weights(dist, M: int):
    """min{1, 1/(M*dist)} with the cap giving 1 at dist = 0."""
    dist = np.asarray(dist, dtype=np.float64)
    with np.errstate(divide="ignore"):
        w = np.where(dist > 0, 1.0 / (M * np.where(dist > 0, dist, 1.0)), np.inf)
    return np.minimum(1.0, w)


def nearest_int_weight_sum(P: int, Pprime: int, M: int, c: float = 1.5) -> float:
    """V = sum_{P<=n<=P'} min{1, 1/(M ||n^c||)}."""
    P, Pprime, M = int(P), int(Pprime), int(M)
    if Pprime < P:
        raise DomainError(f"empty range: P'={Pprime} < P={P}")
    if M < 1:
        raise DomainError("M must be a positive integer")
    n = np.arange(P, Pprime + 1, dtype=np.int64)
    fr = frac_powers(n, c)
    dist = np.minimum(fr, 1.0 - fr)
    return math.fsum(nearest_int_weights(dist, M).tolist())


# ---------------------------------------------------------------- floor removal

@dataclass(frozen=True)
class FloorSeriesSpec:
    M: int
    x: float

    def __post_init__(self):
        if self.M < 1:
            raise DomainError("series truncation M must be >= 1")
        if not (-0.5 <= self.x < 0.5) or self.x == 0:
            raise DomainError("modulation x must lie in [-1/2, 1/2) without 0")

    def coefficients(self):
        m = np.arange(-self.M, self.M + 1)
        return m, np.array([fourier_coeff(int(k), self.x) for k in m])

    @staticmethod
    def decay_bound(m):
        """Upper bound 1/(pi*max(|m|-1/2, 1/2)) on |c_m(x)|."""
        return 1.0 / (math.pi * np.maximum(np.abs(m) - 0.5, 0.5))


def fourier_coeff(m: int, x: float) -> complex:
    """c_m(x) = (1 - e(-x)) / (2 pi i (x + m))."""
    m = int(m)
    if not math.isfinite(x):
        raise DomainError("fourier_coeff needs finite x")
    if m == 0 and abs(x) < 1e-12:
        return 1.0 + 0.0j
    num = 1.0 - complex(phase_of_turns(centered_frac(-x)))
    den = x + m
    if den == 0.0:
        if abs(num) > 0:
            raise DomainError(f"pole of c_m at x + m = 0 (m={m}, x={x})")
        return 1.0 + 0.0j
    return num / (2j * math.pi * den)


def floor_series_residual(n, M: int, xi2: float, c: float = 1.5):
    """g_{M,xi2}(n) = e(-xi2*{n^c}) - sum_{|m|<=M} c_m(xi2) e(m n^c)."""
    M = int(M)
    if M < 1:
        raise DomainError("M must be a positive integer")
    if not (-0.5 <= xi2 < 0.5) or xi2 == 0:
        raise DomainError("xi2 must lie in [-1/2, 1/2) without 0")
    n = np.asarray(n, dtype=np.int64)
    if np.any(n < 1):
        raise DomainError("floor_series_residual needs n >= 1")
    return _residual_from_frac(frac_powers(n, c), M, xi2)


def _residual_from_frac(fr, M, xi2):
    # e(m n^c) = e(m {n^c}) for integer m
    fr = np.asarray(fr, dtype=np.float64)
    m = np.arange(-M, M + 1)
    coef = np.array([fourier_coeff(int(k), xi2) for k in m])
    harm = phase_of_turns(centered_frac(np.multiply.outer(fr, m.astype(np.float64))))
    series = harm @ coef
    out = phase_of_turns(centered_frac(-xi2 * fr)) - series
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- envelopes

@dataclass(frozen=True)
class BoundEnvelope:
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("full_sum", "weighted_dyadic"):
            raise DomainError(f"unknown envelope kind {self.kind!r}")
        if not self.value >= 0:
            raise DomainError("envelope value must be nonnegative")

    def __float__(self):
        return float(self.value)


def _require_frequency(xi1, xi2):
    if xi1 == 0 and xi2 == 0:
        raise DomainError("envelope undefined when both frequencies vanish")


def bound_full(N: int, M: int, xi1: float, xi2: float, c: float = 1.5) -> BoundEnvelope:
    """min{(1+log M)(N/M + N^{c/2} M^{1/2} + N^{1-c/2}|xi2|^{-1/2}), |xi1|^{-1}(N^c|xi2|+1)}.

    A vanishing frequency disables the branch it would make infinite.
    """
    _require_frequency(xi1, xi2)
    N, M = float(N), float(M)
    branches = []
    if xi2 != 0:
        branches.append((1.0 + math.log(M)) * (N / M + N ** (c / 2) * math.sqrt(M)
                                                + N ** (1 - c / 2) / math.sqrt(abs(xi2))))
    if xi1 != 0:
        branches.append((N ** c * abs(xi2) + 1.0) / abs(xi1))
    return BoundEnvelope("full_sum", min(branches))


def bound_weighted(j: int, xi1: float, xi2: float, c: float = 1.5) -> BoundEnvelope:
    """2^-j min{j(2^{(c+1)j/3} + 2^{(1-c/2)j}|xi2|^{-1/2}), |xi1|^{-1}(2^{cj}|xi2|+1)}."""
    _require_frequency(xi1, xi2)
    j = int(j)
    if j < 1:
        raise DomainError("bound_weighted needs j >= 1")
    branches = []
    if xi2 != 0:
        branches.append(j * (2.0 ** ((c + 1) * j / 3) + 2.0 ** ((1 - c / 2) * j) / math.sqrt(abs(xi2))))
    if xi1 != 0:
        branches.append((2.0 ** (c * j) * abs(xi2) + 1.0) / abs(xi1))
    return BoundEnvelope("weighted_dyadic", math.ldexp(min(branches), -j))
