"""Scalar primitives shared by every other module.

Phases e(x) = exp(2 pi i x), floors of fractional powers with a near-tie
guard, the smooth bump, the dyadic windows psi_j and the product cutoff.

All functions accept scalars or numpy arrays unless noted otherwise.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import mpmath
import numpy as np

TWO_PI = 2.0 * math.pi

# absolute width of the near-integer guard band for floors
FLOOR_GUARD = 1e-9
# extra guard in ulps: |n|^c from pow() is good to about one ulp
FLOOR_GUARD_ULPS = 4.0
_MP_DPS = 50


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class NumericError(ArithmeticError):
    """A numerical procedure failed its own accuracy check."""


class SignMode(enum.IntEnum):
    EVEN = 0
    ODD = 1


class SignHalf(enum.Enum):
    PLUS = "+"
    MINUS = "-"


def as_mode(mode) -> SignMode:
    try:
        return SignMode(int(mode))
    except (ValueError, TypeError):
        raise DomainError(f"sign mode must be 0 or 1, got {mode!r}") from None


def as_half(tau) -> SignHalf:
    if isinstance(tau, SignHalf):
        return tau
    if tau in ("+", "plus", 1, +1):
        return SignHalf.PLUS
    if tau in ("-", "minus", -1):
        return SignHalf.MINUS
    raise DomainError(f"sign half must be '+' or '-', got {tau!r}")


@dataclass(frozen=True)
class ParamSet:
    """Exponent and threshold bundle with its admissible ranges."""

    c: float = 1.5
    eps: float = 0.2
    nu: float = 0.019
    delta1: float = 0.12
    delta2: float = 1.8e-4
    nuPrime: float = 9e-3

    def __post_init__(self):
        for problem in self.violations():
            raise DomainError(problem)

    def violations(self) -> list[str]:
        c, eps, nu = self.c, self.eps, self.nu
        d1, d2, nup = self.delta1, self.delta2, self.nuPrime
        out = []
        if not all(map(math.isfinite, (c, eps, nu, d1, d2, nup))):
            return ["all parameters must be finite"]
        if not 1 < c < 2:
            out.append(f"constraint c ∈ (1,2) violated: c={c}")
            return out
        if not 0 < eps < min(0.25, 2 - c):
            out.append(f"constraint eps ∈ (0, min{{1/4, 2-c}}) = (0, {min(0.25, 2 - c):g}) violated: eps={eps}")
        if not 0 < nu < eps / 10:
            out.append(f"constraint nu ∈ (0, eps/10) = (0, {eps / 10:g}) violated: nu={nu}")
        if not 0 < d1 < (2 - c) / 4:
            out.append(f"constraint delta1 ∈ (0, (2-c)/4) = (0, {(2 - c) / 4:g}) violated: delta1={d1}")
        hi2 = min(nu / 100, (2 - c) / 100)
        if not 0 < d2 < hi2:
            out.append(f"constraint delta2 ∈ (0, min{{nu/100, (2-c)/100}}) = (0, {hi2:g}) violated: delta2={d2}")
        hi = min(nu / 2, (2 - c) / 2)
        if not d2 < nup < hi:
            out.append(f"constraint nuPrime ∈ (delta2, min{{nu/2, (2-c)/2}}) = ({d2:g}, {hi:g}) violated: nuPrime={nup}")
        return out

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ParamSet":
        keys = {"c", "eps", "nu", "delta1", "delta2", "nuPrime"}
        unknown = set(d) - keys
        if unknown:
            raise DomainError(f"unknown parameter(s): {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})


# ---------------------------------------------------------------- phases

def centered_frac(x):
    """x minus the nearest integer, in [-1/2, 1/2]; odd in x."""
    return x - np.rint(x)


def _veltkamp(x):
    t = 134217729.0 * x  # 2**27 + 1
    hi = t - (t - x)
    return hi, x - hi


def frac_product(x, k):
    """Centered fractional part of x*k for real x and integer k, |k| < 2**52.

    The product is split into four partial products that are exact in
    binary64, so the result is accurate to a few ulps of 1 no matter how
    large x*k is.  Odd in x (and in k).
    """
    x = np.asarray(x, dtype=np.float64)
    k = np.asarray(k, dtype=np.int64)
    hi, lo = _veltkamp(x)
    sign = np.where(k < 0, -1, 1)
    ka = np.abs(k)
    k_hi = (ka >> 26).astype(np.float64) * sign
    k_lo = (ka & ((1 << 26) - 1)).astype(np.float64) * sign
    two26 = 67108864.0
    s = (centered_frac(hi * k_lo) + centered_frac(lo * k_lo)
         + centered_frac(centered_frac(hi * k_hi) * two26)
         + centered_frac(centered_frac(lo * k_hi) * two26))
    return centered_frac(s)


def phase_of_turns(theta):
    """e(theta) for theta already reduced to a small range."""
    a = TWO_PI * np.asarray(theta, dtype=np.float64)
    return np.cos(a) + 1j * np.sin(a)


def unit_phase(x):
    """e(x) = exp(2 pi i x). Non-finite input raises DomainError."""
    xa = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(xa)):
        raise DomainError("unit_phase needs finite input")
    z = phase_of_turns(centered_frac(xa))
    return complex(z) if z.ndim == 0 else z


# ---------------------------------------------------------------- floors

def _mp_floor_pow(n: int, c: float) -> int:
    with mpmath.workdps(_MP_DPS):
        return int(mpmath.floor(mpmath.power(mpmath.mpf(abs(int(n))), mpmath.mpf(c))))


def _mp_frac_pow(n: int, c: float) -> float:
    with mpmath.workdps(_MP_DPS):
        v = mpmath.power(mpmath.mpf(abs(int(n))), mpmath.mpf(c))
        return float(v - mpmath.floor(v))


def _near_ties(v):
    width = np.maximum(FLOOR_GUARD, FLOOR_GUARD_ULPS * np.spacing(v))
    return np.abs(v - np.rint(v)) <= width


def floor_powers(n, c: float):
    """floor(|n|^c) for an integer array n, with the extended-precision guard."""
    n = np.asarray(n, dtype=np.int64)
    v = np.power(np.abs(n).astype(np.float64), c)
    out = np.floor(v).astype(np.int64)
    tie = _near_ties(v)
    if np.any(tie):
        flat = out.reshape(-1)
        for idx in np.flatnonzero(tie.reshape(-1)):
            flat[idx] = _mp_floor_pow(int(n.reshape(-1)[idx]), c)
    return out


def frac_powers(n, c: float):
    """Fractional part {|n|^c} with the same guard as floor_powers."""
    n = np.asarray(n, dtype=np.int64)
    v = np.power(np.abs(n).astype(np.float64), c)
    out = v - np.floor(v)
    tie = _near_ties(v)
    if np.any(tie):
        flat = out.reshape(-1)
        for idx in np.flatnonzero(tie.reshape(-1)):
            flat[idx] = _mp_frac_pow(int(n.reshape(-1)[idx]), c)
    return out


def signed_floor_power(n: int, c: float, mode=SignMode.EVEN) -> int:
    """sign(n)^i * floor(|n|^c)."""
    n = int(n)
    if n == 0:
        raise DomainError("signed_floor_power is undefined at n = 0")
    if not 1 < c < 2:
        raise DomainError(f"constraint c ∈ (1,2) violated: c={c}")
    f = int(floor_powers(np.array([n]), c)[0])
    if as_mode(mode) is SignMode.ODD and n < 0:
        f = -f
    return f


def signed_power(t, c: float, mode=SignMode.EVEN):
    """[t]_i^c = sign(t)^i |t|^c for real t."""
    t = np.asarray(t, dtype=np.float64)
    v = np.power(np.abs(t), c)
    if as_mode(mode) is SignMode.ODD:
        v = np.sign(t) * v
    return v


# ---------------------------------------------------------------- bump and windows

def _transition(u):
    # s(u) = g(u) / (g(u) + g(1-u)) with g(u) = exp(-1/u), written as a logistic
    u = np.asarray(u, dtype=np.float64)
    out = np.where(u >= 1.0, 1.0, 0.0)
    mid = (u > 0.0) & (u < 1.0)
    if np.any(mid):
        um = u[mid]
        z = 1.0 / um - 1.0 / (1.0 - um)
        with np.errstate(over="ignore"):
            out[mid] = 1.0 / (1.0 + np.exp(z))
    return out


def bump(x):
    """Even smooth bump: 1 on [-1/4, 1/4], 0 outside (-1/2, 1/2)."""
    x = np.asarray(x, dtype=np.float64)
    a = np.abs(x)
    out = _transition(4.0 * (0.5 - a))
    return float(out) if out.ndim == 0 else out


def window_value(j: int, x):
    """psi_j(x) = (phi(2^-j x) - phi(2^(1-j) x)) / x, zero at x = 0."""
    x = np.asarray(x, dtype=np.float64)
    scale = math.ldexp(1.0, -int(j))
    num = bump(scale * x) - bump(2.0 * scale * x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x != 0.0, num / np.where(x != 0.0, x, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def window_support(j: int) -> tuple[float, float]:
    """Inner and outer radius of the annulus carrying psi_j."""
    return math.ldexp(1.0, j - 3), math.ldexp(1.0, j - 1)


def signed_window_value(j: int, tau, x):
    """psi_j restricted to the positive (plus) or negative (minus) half-line."""
    tau = as_half(tau)
    x = np.asarray(x, dtype=np.float64)
    keep = x > 0 if tau is SignHalf.PLUS else x < 0
    out = np.where(keep, window_value(j, x), 0.0)
    return float(out) if out.ndim == 0 else out


def cutoff_eta(xi, lam):
    """Product cutoff eta(xi, lambda) = phi(xi) phi(lambda)."""
    out = np.asarray(bump(xi)) * np.asarray(bump(lam))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DyadicWindow:
    j: int
    params: ParamSet = ParamSet()

    def __call__(self, x):
        return window_value(self.j, x)

    @property
    def support(self) -> tuple[float, float]:
        return window_support(self.j)

    def signed(self, tau, x):
        return signed_window_value(self.j, tau, x)
