"""Discrete multipliers m_j, their continuous counterparts H_j, the error
terms E_j = m_j - H_j, the ergodic multipliers k_t and L_t, box geometry
and the exact lambda-derivative of m_j.

Sums over n != 0 are folded into n > 0 by pairing n with -n.  Since psi_j
is odd this gives

    mode 0:  m = -2i sum psi_j(n) e(lambda F_n) sin(2 pi xi n)
    mode 1:  m =  2i sum psi_j(n) sin(2 pi (lambda F_n - xi n))

with F_n = floor(n^c), so the antisymmetry in xi (mode 0) and the vanishing
real part (mode 1) hold exactly in floating point.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .core_math import (
    DomainError,
    ParamSet,
    SignMode,
    TWO_PI,
    as_mode,
    centered_frac,
    cutoff_eta,
    floor_powers,
    frac_product,
    window_value,
)
from .expsum import exp_sum
from .quadrature import PowerPhase, QuadratureSpec, integrate

DEFAULT_QUAD = QuadratureSpec()


def _check_c(c):
    if not 1 < c < 2:
        raise DomainError(f"constraint c ∈ (1,2) violated: c={c}")


# ---------------------------------------------------------------- boxes

@dataclass(frozen=True)
class MajorBox:
    j: int
    params: ParamSet = ParamSet()

    @property
    def xi_half_width(self) -> float:
        return 2.0 ** ((2 * self.params.eps - 1) * self.j)

    @property
    def lambda_half_width(self) -> float:
        return 2.0 ** ((self.params.eps - self.params.c) * self.j)

    def contains(self, xi, lam):
        return (np.abs(xi) <= self.xi_half_width) & (np.abs(lam) <= self.lambda_half_width)


@dataclass(frozen=True)
class ErgodicBox:
    t: float
    params: ParamSet = ParamSet()

    def __post_init__(self):
        if not self.t > 1:
            raise DomainError("ergodic box needs t > 1")

    @property
    def xi1_half_width(self) -> float:
        return float(self.t) ** (2 * self.params.eps - 1)

    @property
    def xi2_half_width(self) -> float:
        return float(self.t) ** (self.params.eps - self.params.c)

    def contains(self, xi1, xi2):
        return (np.abs(xi1) <= self.xi1_half_width) & (np.abs(xi2) <= self.xi2_half_width)


def in_major_box(j: int, xi, lam, p: ParamSet = ParamSet()):
    out = MajorBox(int(j), p).contains(xi, lam)
    return bool(out) if np.ndim(out) == 0 else out


def in_ergodic_box(t, xi1, xi2, p: ParamSet = ParamSet()):
    out = ErgodicBox(t, p).contains(xi1, xi2)
    return bool(out) if np.ndim(out) == 0 else out


def X_j_threshold(j: int, p: ParamSet = ParamSet()) -> float:
    return 2.0 ** ((p.nu - p.c) * j)


def X_j_complement_test(j: int, lam, p: ParamSet = ParamSet()):
    """True iff |lambda| > 2^{(nu-c) j}, i.e. lambda lies outside X_j."""
    out = np.abs(lam) > X_j_threshold(j, p)
    return bool(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------- discrete multiplier

class _Window:
    """Positive-n terms of the window at scale j, cached per (j, c)."""

    _cache: dict = {}

    def __new__(cls, j, c):
        key = (int(j), float(c))
        hit = cls._cache.get(key)
        if hit is None:
            hit = super().__new__(cls)
            lo = max(1, math.ceil(2.0 ** (j - 3)))
            hi = math.floor(2.0 ** (j - 1))
            n = np.arange(lo, hi + 1, dtype=np.int64)
            psi = window_value(j, n)
            keep = psi != 0
            hit.n, hit.psi = n[keep], psi[keep]
            hit.F = floor_powers(hit.n, c)
            if len(cls._cache) > 64:
                cls._cache.clear()
            cls._cache[key] = hit
        return hit


def _fsum(a) -> float:
    return math.fsum(a.tolist())


def m_j(j: int, xi: float, lam: float, mode=SignMode.EVEN, c: float = 1.5) -> complex:
    """Discrete multiplier sum_{n != 0} e(lambda sign(n)^i floor(|n|^c) - xi n) psi_j(n)."""
    j = int(j)
    if j < 1:
        raise DomainError("m_j needs j >= 1")
    _check_c(c)
    mode = as_mode(mode)
    w = _Window(j, c)
    if w.n.size == 0:
        return 0j
    if mode is SignMode.EVEN:
        s = w.psi * np.sin(TWO_PI * frac_product(xi, w.n))
        th = TWO_PI * frac_product(lam, w.F)
        return complex(2.0 * _fsum(s * np.sin(th)), -2.0 * _fsum(s * np.cos(th)))
    th = TWO_PI * centered_frac(frac_product(lam, w.F) - frac_product(xi, w.n))
    return complex(0.0, 2.0 * _fsum(w.psi * np.sin(th)))


def m_j_values(j: int, xi, lam, mode=SignMode.EVEN, c: float = 1.5) -> np.ndarray:
    xi = np.broadcast_arrays(np.asarray(xi, float), np.asarray(lam, float))
    return np.array([m_j(j, a, b, mode, c) for a, b in zip(xi[0].ravel(), xi[1].ravel())],
                    dtype=complex).reshape(xi[0].shape)


def dlambda_m_j(j: int, xi: float, lam: float, mode=SignMode.EVEN, c: float = 1.5) -> complex:
    """Exact derivative in lambda, 2 pi i sum sign(n)^i F_n e(...) psi_j(n)."""
    j = int(j)
    if j < 1:
        raise DomainError("dlambda_m_j needs j >= 1")
    _check_c(c)
    mode = as_mode(mode)
    w = _Window(j, c)
    if w.n.size == 0:
        return 0j
    fp = w.F.astype(np.float64) * w.psi
    if mode is SignMode.EVEN:
        s = fp * np.sin(TWO_PI * frac_product(xi, w.n))
        th = TWO_PI * frac_product(lam, w.F)
        return 2.0 * TWO_PI * complex(_fsum(s * np.cos(th)), _fsum(s * np.sin(th)))
    th = TWO_PI * centered_frac(frac_product(lam, w.F) - frac_product(xi, w.n))
    return complex(0.0, 2.0 * TWO_PI * _fsum(fp * np.cos(th)))


# ---------------------------------------------------------------- continuous counterpart

def _half_line_integral(j, alpha, beta, c, quad, check=True):
    # int_{t>0} psi_j(t) e(alpha t^c + beta t) dt over the positive support
    lo, hi = 2.0 ** (j - 3), 2.0 ** (j - 1)
    edges = np.linspace(lo, hi, quad.coarse_panels + 1)
    return integrate(lambda t: window_value(j, t), PowerPhase(alpha, beta, c), edges, quad, check=check)


@dataclass
class ContinuousValue:
    value: complex
    relative_discrepancy: float


def H_j_detail(j: int, xi: float, lam: float, mode=SignMode.EVEN, c: float = 1.5,
               quad: QuadratureSpec = DEFAULT_QUAD) -> ContinuousValue:
    j = int(j)
    _check_c(c)
    mode = as_mode(mode)
    eta = cutoff_eta(xi, lam)
    if eta == 0.0 or (xi == 0 and lam == 0):
        return ContinuousValue(0j, 0.0)
    a = _half_line_integral(j, lam, -xi, c, quad)
    if mode is SignMode.EVEN:
        b = _half_line_integral(j, lam, xi, c, quad)
        val = a.value - b.value
        disc = max(a.relative_discrepancy, b.relative_discrepancy)
    else:
        val = complex(0.0, 2.0 * a.value.imag)
        disc = a.relative_discrepancy
    return ContinuousValue(eta * val, disc)


def H_j(j: int, xi: float, lam: float, mode=SignMode.EVEN, c: float = 1.5,
        quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """eta(xi, lambda) int e(lambda [t]_i^c - xi t) psi_j(t) dt."""
    return H_j_detail(j, xi, lam, mode, c, quad).value


def E_j(j: int, xi: float, lam: float, mode=SignMode.EVEN, c: float = 1.5,
        quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    return m_j(j, xi, lam, mode, c) - H_j(j, xi, lam, mode, c, quad)


# ---------------------------------------------------------------- ergodic multipliers

def k_t(t: int, xi1: float, xi2: float, c: float = 1.5) -> complex:
    """(1/t) sum_{1<=n<=t} e(-xi2 floor(n^c) - xi1 n)."""
    t = int(t)
    if t < 1:
        raise DomainError("k_t needs t >= 1")
    return exp_sum(t, -xi1, -xi2, c) / t


def _ergodic_edges(t: float, quad: QuadratureSpec):
    # dyadic blocks [2^k, 2^{k+1}], graded toward 0 where s^c is not smooth
    top = math.floor(math.log2(t))
    e = [0.0] + [2.0 ** k for k in range(-40, top + 1) if 2.0 ** k < t] + [float(t)]
    return np.array(e)


def L_t_detail(t: float, xi1: float, xi2: float, c: float = 1.5,
               quad: QuadratureSpec = DEFAULT_QUAD) -> ContinuousValue:
    if not t > 0:
        raise DomainError("L_t needs t > 0")
    _check_c(c)
    if xi1 == 0 and xi2 == 0:
        return ContinuousValue(1.0 + 0j, 0.0)
    r = integrate(np.ones_like, PowerPhase(-xi2, -xi1, c), _ergodic_edges(t, quad), quad)
    return ContinuousValue(r.value / t, r.relative_discrepancy)


def L_t(t: float, xi1: float, xi2: float, c: float = 1.5, quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """(1/t) int_0^t e(-xi2 s^c - xi1 s) ds."""
    return L_t_detail(t, xi1, xi2, c, quad).value


# ---------------------------------------------------------------- grids

@dataclass
class MultiplierGrid:
    """Sampled multiplier values at one scale."""

    scale: float
    xi: np.ndarray
    lam: np.ndarray
    values: np.ndarray
    in_box: np.ndarray
    grid_spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise DomainError("multiplier grid holds non-finite values")

    def max_abs(self, where=None) -> float:
        a = np.abs(self.values)
        if where is not None:
            a = a[where]
        return float(a.max()) if a.size else 0.0

    def off_box_max(self) -> float:
        return self.max_abs(~self.in_box)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scale", "xi", "lambda", "re", "im", "abs", "in_box"])
        for x, l, v, b in zip(self.xi, self.lam, self.values, self.in_box):
            w.writerow([f"{self.scale:.17g}", f"{x:.17g}", f"{l:.17g}", f"{v.real:.17g}",
                        f"{v.imag:.17g}", f"{abs(v):.17g}", "1" if b else "0"])
        return buf.getvalue()
