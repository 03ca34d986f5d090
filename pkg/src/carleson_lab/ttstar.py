"""Kernels of T T* for the single-scale modulated operators.

Discrete kernel at scale j with modulation choice lambda_x:

    K(x, y) = sum_m e(lambda_x |x-m|^c - lambda_y |y-m|^c) psi_j^tau(x-m) psi_j^tau(y-m)

and the continuous kernel with per-point scales j_x, plus their
near/far envelopes, the L_j weight and a Schur row-sum probe.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .core_math import (
    DomainError,
    ParamSet,
    SignHalf,
    SignMode,
    TWO_PI,
    as_half,
    as_mode,
    centered_frac,
    frac_powers,
    window_value,
)
from .expsum import nearest_int_weights, power_phase_turns
from .quadrature import CallablePhase, QuadratureSpec, integrate

GENERATORS = ("constant", "uniform", "resonant")
# largest value strictly below 1 used to keep clamped choices inside half-open ranges
_BELOW_ONE = 1.0 - 2.0 ** -40


# ---------------------------------------------------------------- choice functions

@dataclass(frozen=True)
class ChoiceFunctions:
    """lambda_x (and j_x) tabulated on the window x0 .. x0 + len - 1."""

    x0: int
    lam: np.ndarray
    scale: np.ndarray
    lo: float
    hi: float
    kind: str = "constant"

    def __post_init__(self):
        lam = np.asarray(self.lam, float)
        if lam.ndim != 1 or lam.size == 0:
            raise DomainError("choice function needs a nonempty window")
        if np.any(lam < self.lo) or np.any(lam >= self.hi):
            raise DomainError(f"choice values leave the admissible range [{self.lo:.6g}, {self.hi:.6g})")

    @property
    def window(self):
        return self.x0, self.x0 + len(self.lam) - 1

    def _index(self, x):
        k = int(x) - self.x0
        if not 0 <= k < len(self.lam):
            raise DomainError(f"point {x} outside the choice window {self.window}")
        return k

    def lambda_of(self, x) -> float:
        return float(self.lam[self._index(x)])

    def scale_of(self, x) -> int:
        return int(self.scale[self._index(x)])


def discrete_range(j: int, r: int, c: float):
    return 2.0 ** (r - c * j), 2.0 ** (r + 1 - c * j)


def r_range(j: int, p: ParamSet = ParamSet()):
    """Admissible integers r in [nu j - 2, (c + 2 delta1) j + 2] whose lambda range
    [2^{r-cj}, 2^{r+1-cj}) stays inside (0, 1/2]."""
    lo = math.ceil(p.nu * j - 2)
    hi = min(math.floor((p.c + 2 * p.delta1) * j + 2), math.floor(p.c * j - 2))
    return list(range(lo, hi + 1))


def _tabulate(kind, u, lo, hi, rng, exponent):
    # u = |x - t0| offsets for the resonant choice
    n = len(u)
    if kind == "constant":
        lam = np.full(n, rng.uniform(lo, hi))
    elif kind == "uniform":
        lam = rng.uniform(lo, hi, n)
    elif kind == "resonant":
        # lambda_x = Lambda |x - t0|^exponent, scaled to start at lo
        umin = float(np.min(u))
        lam = lo * (u / umin) ** exponent
    else:
        raise DomainError(f"unknown choice generator {kind!r}")
    return np.clip(lam, lo, hi * _BELOW_ONE)


def discrete_choice(kind: str, j: int, r: int, tau, c: float = 1.5, rng=None,
                    x0: int | None = None, length: int | None = None) -> ChoiceFunctions:
    """Admissible lambda_x in [2^{r-cj}, 2^{r+1-cj}) on a window of points.

    The resonant choice lambda_x = Lambda |x - t0|^{2-c} makes the second
    derivative of the kernel phase vanish at the common point t0 for every
    pair, with the window placed so that t0 lies inside the summation range.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    tau = as_half(tau)
    lo, hi = discrete_range(j, r, c)
    inner, outer = 2 ** (j - 3), 2 ** (j - 1)
    if kind == "resonant":
        # x - m runs over -tau * [inner, outer]; t0 plays m
        t0 = 0
        u = np.arange(inner, outer + 1)
        xs = t0 - u if tau is SignHalf.MINUS else t0 + u
        order = np.argsort(xs)
        xs, u = xs[order], u[order]
        lam = _tabulate(kind, u, lo, hi, rng, 2.0 - c)
        return ChoiceFunctions(int(xs[0]), lam, np.full(len(lam), j), lo, hi, kind)
    length = (outer - inner + 1) if length is None else int(length)
    x0 = -(outer) if x0 is None else int(x0)
    lam = _tabulate(kind, np.ones(length), lo, hi, rng, 0.0)
    return ChoiceFunctions(x0, lam, np.full(length, j), lo, hi, kind)


def continuous_range(ell: int, j: int, c: float):
    # lambda^{1/c} 2^j in [2^ell, 2^{ell+1})
    return 2.0 ** (c * (ell - j)), 2.0 ** (c * (ell + 1 - j))


def continuous_choice(kind: str, ell: int, j: int, tau, c: float = 1.5, rng=None) -> ChoiceFunctions:
    """lambda_x with lambda_x^{1/c} 2^{j} in [2^ell, 2^{ell+1}) and j_x = j.

    The resonant choice lambda_x = Lambda |x - t0|^{1-c} puts a common
    stationary point of the kernel phase at t0.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    tau = as_half(tau)
    lo, hi = continuous_range(ell, j, c)
    inner, outer = 2 ** (j - 3), 2 ** (j - 1)
    u = np.arange(inner, outer + 1)
    xs = -u if tau is SignHalf.MINUS else u
    order = np.argsort(xs)
    xs, u = xs[order], u[order]
    if kind == "resonant":
        lam = np.clip(lo * (u / u.max()) ** (1.0 - c), lo, hi * _BELOW_ONE)
    else:
        lam = _tabulate(kind, np.ones(len(u)), lo, hi, rng, 0.0)
    return ChoiceFunctions(int(xs[0]), lam, np.full(len(lam), j), lo, hi, kind)


# ---------------------------------------------------------------- discrete kernel

def _summation_range(x, y, j, tau):
    inner, outer = 2 ** (j - 3), 2 ** (j - 1)
    if tau is SignHalf.PLUS:      # x - m in [inner, outer]
        lo, hi = max(x, y) - outer, min(x, y) - inner
    else:                         # m - x in [inner, outer]
        lo, hi = max(x, y) + inner, min(x, y) + outer
    return lo, hi


def ttstar_kernel_discrete(x: int, y: int, j: int, r: int, tau, choice: ChoiceFunctions,
                           c: float = 1.5, params: ParamSet | None = None) -> complex:
    """Exact finite sum over m in the intersection of both window supports."""
    tau = as_half(tau)
    x, y, j = int(x), int(y), int(j)
    lo_l, hi_l = discrete_range(j, r, c)
    if not (math.isclose(choice.lo, lo_l) and math.isclose(choice.hi, hi_l)):
        raise DomainError(f"choice function is not admissible for j={j}, r={r}")
    if params is not None and r not in r_range(j, params):
        raise DomainError(f"r={r} outside the admissible range for j={j}")
    lam_x, lam_y = choice.lambda_of(x), choice.lambda_of(y)
    lo, hi = _summation_range(x, y, j, tau)
    if hi < lo:
        return 0j
    m = np.arange(lo, hi + 1, dtype=np.int64)
    ux, uy = np.abs(x - m), np.abs(y - m)
    amp = window_value(j, (x - m).astype(float)) * window_value(j, (y - m).astype(float))
    th = TWO_PI * centered_frac(power_phase_turns(lam_x, ux, c) - power_phase_turns(lam_y, uy, c))
    return complex(math.fsum((amp * np.cos(th)).tolist()), math.fsum((amp * np.sin(th)).tolist()))


def kernel_support_radius(j: int) -> int:
    """K vanishes once |x - y| exceeds this (difference of the window radii)."""
    return 2 ** (j - 1) - 2 ** (j - 3)


# ---------------------------------------------------------------- envelopes

@dataclass(frozen=True)
class KernelEnvelope:
    near_amplitude: float
    near_radius: float
    far_amplitude: float
    far_radius: float

    def __post_init__(self):
        if self.near_amplitude < 0 or self.far_amplitude < 0:
            raise DomainError("envelope amplitudes must be nonnegative")
        if self.near_radius > self.far_radius:
            raise DomainError("near radius exceeds far radius")

    def __call__(self, d):
        d = np.abs(np.asarray(d, float))
        out = np.where(d <= self.near_radius, self.near_amplitude, 0.0)
        out = out + np.where((d >= self.near_radius) & (d <= self.far_radius), self.far_amplitude, 0.0)
        return float(out) if out.ndim == 0 else out

    def with_near_radius(self, radius: float) -> "KernelEnvelope":
        return KernelEnvelope(self.near_amplitude, min(radius, self.far_radius), self.far_amplitude,
                              self.far_radius)


def ttstar_envelope_discrete(j: int, p: ParamSet = ParamSet(), rho4: float = 0.0) -> KernelEnvelope:
    if rho4 < 0:
        raise DomainError("rho4 must be nonnegative")
    return KernelEnvelope(2.0 ** -j, 2.0 ** ((1 - p.delta2) * j), 2.0 ** (-(1 + rho4) * j), 2.0 ** j)


def ttstar_envelope_continuous(jmax: int, ell: int, delta: float, rho: float = 0.0) -> KernelEnvelope:
    if rho < 0:
        raise DomainError("rho must be nonnegative")
    return KernelEnvelope(2.0 ** -jmax, 2.0 ** (jmax - ell * delta), 2.0 ** (-jmax - ell * rho), 2.0 ** jmax)


# ---------------------------------------------------------------- continuous kernel

def _signed_pow(u, c, mode):
    v = np.abs(u) ** c
    return np.sign(u) * v if mode is SignMode.ODD else v


def ttstar_kernel_continuous(x: float, y: float, ell: int, mode, tau, choice: ChoiceFunctions,
                             c: float = 1.5, quad: QuadratureSpec = QuadratureSpec(),
                             check: bool = True) -> complex:
    """int e(lambda_x [x-t]^c - lambda_y [y-t]^c) psi^tau_{j_x}(x-t) psi^tau_{j_y}(y-t) dt.

    Only t outside [x, y] contributes: inside, x - t and y - t have opposite
    signs and one of the signed windows vanishes.
    """
    mode, tau = as_mode(mode), as_half(tau)
    lam_x, lam_y = choice.lambda_of(x), choice.lambda_of(y)
    jx, jy = choice.scale_of(x), choice.scale_of(y)
    for lam, jj in ((lam_x, jx), (lam_y, jy)):
        if not 2.0 ** ell <= lam ** (1.0 / c) * 2.0 ** jj < 2.0 ** (ell + 1) * (1 + 1e-12):
            raise DomainError("choice violates lambda^{1/c} 2^{j} ~ 2^ell")
    s = 1.0 if tau is SignHalf.PLUS else -1.0
    # x - t = s u with u in [2^{jx-3}, 2^{jx-1}]
    ax = (x - s * 2.0 ** (jx - 1), x - s * 2.0 ** (jx - 3))
    ay = (y - s * 2.0 ** (jy - 1), y - s * 2.0 ** (jy - 3))
    lo = max(min(ax), min(ay))
    hi = min(max(ax), max(ay))
    if hi <= lo:
        return 0j
    sgn = 1.0 if (mode is SignMode.EVEN or s > 0) else -1.0

    def phase(t):
        return sgn * (lam_x * np.abs(x - t) ** c - lam_y * np.abs(y - t) ** c)

    def deriv(t):
        return -sgn * c * s * (lam_x * np.abs(x - t) ** (c - 1) - lam_y * np.abs(y - t) ** (c - 1))

    def amp(t):
        return window_value(jx, x - t) * window_value(jy, y - t)

    edges = np.linspace(lo, hi, quad.coarse_panels + 1)
    # overlap integrals are judged against the family size 2^{-max(jx, jy)}
    floor = 2.0 ** -max(jx, jy)
    return integrate(amp, CallablePhase(phase, deriv), edges, quad, check=check, scale_floor=floor).value


# ---------------------------------------------------------------- weights and probes

def L_j_weight(x, j: int, M: int, c: float = 1.5):
    """2^-j 1{2^{j-3} <= |x| <= 2^{j-1}} min{1, 1/(M ||x|^c||)}."""
    j, M = int(j), int(M)
    if j < 1 or M < 1:
        raise DomainError("L_j_weight needs j >= 1 and M >= 1")
    x = np.asarray(x, dtype=np.int64)
    ax = np.abs(x)
    inside = (ax >= 2.0 ** (j - 3)) & (ax <= 2.0 ** (j - 1))
    fr = frac_powers(np.where(inside, ax, 1), c)
    w = nearest_int_weights(np.minimum(fr, 1.0 - fr), M)
    out = np.where(inside, math.ldexp(1.0, -j) * w, 0.0)
    return float(out) if out.ndim == 0 else out


def L_j_l1(j: int, M: int, c: float = 1.5) -> float:
    lo, hi = math.ceil(2.0 ** (j - 3)), math.floor(2.0 ** (j - 1))
    n = np.arange(lo, hi + 1, dtype=np.int64)
    return 2.0 * math.fsum(L_j_weight(n, j, M, c).tolist())


def schur_norm_probe(kernel_samples) -> float:
    """Maximum row absolute sum of the sampled block."""
    K = np.atleast_2d(np.asarray(kernel_samples))
    if K.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(K), axis=1)))


def discrete_kernel_block(j: int, r: int, tau, choice: ChoiceFunctions, points, c: float = 1.5):
    pts = [int(p) for p in points]
    return np.array([[ttstar_kernel_discrete(a, b, j, r, tau, choice, c) for b in pts] for a in pts])


# ---------------------------------------------------------------- dumps

KERNEL_CSV_COLUMNS = ("j", "r", "x", "y", "abs_k", "envelope", "ratio")


def kernel_rows_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(KERNEL_CSV_COLUMNS)
    for j, r, x, y, ak, env, ratio in rows:
        w.writerow([str(int(j)), str(int(r)), str(int(x)), str(int(y)), f"{ak:.17g}", f"{env:.17g}",
                    f"{ratio:.17g}"])
    return buf.getvalue()
