"""Operators on finitely supported signals.

Modulated singular convolutions and their maximal function over a lambda
grid, ergodic averages along the orbit (n, floor(n^c)), the continuous
average along (s, s^c), and exact r-variation by dynamic programming.
"""
from __future__ import annotations

import csv
import io
import math
import struct
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .core_math import (
    DomainError,
    SignMode,
    TWO_PI,
    as_mode,
    centered_frac,
    floor_powers,
    frac_product,
    phase_of_turns,
)
from .quadrature import QuadratureSpec, _gauss

BINARY_MAGIC = b"CLAB1"
LAMBDA_TOL = 1.0 / 16
TIE_RTOL = 1.0 + 4 * np.finfo(float).eps


# ---------------------------------------------------------------- signals

@dataclass
class Signal:
    """Complex values on the index box origin .. origin + shape - 1."""

    values: np.ndarray
    origin: tuple | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim not in (1, 2):
            raise DomainError("signals are one- or two-dimensional")
        if self.origin is None:
            self.origin = (0,) * self.values.ndim
        if np.ndim(self.origin) == 0:
            self.origin = (int(self.origin),)
        self.origin = tuple(int(o) for o in self.origin)
        if len(self.origin) != self.values.ndim:
            raise DomainError("origin must give one index per dimension")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def support(self):
        return tuple((o, o + s - 1) for o, s in zip(self.origin, self.values.shape))

    def indices(self, axis=0):
        return np.arange(self.origin[axis], self.origin[axis] + self.values.shape[axis])

    def at(self, *idx) -> complex:
        k = tuple(i - o for i, o in zip(idx, self.origin))
        if all(0 <= a < s for a, s in zip(k, self.values.shape)):
            return complex(self.values[k])
        return 0j

    @classmethod
    def impulse(cls, dim=1):
        return cls(np.ones((1,) * dim), (0,) * dim)

    # serialization
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = ["x"] if self.dim == 1 else ["x1", "x2"]
        w.writerow(names + ["re", "im"])
        for k in np.ndindex(*self.values.shape):
            v = self.values[k]
            w.writerow([str(o + a) for o, a in zip(self.origin, k)] + [f"{v.real:.17g}", f"{v.imag:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Signal":
        rows = list(csv.reader(io.StringIO(text)))
        dim = len(rows[0]) - 2
        if dim not in (1, 2):
            raise DomainError("bad signal CSV header")
        idx = np.array([[int(v) for v in r[:dim]] for r in rows[1:]], dtype=np.int64).reshape(-1, dim)
        val = np.array([float(r[dim]) + 1j * float(r[dim + 1]) for r in rows[1:]])
        lo = idx.min(axis=0)
        shape = idx.max(axis=0) - lo + 1
        out = np.zeros(tuple(shape), dtype=complex)
        out[tuple((idx - lo).T)] = val
        return cls(out, tuple(int(v) for v in lo))

    def to_bytes(self) -> bytes:
        head = BINARY_MAGIC + struct.pack("<I", self.dim)
        head += struct.pack(f"<{self.dim}q", *self.origin)
        head += struct.pack(f"<{self.dim}Q", *self.values.shape)
        body = np.ascontiguousarray(self.values).view(np.float64).astype("<f8").tobytes()
        return head + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "Signal":
        if data[:5] != BINARY_MAGIC:
            raise DomainError("not a CLAB1 signal")
        (dim,) = struct.unpack_from("<I", data, 5)
        off = 9
        origin = struct.unpack_from(f"<{dim}q", data, off)
        off += 8 * dim
        shape = struct.unpack_from(f"<{dim}Q", data, off)
        off += 8 * dim
        pairs = np.frombuffer(data, dtype="<f8", offset=off)
        if pairs.size != 2 * int(np.prod(shape)):
            raise DomainError("truncated CLAB1 payload")
        vals = (pairs[0::2] + 1j * pairs[1::2]).reshape(shape)
        return cls(vals, origin)


def lp_norm(f: Signal, p=2.0) -> float:
    v = np.abs(np.asarray(f.values).ravel())
    if v.size == 0:
        return 0.0
    if p == math.inf or p == "inf":
        return float(v.max())
    p = float(p)
    if p < 1:
        raise DomainError("lp_norm needs p >= 1")
    m = v.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((v / m) ** p) ** (1.0 / p))


# ---------------------------------------------------------------- lambda grids

@dataclass(frozen=True)
class LambdaGrid:
    """Uniform grid on [-1/2, 1/2) containing 0, -1/2 + step and 1/2 - step."""

    points: tuple
    step: float
    tol: float = math.nan
    rule: str = "uniform"

    @classmethod
    def uniform(cls, count: int, n_max: int | None = None, c: float = 1.5) -> "LambdaGrid":
        half = max(1, math.ceil(int(count) / 2))
        step = 0.5 / half
        pts = tuple(k * step for k in range(-half, half))
        tol = step * n_max ** c if n_max else math.nan
        return cls(pts, step, tol, f"uniform({2 * half})")

    @classmethod
    def for_truncation(cls, n_max: int, c: float = 1.5, tol: float = LAMBDA_TOL,
                       max_points: int | None = None) -> "LambdaGrid":
        """Step at most tol / n_max^c.  With ``max_points`` the rule is capped and
        the tolerance actually achieved is recorded instead."""
        need = 2 * math.ceil(0.5 * n_max ** c / tol)
        if max_points is not None and need > max_points:
            g = cls.uniform(max_points, n_max, c)
            return cls(g.points, g.step, g.tol, f"capped({len(g.points)} of {need})")
        g = cls.uniform(need, n_max, c)
        return cls(g.points, g.step, g.step * n_max ** c, "tol/n_max^c")

    def __len__(self):
        return len(self.points)

    def search_order(self):
        # ties resolve toward smaller |lambda|, then smaller lambda
        return sorted(self.points, key=lambda v: (abs(v), v))


# ---------------------------------------------------------------- convolutions

@lru_cache(maxsize=16)
def _kernel_floors(n_max: int, c: float):
    n = np.arange(1, n_max + 1, dtype=np.int64)
    return n, floor_powers(n, c)


def modulated_kernel(lam: float, n_max: int, mode=SignMode.EVEN, c: float = 1.5) -> np.ndarray:
    """k(n) = e(lambda sign(n)^i floor(|n|^c)) / n on n = -n_max .. n_max, k(0) = 0."""
    mode = as_mode(mode)
    n, F = _kernel_floors(int(n_max), float(c))
    pos = phase_of_turns(frac_product(lam, F)) / n
    if mode is SignMode.EVEN:
        neg = -pos
    else:
        neg = -np.conj(pos)
    return np.concatenate([neg[::-1], [0j], pos])


def _tail_l2(n_max: int) -> float:
    # (sum_{|n|>N} 1/n^2)^{1/2} = (2 trigamma(N+1))^{1/2}
    return math.sqrt(2.0 * float(mpmath.psi(1, n_max + 1)))


class TruncationWarning(UserWarning):
    def __init__(self, message, tail_bound):
        super().__init__(message)
        self.tail_bound = tail_bound


def default_truncation(f: Signal) -> int:
    radius = math.ceil(f.values.shape[0] / 2)
    return max(1, 4 * radius)


def _check_truncation(f, n_max):
    need = 2 * math.ceil(f.values.shape[0] / 2)
    if n_max < need:
        tail = float(np.sum(np.abs(f.values))) * _tail_l2(n_max)
        warnings.warn(TruncationWarning(
            f"kernel truncation {n_max} below twice the support radius; omitted l2 mass <= {tail:.3e}", tail))


def _fft_len(n):
    return 1 << max(0, (int(n) - 1).bit_length())


def modulated_convolution(f: Signal, lam: float, mode=SignMode.EVEN, c: float = 1.5,
                          n_max: int | None = None, method: str = "auto") -> Signal:
    """sum_{0<|n|<=n_max} f(x-n) e(lambda sign(n)^i floor(|n|^c)) / n on the dilated support."""
    if f.dim != 1:
        raise DomainError("modulated_convolution acts on 1D signals")
    n_max = default_truncation(f) if n_max is None else int(n_max)
    _check_truncation(f, n_max)
    k = modulated_kernel(lam, n_max, mode, c)
    out = _convolve(f.values, k, method)
    return Signal(out, (f.origin[0] - n_max,))


def _convolve(a, k, method):
    if method == "auto":
        method = "direct" if a.size * k.size <= (1 << 22) else "fft"
    if method == "direct":
        return np.convolve(a, k)
    if method != "fft":
        raise DomainError(f"unknown convolution method {method!r}")
    L = a.size + k.size - 1
    n = _fft_len(L)
    return np.fft.ifft(np.fft.fft(a, n) * np.fft.fft(k, n))[:L]


@dataclass
class MaximalResult:
    values: Signal
    argmax_lambda: np.ndarray
    grid: LambdaGrid
    n_max: int


def carleson_maximal(f: Signal, mode=SignMode.EVEN, c: float = 1.5, grid: LambdaGrid | None = None,
                     n_max: int | None = None, method: str = "auto") -> MaximalResult:
    """Pointwise max over the grid of |modulated_convolution|, with the argmax lambda."""
    return carleson_maximal_batch([f], mode, c, grid, n_max, method)[0]


def carleson_maximal_batch(signals, mode=SignMode.EVEN, c: float = 1.5, grid: LambdaGrid | None = None,
                           n_max: int | None = None, method: str = "auto") -> list[MaximalResult]:
    """carleson_maximal for several signals of one length, sharing kernel transforms."""
    signals = list(signals)
    if not signals:
        return []
    S = signals[0].values.shape[0]
    if any(s.dim != 1 or s.values.shape[0] != S for s in signals):
        raise DomainError("batch signals must be 1D with a common length")
    n_max = default_truncation(signals[0]) if n_max is None else int(n_max)
    for s in signals:
        _check_truncation(s, n_max)
    if grid is None:
        grid = LambdaGrid.for_truncation(n_max, c)
    if len(grid) == 0:
        raise DomainError("empty lambda grid")
    L = S + 2 * n_max
    A = np.stack([s.values for s in signals])
    use_fft = method == "fft" or (method == "auto" and S * (2 * n_max + 1) > (1 << 22))
    if use_fft:
        nf = _fft_len(L)
        FA = np.fft.fft(A, nf, axis=1)
    best = np.full((len(signals), L), -1.0)
    arg = np.zeros((len(signals), L))
    for lam in grid.search_order():
        k = modulated_kernel(lam, n_max, mode, c)
        if use_fft:
            conv = np.fft.ifft(FA * np.fft.fft(k, nf)[None, :], axis=1)[:, :L]
        else:
            conv = np.stack([np.convolve(a, k) for a in A])
        mag = np.abs(conv)
        # values within a few ulps of the running max count as ties (kept at smaller |lambda|)
        upd = mag > best * TIE_RTOL
        best[upd] = mag[upd]
        arg[upd] = lam
    return [MaximalResult(Signal(best[i].astype(complex), (s.origin[0] - n_max,)), arg[i], grid, n_max)
            for i, s in enumerate(signals)]


def impulse_norm(n_max: int) -> dict:
    """l2 norm of the impulse response 1/|x| truncated to 0 < |x| <= n_max."""
    x = np.arange(1, n_max + 1, dtype=np.float64)
    trunc = math.sqrt(2.0 * math.fsum((1.0 / x ** 2).tolist()))
    tail = 2.0 * float(mpmath.psi(1, n_max + 1))
    return {"truncated": trunc, "tail_squared": tail, "completed": math.sqrt(trunc ** 2 + tail),
            "closed_form": math.pi / math.sqrt(3.0)}


# ---------------------------------------------------------------- ergodic averages

@lru_cache(maxsize=64)
def orbit(t: int, c: float):
    n = np.arange(1, int(t) + 1, dtype=np.int64)
    return n, floor_powers(n, c)


def ergodic_average(f: Signal, t: int, c: float = 1.5) -> Signal:
    """A_t f(x) = (1/t) sum_{n<=t} f(x1 - n, x2 - floor(n^c)) on the dilated box."""
    t = int(t)
    if t < 1:
        raise DomainError("ergodic_average needs t >= 1")
    if f.dim != 2:
        raise DomainError("ergodic_average acts on 2D signals")
    n, F = orbit(t, c)
    s1, s2 = f.values.shape
    Ft = int(F[-1])
    out = np.zeros((s1 + t - 1, s2 + Ft - 1), dtype=complex)
    for a, b in zip(n.tolist(), F.tolist()):
        out[a - 1:a - 1 + s1, b - 1:b - 1 + s2] += f.values
    return Signal(out / t, (f.origin[0] + 1, f.origin[1] + 1))


def _embed(sig: Signal, origin, shape):
    out = np.zeros(shape, dtype=complex)
    o = [a - b for a, b in zip(sig.origin, origin)]
    s = sig.values.shape
    out[o[0]:o[0] + s[0], o[1]:o[1] + s[1]] = sig.values
    return out


def dyadic_scales(K: int) -> list[int]:
    return [1 << k for k in range(int(K) + 1)]


def maximal_average(f: Signal, scales=None, c: float = 1.5) -> Signal:
    """Pointwise max over the scales of |A_t f|."""
    scales = dyadic_scales(4) if scales is None else [int(t) for t in scales]
    if not scales:
        raise DomainError("maximal_average needs at least one scale")
    avgs = [ergodic_average(f, t, c) for t in scales]
    lo = tuple(min(a.origin[k] for a in avgs) for k in range(2))
    hi = tuple(max(a.origin[k] + a.values.shape[k] for a in avgs) for k in range(2))
    shape = tuple(h - l for h, l in zip(hi, lo))
    best = np.zeros(shape)
    for a in avgs:
        best = np.maximum(best, np.abs(_embed(a, lo, shape)))
    return Signal(best.astype(complex), lo)


def lacunary_scales(base: float, count: int) -> list[int]:
    """Distinct floor(base^n), n = 0 .. count-1, in increasing order."""
    if not base > 1:
        raise DomainError("lacunary base must exceed 1")
    out = []
    for n in range(int(count)):
        v = base ** n
        fl = math.floor(v)
        if abs(v - round(v)) <= 1e-9 * max(1.0, v):
            with mpmath.workdps(50):
                fl = int(mpmath.floor(mpmath.power(mpmath.mpf(base), n)))
        if not out or fl != out[-1]:
            out.append(fl)
    return out


@dataclass
class SampledFunction:
    """Values on the regular grid x1 = a1 + h1 k, x2 = a2 + h2 l, bilinear in between."""

    values: np.ndarray
    start: tuple = (0.0, 0.0)
    spacing: tuple = (1.0, 1.0)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or min(self.values.shape) < 2:
            raise DomainError("sampled function needs a 2D grid of size >= 2 x 2")

    @property
    def upper(self):
        return tuple(a + h * (s - 1) for a, h, s in zip(self.start, self.spacing, self.values.shape))

    def __call__(self, x1, x2):
        x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
        (a1, a2), (h1, h2) = self.start, self.spacing
        u, v = (x1 - a1) / h1, (x2 - a2) / h2
        n1, n2 = self.values.shape
        tiny = 1e-9
        if np.any((u < -tiny) | (u > n1 - 1 + tiny) | (v < -tiny) | (v > n2 - 1 + tiny)):
            raise DomainError("point outside the sampled domain")
        i = np.clip(np.floor(u).astype(int), 0, n1 - 2)
        k = np.clip(np.floor(v).astype(int), 0, n2 - 2)
        fu, fv = u - i, v - k
        f = self.values
        return ((1 - fu) * (1 - fv) * f[i, k] + fu * (1 - fv) * f[i + 1, k]
                + (1 - fu) * fv * f[i, k + 1] + fu * fv * f[i + 1, k + 1])


def _curve_breaks(x1, x2, t, c, fn):
    # parameters where (x1 - s, x2 - s^c) crosses a grid line
    (a1, a2), (h1, h2) = fn.start, fn.spacing
    b = [0.0, float(t)]
    lo1, hi1 = x1 - t, x1
    for g in np.arange(math.ceil((lo1 - a1) / h1), math.floor((hi1 - a1) / h1) + 1):
        b.append(x1 - (a1 + g * h1))
    lo2, hi2 = x2 - t ** c, x2
    for g in np.arange(math.ceil((lo2 - a2) / h2), math.floor((hi2 - a2) / h2) + 1):
        d = x2 - (a2 + g * h2)
        if d >= 0:
            b.append(d ** (1.0 / c))
    b = np.unique(np.clip(b, 0.0, t))
    # grade toward s = 0 where s^c is not smooth
    grade = [t * 2.0 ** -k for k in range(1, 30)]
    return np.unique(np.concatenate([b, [g for g in grade if g < b[1]]]))


def continuous_average(fn: SampledFunction, t: float, c: float = 1.5, points=None,
                       quad: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """B_t f(x) = (1/t) int_0^t f(x1 - s, x2 - s^c) ds at the given points."""
    if not t > 0:
        raise DomainError("continuous_average needs t > 0")
    if points is None:
        g1 = fn.start[0] + fn.spacing[0] * np.arange(fn.values.shape[0])
        g2 = fn.start[1] + fn.spacing[1] * np.arange(fn.values.shape[1])
        X1, X2 = np.meshgrid(g1, g2, indexing="ij")
        points = np.stack([X1.ravel(), X2.ravel()], axis=1)
    points = np.atleast_2d(np.asarray(points, float))
    x, w = _gauss(quad.nodes)
    out = np.empty(len(points))
    for p, (x1, x2) in enumerate(points):
        if x1 - t < fn.start[0] - 1e-12 or x2 - t ** c < fn.start[1] - 1e-12 \
                or x1 > fn.upper[0] + 1e-12 or x2 > fn.upper[1] + 1e-12:
            raise DomainError(f"averaging curve from ({x1}, {x2}) leaves the sampled domain")
        e = _curve_breaks(x1, x2, t, c, fn)
        mid = 0.5 * (e[1:] + e[:-1])
        half = 0.5 * (e[1:] - e[:-1])
        s = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        ww = (half[:, None] * w[None, :]).ravel()
        out[p] = math.fsum((fn(x1 - s, x2 - s ** c) * ww).tolist()) / t
    return out


# ---------------------------------------------------------------- variation

@dataclass
class VariationResult:
    value: float
    witness: tuple = field(default_factory=tuple)


def chain_sum(seq, chain, r: float) -> float:
    a = np.asarray(seq, dtype=complex)
    return math.fsum(abs(a[j] - a[i]) ** r for i, j in zip(chain[:-1], chain[1:]))


def r_variation(seq, r: float) -> VariationResult:
    """sup over increasing chains of (sum |a_{k+1} - a_k|^r)^{1/r}, with a witness chain."""
    a = np.asarray(seq, dtype=complex).ravel()
    if a.size < 2:
        raise DomainError("r_variation needs at least two terms")
    r = float(r)
    if not r >= 1:
        raise DomainError("r_variation needs r >= 1")
    n = a.size
    best = np.zeros(n)
    parent = np.full(n, -1)
    for i in range(1, n):
        gains = best[:i] + np.abs(a[i] - a[:i]) ** r
        k = int(np.argmax(gains))
        best[i] = gains[k]
        parent[i] = k
    end = int(np.argmax(best))
    if best[end] == 0.0:
        return VariationResult(0.0, (0, 1))
    chain = [end]
    while best[chain[-1]] > 0:
        chain.append(int(parent[chain[-1]]))
    chain = tuple(reversed(chain))
    return VariationResult(chain_sum(a, chain, r) ** (1.0 / r), chain)
