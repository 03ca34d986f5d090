"""Experiment orchestration: decay regression, estimate sweeps, the
Sobolev-type sup check and report emission (JSON, CSV, SVG).

Every sweep is a pure function of an ExperimentConfig.  Random sampling
draws from numpy generators seeded by (seed, sweep id, scale), so serial
runs with the same config produce byte-identical reports.
"""
from __future__ import annotations

import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial

import mpmath
import numpy as np

from . import __version__
from .core_math import DomainError, NumericError, ParamSet, frac_product, phase_of_turns, centered_frac, floor_powers
from .expsum import exp_sum
from .multiplier import (
    ErgodicBox,
    H_j_detail,
    L_t_detail,
    MajorBox,
    MultiplierGrid,
    X_j_threshold,
    m_j,
)
from .quadrature import QuadratureSpec
from .ttstar import (
    GENERATORS,
    KernelEnvelope,
    continuous_choice,
    discrete_choice,
    kernel_rows_csv,
    kernel_support_radius,
    r_range,
    ttstar_envelope_continuous,
    ttstar_envelope_discrete,
    ttstar_kernel_continuous,
    ttstar_kernel_discrete,
)

SWEEPS = ("minor-box", "error-term", "kt-difference", "ttstar", "ttstar-continuous")
_SWEEP_IDS = {name: k for k, name in enumerate(SWEEPS)}
# descriptive labels carried in the report's reference field
LABELS = {
    "minor-box": "off-box decay of the discrete multiplier m_j",
    "error-term": "decay of the error term E_j = m_j - H_j",
    "kt-difference": "proximity of the discrete and continuous ergodic multipliers k_t, L_t",
    "ttstar": "far-zone decay of the discrete TT* kernel",
    "ttstar-continuous": "far-zone decay of the continuous TT* kernel",
}
# implied constant placed on far-zone inner radii (see ttstar sweeps)
FAR_ZONE_CONSTANT = 2.0 ** -3
CONTINUOUS_DELTA_FRACTION = 1.0 / 200


class RefinementError(NumericError):
    """A derivative estimate did not settle under grid halving."""


# ---------------------------------------------------------------- regression

@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r_squared,
                "window": list(self.window)}


def decay_fit(points) -> DecayFit:
    """Ordinary least squares of log2(value) on the scale index."""
    pts = sorted((int(s), float(v)) for s, v in points)
    if len(pts) < 4:
        raise DomainError("decay_fit needs at least 4 points")
    if any(not v > 0 or not math.isfinite(v) for _, v in pts):
        raise DomainError("decay_fit needs positive finite values")
    x = np.array([s for s, _ in pts], float)
    y = np.log2([v for _, v in pts])
    window = (int(x[0]), int(x[-1]))
    if np.all(y == y[0]):
        return DecayFit(0.0, float(y[0]), 1.0, window)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym))) / sxx
    intercept = float(ym - slope * xm)
    res = float(np.sum((y - (intercept + slope * x)) ** 2))
    tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if tot == 0 else min(1.0, max(0.0, 1.0 - res / tot))
    return DecayFit(slope, intercept, r2, window)


# ---------------------------------------------------------------- configuration

@dataclass(frozen=True)
class GridSpec:
    """Sampling of one scale: geometric rays that straddle the box thresholds
    plus uniform random points.

    The signed first-frequency axis holds 0, -1/2, the mirrored ray (without
    its top point 1/2) and the two threshold straddlers on each side; the
    second axis holds 0, the full ray up to 1/2 and two straddlers.  The
    default 29/60 ray intervals give a 64 x 64 grid.  ``refined`` doubles
    the ray intervals, which keeps every old node.
    """

    xi_intervals: int = 29
    lambda_intervals: int = 60
    random_points: int = 64
    ray_floor: float = 1.0 / 16
    straddle: float = 2.0 ** -20

    @classmethod
    def from_size(cls, size: int, random_points: int = 64) -> "GridSpec":
        size = int(size)
        if size < 8 or size % 2:
            raise DomainError("grid size must be an even integer >= 8")
        return cls((size - 6) // 2, size - 4, random_points)

    @property
    def shape(self):
        return (2 * self.xi_intervals + 6, self.lambda_intervals + 4)

    def refined(self) -> "GridSpec":
        return replace(self, xi_intervals=2 * self.xi_intervals, lambda_intervals=2 * self.lambda_intervals)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["shape"] = list(self.shape)
        return d

    @classmethod
    def from_dict(cls, d) -> "GridSpec":
        d = {k: v for k, v in d.items() if k != "shape"}
        return cls(**d)


DEFAULT_WINDOWS = {
    "minor-box": (8, 16, 1),
    "error-term": (8, 14, 1),
    "kt-difference": (8, 18, 1),
    "ttstar": (8, 14, 2),
    "ttstar-continuous": (4, 8, 1),
}


@dataclass(frozen=True)
class ExperimentConfig:
    params: ParamSet = ParamSet()
    windows: dict = field(default_factory=lambda: dict(DEFAULT_WINDOWS))
    grid: GridSpec = GridSpec()
    seed: int = 0
    threads: int = 1
    quad: QuadratureSpec = QuadratureSpec()
    ttstar_pairs: int = 1000
    ttstar_instances: int = 5
    continuous_scale: int = 10
    continuous_pairs: int = 200
    continuous_instances: int = 3
    record_wall_time: bool = False
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if int(self.threads) < 1:
            raise DomainError("threads must be >= 1")
        for name, w in self.windows.items():
            if name not in SWEEPS:
                raise DomainError(f"unknown sweep {name!r}")
            lo, hi, step = (list(w) + [1])[:3]
            if hi < lo or step < 1:
                raise DomainError(f"bad window for {name}: {w}")

    def scales(self, name):
        lo, hi, step = (list(self.windows.get(name, DEFAULT_WINDOWS[name])) + [1])[:3]
        return list(range(int(lo), int(hi) + 1, int(step)))

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "windows": {k: list(v) for k, v in sorted(self.windows.items())},
            "grid": self.grid.to_dict(),
            "seed": int(self.seed),
            "threads": int(self.threads),
            "quad": self.quad.to_dict(),
            "ttstar_pairs": self.ttstar_pairs,
            "ttstar_instances": self.ttstar_instances,
            "continuous_scale": self.continuous_scale,
            "continuous_pairs": self.continuous_pairs,
            "continuous_instances": self.continuous_instances,
            "record_wall_time": self.record_wall_time,
            "outputs": dict(sorted(self.outputs.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"params", "windows", "grid", "seed", "threads", "quad", "ttstar_pairs", "ttstar_instances",
                 "continuous_scale", "continuous_pairs", "continuous_instances", "record_wall_time", "outputs"}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown config key(s): {sorted(unknown)}")
        kw = dict(d)
        if "params" in kw:
            kw["params"] = ParamSet.from_dict(kw["params"])
        if "grid" in kw:
            kw["grid"] = GridSpec.from_dict(kw["grid"])
        if "quad" in kw:
            kw["quad"] = QuadratureSpec(**kw["quad"])
        if "windows" in kw:
            w = dict(DEFAULT_WINDOWS)
            w.update({k: tuple(v) for k, v in kw["windows"].items()})
            kw["windows"] = w
        return cls(**kw)


def _rng(config, name, scale, extra=0):
    return np.random.default_rng([int(config.seed), _SWEEP_IDS[name], int(scale) + 1000, int(extra)])


# ---------------------------------------------------------------- sweep results

@dataclass
class SweepResult:
    name: str
    scale_index: list
    max_value: list
    fit: DecayFit | None
    passed: bool
    criterion: str
    diagnostics: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def label(self):
        return LABELS.get(self.name, self.name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "paperRef": self.label,
            "scaleIndex": list(self.scale_index),
            "maxValue": list(self.max_value),
            "fit": self.fit.to_dict() if self.fit else None,
            "pass": bool(self.passed),
            "criterion": self.criterion,
            "diagnostics": self.diagnostics,
        }


def _map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=int(threads)) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- grids

def ray(lo: float, hi: float, intervals: int) -> np.ndarray:
    k = np.arange(intervals + 1)
    return lo * (hi / lo) ** (k / intervals)


def signed_axis(threshold, lo, spec: GridSpec):
    pos = ray(lo, 0.5, spec.xi_intervals)[:-1]
    st = threshold * np.array([1 - spec.straddle, 1 + spec.straddle])
    return np.unique(np.concatenate([[0.0, -0.5], pos, -pos, st, -st]))


def positive_axis(threshold, spec: GridSpec):
    lo = threshold * spec.ray_floor
    st = threshold * np.array([1 - spec.straddle, 1 + spec.straddle])
    return np.unique(np.concatenate([[0.0], ray(lo, 0.5, spec.lambda_intervals), st]))


def multiplier_points(j: int, config: ExperimentConfig, name: str):
    """Grid nodes (half plane lambda >= 0) plus seeded uniform points."""
    p, spec = config.params, config.grid
    box = MajorBox(j, p)
    ridge = box.lambda_half_width * 2.0 ** ((p.c - 1) * j)
    xi_axis = signed_axis(box.xi_half_width, min(ridge, box.xi_half_width) * spec.ray_floor, spec)
    lam_axis = positive_axis(box.lambda_half_width, spec)
    X, L = np.meshgrid(xi_axis, lam_axis, indexing="ij")
    rnd = _rng(config, name, j).uniform(-0.5, 0.5, (spec.random_points, 2))
    xi = np.concatenate([X.ravel(), rnd[:, 0]])
    lam = np.concatenate([L.ravel(), rnd[:, 1]])
    return xi, lam, box.contains(xi, lam)


def ergodic_points(t: int, config: ExperimentConfig, name: str, k: int):
    p, spec = config.params, config.grid
    box = ErgodicBox(t, p)
    ridge = box.xi2_half_width * float(t) ** (p.c - 1)
    xi1_axis = signed_axis(box.xi1_half_width, min(ridge, box.xi1_half_width) * spec.ray_floor, spec)
    xi2_axis = positive_axis(box.xi2_half_width, spec)
    rnd = _rng(config, name, k).uniform(-0.5, 0.5, (spec.random_points, 2))
    return xi1_axis, xi2_axis, rnd, box


# ---------------------------------------------------------------- multiplier sweeps

def _minor_scale(j, config):
    xi, lam, inb = multiplier_points(j, config, "minor-box")
    c = config.params.c
    out = {}
    for mode in (0, 1):
        vals = np.array([m_j(j, a, b, mode, c) for a, b in zip(xi, lam)])
        out[mode] = MultiplierGrid(j, xi, lam, vals, inb, config.grid.to_dict())
    return out


def sweep_minor_box(config: ExperimentConfig) -> SweepResult:
    """Per-scale maximum of |m_j| over off-box sample points, both sign modes."""
    t0 = time.perf_counter()
    js = config.scales("minor-box")
    grids = _map(partial(_minor_scale, config=config), js, config.threads)
    maxima = [max(g[0].off_box_max(), g[1].off_box_max()) for g in grids]
    fit = decay_fit(zip(js, maxima))
    target = -config.params.eps / 8
    passed = fit.slope <= target and fit.r_squared >= 0.7
    tables = {f"minor-box-mode{m}": "".join(_strip_header(g[m].to_csv(), k) for k, g in enumerate(grids))
              for m in (0, 1)}
    diag = {"gridShape": list(config.grid.shape), "randomPoints": config.grid.random_points,
            "pointsPerScale": int(grids[0][0].xi.size) if grids else 0,
            "argmax": [_argmax_info(g) for g in grids]}
    return SweepResult("minor-box", js, maxima, fit, passed,
                       f"slope <= {target:g} and r2 >= 0.7", diag, tables, time.perf_counter() - t0)


def _argmax_info(g):
    best = None
    for mode in (0, 1):
        a = np.where(g[mode].in_box, -1.0, np.abs(g[mode].values))
        k = int(np.argmax(a))
        if best is None or a[k] > best[0]:
            best = (float(a[k]), mode, float(g[mode].xi[k]), float(g[mode].lam[k]))
    return {"mode": best[1], "xi": best[2], "lambda": best[3]}


def _strip_header(text, k):
    return text if k == 0 else text.split("\n", 1)[1]


def _error_scale(j, config):
    xi, lam, inb = multiplier_points(j, config, "error-term")
    c, quad = config.params.c, config.quad
    out, worst = {}, 0.0
    for mode in (0, 1):
        vals = np.empty(xi.size, complex)
        for k, (a, b) in enumerate(zip(xi, lam)):
            h = H_j_detail(j, a, b, mode, c, quad)
            worst = max(worst, h.relative_discrepancy)
            vals[k] = m_j(j, a, b, mode, c) - h.value
        out[mode] = MultiplierGrid(j, xi, lam, vals, inb, config.grid.to_dict())
    return out, worst


def sweep_error_term(config: ExperimentConfig) -> SweepResult:
    """Per-scale maximum of |E_j| over the whole sampled square, both modes."""
    t0 = time.perf_counter()
    js = config.scales("error-term")
    res = _map(partial(_error_scale, config=config), js, config.threads)
    maxima = [max(g[0].max_abs(), g[1].max_abs()) for g, _ in res]
    worst = max(w for _, w in res)
    fit = decay_fit(zip(js, maxima))
    target = -config.params.eps / 8
    passed = fit.slope <= target and worst <= config.quad.tol
    tables = {f"error-term-mode{m}": "".join(_strip_header(g[m].to_csv(), k) for k, (g, _) in enumerate(res))
              for m in (0, 1)}
    diag = {"gridShape": list(config.grid.shape), "quadratureMaxRelativeDiscrepancy": worst,
            "quadratureTolerance": config.quad.tol}
    return SweepResult("error-term", js, maxima, fit, passed,
                       f"slope <= {target:g} and quadrature self-check <= {config.quad.tol:g}", diag, tables,
                       time.perf_counter() - t0)


# ---------------------------------------------------------------- ergodic sweep

def k_t_grid(t: int, xi1_axis, xi2_axis, c: float, block: int = 1 << 15) -> np.ndarray:
    """k_t on the product grid, accumulated block by block with matrix products."""
    out = np.zeros((len(xi1_axis), len(xi2_axis)), complex)
    for lo in range(1, t + 1, block):
        n = np.arange(lo, min(t, lo + block - 1) + 1, dtype=np.int64)
        F = floor_powers(n, c)
        A = phase_of_turns(-frac_product(np.asarray(xi1_axis)[:, None], n[None, :]))
        B = phase_of_turns(-frac_product(np.asarray(xi2_axis)[:, None], F[None, :]))
        out += A @ B.T
    return out / t


def _kt_scale(k, config):
    t = 2 ** k
    c, quad = config.params.c, config.quad
    a1, a2, rnd, box = ergodic_points(t, config, "kt-difference", k)
    K = k_t_grid(t, a1, a2, c)
    X1, X2 = np.meshgrid(a1, a2, indexing="ij")
    xi1 = np.concatenate([X1.ravel(), rnd[:, 0]])
    xi2 = np.concatenate([X2.ravel(), rnd[:, 1]])
    kv = np.concatenate([K.ravel(), [exp_sum(t, -a, -b, c) / t for a, b in rnd]])
    worst = 0.0
    diff = np.empty(xi1.size, complex)
    for i, (a, b) in enumerate(zip(xi1, xi2)):
        L = L_t_detail(t, a, b, c, quad)
        worst = max(worst, L.relative_discrepancy)
        diff[i] = kv[i] - L.value
    return MultiplierGrid(t, xi1, xi2, diff, box.contains(xi1, xi2), config.grid.to_dict()), worst


def sweep_kt_difference(config: ExperimentConfig) -> SweepResult:
    """Per-t maximum of |k_t - L_t| over the sampled square at t = 2^k."""
    t0 = time.perf_counter()
    ks = config.scales("kt-difference")
    res = _map(partial(_kt_scale, config=config), ks, config.threads)
    maxima = [g.max_abs() for g, _ in res]
    worst = max(w for _, w in res)
    fit = decay_fit(zip(ks, maxima))
    target = -config.params.eps / 8
    passed = fit.slope <= target
    tables = {"kt-difference": "".join(_strip_header(g.to_csv(), i) for i, (g, _) in enumerate(res))}
    diag = {"scale": "t = 2^k", "gridShape": list(config.grid.shape),
            "quadratureMaxRelativeDiscrepancy": worst}
    return SweepResult("kt-difference", ks, maxima, fit, passed, f"slope <= {target:g}", diag, tables,
                       time.perf_counter() - t0)


# ---------------------------------------------------------------- TT* sweeps

def _ttstar_scale(j, config, kind):
    p, c = config.params, config.params.c
    R = r_range(j, p)
    rad = kernel_support_radius(j)
    far_inner = FAR_ZONE_CONSTANT * 2.0 ** ((1 - p.delta2) * j)
    literal_inner = 2.0 ** ((1 - p.delta2) * j)
    per_r = max(1, math.ceil(config.ttstar_pairs / len(R)))
    rng = _rng(config, "ttstar", j, GENERATORS.index(kind))
    samples = []
    for inst in range(config.ttstar_instances):
        tau = "-" if inst % 2 == 0 else "+"
        for r in R:
            ch = discrete_choice(kind, j, r, tau, c, rng)
            lo, hi = ch.window
            for _ in range(per_r):
                d = int(rng.integers(0, rad + 1))
                x = int(rng.integers(lo, hi - d + 1))
                v = abs(ttstar_kernel_discrete(x, x + d, j, r, tau, ch, c))
                samples.append((j, r, x, x + d, v))
    far = max((s[4] for s in samples if s[3] - s[2] >= far_inner), default=0.0)
    literal = max((s[4] for s in samples if s[3] - s[2] >= literal_inner), default=0.0)
    return samples, far, literal


def _emp_constants(samples_by_scale, envelope_of):
    out = []
    for j, samples in samples_by_scale:
        env = envelope_of(j)
        out.append(max(s[4] / env(s[3] - s[2]) for s in samples))
    return out


def sweep_ttstar(config: ExperimentConfig) -> list[SweepResult]:
    """Far-zone maxima of the discrete TT* kernel for each choice generator.

    The far zone starts at 2^{-3} 2^{(1-delta2) j}: the kernel vanishes once
    |x - y| exceeds 3 2^{j-3}, so the zone without a constant holds no
    support at these scales (its maxima are recorded as well).
    """
    p = config.params
    js = config.scales("ttstar")
    results = []
    for kind in GENERATORS:
        t0 = time.perf_counter()
        res = _map(partial(_ttstar_scale, config=config, kind=kind), js, config.threads)
        far = [f for _, f, _ in res]
        fit = decay_fit(zip(js, far)) if all(f > 0 for f in far) else None
        rho = (-fit.slope - 1.0) if fit else float("nan")
        rho_env = max(rho, 0.0) if fit else 0.0

        def envelope(j):
            e = ttstar_envelope_discrete(j, p, rho_env)
            return e.with_near_radius(FAR_ZONE_CONSTANT * e.near_radius)

        cemp = _emp_constants([(j, s) for j, (s, _, _) in zip(js, res)], envelope)
        drift = max(cemp) / min(cemp)
        rows = []
        for j, (s, _, _) in zip(js, res):
            env = envelope(j)
            rows.extend((a, r, x, y, v, env(y - x), v / env(y - x)) for a, r, x, y, v in s)
        diag = {"generator": kind, "rho4": rho, "empiricalConstant": cemp, "constantDrift": drift,
                "farZoneInnerRadius": f"{FAR_ZONE_CONSTANT:g} * 2^((1-delta2) j)",
                "literalFarZoneMax": [lit for _, _, lit in res],
                "pairsPerScale": len(res[0][0]) if res else 0,
                "resonantFlag": "resonant choice is a stress case, not a proven worst case" if kind == "resonant"
                else None}
        results.append(SweepResult(f"ttstar-{kind}", js, far, fit, bool(fit) and rho > 0 and drift <= 2.0,
                                   "rho4 = -slope - 1 > 0 and constant drift <= 2", diag,
                                   {f"ttstar-{kind}": kernel_rows_csv(rows)}, time.perf_counter() - t0))
    return results


def _continuous_ell(ell, config, kind):
    c = config.params.c
    j = config.continuous_scale
    delta = c * CONTINUOUS_DELTA_FRACTION
    rad = kernel_support_radius(j)
    far_inner = FAR_ZONE_CONSTANT * 2.0 ** (j - ell * delta)
    rng = _rng(config, "ttstar-continuous", ell, GENERATORS.index(kind))
    samples = []
    for inst in range(config.continuous_instances):
        tau = "-" if inst % 2 == 0 else "+"
        mode = inst % 2
        ch = continuous_choice(kind, ell, j, tau, c, rng)
        lo, hi = ch.window
        for _ in range(config.continuous_pairs):
            d = int(rng.integers(0, rad + 1))
            x = int(rng.integers(lo, hi - d + 1))
            v = abs(ttstar_kernel_continuous(x, x + d, ell, mode, tau, ch, c, config.quad))
            samples.append((j, ell, x, x + d, v))
    far = max((s[4] for s in samples if s[3] - s[2] >= far_inner), default=0.0)
    return samples, far * 2.0 ** j


def sweep_ttstar_continuous(config: ExperimentConfig) -> SweepResult:
    """Far-zone maxima of 2^j |K| for the continuous kernel, fitted against ell."""
    t0 = time.perf_counter()
    c, j = config.params.c, config.continuous_scale
    delta = c * CONTINUOUS_DELTA_FRACTION
    ells = config.scales("ttstar-continuous")
    per_kind, rows, diag = {}, [], {"scale": j, "delta": delta}
    for kind in GENERATORS:
        per_kind[kind] = _map(partial(_continuous_ell, config=config, kind=kind), ells, config.threads)
    # the reported series is the maximum over generators
    far = [max(per_kind[k][i][1] for k in GENERATORS) for i in range(len(ells))]
    fit = decay_fit(zip(ells, far)) if all(f > 0 for f in far) else None
    rho = -fit.slope if fit else float("nan")
    for kind in GENERATORS:
        f = [v for _, v in per_kind[kind]]
        kfit = decay_fit(zip(ells, f)) if all(v > 0 for v in f) else None
        diag[f"rho_{kind}"] = -kfit.slope if kfit else None
        for ell, (s, _) in zip(ells, per_kind[kind]):
            env = ttstar_envelope_continuous(j, ell, delta, max(rho, 0.0) if fit else 0.0)
            env = env.with_near_radius(FAR_ZONE_CONSTANT * env.near_radius)
            rows.extend((jj, e, x, y, v, env(y - x), v / env(y - x)) for jj, e, x, y, v in s)
    diag["rho"] = rho
    passed = bool(fit) and rho > 0 and all((diag[f"rho_{k}"] or 0) > 0 for k in GENERATORS)
    return SweepResult("ttstar-continuous", ells, far, fit, passed,
                       "rho = -slope > 0 for every generator", diag,
                       {"ttstar-continuous": kernel_rows_csv(rows)}, time.perf_counter() - t0)


def run_sweeps(config: ExperimentConfig, names=SWEEPS) -> list[SweepResult]:
    out = []
    for name in names:
        if name == "minor-box":
            out.append(sweep_minor_box(config))
        elif name == "error-term":
            out.append(sweep_error_term(config))
        elif name == "kt-difference":
            out.append(sweep_kt_difference(config))
        elif name == "ttstar":
            out.extend(sweep_ttstar(config))
        elif name == "ttstar-continuous":
            out.append(sweep_ttstar_continuous(config))
        else:
            raise DomainError(f"unknown sweep {name!r}; choose from {', '.join(SWEEPS)}")
    return out


# ---------------------------------------------------------------- Sobolev-type check

@dataclass(frozen=True)
class SobolevRecord:
    lhs: float
    A: float
    a: float
    rhs: float
    ratio: float
    t_points: int

    def to_dict(self):
        return asdict(self)


def _l2(v, weights):
    v = np.abs(v) ** 2
    return math.sqrt(math.fsum((v * weights).tolist()))


def _sobolev_terms(ts, F, weights, length):
    lhs = _l2(np.max(np.abs(F), axis=0), weights)
    A = max(_l2(row, weights) for row in F)
    D = np.gradient(F, ts, axis=0, edge_order=2)
    a = max(_l2(row, weights) for row in D)
    return lhs, A, a


def sobolev_check(family, interval, t_points: int = 9, weights=None, max_halvings: int = 6,
                  stability: float = 0.05) -> SobolevRecord:
    """lhs = ||sup_t |F|||_2, A = sup_t ||F||_2, a = sup_t ||dF/dt||_2, rhs = A + (A a |I|)^{1/2}.

    ``family`` is either a callable mapping an array of t values to an
    array of shape (len(t), len(X)), or an already sampled array of that
    shape on the uniform grid over ``interval``.  The central-difference
    estimate of a must change by at most ``stability`` (relative) when the
    step is halved.
    """
    lo, hi = map(float, interval)
    if not hi > lo:
        raise DomainError("sobolev_check needs a nondegenerate interval")
    length = hi - lo
    if callable(family):
        cache = {}

        def sample(n):
            ts = np.linspace(lo, hi, n)
            new = [t for t in ts if t not in cache]
            if new:
                vals = np.asarray(family(np.array(new)))
                for t, row in zip(new, vals):
                    cache[t] = row
            return ts, np.array([cache[t] for t in ts])

        n = int(t_points)
        ts, F = sample(n)
        w = np.ones(F.shape[1]) if weights is None else np.asarray(weights, float)
        prev = _sobolev_terms(ts, F, w, length)
        for _ in range(max_halvings):
            n = 2 * n - 1
            ts, F = sample(n)
            cur = _sobolev_terms(ts, F, w, length)
            if abs(cur[2] - prev[2]) <= stability * max(cur[2], 1e-300) or cur[2] == prev[2]:
                break
            prev = cur
        else:
            raise RefinementError("derivative estimate did not settle under halving")
        lhs, A, a = cur
        npts = n
    else:
        F = np.asarray(family)
        if F.ndim == 1:
            F = F[:, None]
        npts = F.shape[0]
        if npts < 5 or npts % 2 == 0:
            raise DomainError("sampled family needs an odd number >= 5 of t points")
        ts = np.linspace(lo, hi, npts)
        w = np.ones(F.shape[1]) if weights is None else np.asarray(weights, float)
        lhs, A, a = _sobolev_terms(ts, F, w, length)
        _, _, a_coarse = _sobolev_terms(ts[::2], F[::2], w, length)
        if abs(a - a_coarse) > stability * max(a, 1e-300) and a != a_coarse:
            raise RefinementError(f"derivative estimate unstable under halving ({a_coarse:.4g} -> {a:.4g})")
    rhs = A + math.sqrt(A * a * length)
    ratio = lhs / rhs if rhs > 0 else 1.0
    return SobolevRecord(lhs, A, a, rhs, ratio, npts)


def error_family(j: int, mode: int = 0, params: ParamSet = ParamSet(), seed: int = 0, size: int = 32,
                 quad: QuadratureSpec = QuadratureSpec()):
    """t -> (f^ E_j(., t))^v on Z_size, for a seeded +-1 signal f."""
    f = np.random.default_rng([int(seed), 99, int(j)]).choice([-1.0, 1.0], size)
    xi = np.arange(size) / size - 0.5
    x = np.arange(size)
    fhat = np.exp(-2j * np.pi * np.outer(xi, x)) @ f
    inv = np.exp(2j * np.pi * np.outer(x, xi)) / size

    def family(ts):
        rows = []
        for t in ts:
            E = np.array([m_j(j, a, t, mode, params.c) - H_j_detail(j, a, t, mode, params.c, quad).value
                          for a in xi])
            rows.append(inv @ (fhat * E))
        return np.array(rows)

    return family


def sobolev_error_family(j: int, mode: int = 0, params: ParamSet = ParamSet(), seed: int = 0,
                         size: int = 32, quad: QuadratureSpec = QuadratureSpec()) -> SobolevRecord:
    thr = X_j_threshold(j, params)
    return sobolev_check(error_family(j, mode, params, seed, size, quad), (-thr, thr))


# ---------------------------------------------------------------- reports

def versions() -> dict:
    return {"carleson_lab": __version__, "numpy": np.__version__, "mpmath": mpmath.__version__,
            "python": platform.python_version()}


def report_dict(results, config: ExperimentConfig) -> dict:
    timings = {"sweeps": [r.name for r in results],
               "workItems": {r.name: len(r.scale_index) for r in results}}
    if config.record_wall_time:
        timings["wallSeconds"] = {r.name: round(r.seconds, 3) for r in results}
    else:
        timings["wallSeconds"] = "not recorded (deterministic report); pass --wall-time to include"
    return {"config": config.to_dict(), "sweeps": [r.to_dict() for r in results],
            "versions": versions(), "timings": timings}


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"


def summary_csv(report: dict) -> str:
    lines = ["name,scale_index,max_value,slope,intercept,r2,pass"]
    for s in report["sweeps"]:
        fit = s["fit"] or {}
        for k, v in zip(s["scaleIndex"], s["maxValue"]):
            lines.append(",".join([s["name"], str(k), f"{v:.17g}", f"{fit.get('slope', float('nan')):.17g}",
                                   f"{fit.get('intercept', float('nan')):.17g}",
                                   f"{fit.get('r2', float('nan')):.17g}", "1" if s["pass"] else "0"]))
    return "\n".join(lines) + "\n"


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def render_svg(report: dict, width: int = 640, height: int = 420) -> str:
    """One polyline per sweep: scale index (log2 of the scale) against log2 max value."""
    series = [(s["name"], s["scaleIndex"], [math.log2(v) if v > 0 else None for v in s["maxValue"]])
              for s in report["sweeps"]]
    xs = [x for _, xx, _ in series for x in xx]
    ys = [y for _, _, yy in series for y in yy if y is not None]
    if not xs or not ys:
        xs, ys = [0, 1], [0, 1]
    x0, x1 = min(xs), max(xs) if max(xs) > min(xs) else min(xs) + 1
    y0, y1 = min(ys), max(ys) if max(ys) > min(ys) else min(ys) + 1
    m = 50

    def px(x):
        return m + (x - x0) / (x1 - x0) * (width - 2 * m)

    def py(y):
        return height - m - (y - y0) / (y1 - y0) * (height - 2 * m)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="12">log2 scale</text>',
           f'<text x="14" y="{height / 2:.1f}" font-size="12" transform="rotate(-90 14 {height / 2:.1f})" '
           f'text-anchor="middle">log2 max value</text>']
    for k, (name, xx, yy) in enumerate(series):
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xx, yy) if y is not None)
        col = _COLORS[k % len(_COLORS)]
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{pts}">'
                   f'<title>{name}</title></polyline>')
        out.append(f'<text x="{width - m + 4}" y="{m + 14 * k}" font-size="10" fill="{col}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_report(results, config: ExperimentConfig, json_path=None, csv_dir=None, svg_path=None,
                summary_path=None) -> dict:
    """Write the JSON report, per-sweep raw CSV tables, a summary CSV and the SVG plot."""
    report = report_dict(results, config)
    if json_path:
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps_report(report))
    if csv_dir:
        os.makedirs(csv_dir, exist_ok=True)
        for r in results:
            for name, text in sorted(r.tables.items()):
                with open(os.path.join(csv_dir, f"{name}.csv"), "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
    if summary_path:
        with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(summary_csv(report))
    if svg_path:
        with open(svg_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_svg(report))
    return report
