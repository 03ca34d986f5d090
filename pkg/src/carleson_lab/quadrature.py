"""Panel quadrature for oscillatory integrals  int amp(t) e(phase(t)) dt.

Two panel types are used.  Gauss-Legendre panels follow an oscillation
budget: every panel carries at most ``cycles_per_panel`` turns of the
phase.  When a coarse panel carries many turns, has no stationary point
nearby and its phase derivative varies by at most a factor of two, it is
instead handled by Levin collocation (the non-oscillatory solution of
p' + 2 pi i phase' p = amp on Chebyshev-Lobatto points), whose cost does
not grow with frequency.  Panels that fit neither rule are bisected
(at the stationary point when one is inside).

Every result can be self-checked by halving all panels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core_math import DomainError, NumericError, TWO_PI, centered_frac, frac_product


@dataclass(frozen=True)
class QuadratureSpec:
    """Panel rule.  Panels are at most 1/coarse_panels of the support and carry
    at most ``cycles_per_panel`` turns of the phase, i.e. length <= 1/(8 D)
    for local phase-derivative bound D at the default 1/8."""

    nodes: int = 16
    cycles_per_panel: float = 0.125
    coarse_panels: int = 64
    tol: float = 1e-9
    levin: bool = True
    levin_min_cycles: float = 2.0
    max_depth: int = 64

    def __post_init__(self):
        if self.nodes < 2 or self.coarse_panels < 1 or not self.cycles_per_panel > 0 or not self.tol > 0:
            raise DomainError("invalid quadrature rule")

    def to_dict(self) -> dict:
        return dict(nodes=self.nodes, cycles_per_panel=self.cycles_per_panel,
                    coarse_panels=self.coarse_panels, tol=self.tol, levin=self.levin,
                    levin_min_cycles=self.levin_min_cycles)

    def gauss_only(self) -> "QuadratureSpec":
        return QuadratureSpec(self.nodes, self.cycles_per_panel, self.coarse_panels, self.tol, False,
                              self.levin_min_cycles, self.max_depth)


@lru_cache(maxsize=8)
def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@lru_cache(maxsize=8)
def _cheb(n):
    # Chebyshev-Lobatto points (descending) and differentiation matrix
    k = np.arange(n)
    x = np.cos(np.pi * k / (n - 1))
    cw = np.where((k == 0) | (k == n - 1), 2.0, 1.0) * (-1.0) ** k
    dx = x[:, None] - x[None, :] + np.eye(n)
    D = np.outer(cw, 1.0 / cw) / dx
    D -= np.diag(D.sum(axis=1))
    return x, D


class PowerPhase:
    """phase(t) = alpha t^c + beta t for t >= 0; phase' is monotone."""

    def __init__(self, alpha: float, beta: float, c: float):
        self.alpha, self.beta, self.c = float(alpha), float(beta), float(c)

    def __call__(self, t):
        return self.alpha * np.power(t, self.c) + self.beta * t

    def turns(self, t):
        # phase reduced mod 1 with the large power term split off first
        v = np.power(t, self.c)
        fl = np.floor(v)
        a = self.alpha
        return centered_frac(frac_product(a, fl.astype(np.int64)) + a * (v - fl) + centered_frac(self.beta * t))

    def deriv(self, t):
        return self.alpha * self.c * np.power(t, self.c - 1) + self.beta * np.ones_like(t)

    def stationary_point(self):
        if self.alpha == 0:
            return None
        r = -self.beta / (self.alpha * self.c)
        if r <= 0:
            return None
        return r ** (1.0 / (self.c - 1))

    monotone = True


class CallablePhase:
    """Generic phase given by callables; only Gauss-Legendre panels are used."""

    monotone = False

    def __init__(self, phase, deriv, probes: int = 9):
        self._phase, self._deriv, self.probes = phase, deriv, probes

    def __call__(self, t):
        return self._phase(t)

    def turns(self, t):
        return centered_frac(self._phase(t))

    def deriv(self, t):
        return self._deriv(t)

    def stationary_point(self):
        return None


def _panel_max_deriv(phase, a, b):
    if phase.monotone:
        return max(abs(float(phase.deriv(np.array(a)))), abs(float(phase.deriv(np.array(b)))))
    t = np.linspace(a, b, phase.probes)
    d = np.abs(phase.deriv(t))
    # probe spacing bound: allow 25% headroom between probes
    return 1.25 * float(d.max())


def _plan(phase, edges, spec: QuadratureSpec):
    """Split coarse panels into ('gl', a, b, nsub) and ('levin', a, b) pieces."""
    plan = []
    cpp = spec.cycles_per_panel
    stack = [(float(a), float(b), 0) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    stack.reverse()
    while stack:
        a, b, depth = stack.pop()
        dmax = _panel_max_deriv(phase, a, b)
        cycles = dmax * (b - a)
        nsub = max(1, math.ceil(cycles / cpp))
        if not (spec.levin and phase.monotone) or cycles <= spec.levin_min_cycles or depth >= spec.max_depth:
            plan.append(("gl", a, b, nsub))
            continue
        da = float(phase.deriv(np.array(a)))
        db = float(phase.deriv(np.array(b)))
        if da * db > 0 and min(abs(da), abs(db)) >= 0.5 * max(abs(da), abs(db)):
            plan.append(("levin", a, b, 1))
            continue
        s = phase.stationary_point()
        cut = s if (s is not None and a + 1e-9 * (b - a) < s < b - 1e-9 * (b - a)) else 0.5 * (a + b)
        stack.append((cut, b, depth + 1))
        stack.append((a, cut, depth + 1))
    return plan


def _gl_pieces(plan, spec, refine):
    x, w = _gauss(spec.nodes)
    nodes, weights = [], []
    for kind, a, b, nsub in plan:
        if kind != "gl":
            continue
        m = nsub << refine
        e = np.linspace(a, b, m + 1)
        mid = 0.5 * (e[1:] + e[:-1])
        half = 0.5 * (e[1:] - e[:-1])
        nodes.append((mid[:, None] + half[:, None] * x[None, :]).ravel())
        weights.append((half[:, None] * w[None, :]).ravel())
    if not nodes:
        return np.empty(0), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights)


def _levin_sum(amp, phase, panels, spec):
    if not panels:
        return 0.0 + 0.0j
    x, D = _cheb(spec.nodes)
    a = np.array([p[0] for p in panels])
    b = np.array([p[1] for p in panels])
    half = 0.5 * (b - a)
    t = 0.5 * (a + b)[:, None] + half[:, None] * x[None, :]
    f = amp(t.ravel()).reshape(t.shape) * half[:, None]
    omega = TWO_PI * phase.deriv(t.ravel()).reshape(t.shape) * half[:, None]
    A = np.broadcast_to(D, (len(panels),) + D.shape).astype(complex)
    idx = np.arange(spec.nodes)
    A[:, idx, idx] += 1j * omega
    p = np.linalg.solve(A, f.astype(complex)[..., None])[..., 0]
    eb = np.exp(1j * TWO_PI * phase.turns(b))
    ea = np.exp(1j * TWO_PI * phase.turns(a))
    # node 0 is the right end (x = 1), node n-1 the left end
    terms = p[:, 0] * eb - p[:, -1] * ea
    return complex(np.sum(terms.real), np.sum(terms.imag))


def _integrate_plan(amp, phase, plan, spec, refine, chunk=1 << 20):
    t, w = _gl_pieces(plan, spec, refine)
    re = im = 0.0
    for s in range(0, t.size, chunk):
        tt, ww = t[s:s + chunk], w[s:s + chunk]
        fw = amp(tt) * ww
        ang = TWO_PI * phase.turns(tt)
        re += float(np.sum(fw * np.cos(ang)))
        im += float(np.sum(fw * np.sin(ang)))
    levin = []
    for kind, a, b, _ in plan:
        if kind == "levin":
            m = 1 << refine
            e = np.linspace(a, b, m + 1)
            levin.extend(zip(e[:-1], e[1:]))
    return complex(re, im) + _levin_sum(amp, phase, levin, spec)


def abs_integral(amp, edges, spec: QuadratureSpec) -> float:
    """int |amp| over the coarse panels (non-oscillatory Gauss-Legendre)."""
    x, w = _gauss(spec.nodes)
    e = np.asarray(edges, dtype=np.float64)
    mid = 0.5 * (e[1:] + e[:-1])
    half = 0.5 * (e[1:] - e[:-1])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ww = (half[:, None] * w[None, :]).ravel()
    return float(np.sum(np.abs(amp(t)) * ww))


@dataclass
class QuadResult:
    value: complex
    coarse_value: complex
    discrepancy: float
    scale: float
    n_gl_nodes: int
    n_levin_panels: int

    @property
    def relative_discrepancy(self) -> float:
        return self.discrepancy / self.scale if self.scale > 0 else 0.0


def integrate(amp, phase, edges, spec: QuadratureSpec = QuadratureSpec(), check: bool = True,
              raise_on_fail: bool = True, scale_floor: float = 0.0) -> QuadResult:
    """int amp(t) e(phase(t)) dt over the coarse panel edges.

    With ``check`` the integral is recomputed with every panel halved; the
    finer value is returned and the pair must agree to ``spec.tol``
    relative to max(|value|, int |amp|, scale_floor).  The floor lets callers
    measure tiny overlap integrals against the size of the family they
    belong to.
    """
    plan = _plan(phase, np.asarray(edges, dtype=np.float64), spec)
    n_gl = sum((p[3] for p in plan if p[0] == "gl")) * spec.nodes
    n_lev = sum(1 for p in plan if p[0] == "levin")
    q0 = _integrate_plan(amp, phase, plan, spec, 0)
    if not check:
        return QuadResult(q0, q0, 0.0, 0.0, n_gl, n_lev)
    q1 = _integrate_plan(amp, phase, plan, spec, 1)
    scale = max(abs(q1), abs_integral(amp, edges, spec), scale_floor)
    disc = abs(q1 - q0)
    res = QuadResult(q1, q0, disc, scale, 2 * n_gl, 2 * n_lev)
    if raise_on_fail and disc > spec.tol * scale:
        raise NumericError(
            f"quadrature refinement disagreement {disc:.3e} exceeds {spec.tol:g} x scale {scale:.3e} "
            f"({n_gl} Gauss nodes, {n_lev} Levin panels)")
    return res
