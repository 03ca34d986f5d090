import math

import numpy as np
import pytest

from carleson_lab.core_math import DomainError, NumericError
from carleson_lab.quadrature import CallablePhase, PowerPhase, QuadratureSpec, integrate


def test_spec_validation_and_dict():
    with pytest.raises(DomainError):
        QuadratureSpec(nodes=1)
    q = QuadratureSpec()
    assert q.to_dict()["nodes"] == 16 and q.gauss_only().levin is False


def test_linear_phase_closed_form():
    # int_0^T e(beta t) dt = (e(beta T) - 1) / (2 pi i beta)
    beta, T = 3.7, 40.0
    ref = (np.exp(2j * np.pi * beta * T) - 1) / (2j * np.pi * beta)
    r = integrate(np.ones_like, PowerPhase(0.0, beta, 1.5), np.linspace(0, T, 9))
    assert abs(r.value - ref) < 1e-12
    assert r.n_levin_panels > 0


@pytest.mark.parametrize("alpha, beta", [(0.01, -0.1), (0.3, 0.2), (-0.05, 0.4), (1e-4, -0.02)])
def test_levin_and_gauss_routes_agree(alpha, beta):
    amp = lambda t: np.exp(-((t - 40.0) / 15.0) ** 2)
    edges = np.linspace(8.0, 96.0, 65)
    hybrid = integrate(amp, PowerPhase(alpha, beta, 1.5), edges, QuadratureSpec())
    gauss = integrate(amp, PowerPhase(alpha, beta, 1.5), edges, QuadratureSpec().gauss_only())
    assert gauss.n_levin_panels == 0
    assert abs(hybrid.value - gauss.value) <= 1e-12 * max(1.0, abs(gauss.value))


def test_stationary_point_split():
    p = PowerPhase(0.2, -0.6, 1.5)
    s = p.stationary_point()
    assert abs(p.deriv(np.array(s))) < 1e-12
    assert PowerPhase(0.2, 0.6, 1.5).stationary_point() is None


def test_callable_phase_matches_power_phase():
    a, b, c = 0.02, -0.3, 1.5
    amp = lambda t: np.sin(t / 10.0) ** 2
    edges = np.linspace(1.0, 50.0, 33)
    r1 = integrate(amp, PowerPhase(a, b, c), edges)
    r2 = integrate(amp, CallablePhase(lambda t: a * t ** c + b * t, lambda t: a * c * t ** (c - 1) + b), edges)
    assert abs(r1.value - r2.value) < 1e-12


def test_self_check_raises_with_diagnostics():
    coarse = QuadratureSpec(nodes=2, cycles_per_panel=4.0, coarse_panels=1, tol=1e-14, levin=False)
    with pytest.raises(NumericError, match="refinement disagreement"):
        integrate(lambda t: np.exp(np.sin(3 * t)), PowerPhase(0.0, 1.3, 1.5), np.array([0.0, 7.0]), coarse)
    r = integrate(lambda t: np.exp(np.sin(3 * t)), PowerPhase(0.0, 1.3, 1.5), np.array([0.0, 7.0]), coarse,
                  raise_on_fail=False)
    assert r.relative_discrepancy > 1e-14
