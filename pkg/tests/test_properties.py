"""Property tests for structural identities of the numerical kernels."""
import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from carleson_lab.core_math import bump, centered_frac, frac_product, window_value
from carleson_lab.expsum import exp_sum
from carleson_lab.multiplier import m_j
from carleson_lab.operators import Signal, lp_norm, modulated_convolution, r_variation
from carleson_lab.ttstar import discrete_choice, r_range, ttstar_kernel_discrete

fast = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
freq = st.floats(-0.5, 0.5, allow_nan=False)
small_lam = st.floats(-0.05, 0.05, allow_nan=False)
cplx = st.tuples(st.floats(-10, 10), st.floats(-10, 10)).map(lambda p: complex(*p))
seqs = st.lists(cplx, min_size=2, max_size=9)


@fast
@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_centered_frac_range_and_shift(x):
    f = centered_frac(x)
    assert -0.5 <= f <= 0.5
    assert abs(centered_frac(f - x)) < 1e-9


@fast
@given(st.floats(-3, 3), st.integers(-(2 ** 40), 2 ** 40))
def test_frac_product_matches_exact_rational(x, k):
    from fractions import Fraction
    exact = Fraction(x) * k
    ref = float(exact - math.floor(exact + Fraction(1, 2)))
    got = float(frac_product(x, k))
    assert min(abs(got - ref), 1 - abs(got - ref)) < 1e-12


@fast
@given(st.floats(-0.999, 0.999), st.floats(-0.999, 0.999))
def test_bump_even_and_monotone_on_half_line(a, b):
    assert bump(a) == bump(-a)
    lo, hi = sorted((abs(a), abs(b)))
    assert bump(lo) >= bump(hi)


@fast
@given(st.floats(1.0, 2.0 ** 18), st.sampled_from([-1.0, 1.0]))
def test_windows_sum_to_reciprocal(x, sign):
    total = sum(float(window_value(j, sign * x)) for j in range(1, 21))
    assert abs(total - 1 / (sign * x)) <= 1e-12


@fast
@given(st.integers(1, 400), freq, freq)
def test_exp_sum_conjugation_and_periodicity(N, a, b):
    s = exp_sum(N, a, b)
    assert abs(exp_sum(N, -a, -b) - s.conjugate()) <= 1e-11 * N
    assert abs(exp_sum(N, a + 1, b) - s) <= 1e-9 * N
    assert abs(s) <= N + 1e-9


@fast
@given(st.integers(5, 8), freq, small_lam)
def test_mode0_odd_in_frequency(j, xi, lam):
    v = m_j(j, xi, lam, 0)
    tol = 1e-12 * 2 ** j
    assert abs(m_j(j, -xi, lam, 0) + v) <= tol
    assert abs(m_j(j, -xi, -lam, 0) - v.conjugate()) <= tol
    assert abs(abs(m_j(j, xi, -lam, 0)) - abs(v)) <= tol


@fast
@given(st.integers(5, 8), freq, small_lam)
def test_mode1_odd_under_joint_negation(j, xi, lam):
    assert abs(m_j(j, -xi, -lam, 1) + m_j(j, xi, lam, 1)) <= 1e-12 * 2 ** j


@fast
@given(seqs)
def test_variation_non_increasing_in_exponent(seq):
    vals = [r_variation(seq, r).value for r in (1, 1.5, 2, 3, 6)]
    assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(vals, vals[1:]))


@fast
@given(st.integers(2, 8).flatmap(lambda n: st.tuples(st.lists(cplx, min_size=n, max_size=n),
                                                      st.lists(cplx, min_size=n, max_size=n))),
       st.sampled_from([1.0, 2.0, 2.5, 4.0]))
def test_variation_triangle_inequality(pair, r):
    a, b = np.array(pair[0]), np.array(pair[1])
    lhs = r_variation(a + b, r).value
    assert lhs <= r_variation(a, r).value + r_variation(b, r).value + 1e-9


@fast
@given(seqs, st.floats(-5, 5).filter(lambda s: abs(s) > 1e-3), st.sampled_from([1.0, 2.0, 3.0]))
def test_variation_homogeneous_and_shift_invariant(seq, s, r):
    a = np.array(seq)
    v = r_variation(a, r).value
    assert abs(r_variation(s * a, r).value - abs(s) * v) <= 1e-9 * (1 + abs(s) * v)
    assert abs(r_variation(a + 3 - 2j, r).value - v) <= 1e-9 * (1 + v)


@fast
@given(st.lists(cplx, min_size=1, max_size=20), st.floats(-4, 4).filter(lambda s: abs(s) > 1e-2),
       st.sampled_from([1.0, 2.0, 3.5]))
def test_lp_norm_homogeneous(vals, s, p):
    f = Signal(np.array(vals))
    assert abs(lp_norm(Signal(s * np.array(vals)), p) - abs(s) * lp_norm(f, p)) <= 1e-9 * (1 + abs(s) * lp_norm(f, p))


@settings(max_examples=20, deadline=None)
@given(st.lists(cplx, min_size=1, max_size=12), st.lists(cplx, min_size=1, max_size=12),
       st.floats(0.0, 0.5), st.sampled_from([0, 1]))
def test_modulated_convolution_linear(u, v, lam, mode):
    n = max(len(u), len(v))
    a = np.zeros(n, complex)
    b = np.zeros(n, complex)
    a[:len(u)], b[:len(v)] = u, v
    ta = modulated_convolution(Signal(a), lam, mode, n_max=32).values
    tb = modulated_convolution(Signal(b), lam, mode, n_max=32).values
    tab = modulated_convolution(Signal(a + 2 * b), lam, mode, n_max=32).values
    assert np.max(np.abs(tab - (ta + 2 * tb))) <= 1e-9 * (1 + np.max(np.abs(ta)) + np.max(np.abs(tb)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from(["constant", "uniform"]), st.sampled_from(["+", "-"]),
       st.data())
def test_ttstar_kernel_hermitian_and_support(seed, kind, tau, data):
    j = 8
    r = r_range(j)[0]
    ch = discrete_choice(kind, j, r, tau, rng=np.random.default_rng(seed))
    lo, hi = ch.window
    x = data.draw(st.integers(lo, hi))
    y = data.draw(st.integers(lo, hi))
    kxy = ttstar_kernel_discrete(x, y, j, r, tau, ch)
    kyx = ttstar_kernel_discrete(y, x, j, r, tau, ch)
    assert abs(kxy - kyx.conjugate()) <= 1e-12
    if abs(x - y) > 2 ** (j - 1) - 2 ** (j - 3):
        assert kxy == 0
