import math

import mpmath
import numpy as np
import pytest

from carleson_lab.core_math import (
    DomainError,
    DyadicWindow,
    ParamSet,
    SignHalf,
    SignMode,
    bump,
    centered_frac,
    cutoff_eta,
    floor_powers,
    frac_powers,
    frac_product,
    signed_floor_power,
    signed_power,
    signed_window_value,
    unit_phase,
    window_support,
    window_value,
)


def test_paramset_defaults_are_admissible():
    p = ParamSet()
    assert p.violations() == []
    assert (p.c, p.eps, p.nu, p.delta1, p.delta2, p.nuPrime) == (1.5, 0.2, 0.019, 0.12, 1.8e-4, 9e-3)
    assert ParamSet.from_dict(p.to_dict()) == p


@pytest.mark.parametrize("kw, needle", [
    ({"c": 2.5}, "c ∈ (1,2)"),
    ({"c": 1.0}, "c ∈ (1,2)"),
    ({"eps": 0.3}, "eps ∈"),
    ({"nu": 0.05}, "nu ∈"),
    ({"delta1": 0.2}, "delta1 ∈"),
    ({"delta2": 1e-3}, "delta2 ∈"),
    ({"nuPrime": 1e-4}, "nuPrime ∈"),
])
def test_paramset_rejects_out_of_range(kw, needle):
    with pytest.raises(DomainError, match=needle.replace("(", r"\(").replace(")", r"\)")):
        ParamSet(**kw)


def test_paramset_from_dict_rejects_unknown_keys():
    with pytest.raises(DomainError):
        ParamSet.from_dict({"c": 1.5, "gamma": 1})


def test_unit_phase_examples():
    assert unit_phase(0) == 1 + 0j
    assert abs(unit_phase(0.5) - (-1)) < 1e-15
    assert abs(unit_phase(0.25) - 1j) < 1e-15
    with pytest.raises(DomainError):
        unit_phase(float("nan"))
    with pytest.raises(DomainError):
        unit_phase(float("inf"))


def test_unit_phase_modulus():
    x = np.random.default_rng(1).uniform(-1e3, 1e3, 10_000)
    assert np.max(np.abs(np.abs(unit_phase(x)) - 1)) <= 1e-15


def test_signed_floor_power_examples():
    assert signed_floor_power(2, 1.5, SignMode.EVEN) == 2
    assert signed_floor_power(3, 1.5, SignMode.EVEN) == 5
    assert signed_floor_power(-3, 1.5, SignMode.ODD) == -5
    assert signed_floor_power(-3, 1.5, SignMode.EVEN) == 5
    with pytest.raises(DomainError):
        signed_floor_power(0, 1.5)
    with pytest.raises(DomainError, match=r"c ∈ \(1,2\)"):
        signed_floor_power(3, 2.0)


def _integer_root_floor(n, p, q):
    # floor(n^{p/q}) in exact integer arithmetic
    target = n ** p
    k = int(round(n ** (p / q)))
    while k ** q > target:
        k -= 1
    while (k + 1) ** q <= target:
        k += 1
    return k


@pytest.mark.parametrize("c, p, q", [(1.1, 11, 10), (1.5, 3, 2), (1.9, 19, 10)])
def test_floor_powers_match_exact_integer_oracle(c, p, q):
    n = np.arange(1, 10 ** 6 + 1, dtype=np.int64)
    got = floor_powers(n, c)
    mism = []
    for k in range(n.size):
        v = int(n[k])
        ref = math.isqrt(v ** 3) if (p, q) == (3, 2) else _integer_root_floor(v, p, q)
        if got[k] != ref:
            mism.append(v)
    # the binary64 exponent differs from p/q by under one ulp; a disagreement is only
    # allowed where n^{p/q} is an integer within the induced shift of n^c
    for v in mism:
        with mpmath.workdps(60):
            exact = mpmath.power(v, mpmath.mpf(c))
            shift = 2 * exact * mpmath.log(v) * abs(mpmath.mpf(c) - mpmath.mpf(p) / q)
            assert int(mpmath.floor(exact)) == int(floor_powers(np.array([v]), c)[0])
            assert abs(exact - mpmath.nint(exact)) < shift
    assert len(mism) < n.size // 1000
    assert np.all(floor_powers(-n[:1000], c) == got[:1000])


def test_frac_powers_consistent_with_floors():
    n = np.arange(1, 5000)
    v = n.astype(float) ** 1.5
    assert np.allclose(frac_powers(n, 1.5) + floor_powers(n, 1.5), v, rtol=0, atol=1e-9)
    assert frac_powers(np.array([4]), 1.5)[0] == 0.0


def test_signed_power():
    assert signed_power(-4.0, 1.5, SignMode.ODD) == -8.0
    assert signed_power(-4.0, 1.5, SignMode.EVEN) == 8.0


def test_bump_examples():
    assert bump(0) == 1.0
    assert bump(0.6) == 0.0
    assert bump(3 / 8) == 0.5
    assert bump(0.25) == 1.0 and bump(0.5) == 0.0
    x = np.linspace(0.25, 0.5, 1001)
    b = bump(x)
    assert np.all(np.diff(b) <= 0)
    assert np.array_equal(bump(-x), b)


def test_window_examples():
    assert window_value(5, 16.0) == 0.0
    assert window_value(5, 8.0) == 1 / 8
    assert window_value(5, -8.0) == -1 / 8
    assert window_value(5, 0.0) == 0.0
    assert signed_window_value(5, SignHalf.PLUS, 8) == 1 / 8
    assert signed_window_value(5, "+", -8) == 0.0
    assert signed_window_value(5, "-", -8) == -1 / 8
    assert window_support(5) == (4.0, 16.0)
    w = DyadicWindow(5)
    assert w(8.0) == 1 / 8 and w.support == (4.0, 16.0) and w.signed("-", 8.0) == 0.0


def test_window_odd_exactly():
    rng = np.random.default_rng(2)
    for j in (3, 8, 15):
        x = rng.uniform(-2.0 ** j, 2.0 ** j, 10_000)
        assert np.all(window_value(j, -x) + window_value(j, x) == 0.0)


def test_window_support_boundaries():
    for j in (4, 9, 16):
        inner, outer = window_support(j)
        pts = np.array([inner, np.nextafter(inner, 0), outer, np.nextafter(outer, np.inf), 0.5 * inner])
        assert np.all(window_value(j, pts) == 0.0)
        assert np.all(window_value(j, -pts) == 0.0)
        assert window_value(j, np.nextafter(inner, np.inf)) >= 0.0


def test_partition_of_unity():
    rng = np.random.default_rng(3)
    x = rng.uniform(1, 2.0 ** 18, 1000) * rng.choice([-1, 1], 1000)
    total = sum(window_value(j, x) for j in range(1, 21))
    assert np.max(np.abs(total - 1 / x)) <= 1e-12


def test_cutoff_eta_examples():
    assert cutoff_eta(0, 0) == 1.0
    assert cutoff_eta(0.6, 0) == 0.0
    assert cutoff_eta(3 / 8, 0) == 0.5
    assert cutoff_eta(0.2, -0.25) == 1.0


def test_frac_product_exact_for_large_products():
    rng = np.random.default_rng(4)
    x = rng.uniform(-0.5, 0.5, 200)
    k = rng.integers(-2 ** 40, 2 ** 40, 200)
    got = frac_product(x, k)
    with mpmath.workdps(40):
        for a, b, g in zip(x, k, got):
            v = mpmath.mpf(float(a)) * int(b)
            ref = float(v - mpmath.nint(v))
            assert abs(centered_frac(g - ref)) < 1e-14
    assert np.array_equal(frac_product(-x, k), -got)
