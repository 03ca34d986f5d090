"""Independent high-precision oracles for the frozen golden values.

Run ``python tests/oracles/generate.py`` to regenerate; it does not import
the package under test.  Every value is computed with mpmath from the
defining formulas (direct sums over all n, unpaired; adaptive quadrature
on fine subintervals).
"""
import json
import sys

import mpmath as mp

mp.mp.dps = 40
C = mp.mpf(3) / 2


def e(x):
    return mp.expjpi(2 * x)


def g(u):
    return mp.exp(-1 / u) if u > 0 else mp.mpf(0)


def s(u):
    return g(u) / (g(u) + g(1 - u))


def phi(x):
    x = abs(x)
    if x <= mp.mpf(1) / 4:
        return mp.mpf(1)
    if x >= mp.mpf(1) / 2:
        return mp.mpf(0)
    return s((mp.mpf(1) / 2 - x) * 4)


def psi(j, x):
    x = mp.mpf(x)
    if x == 0:
        return mp.mpf(0)
    return (phi(x / mp.mpf(2) ** j) - phi(x / mp.mpf(2) ** (j - 1))) / x


def floor_pow(n, c=C):
    return int(mp.floor(mp.mpf(abs(n)) ** c))


def m_j(j, xi, lam, mode):
    tot = mp.mpc(0)
    for n in range(-2 ** (j - 1), 2 ** (j - 1) + 1):
        if n == 0:
            continue
        F = floor_pow(n) * (1 if (mode == 0 or n > 0) else -1)
        tot += e(lam * F - xi * n) * psi(j, n)
    return tot


def H_j(j, xi, lam, mode):
    # eta = 1 at the golden point (|xi|, |lam| <= 1/4)
    def f(t):
        sgn = 1 if (mode == 0 or t > 0) else -1
        return e(lam * sgn * abs(t) ** C - xi * t) * psi(j, t)
    lo, hi = mp.mpf(2) ** (j - 3), mp.mpf(2) ** (j - 1)
    pts = mp.linspace(lo, hi, 65)
    return mp.quad(f, pts) + mp.quad(f, [-p for p in reversed(pts)])


def L_t(t, xi1, xi2):
    f = lambda s_: e(-xi2 * s_ ** C - xi1 * s_)
    pts = [mp.mpf(0)] + [mp.mpf(2) ** k for k in range(-30, 7)] + [mp.mpf(t)]
    pts = sorted(set(p for p in pts if p <= t))
    return mp.quad(f, pts) / t


def cm(m, x):
    return (1 - e(-x)) / (2j * mp.pi * (x + m))


def residual(n, M, xi2):
    v = mp.mpf(n) ** C
    fr = v - mp.floor(v)
    return e(-xi2 * fr) - sum(cm(m, xi2) * e(m * fr) for m in range(-M, M + 1))


def nint_sum(P, Pp, M):
    tot = mp.mpf(0)
    for n in range(P, Pp + 1):
        v = mp.mpf(n) ** C
        d = abs(v - mp.nint(v))
        tot += 1 if d == 0 else min(1, 1 / (M * d))
    return tot


def cx(z):
    z = mp.mpc(z)
    return [float(z.real), float(z.imag)]


def main():
    out = {}
    out["exp_sum_dyadic_8_16_0.3_0.1"] = cx(sum(e(mp.mpf("0.3") * mp.mpf(n) ** C + mp.mpf("0.1") * n)
                                             for n in range(8, 17)))
    out["nearest_int_weight_sum_4_8_4"] = float(nint_sum(4, 8, 4))
    out["fourier_coeff_3_0.25"] = cx(cm(3, mp.mpf("0.25")))
    out["floor_series_residual_3_8_0.3"] = cx(residual(3, 8, mp.mpf("0.3")))
    N, M, a, b = 2 ** 12, 2 ** 5, mp.mpf("0.1"), mp.mpf("0.01")
    out["bound_full_4096_32_0.1_0.01"] = float(min((1 + mp.log(M)) * (N / mp.mpf(M) + N ** (C / 2) * mp.sqrt(M)
                                                                      + N ** (1 - C / 2) / mp.sqrt(b)),
                                                   (N ** C * b + 1) / a))

    def bw(j, x1, x2):
        j2 = mp.mpf(2) ** j
        return float(min(j * (j2 ** ((C + 1) / 3) + j2 ** (1 - C / 2) / mp.sqrt(x2)), (j2 ** C * x2 + 1) / x1) / j2)
    out["bound_weighted_10_0.1_2^-13"] = bw(10, mp.mpf("0.1"), mp.mpf(2) ** -13)
    out["bound_weighted_1_0.3_0.3"] = bw(1, mp.mpf("0.3"), mp.mpf("0.3"))
    xi, lam = mp.mpf("0.1"), mp.mpf("0.01")
    m = m_j(6, xi, lam, 0)
    h = H_j(6, xi, lam, 0)
    out["m_j_6_0.1_0.01_mode0"] = cx(m)
    out["H_j_6_0.1_0.01_mode0"] = cx(h)
    out["E_j_6_0.1_0.01_mode0"] = cx(m - h)
    out["m_j_6_0.1_0.01_mode1"] = cx(m_j(6, xi, lam, 1))
    out["H_j_6_0.1_0.01_mode1"] = cx(H_j(6, xi, lam, 1))
    out["L_t_64_0.1_0.01"] = cx(L_t(64, mp.mpf("0.1"), mp.mpf("0.01")))
    # discrete TT* kernel, j=8, r=ceil(nu j)=1, tau=-, constant lambda = 1.25 * 2^{r-cj}, x-y = 2^7
    j, lamc = 8, mp.mpf("1.25") * mp.mpf(2) ** (1 - C * 8)
    def kern(x, y, lx, ly):
        tot = mp.mpc(0)
        for mm in range(-2000, 2000):
            a_, b_ = x - mm, y - mm
            if a_ < 0 and b_ < 0:
                tot += e(lx * abs(a_) ** C - ly * abs(b_) ** C) * psi(j, a_) * psi(j, b_)
        return tot
    # |x - y| = 2^7 exceeds the support radius 2^7 - 2^5, so this one vanishes
    out["ttstar_discrete_j8_r1_x-128_y-256"] = cx(kern(-128, -256, lamc, lamc))
    out["ttstar_discrete_j8_r1_x-128_y-192"] = cx(kern(-128, -192, lamc, lamc))
    out["ttstar_discrete_j8_r1_x-100_y-150_two_lambdas"] = cx(kern(-100, -150, lamc, lamc * mp.mpf("1.5")))
    # trigamma tail and the impulse norm truncated at 2^20 via the closed form identity
    out["impulse_truncated_2^20"] = float(mp.sqrt(mp.pi ** 2 / 3 - 2 * mp.psi(1, 2 ** 20 + 1)))
    json.dump(out, sys.stdout, indent=1, sort_keys=True)
    print()


if __name__ == "__main__":
    main()
