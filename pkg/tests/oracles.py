"""Independent reference computations in arbitrary precision.

Nothing here imports the package.  Each oracle starts from the defining
formula and uses mpmath (quadrature, polylog, root finding), so agreement
with the package is a genuine cross-check.
"""
from __future__ import annotations

import mpmath as mp

mp.mp.dps = 30
PI = mp.pi
NORM = 8 * PI ** mp.mpf(1.5)


def n_fc():
    return mp.zeta(1.5) / NORM


def f_min():
    return -mp.zeta(2.5) / NORM


def bose_density(lam):
    return mp.polylog(1.5, mp.e ** (-lam)) / NORM


def free_f0(n):
    """Free-gas reduced free energy via polylogs: f0 = -Li_{5/2}(z)/norm + m n."""
    if n >= n_fc():
        return f_min()
    lam = mp.findroot(lambda L: bose_density(L) - n, (mp.mpf("1e-12"), 50), solver="illinois")
    return -mp.polylog(2.5, mp.e ** (-lam)) / NORM - lam * n


def I1_closed(d=0):
    """I1(0, 8 pi, 0) from the Bogoliubov zero-temperature integral."""
    assert d == 0
    return 1024 * mp.sqrt(PI) / 15


def I3_closed():
    return 16 / (3 * mp.sqrt(PI))


def I1_quad(d, c):
    """(2 pi)^-3 int [sqrt(A^2 + 2Ac) - A - c + c^2/(2 p^2)] dp, A = p^2 + d."""
    def g(p):
        A = p * p + d
        with mp.workdps(80):
            return p * p * (mp.sqrt(A * A + 2 * A * c) - A - c + c * c / (2 * p * p))
    P = mp.mpf(10) ** 6
    return mp.quad(g, [0, 1, 10, 100, 1e3, 1e4, 1e5, P]) / (2 * PI ** 2) + _i1_tail(P, d, c)


def _i1_tail(P, d, c):
    # beyond P the bracket is (c^3 + c^2 d)/(2 p^4) + O(p^-6), with the p^2 weight
    return (c ** 3 + c * c * d) / (2 * P) / (2 * PI ** 2)


def square_barrier_a(V0, R):
    g = mp.sqrt(mp.mpf(V0) / 2) * R
    return R * (1 - mp.tanh(g) / g)


def gaussian_fourier(V0, R, p):
    return V0 * PI ** 1.5 * R ** 3 * mp.e ** (-(p * R) ** 2 / 4)


def reduced_f(k, sigma, nu=None):
    nu = 8 * PI if nu is None else nu
    m = sigma - k
    return ((m ** 3 / 12 - sigma ** 2 * (mp.mpf(1) / 2 + 1 / (2 + m))) / (8 * PI)
            - (nu - 8 * PI) * sigma ** 2 / (8 * PI) ** 2)


def critical_point(nu=None):
    """(k_c, sigma_c): interior stationary point with f equal to its sigma = 0 value."""
    def eqs(k, s):
        return [mp.diff(lambda x: reduced_f(k, x, nu), s),
                reduced_f(k, s, nu) - reduced_f(k, 0, nu)]
    k, s = mp.findroot(eqs, (mp.mpf(-1.28), mp.mpf(1.83)))
    return k, s


def maxwell(nu=None):
    """(c, k_minus, k_plus, g_min, sigma_plus) from four stationarity/tie equations."""
    nu = 8 * PI if nu is None else nu

    def G(k, s, c):
        return reduced_f(k, s, nu) + nu * k ** 2 / (8 * PI) ** 2 + c * k

    def eqs(c, km, kp, sp):
        return [mp.diff(lambda x: G(x, 0, c), km),
                mp.diff(lambda x: G(x, sp, c), kp),
                mp.diff(lambda x: G(kp, x, c), sp),
                G(km, 0, c) - G(kp, sp, c)]
    c, km, kp, sp = mp.findroot(eqs, (mp.mpf(0.226), mp.mpf(-2.23), mp.mpf(3.04), mp.mpf(9.5)))
    return c, km, kp, G(km, 0, c), sp


def log_gap(delta0, b):
    def g(p):
        if p == 0:
            return mp.zero
        A = p * p + delta0
        E = mp.sqrt(A * A + 2 * A * b)
        return p * p * (mp.log(-mp.expm1(-E)) - mp.log(-mp.expm1(-A)) - b / mp.expm1(A))
    return abs(4 * PI * mp.quad(g, [0, mp.sqrt(b) if b else 1, 1, 10, 40]))
