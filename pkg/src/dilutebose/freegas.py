"""The non-interacting Bose gas in units hbar = 2m = k_B = 1.

All functions work with the dimensionless density ``n = rho / T**1.5``; the
physical free energy is ``F_0(T, rho) = T**2.5 * f0_of_n(rho / T**1.5)`` and
the chemical potential is ``mu = T * m_of_n(rho / T**1.5)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .quadrature import radial_3d

# Bernoulli numbers B_2, B_4, ..., B_12 for the Euler-Maclaurin tail.
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730)


def zeta(s: float, terms: int = 64) -> float:
    """Riemann zeta for real s > 1 by direct summation plus Euler-Maclaurin tail.

    With 64 explicit terms and six Bernoulli corrections the truncation error is
    far below 1e-15 for the arguments used here (s = 3/2, 5/2).
    """
    if s <= 1:
        raise DomainError(f"zeta series needs s > 1, got {s}")
    n = terms
    head = math.fsum(k ** -s for k in range(1, n))
    tail = n ** (1 - s) / (s - 1) + 0.5 * n ** -s
    # sum_j B_2j/(2j)! * s(s+1)...(s+2j-2) * n^(-s-2j+1)
    rising = s
    for j, b in enumerate(_BERNOULLI, start=1):
        tail += b / math.factorial(2 * j) * rising * n ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return head + tail


@dataclass(frozen=True)
class FreeGasConstants:
    n_fc: float
    f_min: float


@lru_cache(maxsize=None)
def free_gas_constants() -> FreeGasConstants:
    norm = 8.0 * math.pi ** 1.5
    return FreeGasConstants(n_fc=zeta(1.5) / norm, f_min=-zeta(2.5) / norm)


def critical_density(T: float) -> float:
    """rho_fc(T) = n_fc T^(3/2)."""
    return free_gas_constants().n_fc * T ** 1.5


def critical_temperature(rho: float) -> float:
    """T_fc(rho) = (rho/n_fc)^(2/3) = 4 pi zeta(3/2)^(-2/3) rho^(2/3)."""
    return (rho / free_gas_constants().n_fc) ** (2.0 / 3.0)


def _occupation(lam):
    def g(p):
        with np.errstate(over="ignore"):
            return 1.0 / np.expm1(p * p + lam)
    return g


def bose_density(lam: float) -> float:
    """Occupation integral ``(2 pi)^-3 int (exp(p^2 + lam) - 1)^-1 dp``.

    ``lam = -mu/T >= 0``; ``bose_density(0) = n_fc``.
    """
    if lam < 0:
        raise DomainError(f"lam must be >= 0 (no free minimizer for mu > 0), got {lam}")
    n_fc = free_gas_constants().n_fc
    if lam == 0:
        return n_fc
    if lam < 1.0:
        # n_fc minus the depletion integral keeps relative accuracy as lam -> 0.
        def depletion(p):
            x = p * p
            return np.expm1(-lam) / (np.expm1(x) * np.expm1(-x - lam))
        res = radial_3d(depletion, abs_tol=1e-15, rel_tol=1e-12,
                        points=[math.sqrt(lam)] if lam > 1e-100 else [])
        return n_fc - res.value
    res = radial_3d(_occupation(lam), abs_tol=1e-14 * math.exp(-min(lam, 600.0)),
                    rel_tol=1e-12)
    return res.value


def m_of_n(n: float) -> float:
    """Reduced chemical potential ``m(n) = mu/T <= 0`` at reduced density n."""
    n_fc = free_gas_constants().n_fc
    if not n > 0:
        raise DomainError(f"density must be positive, got {n}")
    if n > n_fc * (1 + 1e-14):
        raise DomainError(f"n = {n} exceeds n_fc = {n_fc}; mu is pinned at 0")
    if n >= n_fc:
        return 0.0

    def g(lam):
        return bose_density(lam) - n

    hi = 700.0
    while g(hi) > 0:
        hi *= 2.0
    lam = brentq(g, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    return -lam


def _excess_free_energy(lam: float) -> float:
    """``f0 - f_min`` at ``m = -lam``, integrated as one non-negative integrand."""
    if lam == 0:
        return 0.0
    occ = _occupation(lam)

    def g(p):
        with np.errstate(over="ignore"):
            log_ratio = np.log1p(-np.expm1(-lam) / np.expm1(p * p))
        return log_ratio - lam * occ(p)

    points = [math.sqrt(lam)] if 1e-100 < lam < 1 else []
    return radial_3d(g, abs_tol=1e-16, rel_tol=1e-11, points=points).value


def f0_of_n(n: float) -> float:
    """Reduced free energy of the free gas, ``f0(n) = F_0(T, rho)/T^(5/2)``."""
    if n < 0:
        raise DomainError(f"density must be >= 0, got {n}")
    n_fc = free_gas_constants().n_fc
    if n >= n_fc:
        return free_gas_constants().f_min
    if n == 0:
        return 0.0
    return free_gas_constants().f_min + _excess_free_energy(-m_of_n(n))


def free_energy(T: float, rho: float) -> float:
    """F_0(T, rho) = T^(5/2) f0(rho/T^(3/2)); zero at T = 0."""
    if T < 0 or rho < 0:
        raise DomainError("T and rho must be non-negative")
    if T == 0:
        return 0.0
    return T ** 2.5 * f0_of_n(rho / T ** 1.5)
