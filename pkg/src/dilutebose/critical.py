"""Reduced free energy near the condensation point and the constants it yields.

Near the free critical density write

    rho  = rho_fc + k T^2 a / (8 pi),      rho0 = sigma T^2 a / (8 pi),

with the pairing shift ``t0 = tau T^2 a / (8 pi)`` and the Lagrange shift d.
To leading order in ``sqrt(T) a`` the canonical free energy is

    T^(5/2) f_min + nu a rho^2 + T^4 a^3 f(k, sigma, nu)

where f is :func:`reduced_free_energy`.  Minimising f over sigma gives the
canonical critical point k_c(nu); tilting ``f + nu k^2/(8 pi)^2`` by ``c k``
and equalising its two minima gives the grand-canonical (Maxwell) constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ConvergenceError, DomainError
from .freegas import free_gas_constants, zeta

EIGHT_PI = 8 * math.pi
SIGMA_STEP = 1e-2
SIGMA_CEILING = 50.0
SIGMA_XTOL = 1e-8
K_TOL = 1e-6
NU_MAX = 100.0


def _check_nu(nu: float) -> None:
    # Floating 8 pi may land a hair below the symbolic value.
    if not nu >= EIGHT_PI * (1 - 1e-12):
        raise DomainError(f"nu must be >= 8 pi, got {nu}")


@dataclass(frozen=True)
class CriticalCoordinates:
    k: float
    sigma: float
    nu: float = EIGHT_PI

    def __post_init__(self):
        _check_nu(self.nu)
        if self.sigma < 0:
            raise DomainError("sigma must be >= 0")


@dataclass(frozen=True)
class CriticalSolution:
    feasible: bool
    tau: Optional[float] = None
    d: Optional[float] = None


@dataclass(frozen=True)
class MaxwellResult:
    c: float
    k_minus: float
    k_plus: float
    g_min: float
    sigma_plus: float


@dataclass(frozen=True)
class GrandCanonicalShift:
    h2: float
    mu_c: float
    c: float
    valid: bool


def tau_self_consistent(d: float, sigma: float) -> float:
    """Root in [-sigma, 0] of ``tau (sqrt(d + 2(sigma+tau)) + sqrt d) + 2 (sigma + tau)``.

    Using ``2x = (sqrt(d+2x) - sqrt d)(sqrt(d+2x) + sqrt d)`` with
    ``x = sigma + tau``, the equation factors, and the non-trivial factor
    ``tau + sqrt(d + 2x) - sqrt d`` is a quadratic in ``y = sqrt(d + 2x)``:

        y = sqrt((1 + sqrt d)^2 + 2 sigma) - 1,   tau = sqrt d - y.
    """
    if d < 0 or sigma < 0:
        raise DomainError("d and sigma must be non-negative")
    rd = math.sqrt(d)
    y = (2 * sigma) / (math.sqrt((1 + rd) ** 2 + 2 * sigma) + 1 + rd)   # rationalised
    y += rd
    return min(0.0, max(-sigma, rd - y))


def tau_residual(tau: float, d: float, sigma: float) -> float:
    return tau * (math.sqrt(d + 2 * (sigma + tau)) + math.sqrt(d)) + 2 * (sigma + tau)


def feasible_interval(k: float) -> Tuple[float, float]:
    """``I(k)``: ``[0, inf)`` for k <= 0 and ``[k + sqrt(2k), inf)`` for k > 0."""
    if k <= 0:
        return 0.0, math.inf
    return k + math.sqrt(2 * k), math.inf


def _lower(k: float) -> float:
    return feasible_interval(k)[0]


def _is_feasible(sigma: float, k: float) -> bool:
    lo = _lower(k)
    return sigma >= lo * (1 - 1e-12) - 1e-300


def change_of_variables(sigma: float, k: float) -> CriticalSolution:
    """(tau, d) from (sigma, k); infeasible sigma yields ``feasible=False``."""
    if sigma < 0 or not _is_feasible(sigma, k):
        return CriticalSolution(False)
    if sigma == 0 and k == 0:
        return CriticalSolution(True, 0.0, 0.0)
    m = sigma - k
    tau = 2 * sigma / (k - sigma - 2)
    x = sigma * m / (m + 2)              # sigma + tau without cancellation
    root_d = max(m * m - 2 * x, 0.0) / (2 * m)
    return CriticalSolution(True, tau, root_d * root_d)


def reduced_free_energy(coords: CriticalCoordinates) -> float:
    """``f(k, sigma, nu)``, the sigma-dependent part of the energy in units T^4 a^3."""
    if not _is_feasible(coords.sigma, coords.k):
        raise DomainError(f"sigma={coords.sigma} is outside I({coords.k})")
    return float(_f(coords.k, np.asarray(coords.sigma), coords.nu))


def _f(k, sigma, nu):
    m = sigma - k
    return ((m ** 3 / 12 - sigma ** 2 * (0.5 + 1 / (2 + m))) / EIGHT_PI
            - (nu - EIGHT_PI) * sigma ** 2 / EIGHT_PI ** 2)


def _refine(k, nu, lo, hi):
    res = minimize_scalar(lambda s: float(_f(k, s, nu)), bounds=(lo, hi),
                          method="bounded", options={"xatol": SIGMA_XTOL})
    return float(res.x), float(res.fun)


def _grid(k, nu, ceiling):
    lo = _lower(k)
    while True:
        n = max(int(math.ceil((ceiling - lo) / SIGMA_STEP)), 2)
        sig = lo + SIGMA_STEP * np.arange(n + 1)
        vals = _f(k, sig, nu)
        i = int(np.argmin(vals))
        if sig[i] < lo + 0.99 * (sig[-1] - lo):
            return sig, vals
        ceiling *= 2


def interior_minimum(k: float, nu: float = EIGHT_PI) -> Optional[Tuple[float, float]]:
    """Lowest local minimum of f strictly inside I(k), or None if f has none."""
    _check_nu(nu)
    sig, vals = _grid(k, nu, SIGMA_CEILING)
    inner = np.flatnonzero((vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:])) + 1
    if inner.size == 0:
        return None
    best = None
    for i in inner:
        s, v = _refine(k, nu, sig[i - 1], sig[i + 1])
        if best is None or v < best[1]:
            best = (s, v)
    return best


def minimize_reduced(k: float, nu: float = EIGHT_PI) -> Tuple[float, float]:
    """Global minimiser ``(sigma*, f(k, sigma*, nu))`` over I(k).

    The boundary point of I(k) competes with every interior local minimum;
    on an exact tie the boundary is returned.
    """
    _check_nu(nu)
    lo = _lower(k)
    boundary = (lo, float(_f(k, lo, nu)))
    inner = interior_minimum(k, nu)
    if inner is None or inner[1] >= boundary[1]:
        return boundary
    return inner


def minimizers(k: float, nu: float = EIGHT_PI, tol: float = 1e-9) -> Tuple[float, ...]:
    """All global minimisers within ``tol`` in value, boundary first."""
    lo = _lower(k)
    vb = float(_f(k, lo, nu))
    inner = interior_minimum(k, nu)
    if inner is None:
        return (lo,)
    if abs(inner[1] - vb) <= tol:
        return (lo, inner[0])
    return (lo,) if vb < inner[1] else (inner[0],)


def _critical_gap(k: float, nu: float) -> float:
    """Interior minimum minus the boundary value; negative once condensation wins."""
    inner = interior_minimum(k, nu)
    if inner is None:
        return math.inf
    return inner[1] - float(_f(k, _lower(k), nu))


@lru_cache(maxsize=256)
def critical_k(nu: float = EIGHT_PI) -> float:
    """k at which an interior minimiser ties with sigma = 0."""
    _check_nu(nu)
    hi = 0.0
    if not _critical_gap(hi, nu) < 0:
        raise ConvergenceError(f"no condensed minimum at k=0 for nu={nu}")
    lo = -1.0
    while _critical_gap(lo, nu) < 0:
        hi, lo = lo, 2 * lo
        if lo < -1e4:
            raise ConvergenceError(f"critical k not bracketed for nu={nu}")
    while hi - lo > K_TOL:
        mid = 0.5 * (lo + hi)
        if _critical_gap(mid, nu) < 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def critical_sigma(nu: float = EIGHT_PI) -> float:
    """Condensate coordinate of the interior minimiser at k_c."""
    inner = interior_minimum(critical_k(nu), nu)
    return inner[0]


def density_shift_coefficient(nu: float = EIGHT_PI) -> float:
    """C in ``rho_c = rho_fc (1 - C rho_fc^(1/3) a)``."""
    return -(critical_k(nu) / EIGHT_PI) * free_gas_constants().n_fc ** (-4.0 / 3.0)


def h1(nu: float = EIGHT_PI) -> float:
    """Coefficient in ``T_c = T_fc (1 + h1 rho^(1/3) a)``."""
    return 2.0 / 3.0 * density_shift_coefficient(nu)


def grand_canonical_curve(k, nu: float = EIGHT_PI, c: float = 0.0):
    """``g(k) = min_sigma f(k, sigma, nu) + nu k^2/(8 pi)^2 + c k``; vectorised over k."""
    _check_nu(nu)
    ks = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.array([minimize_reduced(float(kk), nu)[1] for kk in ks])
    out = out + nu * ks ** 2 / EIGHT_PI ** 2 + c * ks
    return float(out[0]) if np.ndim(k) == 0 else out


def _tilt(k, nu, c):
    return nu * k * k / EIGHT_PI ** 2 + c * k


def _left_minimum(nu, c, kc):
    # On the sigma = 0 branch, g = -k^3/(96 pi) + nu k^2/(64 pi^2) + c k.
    b = nu / math.pi
    k = 0.5 * (b - math.sqrt(b * b + 128 * math.pi * c))
    if not k < kc:
        raise ConvergenceError(f"no normal-phase minimum below k_c={kc} at c={c}")
    return k, float(_f(k, 0.0, nu)) + _tilt(k, nu, c)


def _right_minimum(nu, c, kc):
    def g(k):
        inner = interior_minimum(k, nu)
        if inner is None:
            return math.inf
        return inner[1] + _tilt(k, nu, c)

    step, span = 0.2, 40.0
    while True:
        ks = np.arange(kc + step, kc + span, step)
        vals = np.array([g(k) for k in ks])
        i = int(np.argmin(vals))
        if i == 0:
            raise ConvergenceError(f"condensed-phase minimum not bracketed at c={c}")
        if i < ks.size - 1:
            break
        if span > 2000:
            raise ConvergenceError(f"condensed-phase minimum beyond k={kc + span} at c={c}")
        span *= 2
        step *= 2
    res = minimize_scalar(g, bounds=(ks[i - 1], ks[i + 1]), method="bounded",
                          options={"xatol": 1e-10})
    return float(res.x), float(res.fun)


@lru_cache(maxsize=64)
def maxwell_construction(nu: float = EIGHT_PI) -> MaxwellResult:
    """Tilt c making the two minima of the grand-canonical curve equal."""
    _check_nu(nu)
    if nu > NU_MAX:
        raise ConvergenceError(f"nu={nu} outside the supported range [8 pi, {NU_MAX}]")
    kc = critical_k(nu)

    def gap(c):
        return _left_minimum(nu, c, kc)[1] - _right_minimum(nu, c, kc)[1]

    # Below c0 the normal-phase minimum would sit above k_c.
    b = nu / math.pi
    c0 = (kc * kc - b * kc) / (32 * math.pi)
    lo = c0 * (1 + 1e-6) + 1e-12
    factor = 1.1
    try:
        while True:
            hi = lo * factor
            try:
                value = gap(hi)
            except ConvergenceError:
                # The condensed minimum merged into the kink; approach more slowly.
                factor = 1 + 0.5 * (factor - 1)
                if factor - 1 < 1e-5:
                    raise
                continue
            if value <= 0:
                break
            lo = hi
        c = brentq(gap, lo, hi, xtol=1e-12, rtol=1e-12)
    except (ValueError, ConvergenceError) as exc:
        raise ConvergenceError(f"could not bracket two equal minima for nu={nu}: {exc}") from exc
    km, gm = _left_minimum(nu, c, kc)
    kp, gp = _right_minimum(nu, c, kc)
    sigma_plus = interior_minimum(kp, nu)[0]
    return MaxwellResult(c, km, kp, 0.5 * (gm + gp), sigma_plus)


def hull(k, nu: float = EIGHT_PI, c: Optional[float] = None):
    """Convex envelope of the tilted curve: flat at the common minimum between k-/k+."""
    mx = maxwell_construction(nu)
    c = mx.c if c is None else c
    g = np.atleast_1d(grand_canonical_curve(k, nu, c))
    ks = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.where((ks > mx.k_minus) & (ks < mx.k_plus), mx.g_min, g)
    return float(out[0]) if np.ndim(k) == 0 else out


def thermal_length_factor() -> float:
    """``sqrt(pi) / (2 zeta(3/2))``, the prefactor linking T_c to (mu/a)."""
    return math.sqrt(math.pi) / (2 * zeta(1.5))


def h2(nu: float = EIGHT_PI) -> float:
    return 2.0 / 3.0 * maxwell_construction(nu).c * EIGHT_PI * thermal_length_factor() ** 2


def h2_and_mu_c(nu: float, T: float, a: float) -> GrandCanonicalShift:
    """Grand-canonical critical chemical potential and T_c shift coefficient.

    ``mu_c = 2 nu rho_fc a - 8 pi c T^2 a^2``.  ``valid`` is False when
    ``sqrt(T) a`` is not small, where the expansion is not trustworthy.
    """
    _check_nu(nu)
    if not (T > 0 and a > 0):
        raise DomainError("T and a must be positive")
    c = maxwell_construction(nu).c
    rho_fc = free_gas_constants().n_fc * T ** 1.5
    mu_c = 2 * nu * rho_fc * a - EIGHT_PI * c * T * T * a * a
    return GrandCanonicalShift(h2(nu), mu_c, c, math.sqrt(T) * a < 0.1)


def critical_temperature_of_mu(mu: float, a: float, nu: float = EIGHT_PI) -> float:
    """``T_c(mu) = ((sqrt(pi)/(2 zeta(3/2))) (8 pi/nu))^(2/3) (mu/a)^(2/3) + h2 mu``."""
    if not (mu > 0 and a > 0):
        raise DomainError("mu and a must be positive")
    lead = (thermal_length_factor() * EIGHT_PI / nu) ** (2.0 / 3.0) * (mu / a) ** (2.0 / 3.0)
    return lead + h2(nu) * mu
