"""Canonical free energy of the dilute gas in physical units (hbar = 2m = k_B = 1).

Three representations are combined:

* the normal phase, ``F0(T, rho) + nu a rho^2``;
* the near-critical reduction of :mod:`dilutebose.critical`, used for
  condensed points with ``k_c < k <= K_HANDOFF``;
* the minimisation over the Lagrange shift d of the condensed-phase bracket
  built from the reduced integrals I1..I4, used further from the transition
  and at T = 0.

Which phase applies is decided by the critical line
``T_c = T_fc (1 + h1(nu) rho^(1/3) a)``; near that line the two energies agree
to the order that the expansions neglect, so comparing them directly would
only amplify truncation errors.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import critical
from .errors import ConvergenceError, DomainError, QuadratureError, RegimeError
from .freegas import f0_of_n, free_gas_constants
from .integrals import I1, I2, I3, I4

EIGHT_PI = 8 * math.pi
D0_DEFAULT = 100.0
D0_MAX = 1e3
K_HANDOFF = 50.0
DILUTE_LIMIT = 0.1
MODERATE_LIMIT = 0.1
FIXED_POINT_TOL = 1e-10


class Branch(str, enum.Enum):
    NORMAL = "normal"
    CONDENSED = "condensed"
    COEXISTENCE = "coexistence"


class SMode(str, enum.Enum):
    """How the thermal-depletion integral gets its momentum scale."""

    DELTA_RHO = "delta_rho"
    FIXED_POINT = "fixed_point"


@dataclass(frozen=True)
class GasPoint:
    T: float
    rho: float
    a: float
    nu: float = EIGHT_PI

    def __post_init__(self):
        if not (self.T >= 0 and self.rho > 0 and self.a > 0):
            raise DomainError(f"need T >= 0, rho > 0, a > 0: {self}")
        if not self.nu >= EIGHT_PI * (1 - 1e-12):
            raise DomainError(f"nu must be >= 8 pi, got {self.nu}")

    @property
    def rho_fc(self) -> float:
        return free_gas_constants().n_fc * self.T ** 1.5

    @property
    def T_fc(self) -> float:
        return (self.rho / free_gas_constants().n_fc) ** (2.0 / 3.0)

    @property
    def delta_rho(self) -> float:
        return self.rho - self.rho_fc

    @property
    def k(self) -> float:
        """Reduced density offset ``8 pi (rho - rho_fc) / (T^2 a)``."""
        if self.T == 0:
            return math.inf
        return EIGHT_PI * self.delta_rho / (self.T ** 2 * self.a)

    @property
    def diluteness(self) -> float:
        return self.rho ** (1.0 / 3.0) * self.a

    @property
    def dilute_warning(self) -> bool:
        return self.diluteness > DILUTE_LIMIT

    @property
    def V0_hat(self) -> float:
        return self.nu * self.a


@dataclass(frozen=True)
class FreeEnergyResult:
    F: float
    rho0: float
    d_star: float
    branch: Branch
    representation: str = ""
    excess: Optional[float] = field(default=None, compare=False)
    """``F - 4 pi a rho^2`` when it is available without cancellation."""

    def __post_init__(self):
        if self.branch is Branch.NORMAL and self.rho0 != 0:
            raise ValueError("normal branch must have rho0 = 0")


def critical_temperature(rho: float, a: float, nu: float = EIGHT_PI) -> float:
    """``T_fc(rho) (1 + h1(nu) rho^(1/3) a)``."""
    T_fc = (rho / free_gas_constants().n_fc) ** (2.0 / 3.0)
    return T_fc * (1 + critical.h1(nu) * rho ** (1.0 / 3.0) * a)


def _depletion(d: float, point: GasPoint, s_mode: SMode) -> float:
    """``rho - rho0(d)`` before clamping."""
    rho, a, T = point.rho, point.a, point.T
    quantum = 0.5 * (rho * a) ** 1.5 * I3(d)
    if T == 0:
        return quantum
    if s_mode is SMode.DELTA_RHO:
        s = math.sqrt(max(point.delta_rho, 0.0) * a / T)
        return quantum + T ** 1.5 * I4(d, EIGHT_PI, 0.0, s)
    # Damped fixed point for rho0 = rho - quantum - T^1.5 I4(d, sqrt(rho0 a / T)).
    rho0 = max(point.delta_rho, 0.0)
    for _ in range(500):
        s = math.sqrt(rho0 * a / T)
        target = min(max(rho - quantum - T ** 1.5 * I4(d, EIGHT_PI, 0.0, s), 0.0), rho)
        new = 0.5 * (rho0 + target)
        if abs(new - rho0) <= FIXED_POINT_TOL * max(rho, 1e-300):
            return rho - new
        rho0 = new
    raise ConvergenceError(f"condensate fixed point did not converge at d={d}, {point}")


def rho0_of_d(d: float, point: GasPoint, s_mode: SMode | str = SMode.DELTA_RHO) -> float:
    """Condensate density at Lagrange shift d, clamped to [0, rho]."""
    if d < 0:
        raise DomainError("d must be >= 0")
    u = _depletion(d, point, SMode(s_mode))
    return min(max(point.rho - u, 0.0), point.rho)


def canonical_bracket(d: float, point: GasPoint, s_mode: SMode | str = SMode.DELTA_RHO):
    """Condensed-phase energy at fixed d.

    Returns ``(excess, rho0)`` with ``excess = bracket - 4 pi a rho^2``, written
    via the depletion ``u = rho - rho0`` so that no large terms cancel:

        nu a rho^2 - 8 pi a rho0 rho + (12 pi - nu) a rho0^2
            = 4 pi a rho^2 + a [2 (nu - 8 pi) rho u + (12 pi - nu) u^2].
    """
    rho, a, T, nu = point.rho, point.a, point.T, point.nu
    u = min(max(_depletion(d, point, SMode(s_mode)), 0.0), rho)
    rho0 = rho - u
    value = 0.5 * (rho * a) ** 2.5 * I1(d)
    if T > 0:
        value += T ** 2.5 * I2(d, EIGHT_PI, 0.0, math.sqrt(rho0 * a / T))
    value += -d * rho0 * a * u + a * (2 * (nu - EIGHT_PI) * rho * u + (12 * math.pi - nu) * u * u)
    return value, rho0


def _minimize_over_d(point: GasPoint, d0: float, s_mode: SMode):
    def excess(d):
        return canonical_bracket(d, point, s_mode)[0]

    ceiling = d0
    while True:
        grid = np.concatenate([[0.0], np.geomspace(1e-4, ceiling, 40)])
        vals = np.array([excess(d) for d in grid])
        i = int(np.argmin(vals))
        if i < grid.size - 1:
            break
        if ceiling >= D0_MAX:
            raise ConvergenceError(
                f"minimum over d sits at the ceiling d0={ceiling:g} for {point}; "
                "increase d0")
        ceiling = min(ceiling * 10, D0_MAX)
    best_d, best_v = float(grid[i]), float(vals[i])
    lo = grid[max(i - 1, 0)]
    hi = grid[i + 1]
    res = minimize_scalar(excess, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-9 * max(1.0, hi)})
    if res.fun < best_v:
        best_d, best_v = float(res.x), float(res.fun)
    return best_d, best_v


def _normal(point: GasPoint) -> FreeEnergyResult:
    T, rho = point.T, point.rho
    F = T ** 2.5 * f0_of_n(rho / T ** 1.5) + point.V0_hat * rho ** 2
    return FreeEnergyResult(F, 0.0, 0.0, Branch.NORMAL, "normal")


def _near_critical(point: GasPoint) -> Optional[FreeEnergyResult]:
    k = point.k
    inner = critical.interior_minimum(k, point.nu)
    if inner is None:
        return None
    sigma, f = inner
    T, a, rho = point.T, point.a, point.rho
    F = T ** 2.5 * free_gas_constants().f_min + point.V0_hat * rho ** 2 + T ** 4 * a ** 3 * f
    rho0 = min(sigma * T * T * a / EIGHT_PI, rho)
    sol = critical.change_of_variables(sigma, k)
    # Critical-region d multiplies (T a)^2; the bracket's d multiplies rho0 a.
    d_star = sol.d * EIGHT_PI / sigma if sigma > 0 else 0.0
    return FreeEnergyResult(F, rho0, d_star, Branch.CONDENSED, "near_critical",
                            excess=F - 4 * math.pi * a * rho ** 2)


def _condensed(point: GasPoint, d0: float, s_mode: SMode, handoff: float) -> FreeEnergyResult:
    if point.T > 0 and point.k <= handoff:
        res = _near_critical(point)
        if res is not None:
            return res
    d, excess = _minimize_over_d(point, d0, s_mode)
    rho0 = rho0_of_d(d, point, s_mode)
    F = 4 * math.pi * point.a * point.rho ** 2 + excess
    return FreeEnergyResult(F, rho0, d, Branch.CONDENSED, "bracket", excess=excess)


def free_energy_canonical(point: GasPoint, d0: float = D0_DEFAULT,
                          s_mode: SMode | str = SMode.DELTA_RHO,
                          handoff: float = K_HANDOFF) -> FreeEnergyResult:
    """Canonical free energy density at (T, rho) with the phase chosen by the critical line."""
    s_mode = SMode(s_mode)
    if point.T == 0:
        return _condensed(point, d0, s_mode, handoff)
    Tc = critical_temperature(point.rho, point.a, point.nu)
    if math.isclose(point.T, Tc, rel_tol=1e-12):
        normal = _normal(point)
        cond = _condensed(point, d0, s_mode, handoff)
        F = min(normal.F, cond.F)
        return FreeEnergyResult(F, cond.rho0, cond.d_star, Branch.COEXISTENCE,
                                cond.representation)
    if point.T > Tc:
        return _normal(point)
    return _condensed(point, d0, s_mode, handoff)


def moderate_coefficient(nu: float) -> float:
    """Coefficient of ``(Delta rho a / T)^(3/2) T^(5/2)`` in the closed-form energy."""
    return -(nu ** 1.5 + (nu - EIGHT_PI) ** 1.5) / (3 * math.sqrt(2) * math.pi)


def free_energy_moderate(point: GasPoint):
    """Closed-form condensed energy for ``rho a / T << 1``; returns ``(F, d_star)``."""
    T, rho, a, nu = point.T, point.rho, point.a, point.nu
    if not T > 0 or rho * a / T >= MODERATE_LIMIT:
        raise RegimeError(
            f"rho a / T = {rho * a / T if T > 0 else math.inf:.3g} is not small; "
            "use free_energy_canonical")
    if T >= critical_temperature(rho, a, nu):
        raise RegimeError("point lies above the critical line; use free_energy_canonical")
    rho_fc = point.rho_fc
    x = max(point.delta_rho, 0.0) * a / T
    F = (T ** 2.5 * free_gas_constants().f_min + 4 * math.pi * a * rho ** 2
         + (nu - 4 * math.pi) * a * rho_fc * (2 * rho - rho_fc)
         + x ** 1.5 * moderate_coefficient(nu) * T ** 2.5)
    return F, 2 * (nu - EIGHT_PI)


def moderate_bracket(d: float, nu: float) -> float:
    """d-dependent factor multiplying ``T (Delta rho a)^(3/2) / (24 pi)``."""
    if d < 0:
        raise DomainError("d must be >= 0")
    r = math.sqrt(d + 16 * math.pi)
    return (r + math.sqrt(d)) * (d + 6 * (EIGHT_PI - nu)) - 32 * math.pi * r


def minimize_moderate_bracket(nu: float, d_max: float = 1e3):
    """Numerical minimiser of :func:`moderate_bracket` over d >= 0."""
    grid = np.concatenate([[0.0], np.geomspace(1e-6, d_max, 400)])
    vals = np.array([moderate_bracket(d, nu) for d in grid])
    i = int(np.argmin(vals))
    if i == 0:
        return 0.0, float(vals[0])
    res = minimize_scalar(lambda d: moderate_bracket(d, nu),
                          bounds=(grid[i - 1], grid[min(i + 1, grid.size - 1)]),
                          method="bounded", options={"xatol": 1e-10})
    return float(res.x), float(res.fun)


def lhy_coefficient_at(nu: float, x: float, d0: float = D0_DEFAULT) -> float:
    """``(F - 4 pi a rho^2)/(rho a)^(5/2)`` at T = 0 and ``rho a^3 = x`` (units a = 1)."""
    res = free_energy_canonical(GasPoint(0.0, x, 1.0, nu), d0=d0)
    return res.excess / x ** 2.5


def lhy_coefficient(nu: float = EIGHT_PI, x: float = 1e-10) -> float:
    """LHY coefficient g(nu) from the T = 0 energy, Richardson-extrapolated in sqrt(rho a^3).

    The first correction is linear in ``sqrt(x)``, so ``2 c(x/4) - c(x)``
    removes it.
    """
    return 2 * lhy_coefficient_at(nu, x / 4) - lhy_coefficient_at(nu, x)


def lhy_limit(nu: float = EIGHT_PI) -> float:
    """``inf_d [ (I1 - d I3)/2 + (nu - 8 pi) I3 ]``, the x -> 0 limit taken analytically."""

    def g(d):
        return 0.5 * (I1(d) - d * I3(d)) + (nu - EIGHT_PI) * I3(d)

    grid = np.concatenate([[0.0], np.geomspace(1e-4, D0_MAX, 60)])
    vals = np.array([g(d) for d in grid])
    i = int(np.argmin(vals))
    if i == 0:
        return float(vals[0])
    res = minimize_scalar(g, bounds=(grid[i - 1], grid[min(i + 1, grid.size - 1)]),
                          method="bounded", options={"xatol": 1e-9})
    return float(min(res.fun, vals[i]))


@dataclass(frozen=True)
class PhaseRow:
    T: float
    rho: float
    k: float
    F: float
    rho0: float
    d_star: float
    branch: str
    in_coexistence_band: bool
    error: str = ""


def _row(args) -> PhaseRow:
    T, rho, a, nu, band = args
    point = GasPoint(T, rho, a, nu)
    k = point.k
    in_band = bool(band is not None and T > 0 and band[0] <= k <= band[1])
    try:
        r = free_energy_canonical(point)
        return PhaseRow(T, rho, k, r.F, r.rho0, r.d_star, r.branch.value, in_band)
    except (ConvergenceError, QuadratureError, DomainError, RegimeError) as exc:
        return PhaseRow(T, rho, k, math.nan, math.nan, math.nan, "error", in_band,
                        f"{type(exc).__name__}: {exc}")


def phase_diagram(T_values: Sequence[float], rho_values: Sequence[float], a: float,
                  nu: float = EIGHT_PI, workers: int = 1) -> List[PhaseRow]:
    """Free energy on the (T, rho) grid, T-major order.

    Rows inside the grand-canonical coexistence band ``k_- <= k <= k_+`` are
    flagged.  Failures are recorded per row and the sweep continues.
    """
    try:
        mx = critical.maxwell_construction(nu)
        band = (mx.k_minus, mx.k_plus)
    except ConvergenceError:
        band = None
    jobs = [(float(T), float(rho), a, nu, band) for T in T_values for rho in rho_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_row, jobs))
    return [_row(j) for j in jobs]
