"""Dimensionless Bogoliubov integrals I1..I4 and their small-parameter expansions.

Arguments follow one convention throughout: ``d`` is the reduced Lagrange
shift, ``sigma`` the reduced condensate density, ``theta = t0/rho0`` in
[-1, 0] and ``s`` the ratio of the interaction momentum scale to the thermal
one.  Only the combination ``c = (1 + theta) * sigma`` enters I1 and I3.

All integrands are rewritten so that differences of nearly equal square roots
are formed algebraically, e.g.

    sqrt(A^2 + 2Ac) - (A + c) = -c^2 / (sqrt(A^2 + 2Ac) + A + c),

which removes the large-p and small-p cancellations without series fallbacks.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, QuadratureError
from .freegas import free_gas_constants
from .quadrature import PowerDecay, radial_3d, integrate_radial

ABS_TOL = 1e-13
REL_TOL = 1e-11
# I1 ~ c^(5/2) and I3 ~ c^(3/2); below this coupling both are far under any tolerance.
NEGLIGIBLE_COUPLING = 1e-100


class Kind(str, enum.Enum):
    I1 = "I1"
    I2 = "I2"
    I3 = "I3"
    I4 = "I4"


class AsymptoticKind(str, enum.Enum):
    I1_SMALLPHI = "I1_smallphi"
    I2_MODERATE = "I2_moderate"
    I3_SMALLPHI = "I3_smallphi"
    I4_MODERATE = "I4_moderate"


@dataclass(frozen=True)
class ReducedParams:
    d: float = 0.0
    sigma: float = 8 * math.pi
    theta: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        if not (self.d >= 0 and self.sigma >= 0 and self.s >= 0):
            raise DomainError(f"need d, sigma, s >= 0: {self}")
        if not -1.0 <= self.theta <= 0.0:
            raise DomainError(f"theta must lie in [-1, 0]: {self}")

    @property
    def coupling(self) -> float:
        """(1 + theta) * sigma."""
        return (1.0 + self.theta) * self.sigma


def _scale(*lengths):
    return max(1.0, *(math.sqrt(x) for x in lengths if x > 0))


def _breakpoints(*squares):
    # Breakpoints this close to 0 only create panels whose nodes square to zero.
    return sorted({math.sqrt(x) for x in squares if x > 1e-100})


@lru_cache(maxsize=4096)
def _i1(d: float, c: float, abs_tol: float = ABS_TOL, rel_tol: float = REL_TOL) -> float:
    if c < NEGLIGIBLE_COUPLING:
        return 0.0

    def g(p):
        q = p * p
        A = q + d
        S = np.sqrt(A * (A + 2 * c))
        s_minus_q = (2 * q * d + d * d + 2 * A * c) / (S + q)
        # p^2 * [S - (A + c) + c^2/(2 p^2)]
        return c * c * (s_minus_q + d + c) / (2 * (S + A + c))

    res = radial_3d(lambda p: g(p) / (p * p), abs_tol=abs_tol, rel_tol=rel_tol,
                    decay_hint=PowerDecay(2), scale=_scale(d, c),
                    points=_breakpoints(d, c))
    return res.value


@lru_cache(maxsize=4096)
def _i3(d: float, c: float, abs_tol: float = ABS_TOL, rel_tol: float = REL_TOL) -> float:
    if c < NEGLIGIBLE_COUPLING:
        return 0.0

    def g(p):
        A = p * p + d
        S = np.sqrt(A * (A + 2 * c))
        return c * c / (S * (A + c + S))

    res = radial_3d(g, abs_tol=abs_tol, rel_tol=rel_tol, decay_hint=PowerDecay(2),
                    scale=_scale(d, c), points=_breakpoints(d, c))
    return res.value


@lru_cache(maxsize=4096)
def _i2_excess(D: float, C: float, abs_tol: float = ABS_TOL, rel_tol: float = REL_TOL) -> float:
    """I2 - f_min with ``D = d s^2`` and ``C = c s^2``."""
    if D == 0 and C == 0:
        return 0.0

    def g(p):
        q = p * p
        A = q + D
        E = np.sqrt(A * (A + 2 * C))
        with np.errstate(over="ignore", under="ignore"):
            return np.log(np.expm1(-E) / np.expm1(-q))

    res = radial_3d(g, abs_tol=abs_tol, rel_tol=rel_tol, points=_breakpoints(D, C))
    return res.value


@lru_cache(maxsize=4096)
def _i4_excess(D: float, C: float, abs_tol: float = ABS_TOL, rel_tol: float = REL_TOL) -> float:
    """I4 - n_fc with ``D = d s^2`` and ``C = c s^2``."""
    if D == 0 and C == 0:
        return 0.0

    def g(p):
        q = p * p
        A = q + D
        E = np.sqrt(A * (A + 2 * C))
        with np.errstate(over="ignore", under="ignore"):
            return (A + C) / (E * np.expm1(E)) - 1.0 / np.expm1(q)

    res = radial_3d(g, abs_tol=abs_tol, rel_tol=rel_tol, points=_breakpoints(D, C))
    return res.value


def reduced_integral(kind: Kind | str, params: ReducedParams,
                     abs_tol: float = ABS_TOL, rel_tol: float = REL_TOL) -> float:
    """Evaluate I1, I2, I3 or I4 at ``params`` by radial quadrature.

    I1 and I3 ignore ``s``.  For I2 and I4 the value at ``s = 0`` is the free
    gas limit (f_min and n_fc respectively).
    """
    kind = Kind(kind)
    c = params.coupling
    tol = (float(abs_tol), float(rel_tol))
    try:
        if kind is Kind.I1:
            return _i1(params.d, c, *tol)
        if kind is Kind.I3:
            return _i3(params.d, c, *tol)
        consts = free_gas_constants()
        s2 = params.s ** 2
        if kind is Kind.I2:
            return consts.f_min + _i2_excess(params.d * s2, c * s2, *tol)
        return consts.n_fc + _i4_excess(params.d * s2, c * s2, *tol)
    except QuadratureError as exc:
        raise QuadratureError(f"{kind.value}{params}: {exc}", value=exc.value,
                              error_estimate=exc.error_estimate,
                              evaluations=exc.evaluations,
                              abscissa=exc.abscissa) from exc


def I1(d, sigma=8 * math.pi, theta=0.0):
    return reduced_integral(Kind.I1, ReducedParams(d, sigma, theta))


def I2(d, sigma=8 * math.pi, theta=0.0, s=0.0):
    return reduced_integral(Kind.I2, ReducedParams(d, sigma, theta, s))


def I3(d, sigma=8 * math.pi, theta=0.0):
    return reduced_integral(Kind.I3, ReducedParams(d, sigma, theta))


def I4(d, sigma=8 * math.pi, theta=0.0, s=0.0):
    return reduced_integral(Kind.I4, ReducedParams(d, sigma, theta, s))


def reduced_integral_asymptotic(kind: AsymptoticKind | str, params: ReducedParams) -> float:
    """Truncated expansions of the reduced integrals.

    ``I2_moderate`` and ``I4_moderate`` are the small-``s`` expansions,

        I4 ~ n_fc - s/(8 pi) (sqrt(d + 2c) + sqrt(d))
        I2 ~ f_min + s^2 n_fc (d + c) - s^3/(12 pi) ((d + 2c)^(3/2) + d^(3/2))

    with ``c = (1 + theta) sigma``.  The ``*_smallphi`` kinds are the leading
    terms of the density and energy integrals as the interaction range goes to
    zero, which are I3 and I1 themselves.
    """
    kind = AsymptoticKind(kind)
    consts = free_gas_constants()
    d, c, s = params.d, params.coupling, params.s
    if kind is AsymptoticKind.I4_MODERATE:
        return consts.n_fc - s / (8 * math.pi) * (math.sqrt(d + 2 * c) + math.sqrt(d))
    if kind is AsymptoticKind.I2_MODERATE:
        return (consts.f_min + s * s * consts.n_fc * (d + c)
                - s ** 3 / (12 * math.pi) * ((d + 2 * c) ** 1.5 + d ** 1.5))
    if kind is AsymptoticKind.I1_SMALLPHI:
        return _i1(d, c)
    return _i3(d, c)


def pairing_defect_integral(params: ReducedParams, T: float, phi: float,
                            abs_tol: float = 1e-12, rel_tol: float = 1e-10) -> float:
    """``int f(p) dp`` over R^3 for the pairing defect with an ideal kernel.

    ``f = c (beta/(T G) - 1/(2 p^2))`` with ``c = (1 + theta) sigma phi^2`` the
    effective pairing strength and ``delta = d phi^2``.
    """
    if not (phi > 0 and T > 0):
        raise DomainError("phi and T must be positive")
    c = params.coupling * phi * phi
    delta = params.d * phi * phi
    if c == 0:
        return 0.0

    def g(p):
        q = p * p
        A = q + delta
        S = np.sqrt(A * (A + 2 * c))
        q_minus_s = -(2 * q * delta + delta * delta + 2 * A * c) / (q + S)
        vacuum = 0.5 * c * q_minus_s / S           # p^2 * c/2 * (1/S - 1/p^2)
        with np.errstate(over="ignore"):
            thermal = q * c / (S * np.expm1(S / T))
        return vacuum + thermal

    scale = max(math.sqrt(T), math.sqrt(c), math.sqrt(delta) if delta else 0.0)
    res = integrate_radial(g, abs_tol=abs_tol, rel_tol=rel_tol,
                           decay_hint=PowerDecay(2), scale=scale,
                           points=_breakpoints(c, delta, T))
    return 4 * math.pi * res.value


def pairing_defect_limit(params: ReducedParams, T: float, phi: float) -> float:
    """Leading behaviour of :func:`pairing_defect_integral` for phi^2/T -> 0."""
    c = params.coupling
    if c == 0:
        return 0.0
    return T * phi * c * 2 * math.pi ** 2 / (math.sqrt(params.d + 2 * c) + math.sqrt(params.d))


def log_expansion_gap(delta0: float, b: float) -> float:
    """Gap between the thermal log integral and its first order expansion in b.

    Returns ``|int ln(1 - exp(-E)) - int ln(1 - exp(-A)) - b int (exp(A) - 1)^-1|``
    over R^3, with ``A = p^2 + delta0`` and ``E = sqrt(A^2 + 2 A b)``.
    """
    if not (0 <= delta0 <= 1 and 0 <= b <= 1):
        raise DomainError("delta0 and b must lie in [0, 1]")
    if b == 0:
        return 0.0

    def g(p):
        q = p * p
        A = q + delta0
        E = np.sqrt(A * (A + 2 * b))
        with np.errstate(over="ignore", under="ignore"):
            return q * (np.log(np.expm1(-E) / np.expm1(-A)) - b / np.expm1(A))

    res = integrate_radial(g, abs_tol=1e-14, rel_tol=1e-11,
                           points=_breakpoints(b, delta0))
    return abs(4 * math.pi * res.value)
