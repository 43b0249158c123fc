"""Occupation profiles that minimise the simplified Bogoliubov functional.

The simplified functional is quadratic-plus-entropy in the pair (gamma, alpha)
of momentum occupation and pairing densities, so its constrained minimiser
is explicit.  This module evaluates those closed forms pointwise, the value
of the minimum, and an independent quadrature of the functional for
arbitrary profiles that serves as a cross-check.

Everything is written in terms of a kernel ``p -> Vw^(p)``; the ideal kernel
is the constant ``8 pi a``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import DomainError
from .quadrature import PowerDecay, integrate_radial

Kernel = Callable[[np.ndarray], np.ndarray]
Profile = Callable[[np.ndarray], np.ndarray]


def ideal_kernel(a: float) -> Kernel:
    """Contact kernel ``Vw^(p) = 8 pi a`` for all p."""
    value = 8 * math.pi * a

    def kernel(p):
        return np.full(np.shape(p), value)

    kernel.value_at_zero = value
    return kernel


@dataclass(frozen=True)
class OccupationPair:
    gamma: float
    alpha: float

    def __post_init__(self):
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if self.alpha ** 2 > self.gamma * (self.gamma + 1) * (1 + 1e-12) + 1e-300:
            raise DomainError(
                f"alpha^2 = {self.alpha ** 2} exceeds gamma(gamma+1) = "
                f"{self.gamma * (self.gamma + 1)}")


@dataclass(frozen=True)
class SimplifiedContext:
    rho0: float
    t0: float
    delta: float
    T: float
    kernel: Kernel

    def __post_init__(self):
        if self.rho0 < 0:
            raise DomainError("rho0 must be >= 0")
        if not -self.rho0 <= self.t0 <= 0:
            raise DomainError(f"t0 must lie in [-rho0, 0], got {self.t0}")
        if self.delta < 0:
            raise DomainError("delta must be >= 0; negative multipliers are not supported")
        if self.T < 0:
            raise DomainError("T must be >= 0")

    @property
    def effective_density(self) -> float:
        return self.rho0 + self.t0


def _entropy_from_beta_minus_half(x, beta):
    # s(beta) = (beta+1/2) ln(beta+1/2) - (beta-1/2) ln(beta-1/2), x = beta - 1/2 >= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        xlogx = np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)
    return (beta + 0.5) * np.log(beta + 0.5) - xlogx


def entropy_array(gamma, alpha):
    """Vectorised entropy density s(beta) with beta^2 = (1/2 + gamma)^2 - alpha^2."""
    gamma = np.asarray(gamma, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    excess = gamma * (gamma + 1.0) - alpha * alpha      # beta^2 - 1/4
    excess = np.maximum(excess, 0.0)
    beta = np.sqrt(0.25 + excess)
    x = excess / (beta + 0.5)
    return _entropy_from_beta_minus_half(x, beta)


def entropy_density(pair: OccupationPair) -> float:
    """Entropy density of a single momentum mode; zero only for the vacuum."""
    return float(entropy_array(pair.gamma, pair.alpha))


def _radicand(p, ctx: SimplifiedContext):
    c = ctx.effective_density * ctx.kernel(p)
    A = p * p + ctx.delta
    rad = A * (A + 2 * c)
    if np.any(rad < 0):
        bad = np.atleast_1d(p)[np.argmax(np.atleast_1d(rad) < 0)]
        raise DomainError(f"negative dispersion radicand at p={float(bad)!r}; "
                          "the kernel violates the positivity assumptions")
    return A, c, np.sqrt(rad)


def dispersion_G(p, ctx: SimplifiedContext):
    """Quasi-particle energy in units of T: ``sqrt((p^2+delta)(p^2+delta+2 c(p)))/T``."""
    if not ctx.T > 0:
        raise DomainError("dispersion_G needs T > 0")
    p = np.asarray(p, dtype=float)
    _, _, S = _radicand(p, ctx)
    return S / ctx.T


def minimizer_profiles(ctx: SimplifiedContext) -> Tuple[Profile, Profile]:
    """Closed-form minimisers ``(gamma, alpha)`` as vectorised functions of p."""
    if not ctx.T > 0:
        raise DomainError("minimizer_profiles needs T > 0")
    T = ctx.T

    def parts(p):
        p = np.asarray(p, dtype=float)
        A, c, S = _radicand(p, ctx)
        with np.errstate(over="ignore"):
            bose = 1.0 / np.expm1(S / T)
        return A, c, S, bose

    def gamma(p):
        A, c, S, bose = parts(p)
        ratio_minus_one = c * c / (S * (A + c + S))    # (A + c)/S - 1
        return bose * (A + c) / S + 0.5 * ratio_minus_one

    def alpha(p):
        A, c, S, bose = parts(p)
        return -(bose + 0.5) * c / S

    return gamma, alpha


def beta_profile(ctx: SimplifiedContext) -> Profile:
    """beta(p) of the minimiser, equal to ``1/(exp(G)-1) + 1/2``."""

    def beta(p):
        with np.errstate(over="ignore"):
            return 1.0 / np.expm1(dispersion_G(p, ctx)) + 0.5

    return beta


def _momentum_scale(ctx: SimplifiedContext) -> float:
    c0 = abs(ctx.effective_density * float(np.atleast_1d(ctx.kernel(np.array([0.0])))[0]))
    return max(math.sqrt(ctx.T), math.sqrt(c0), math.sqrt(ctx.delta), 1e-300)


def evaluate_Fs(ctx: SimplifiedContext, pair_profiles: Tuple[Profile, Profile],
                abs_tol: float = 1e-13, rel_tol: float = 1e-11) -> float:
    """Simplified functional plus ``delta * rho_gamma`` for arbitrary profiles.

    The four terms are integrated as one integrand because, for a constant
    kernel, the pairing and ``Vw^2/p^2`` terms diverge separately.
    """
    gamma, alpha = pair_profiles
    T = ctx.T

    def integrand(p):
        g = gamma(p)
        al = alpha(p)
        c = ctx.effective_density * ctx.kernel(p)
        val = (p * p + ctx.delta + c) * g + c * al + 0.25 * c * c / (p * p)
        if T > 0:
            val = val - T * entropy_array(g, al)
        return p * p * val

    res = integrate_radial(integrand, abs_tol=abs_tol, rel_tol=rel_tol,
                           decay_hint=PowerDecay(2), scale=_momentum_scale(ctx))
    return res.value / (2 * math.pi ** 2)


def simplified_minimum(ctx: SimplifiedContext, abs_tol: float = 1e-13,
                       rel_tol: float = 1e-11) -> float:
    """Closed-form minimum of the simplified functional plus ``delta rho_gamma``.

    Sum of the thermal log integral ``T int ln(1 - exp(-G))`` and the zero
    temperature Bogoliubov term, both with the (2 pi)^-3 measure.
    """
    T = ctx.T

    def integrand(p):
        A, c, S = _radicand(p, ctx)
        q = p * p
        # 1/2 [S - (A + c) + c^2/(2 p^2)] = c^2 (S - q + delta + c) / (4 p^2 (S + A + c))
        s_minus_q = (2 * q * ctx.delta + ctx.delta ** 2 + 2 * A * c) / (S + q)
        vac = c * c * (s_minus_q + ctx.delta + c) / (4 * (S + A + c))
        if T > 0:
            with np.errstate(under="ignore"):
                vac = vac + q * T * np.log(-np.expm1(-S / T))
        return vac

    res = integrate_radial(integrand, abs_tol=abs_tol, rel_tol=rel_tol,
                           decay_hint=PowerDecay(2), scale=_momentum_scale(ctx))
    return res.value / (2 * math.pi ** 2)


def euler_lagrange_residual(ctx: SimplifiedContext, p) -> np.ndarray:
    """Relative residual of the first stationarity condition at momenta p.

    Only meaningful where ``exp(-G)`` is resolvable against ``gamma`` in double
    precision (roughly G < 15); beyond that beta - 1/2 is lost to rounding.
    """
    p = np.asarray(p, dtype=float)
    gamma, alpha = minimizer_profiles(ctx)
    g, al = gamma(p), alpha(p)
    excess = g * (g + 1.0) - al * al
    beta = np.sqrt(0.25 + excess)
    x = excess / (beta + 0.5)                       # beta - 1/2
    A, c, _ = _radicand(p, ctx)
    lhs = A + c
    rhs = ctx.T * np.log1p(1.0 / x) * (g + 0.5) / beta
    return np.abs(lhs - rhs) / np.abs(lhs)
