"""Adaptive Gauss-Kronrod quadrature for radial integrals on [0, inf).

Every momentum integral in the package is a three dimensional integral of a
radial function, reduced to ``4*pi * int_0^inf p**2 g(p) dp``.  The routines
here only see the one dimensional radial integrand; callers supply the
measure.

The engine is a globally adaptive (7, 15) Gauss-Kronrod scheme with the
QUADPACK error heuristic.  Integrands are evaluated on whole arrays of
abscissae, so they must accept and return numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import QuadratureError

DEFAULT_ABS_TOL = 1e-10
DEFAULT_REL_TOL = 1e-8
MAX_PANELS = 4000

# Kronrod abscissae on [-1, 1] (positive half, descending) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss weights for the 7-point rule living on _XGK[1], _XGK[3], _XGK[5], _XGK[7].
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 15 nodes, ascending
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[7] = _WG[3]
_WG15[[9, 11, 13]] = _WG[2::-1]

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class PowerDecay:
    """Integrand falls off like ``p**-n`` (after the radial measure)."""

    n: float


EXPONENTIAL = "exponential"
DecayHint = Union[str, PowerDecay]


def _call(f, x):
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape).astype(float)
    bad = ~np.isfinite(y)
    if bad.any():
        where = float(x.flat[np.argmax(bad)])
        raise QuadratureError(
            f"integrand returned a non-finite value at p={where!r}", abscissa=where)
    return y


def _gk15(f, a, b):
    """Apply the 15-point rule on every panel [a_i, b_i] in one integrand call."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = center[:, None] + half[:, None] * _NODES[None, :]
    y = _call(f, x)
    resk = half * (y @ _WK)
    resg = half * (y @ _WG15)
    mean = 0.5 * resk / np.where(half != 0, half, 1.0)
    resasc = np.abs(half) * (np.abs(y - mean[:, None]) @ _WK)
    resabs = np.abs(half) * (np.abs(y) @ _WK)
    err = np.abs(resk - resg)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPS * resabs
    err = np.where(resabs > _TINY / (50.0 * _EPS), np.maximum(floor, err), err)
    return resk, err


def integrate_interval(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                       abs_tol: float = DEFAULT_ABS_TOL,
                       rel_tol: float = DEFAULT_REL_TOL,
                       points: Sequence[float] = (),
                       max_panels: int = MAX_PANELS) -> QuadratureResult:
    """Adaptive integral of a vectorised ``f`` over the finite interval [a, b]."""
    if not (abs_tol > 0 and rel_tol > 0):
        raise ValueError("abs_tol and rel_tol must be positive")
    edges = sorted({a, b, *(p for p in points if a < p < b)})
    lo = np.array(edges[:-1], dtype=float)
    hi = np.array(edges[1:], dtype=float)
    vals, errs = _gk15(f, lo, hi)
    nevals = 15 * lo.size
    while True:
        total = float(vals.sum())
        err_total = float(errs.sum())
        target = max(abs_tol, rel_tol * abs(total))
        if err_total <= target:
            return QuadratureResult(total, err_total, nevals)
        if lo.size >= max_panels:
            raise QuadratureError(
                f"no convergence after {lo.size} panels "
                f"(estimate {total!r}, error {err_total:.3g}, target {target:.3g})",
                value=total, error_estimate=err_total, evaluations=nevals)
        # Split the worst panels until what is left is comfortably under target.
        order = np.argsort(-errs, kind="stable")
        remaining = err_total - np.cumsum(errs[order])
        nsplit = int(np.searchsorted(-remaining, -0.5 * target)) + 1
        nsplit = min(nsplit, order.size, max_panels - lo.size)
        split = order[:max(nsplit, 1)]
        keep = np.ones(lo.size, dtype=bool)
        keep[split] = False
        mid = 0.5 * (lo[split] + hi[split])
        if np.any((mid <= lo[split]) | (mid >= hi[split])):
            raise QuadratureError(
                f"panel width underflow (estimate {total!r}, error {err_total:.3g})",
                value=total, error_estimate=err_total, evaluations=nevals)
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        nv, ne = _gk15(f, new_lo, new_hi)
        nevals += 15 * new_lo.size
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        # Sorting by left edge keeps the summation order independent of history.
        idx = np.argsort(lo, kind="stable")
        lo, hi, vals, errs = lo[idx], hi[idx], vals[idx], errs[idx]


def _exponential_cutoff(f, abs_tol, scale):
    cutoff = scale * math.sqrt(math.log(1.0 / abs_tol) + 10.0)
    for _ in range(40):
        tail = abs(float(_call(f, np.array([cutoff]))[0])) * scale
        if tail <= abs_tol / 10.0:
            return cutoff
        cutoff *= 1.5
    raise QuadratureError(
        f"integrand not decaying: |f({cutoff:.3g})|*scale = {tail:.3g}",
        abscissa=cutoff)


def integrate_radial(f: Callable[[np.ndarray], np.ndarray],
                     abs_tol: float = DEFAULT_ABS_TOL,
                     rel_tol: float = DEFAULT_REL_TOL,
                     decay_hint: DecayHint = EXPONENTIAL,
                     scale: float = 1.0,
                     points: Sequence[float] = ()) -> QuadratureResult:
    """Integrate ``f`` over [0, inf).

    Parameters
    ----------
    f : callable
        Vectorised integrand.  It is never evaluated at p = 0, so integrable
        endpoint singularities are fine.
    abs_tol, rel_tol : float
        Requested accuracy; the result satisfies
        ``error_estimate <= max(abs_tol, rel_tol*|value|)``.
    decay_hint : "exponential" or PowerDecay
        With exponential decay the range is truncated at a cutoff where the
        integrand is below ``abs_tol/10``.  With power decay ``p**-n`` (n > 1)
        the tail beyond ``scale`` is mapped onto (0, 1] by ``p = scale/u``.
    scale : float
        Characteristic momentum of the integrand (thermal or gap scale).
    points : sequence of float
        Extra breakpoints for the initial subdivision.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    if decay_hint == EXPONENTIAL:
        cutoff = _exponential_cutoff(f, abs_tol, scale)
        return integrate_interval(f, 0.0, cutoff, abs_tol, rel_tol,
                                  points=[*points, scale])
    if isinstance(decay_hint, PowerDecay):
        if decay_hint.n <= 1:
            raise ValueError("power decay needs n > 1 for a finite integral")
        inner = integrate_interval(f, 0.0, scale, abs_tol / 2, rel_tol,
                                   points=[p for p in points if p < scale])

        def mapped(u):
            return f(scale / u) * (scale / (u * u))

        inv_points = [scale / p for p in points if p > scale]
        outer = integrate_interval(mapped, 0.0, 1.0, abs_tol / 2, rel_tol,
                                   points=inv_points)
        return QuadratureResult(inner.value + outer.value,
                                inner.error_estimate + outer.error_estimate,
                                inner.evaluations + outer.evaluations)
    raise ValueError(f"unknown decay hint {decay_hint!r}")


def radial_3d(f: Callable[[np.ndarray], np.ndarray], **kwargs) -> QuadratureResult:
    """``(2 pi)^-3 * int d^3p g(|p|)`` for a radial ``g``: ``(2 pi^2)^-1 int p^2 g dp``."""

    def weighted(p):
        return p * p * f(p)

    res = integrate_radial(weighted, **kwargs)
    c = 1.0 / (2.0 * math.pi ** 2)
    return QuadratureResult(c * res.value, c * res.error_estimate, res.evaluations)
