"""Zero-energy s-wave scattering for repulsive radial potentials.

Solves ``u'' = V(r) u / 2`` (units hbar = 2m = 1, so the two-body reduced
mass gives the factor 1/2) with ``u(0) = 0``.  Outside the potential
``u`` is linear, ``u = A (r - a)``, which defines the scattering length a and
the normalisation ``w(r) = u(r) / (A r) -> 1``.

Two families are supported because each has an independent check:
the square barrier has a closed-form a, and the Gaussian has a closed-form
Fourier transform.  The square barrier has a sign-changing transform and is
therefore marked as unsuitable for the thermodynamic kernel.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np
from scipy.integrate import simpson

from .errors import ConvergenceError, DomainError
from .functional import Kernel

STEPS_PER_RANGE = 2000
DEFAULT_RANGE_FACTOR = 20.0
# Gaussian tail below this fraction of V0 is treated as zero.
_GAUSSIAN_CUTOFF = 1e-40
_LINEARITY_TOL = 1e-9


class Family(str, enum.Enum):
    SQUARE_BARRIER = "square"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PotentialModel:
    family: Family
    V0: float
    R: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (self.V0 > 0 and self.R > 0):
            raise DomainError(f"V0 and R must be positive, got V0={self.V0}, R={self.R}")

    @classmethod
    def square_barrier(cls, V0: float, R: float) -> "PotentialModel":
        return cls(Family.SQUARE_BARRIER, V0, R)

    @classmethod
    def gaussian(cls, V0: float, R: float) -> "PotentialModel":
        return cls(Family.GAUSSIAN, V0, R)

    @property
    def thermo_admissible(self) -> bool:
        """True when the transform is non-negative, as the free-energy kernel requires."""
        return self.family is Family.GAUSSIAN

    @property
    def support(self) -> float:
        """Radius beyond which V is zero (or negligible for the Gaussian)."""
        if self.family is Family.SQUARE_BARRIER:
            return self.R
        return self.R * math.sqrt(max(math.log(1.0 / _GAUSSIAN_CUTOFF), 1.0))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.family is Family.SQUARE_BARRIER:
            return np.where(r < self.R, self.V0, 0.0)
        return self.V0 * np.exp(-(r / self.R) ** 2)

    def segments(self, r_max: float) -> List[Tuple[float, float, Callable]]:
        """Intervals on which V is smooth, each with its own evaluator."""
        if self.family is Family.SQUARE_BARRIER:
            inside = lambda r: np.full(np.shape(r), self.V0)
            outside = lambda r: np.zeros(np.shape(r))
            if r_max <= self.R:
                return [(0.0, r_max, inside)]
            return [(0.0, self.R, inside), (self.R, r_max, outside)]
        return [(0.0, r_max, self)]

    def integral(self) -> float:
        """Closed-form ``int V d^3x``."""
        if self.family is Family.SQUARE_BARRIER:
            return 4 * math.pi / 3 * self.V0 * self.R ** 3
        return self.V0 * math.pi ** 1.5 * self.R ** 3


def parse_potential(text: str) -> PotentialModel:
    """Parse ``square:V0,R`` or ``gaussian:V0,R``."""
    try:
        name, args = text.split(":", 1)
        V0, R = (float(x) for x in args.split(","))
        return PotentialModel(Family(name.strip().lower()), V0, R)
    except (ValueError, TypeError) as exc:
        raise DomainError(f"bad potential {text!r}; expected square:V0,R or gaussian:V0,R") from exc


@dataclass(frozen=True)
class ScatteringResult:
    potential: PotentialModel
    a: float
    v_hat_zero: float
    nu: float
    r: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    segment_slices: Tuple[slice, ...] = field(repr=False)
    refinement_error: float = 0.0

    @property
    def w_table(self) -> np.ndarray:
        """Two-column array of (r, w(r)); the origin row uses the limit w(0) = u'(0)/A."""
        return np.column_stack([self.r, self.w])

    @property
    def thermo_admissible(self) -> bool:
        return self.potential.thermo_admissible


def _rk4_segment(V, r0, r1, n, u0, v0):
    """Fixed-step RK4 for (u, u') on [r0, r1] with n steps; returns node values."""
    h = (r1 - r0) / n
    r = r0 + h * np.arange(n + 1)
    Vl = V(r)
    Vm = V(r[:-1] + 0.5 * h)
    u = np.empty(n + 1)
    v = np.empty(n + 1)
    u[0], v[0] = u0, v0
    for i in range(n):
        ui, vi = u[i], v[i]
        a0, am, a1 = 0.5 * Vl[i], 0.5 * Vm[i], 0.5 * Vl[i + 1]
        k1u, k1v = vi, a0 * ui
        k2u, k2v = vi + 0.5 * h * k1v, am * (ui + 0.5 * h * k1u)
        k3u, k3v = vi + 0.5 * h * k2v, am * (ui + 0.5 * h * k2u)
        k4u, k4v = vi + h * k3v, a1 * (ui + h * k3u)
        u[i + 1] = ui + h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v[i + 1] = vi + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return r, u, v


def _integrate(potential: PotentialModel, r_max: float, step: float):
    rs, us, slices = [], [], []
    u0, v0 = 0.0, 1.0
    start = 0
    for r0, r1, V in potential.segments(r_max):
        if potential.family is Family.GAUSSIAN and r1 > potential.support:
            # Beyond the support the solution is exactly linear.
            pieces = [(r0, potential.support, V), (potential.support, r1, None)]
        else:
            pieces = [(r0, r1, V)]
        for p0, p1, Vp in pieces:
            n = max(2, int(math.ceil((p1 - p0) / step)))
            n += n % 2                                  # even count for Simpson
            if Vp is None:
                r = p0 + (p1 - p0) / n * np.arange(n + 1)
                u = u0 + v0 * (r - p0)
                v = np.full(n + 1, v0)
            else:
                r, u, v = _rk4_segment(Vp, p0, p1, n, u0, v0)
            slices.append(slice(start, start + n + 1))
            start += n + 1
            rs.append(r)
            us.append(u)
            u0, v0 = u[-1], v[-1]
    return np.concatenate(rs), np.concatenate(us), tuple(slices)


def _fit_tail(r, u, r_max):
    mask = r >= 0.8 * r_max
    slope, intercept = np.polyfit(r[mask], u[mask], 1)
    resid = np.max(np.abs(u[mask] - (slope * r[mask] + intercept)))
    if resid > _LINEARITY_TOL * np.max(np.abs(u[mask])):
        raise ConvergenceError(
            f"solution not linear on [0.8 r_max, r_max] (r_max={r_max}); fitted slope "
            f"{slope:.6g}, max deviation {resid:.3g}: increase r_max")
    return slope, -intercept / slope


def solve_scattering(potential: PotentialModel, r_max: float | None = None,
                     step: float | None = None, check_refinement: bool = True) -> ScatteringResult:
    """Scattering length and normalised zero-energy solution.

    ``r_max`` defaults to 20 R and ``step`` to R/2000.  With
    ``check_refinement`` the solve is repeated at half the step and the
    difference in a is stored as ``refinement_error``.
    """
    r_max = DEFAULT_RANGE_FACTOR * potential.R if r_max is None else float(r_max)
    step = potential.R / STEPS_PER_RANGE if step is None else float(step)
    if not (r_max > 0 and step > 0):
        raise DomainError("r_max and step must be positive")
    r, u, slices = _integrate(potential, r_max, step)
    A, a = _fit_tail(r, u, r_max)
    refinement = 0.0
    if check_refinement:
        r2, u2, _ = _integrate(potential, r_max, step / 2)
        _, a2 = _fit_tail(r2, u2, r_max)
        refinement = abs(a2 - a)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(r > 0, u / (A * np.where(r > 0, r, 1.0)), 1.0 / A)
    vhat0 = potential.integral()
    return ScatteringResult(potential, a, vhat0, vhat0 / a, r, w, slices, refinement)


def ode_residual(potential: PotentialModel, r_max: float | None = None,
                 step: float | None = None) -> float:
    """Largest change of u at shared nodes when the step is halved, relative to max |u|."""
    r_max = DEFAULT_RANGE_FACTOR * potential.R if r_max is None else float(r_max)
    step = potential.R / STEPS_PER_RANGE if step is None else float(step)
    r1, u1, _ = _integrate(potential, r_max, step)
    r2, u2, _ = _integrate(potential, r_max, step / 2)
    u2_on_r1 = np.interp(r1, r2, u2)      # r1 nodes are a subset of r2 nodes
    return float(np.max(np.abs(u1 - u2_on_r1)) / np.max(np.abs(u1)))


def _sinc(x):
    return np.sinc(x / math.pi)


def _radial_transform(result_or_pot, weights_fn, p, chunk=256):
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if np.any(p < 0):
        raise DomainError("momentum must be >= 0")
    out = np.zeros(p.shape)
    flat = p.ravel()
    res = np.zeros(flat.size)
    for r, g in weights_fn():
        for i in range(0, flat.size, chunk):
            pc = flat[i:i + chunk]
            res[i:i + chunk] += simpson(g[None, :] * _sinc(pc[:, None] * r[None, :]), x=r, axis=1)
    out[...] = res.reshape(p.shape)
    return out


def potential_fourier(potential: PotentialModel, p, r_max: float | None = None):
    """``V^(p) = 4 pi int V(r) r^2 sinc(p r) dr`` by Simpson quadrature."""
    scalar = np.ndim(p) == 0
    r_max = potential.support if r_max is None else r_max

    def weights():
        for r0, r1, V in potential.segments(min(r_max, potential.support)):
            n = 2 * max(1, int(math.ceil((r1 - r0) / potential.R * STEPS_PER_RANGE / 2)))
            r = r0 + (r1 - r0) / n * np.arange(n + 1)
            yield r, 4 * math.pi * V(r) * r * r

    out = _radial_transform(potential, weights, p)
    return float(out[0]) if scalar else out


def gaussian_fourier(V0: float, R: float, p):
    """Closed-form transform of ``V0 exp(-r^2/R^2)``."""
    return V0 * math.pi ** 1.5 * R ** 3 * np.exp(-(np.asarray(p) * R) ** 2 / 4)


def vw_kernel(result: ScatteringResult, p):
    """``(Vw)^(p) = 4 pi int V(r) w(r) r^2 sinc(p r) dr`` on the solver grid."""
    scalar = np.ndim(p) == 0
    pot = result.potential

    def weights():
        for sl in result.segment_slices:
            r = result.r[sl]
            if r[0] >= pot.support:
                continue
            Vseg = pot(r) if pot.family is Family.GAUSSIAN else np.full(r.shape, pot.V0)
            yield r, 4 * math.pi * Vseg * result.w[sl] * r * r

    out = _radial_transform(result, weights, p)
    return float(out[0]) if scalar else out


def vw_squared_integral(result: ScatteringResult) -> float:
    """``int V w^2 d^3x`` on the solver grid."""
    pot = result.potential
    total = 0.0
    for sl in result.segment_slices:
        r = result.r[sl]
        if r[0] >= pot.support:
            continue
        Vseg = pot(r) if pot.family is Family.GAUSSIAN else np.full(r.shape, pot.V0)
        total += simpson(4 * math.pi * Vseg * result.w[sl] ** 2 * r * r, x=r)
    return float(total)


def scattering_kernel(result: ScatteringResult) -> Kernel:
    """Adapter so a scattering solution can drive the simplified functional."""
    if not result.thermo_admissible:
        raise DomainError(
            f"{result.potential.family.value} potential has a sign-changing transform "
            "and cannot be used as a free-energy kernel")

    def kernel(p):
        return vw_kernel(result, p)

    kernel.value_at_zero = vw_kernel(result, 0.0)
    return kernel
