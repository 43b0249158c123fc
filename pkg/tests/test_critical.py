import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from dilutebose import critical as cr
from dilutebose.errors import ConvergenceError, DomainError
from dilutebose.freegas import free_gas_constants, zeta

EIGHT_PI = cr.EIGHT_PI
N_FC = free_gas_constants().n_fc

# Frozen from tests/oracles.py (mpmath root finding on the stationarity/tie equations).
K_C = -1.27901322003773093876829638801277
SIGMA_C = 1.83403030579164612710890881428899
MAXWELL = dict(c=0.226375593863235337611257109535009, k_minus=-2.22557281575346592444026690737571,
               k_plus=3.03719354766331952264963990539628, g_min=-0.270183396642470099101214323404329,
               sigma_plus=9.51926493502411053659126956107202)


def test_frozen_values_match_oracle():
    k, s = oracles.critical_point()
    assert float(k) == pytest.approx(K_C, rel=1e-15)
    assert float(s) == pytest.approx(SIGMA_C, rel=1e-15)
    got = [float(x) for x in oracles.maxwell()]
    assert got == pytest.approx([MAXWELL[key] for key in
                                 ("c", "k_minus", "k_plus", "g_min", "sigma_plus")], rel=1e-15)


def test_tau_examples():
    assert cr.tau_self_consistent(3.0, 0.0) == 0.0
    assert cr.tau_self_consistent(0.0, 1.0) == pytest.approx(1 - math.sqrt(3), abs=1e-10)
    assert abs(cr.tau_self_consistent(1e12, 2.0)) < 1e-5
    with pytest.raises(DomainError):
        cr.tau_self_consistent(-1.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1e4), st.floats(0.0, 1e3))
def test_tau_root_property(d, sigma):
    tau = cr.tau_self_consistent(d, sigma)
    assert -sigma <= tau <= 0
    scale = 1 + sigma + math.sqrt(d) * sigma
    assert abs(cr.tau_residual(tau, d, sigma)) <= 1e-12 * scale


def test_feasible_interval():
    assert cr.feasible_interval(-1.0) == (0.0, math.inf)
    assert cr.feasible_interval(0.0) == (0.0, math.inf)
    assert cr.feasible_interval(2.0) == (4.0, math.inf)


def test_change_of_variables_examples():
    sol = cr.change_of_variables(1.83, -1.28)
    assert sol.feasible
    assert sol.tau == pytest.approx(3.66 / -5.11, rel=1e-12)
    assert cr.tau_self_consistent(sol.d, 1.83) == pytest.approx(sol.tau, abs=1e-10)
    zero = cr.change_of_variables(0.0, -3.0)
    assert zero.tau == 0 and zero.d == pytest.approx(9.0 / 4, rel=1e-14)
    edge = cr.change_of_variables(2.0 + 2.0, 2.0)
    assert edge.d == pytest.approx(0.0, abs=1e-12)
    assert cr.change_of_variables(0.0, 0.0) == cr.CriticalSolution(True, 0.0, 0.0)
    assert not cr.change_of_variables(1.0, 2.0).feasible


def _feasible_pairs(n, seed):
    rng = np.random.default_rng(seed)
    ks = rng.uniform(-10, 10, n)
    lo = np.array([cr.feasible_interval(k)[0] for k in ks])
    sig = lo + rng.exponential(5.0, n)
    return list(zip(sig, ks))


def test_round_trip_on_random_samples():
    for sigma, k in _feasible_pairs(100, 7):
        sol = cr.change_of_variables(sigma, k)
        assert sol.feasible and -sigma <= sol.tau <= 0
        assert abs(cr.tau_residual(sol.tau, sol.d, sigma)) < 1e-9
        lhs = math.sqrt(sol.d + 2 * (sigma + sol.tau)) + math.sqrt(sol.d)
        assert abs(lhs - (sigma - k)) < 1e-9


def test_reduced_energy_examples():
    assert cr.reduced_free_energy(cr.CriticalCoordinates(-1.28, 0.0)) == pytest.approx(
        1.28 ** 3 / (96 * math.pi), rel=1e-14)
    at_zero = cr.reduced_free_energy(cr.CriticalCoordinates(-1.28, 0.0))
    at_jump = cr.reduced_free_energy(cr.CriticalCoordinates(-1.28, 1.83))
    assert at_jump == pytest.approx(at_zero, abs=1e-3)
    with pytest.raises(DomainError):
        cr.reduced_free_energy(cr.CriticalCoordinates(2.0, 1.0))
    with pytest.raises(DomainError):
        cr.CriticalCoordinates(0.0, 1.0, nu=20.0)


def test_sigma_zero_value_independent_of_nu():
    for k in (-3.0, -1.0, 0.0):
        vals = [cr.reduced_free_energy(cr.CriticalCoordinates(k, 0.0, nu))
                for nu in np.linspace(EIGHT_PI, 100, 20)]
        assert np.ptp(vals) == 0
        assert vals[0] == pytest.approx((-k) ** 3 / (96 * math.pi), abs=1e-15)


@pytest.mark.parametrize("k,sigma", [(-1.0, 0.7), (1.0, 5.0), (-2.5, 3.3)])
def test_reduced_energy_against_oracle(k, sigma):
    for nu in (EIGHT_PI, 40.0):
        got = cr.reduced_free_energy(cr.CriticalCoordinates(k, sigma, nu))
        assert got == pytest.approx(float(oracles.reduced_f(k, sigma, nu)), rel=1e-13)


def test_minimizer_examples():
    assert cr.minimize_reduced(-1.35)[0] == 0.0
    assert cr.minimize_reduced(-1.20)[0] > 0
    pair = cr.minimizers(K_C, tol=1e-6)
    assert len(pair) == 2 and pair[0] == 0.0 and pair[1] == pytest.approx(1.83, abs=0.01)


def test_critical_k_and_sigma():
    assert cr.critical_k(EIGHT_PI) == pytest.approx(K_C, abs=2e-6)
    assert cr.critical_sigma(EIGHT_PI) == pytest.approx(SIGMA_C, abs=1e-5)


def test_critical_k_decreases_with_nu():
    ks = [cr.critical_k(nu) for nu in (EIGHT_PI, 30.0, 40.0, 60.0, 100.0)]
    assert np.all(np.diff(ks) < 0)
    with pytest.raises(DomainError):
        cr.critical_k(20.0)


def test_shift_constants():
    coeff = cr.density_shift_coefficient(EIGHT_PI)
    assert coeff == pytest.approx(-K_C / EIGHT_PI * N_FC ** (-4 / 3), rel=1e-5)
    assert coeff == pytest.approx(2.24, abs=0.01)
    assert cr.h1(EIGHT_PI) == pytest.approx(1.49, abs=0.01)
    hs = [cr.h1(nu) for nu in (EIGHT_PI, 30.0, 40.0, 60.0)]
    assert np.all(np.diff(hs) > 0)


def test_grand_canonical_curve_examples():
    # At k = 0 the tilt and sigma = 0 terms vanish, but k = 0 lies above k_c,
    # so the interior minimiser is strictly lower than the sigma = 0 value.
    assert cr.reduced_free_energy(cr.CriticalCoordinates(0.0, 0.0)) == 0.0
    sigma, value = cr.minimize_reduced(0.0)
    assert sigma > 0 and value < 0
    for c in (0.0, 0.7):
        assert cr.grand_canonical_curve(0.0, EIGHT_PI, c) == value
    assert cr.grand_canonical_curve(-2.23, EIGHT_PI, 0.226) == pytest.approx(-0.27, abs=0.01)
    h = 1e-4
    g = lambda k: cr.grand_canonical_curve(k, EIGHT_PI, 0.226)
    left = (g(K_C) - g(K_C - h)) / h
    right = (g(K_C + h) - g(K_C)) / h
    assert right < left - 0.05


def test_curve_vectorised():
    ks = np.array([-2.0, 0.0, 2.0])
    vec = cr.grand_canonical_curve(ks, 30.0, 0.3)
    assert vec.shape == (3,)
    assert vec[2] == pytest.approx(cr.grand_canonical_curve(2.0, 30.0, 0.3))


def test_maxwell_construction_matches_oracle():
    mx = cr.maxwell_construction(EIGHT_PI)
    for key, value in MAXWELL.items():
        assert getattr(mx, key) == pytest.approx(value, rel=1e-6, abs=1e-7)
    gm = cr.grand_canonical_curve(mx.k_minus, EIGHT_PI, mx.c)
    gp = cr.grand_canonical_curve(mx.k_plus, EIGHT_PI, mx.c)
    assert abs(gm - gp) < 1e-8
    assert mx.k_minus <= cr.critical_k() <= mx.k_plus


def test_first_order_jump_of_global_minimizer():
    ks = np.linspace(-4, 5, 901)
    below = cr.grand_canonical_curve(ks, EIGHT_PI, MAXWELL["c"] - 0.01)
    above = cr.grand_canonical_curve(ks, EIGHT_PI, MAXWELL["c"] + 0.01)
    # A smaller tilt favours large k; the argmin jumps across the band.
    assert ks[np.argmin(below)] > 2.5
    assert ks[np.argmin(above)] < -2.0


def test_hull_is_flat_between_minima():
    mx = cr.maxwell_construction()
    ks = np.linspace(mx.k_minus + 0.1, mx.k_plus - 0.1, 7)
    assert np.allclose(cr.hull(ks), mx.g_min)
    outside = np.array([-5.0, 5.0])
    assert np.allclose(cr.hull(outside), cr.grand_canonical_curve(outside, EIGHT_PI, mx.c))
    g = cr.grand_canonical_curve(ks, EIGHT_PI, mx.c)
    assert np.all(cr.hull(ks) <= g + 1e-12)


def test_maxwell_supported_range():
    for nu in (30.0, 40.0):
        mx = cr.maxwell_construction(nu)
        assert mx.k_minus < mx.k_plus
    with pytest.raises(ConvergenceError):
        cr.maxwell_construction(cr.NU_MAX + 1)


def test_grand_canonical_shift():
    assert cr.h2(EIGHT_PI) == pytest.approx(0.44, abs=0.01)
    factor = math.sqrt(math.pi) / (2 * zeta(1.5))
    assert cr.h2() == pytest.approx(2 / 3 * MAXWELL["c"] * EIGHT_PI * factor ** 2, rel=1e-6)
    shift = cr.h2_and_mu_c(EIGHT_PI, 1.0, 1e-3)
    rho_fc = N_FC
    assert shift.mu_c == pytest.approx(2 * EIGHT_PI * rho_fc * 1e-3 - EIGHT_PI * shift.c * 1e-6)
    assert shift.valid
    assert not cr.h2_and_mu_c(EIGHT_PI, 100.0, 0.05).valid
    with pytest.raises(DomainError):
        cr.h2_and_mu_c(EIGHT_PI, 0.0, 1e-3)


def test_temperature_of_mu_leading_term():
    mu, a = 1e-6, 1e-3
    lead = (math.sqrt(math.pi) / (2 * zeta(1.5))) ** (2 / 3) * (mu / a) ** (2 / 3)
    assert cr.critical_temperature_of_mu(mu, a) == pytest.approx(lead + cr.h2() * mu, rel=1e-12)
    assert cr.critical_temperature_of_mu(mu, a, 40.0) < cr.critical_temperature_of_mu(mu, a)
