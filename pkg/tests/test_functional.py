import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dilutebose import functional as fn
from dilutebose.errors import DomainError
from dilutebose.freegas import free_gas_constants

C = free_gas_constants()


def ctx(rho0=0.01 / 0.01, a=0.01, t0=0.0, delta=0.0, T=1.0):
    return fn.SimplifiedContext(rho0, t0, delta, T, fn.ideal_kernel(a))


def test_entropy_examples():
    assert fn.entropy_density(fn.OccupationPair(0.0, 0.0)) == 0.0
    assert fn.entropy_density(fn.OccupationPair(1.0, 0.0)) == pytest.approx(2 * math.log(2), rel=1e-14)
    with pytest.raises(DomainError):
        fn.OccupationPair(1.0, 1.5)
    with pytest.raises(DomainError):
        fn.OccupationPair(-0.1, 0.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 50.0), st.floats(0.0, 1.0))
def test_entropy_nonnegative_and_matches_definition(gamma, frac):
    alpha = -frac * math.sqrt(gamma * (gamma + 1))
    s = fn.entropy_density(fn.OccupationPair(gamma, alpha))
    beta = math.sqrt((0.5 + gamma) ** 2 - alpha ** 2)
    direct = (beta + 0.5) * math.log(beta + 0.5)
    if beta > 0.5 + 1e-12:
        direct -= (beta - 0.5) * math.log(beta - 0.5)
    assert s >= 0
    assert s == pytest.approx(direct, rel=1e-7, abs=1e-9)


def test_context_invariants():
    k = fn.ideal_kernel(0.01)
    with pytest.raises(DomainError):
        fn.SimplifiedContext(1.0, 0.5, 0.0, 1.0, k)
    with pytest.raises(DomainError):
        fn.SimplifiedContext(1.0, -2.0, 0.0, 1.0, k)
    with pytest.raises(DomainError):
        fn.SimplifiedContext(1.0, 0.0, -1.0, 1.0, k)
    assert fn.SimplifiedContext(1.0, -0.25, 0.0, 1.0, k).effective_density == 0.75


def test_dispersion_examples():
    p = np.array([0.1, 1.0, 3.0])
    free = ctx(rho0=0.0, delta=0.3, T=2.0)
    assert np.allclose(fn.dispersion_G(p, free), (p * p + 0.3) / 2.0, rtol=1e-14)
    c = ctx(rho0=1.0, a=0.01, T=1.0)
    small = 1e-5
    assert fn.dispersion_G(small, c) == pytest.approx(small * math.sqrt(16 * math.pi * 0.01), rel=1e-6)
    big = 1e4
    assert fn.dispersion_G(big, c) / big ** 2 == pytest.approx(1.0, rel=1e-6)
    with pytest.raises(DomainError):
        fn.dispersion_G(1.0, ctx(T=0.0))


def test_negative_radicand_names_momentum():
    bad = fn.SimplifiedContext(1.0, 0.0, 0.0, 1.0, lambda p: np.full(np.shape(p), -1.0))
    with pytest.raises(DomainError, match="p="):
        fn.dispersion_G(np.array([0.5, 2.0]), bad)


def test_free_profiles_reduce_to_bose_occupation():
    g, al = fn.minimizer_profiles(ctx(rho0=0.0, T=1.3))
    p = np.linspace(0.05, 4, 30)
    assert np.allclose(g(p), 1 / np.expm1(p * p / 1.3), rtol=1e-13)
    assert np.all(al(p) == 0)


@pytest.mark.parametrize("rho0,delta", [(1.0, 0.0), (0.5, 0.2), (3.0, 1.0)])
def test_profiles_inside_domain(rho0, delta):
    c = ctx(rho0=rho0, delta=delta)
    g, al = fn.minimizer_profiles(c)
    p = np.geomspace(1e-4, 1e2, 1000)
    gv, av = g(p), al(p)
    assert np.all(gv >= 0) and np.all(av <= 0)
    assert np.all(av ** 2 <= gv * (gv + 1) * (1 + 1e-12))


def test_large_momentum_asymptotics():
    c = ctx(rho0=1.0, a=0.01)
    g, al = fn.minimizer_profiles(c)
    p = 30.0
    assert al(p) / (-(8 * math.pi * 0.01) / (2 * p * p)) == pytest.approx(1.0, rel=1e-3)
    assert g(p) < 1e-5


def test_beta_matches_bose_relation():
    c = ctx(rho0=1.0, delta=0.1)
    g, al = fn.minimizer_profiles(c)
    p = np.geomspace(1e-2, 3, 50)
    beta_direct = np.sqrt((0.5 + g(p)) ** 2 - al(p) ** 2)
    assert np.allclose(fn.beta_profile(c)(p), beta_direct, rtol=1e-10)


def test_free_minimum_is_f_min():
    c = ctx(rho0=0.0, T=1.0)
    assert fn.simplified_minimum(c) == pytest.approx(C.f_min, rel=1e-10)
    assert fn.evaluate_Fs(c, fn.minimizer_profiles(c)) == pytest.approx(C.f_min, rel=1e-9)


@pytest.mark.parametrize("rho0,t0,delta,T,a", [
    (1.0, 0.0, 0.0, 1.0, 0.01),
    (0.4, -0.1, 0.3, 2.0, 0.02),
    (2.0, -1.0, 0.05, 0.5, 0.005),
    (5.0, 0.0, 1.0, 1.5, 0.001),
    (0.1, -0.05, 0.0, 3.0, 0.1),
])
def test_grid_evaluation_matches_closed_form(rho0, t0, delta, T, a):
    c = fn.SimplifiedContext(rho0, t0, delta, T, fn.ideal_kernel(a))
    closed = fn.simplified_minimum(c)
    grid = fn.evaluate_Fs(c, fn.minimizer_profiles(c))
    assert grid == pytest.approx(closed, rel=1e-8)
    p = np.geomspace(1e-3, 3, 200) * math.sqrt(T)
    p = p[fn.dispersion_G(p, c) < 15]
    assert np.max(fn.euler_lagrange_residual(c, p)) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 0.05), st.floats(-0.3, 0.3), st.floats(0.1, 3.0), st.floats(0.1, 1.0))
def test_minimality_under_perturbation(eps, eta, centre, width):
    c = ctx(rho0=1.0, a=0.01, delta=0.1)
    g, al = fn.minimizer_profiles(c)

    def bump(p):
        return np.exp(-((p - centre) / width) ** 2)

    def al2(p):
        return al(p) * (1 + eta * bump(p))

    def g2(p):
        # keep (1/2 + gamma)^2 - alpha^2 >= beta^2 so the pair stays admissible
        gv, a1, a2 = g(p), al(p), al2(p)
        beta2 = (0.5 + gv) ** 2 - a1 ** 2
        shift = (a2 * a2 - a1 * a1) / (np.sqrt(beta2 + a2 * a2) + 0.5 + gv)
        return gv + shift + eps * bump(p)

    base = fn.evaluate_Fs(c, (g, al))
    assert fn.evaluate_Fs(c, (g2, al2)) >= base - 1e-10 * abs(base)
