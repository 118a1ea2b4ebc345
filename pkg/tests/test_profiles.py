import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import norm

from confgas import profiles, specfun
from confgas.errors import DomainError

finite_c = st.floats(0.05, 20.0)
reals = st.floats(-4.0, 4.0)


def _naive_phi_c(t, c):
    """Defining formula in 40-digit arithmetic."""
    with mpmath.workdps(40):
        t, c = mpmath.mpf(t), mpmath.mpf(c)
        ph = lambda x: mpmath.erfc(x / mpmath.sqrt(2)) / 2
        return float(ph(t) + ph(-t / mpmath.sqrt(c)) * mpmath.exp((1 - c) * t * t / (2 * c)) / mpmath.sqrt(c))


def _b_oracle(x, denom):
    """Direct quadrature of the convolution with a given denominator."""
    f = lambda t: math.exp(-0.5 * (x - t) ** 2) / denom(t)
    val = integrate.quad(f, -np.inf, min(x, 0.0), epsabs=0, epsrel=1e-12, limit=200)[0]
    if x < 0:
        val += integrate.quad(f, x, 0.0, epsabs=0, epsrel=1e-12)[0]
    return val / math.sqrt(2 * math.pi)


def test_confinement_modes():
    assert profiles.confinement(0).mode == "ultraweak"
    assert profiles.confinement("inf").mode == "hard"
    assert profiles.confinement(2.0).c == 2.0
    with pytest.raises(DomainError):
        profiles.confinement(-1.0)
    with pytest.raises(DomainError):
        profiles.ConfinementParam("hard", 3.0)


def test_phi_one_is_identically_one():
    t = np.linspace(-10, 10, 201)
    assert np.all(np.abs(profiles.confinement_fn(t, 1.0) - 1) < 1e-12)
    # the general branch must agree with the c = 1 shortcut
    assert np.all(np.abs(profiles.confinement_fn(t, 1.0 + 1e-12) - 1) < 1e-10)


@pytest.mark.parametrize("c", [0.1, 0.5, 2.0, 10.0])
def test_phi_c_at_zero(c):
    assert profiles.confinement_fn(0.0, c) == pytest.approx((math.sqrt(c) + 1) / (2 * math.sqrt(c)), rel=1e-13)


def test_hard_edge_is_phi():
    for t in (-2.0, 1.0):
        assert profiles.confinement_fn(t, math.inf) == pytest.approx(specfun.phi(t), rel=1e-14)


def test_ultraweak_domain():
    with pytest.raises(DomainError):
        profiles.confinement_fn(0.5, 0)
    t = -3.0
    expect = specfun.phi(t) - math.exp(-t * t / 2) / (math.sqrt(2 * math.pi) * t)
    assert profiles.confinement_fn(t, 0) == pytest.approx(expect, rel=1e-13)


@settings(max_examples=80, deadline=None)
@given(t=reals, c=finite_c)
def test_phi_c_matches_naive_form(t, c):
    assert profiles.confinement_fn(t, c) == pytest.approx(_naive_phi_c(t, c), rel=1e-11)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(-6.0, -0.01))
def test_phi_c_limits(t):
    # large c approaches the hard edge, small c the ultraweak function
    assert profiles.confinement_fn(t, 1e8) == pytest.approx(specfun.phi(t), rel=1e-3)
    assert profiles.confinement_fn(t, 1e-8) == pytest.approx(float(profiles.confinement_fn(t, 0)), rel=1e-3)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(-30.0, 30.0), c=finite_c)
def test_phi_c_positive_and_finite(t, c):
    v = profiles.log_confinement_fn(t, c)
    assert np.isfinite(v)
    # Phi_c >= phi since both extra terms are nonnegative
    assert v >= specfun.log_phi(t) - 1e-12


def test_b_one_is_phi():
    assert profiles.b_profile(0.0, 1) == pytest.approx(0.5, abs=1e-12)
    for x in (-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0):
        assert abs(profiles.b_profile(x, 1) - specfun.phi(x)) < 1e-10


@pytest.mark.parametrize("x", [-1.0, 0.0])
def test_b_hard_edge_against_quadrature(x):
    assert profiles.b_profile(x, "inf") == pytest.approx(_b_oracle(x, norm.sf), rel=1e-9)


@pytest.mark.parametrize("c", [0.3, 4.0])
def test_b_finite_against_quadrature(c):
    for x in (-2.0, 0.5, 2.0):
        oracle = _b_oracle(x, lambda t: _naive_phi_c(t, c))
        assert profiles.b_profile(x, c) == pytest.approx(oracle, rel=1e-9)


def test_density_free_boundary():
    for x in (-1.5, 0.0, 0.7):
        assert profiles.density(x, 1) == pytest.approx(specfun.phi(2 * x), rel=1e-10)


def test_density_hard_edge_vanishes_outside():
    assert profiles.density(0.3, "inf") == 0.0
    assert profiles.log_density(0.3, "inf") == -math.inf


@pytest.mark.parametrize("c", [0.1, 1.0, 10.0])
def test_density_bulk_limit(c):
    assert abs(profiles.density(-8.0, c) - 1) < 5e-3


def test_ultraweak_heavy_tail():
    assert abs(4 * 100 * profiles.density(10.0, 0) - 1) < 0.15
    assert abs(4 * 400 * profiles.density(20.0, 0) - 1) < 0.08


def test_kernel_diagonal_and_symmetry():
    for c in (0.5, 1.0, 3.0):
        for z in (-1.0, 0.5 + 1j):
            assert profiles.kernel(z, z, c).real == pytest.approx(profiles.density(z, c), rel=1e-10)
        k1 = profiles.kernel(-0.3 + 0.2j, 0.4 - 0.5j, c)
        k2 = profiles.kernel(0.4 - 0.5j, -0.3 + 0.2j, c)
        assert abs(k1 - k2.conjugate()) < 1e-12


@settings(max_examples=25, deadline=None)
@given(x1=st.floats(-2, 1), y1=st.floats(-1, 1), x2=st.floats(-2, 1), y2=st.floats(-1, 1),
       c=st.sampled_from([0.2, 1.0, 5.0]))
def test_kernel_positive_definite(x1, y1, x2, y2, c):
    z, w = complex(x1, y1), complex(x2, y2)
    k = profiles.kernel(z, w, c)
    assert abs(k) ** 2 <= profiles.density(z, c) * profiles.density(w, c) * (1 + 1e-9) + 1e-15


def test_kernel_free_boundary_closed_form():
    # c = 1: K = G(z, w) phi(z + conj w) with the complex Gaussian tail
    from scipy.special import erfc

    z, w = -0.4 + 0.3j, 0.2 - 0.6j
    s = z + w.conjugate()
    g = np.exp(-abs(z) ** 2 / 2 - abs(w) ** 2 / 2 + z * w.conjugate())
    expect = g * 0.5 * erfc(s / math.sqrt(2))
    assert abs(profiles.kernel(z, w, 1) - expect) < 1e-10


def test_correlation_det():
    c = 1.0
    assert profiles.correlation_det([-0.5], c) == pytest.approx(profiles.density(-0.5, c), rel=1e-12)
    assert abs(profiles.correlation_det([0.2 + 0.1j, 0.2 + 0.1j], c)) < 1e-10
    d = profiles.correlation_det([-1, -1 + 0.5j], c)
    assert 0 <= d <= profiles.density(-1, c) * profiles.density(-1 + 0.5j, c)
    with pytest.raises(DomainError):
        profiles.correlation_det([], c)
    with pytest.raises(DomainError):
        profiles.correlation_det([0.0] * 13, c)


def test_profile_curve():
    cur = profiles.profile_curve([-1.0, 0.0], 2.0)
    assert cur.values.shape == (2,)
    assert cur.c.c == 2.0
    with pytest.raises(DomainError):
        profiles.profile_curve([], 1.0)
