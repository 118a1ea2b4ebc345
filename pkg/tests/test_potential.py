import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confgas import potential as pot
from confgas.errors import ConfigError, DomainError

GIN = pot.ginibre()
QUARTIC = pot.monomial(2)


def test_droplet_radius_ginibre_and_quartic():
    taus = np.array([0.1, 0.25, 0.5, 0.9, 1.0])
    assert np.allclose(pot.droplet_radius(taus, GIN), np.sqrt(taus), rtol=0, atol=1e-14)
    assert np.allclose(pot.droplet_radius(taus, QUARTIC), (taus / 2) ** 0.25, rtol=1e-13)
    assert pot.droplet_radius(1.0, GIN) == pytest.approx(1.0, abs=1e-15)


def test_droplet_radius_increasing():
    rs = pot.droplet_radius(np.array([0.25, 0.5, 0.75, 1.0]), QUARTIC)
    assert np.all(np.diff(rs) > 0)


@settings(max_examples=40, deadline=None)
@given(tau=st.floats(0.01, 1.0), k=st.floats(1.0, 3.0), scale=st.floats(0.2, 5.0))
def test_mass_condition_residual(tau, k, scale):
    p = pot.monomial(k, scale)
    assert pot.mass_residual(tau, p) < 1e-12


def test_obstacle_outside_droplet_is_log():
    r = np.array([1.2, 2.0, 5.0])
    assert np.allclose(pot.obstacle(r, 1.0, GIN), 1 + 2 * np.log(r), atol=1e-14)


def test_obstacle_equals_q_inside():
    for p in (GIN, QUARTIC):
        rho = pot.droplet_radius(0.6, p)
        r = np.linspace(0.0, rho, 11)
        assert np.array_equal(pot.obstacle(r, 0.6, p), p.Q(r))


def test_obstacle_smooth_fit():
    rho = pot.droplet_radius(0.7, QUARTIC)
    h = 1e-7
    left = (pot.obstacle(rho, 0.7, QUARTIC) - pot.obstacle(rho - h, 0.7, QUARTIC)) / h
    right = (pot.obstacle(rho + h, 0.7, QUARTIC) - pot.obstacle(rho, 0.7, QUARTIC)) / h
    assert abs(left - right) < 1e-6


@settings(max_examples=30, deadline=None)
@given(tau=st.floats(0.1, 1.0), r=st.floats(0.01, 4.0))
def test_obstacle_below_potential(tau, r):
    assert pot.obstacle(r, tau, QUARTIC) <= QUARTIC.Q(r) + 1e-12


def test_modified_potential_values():
    r = np.linspace(0, 0.99, 7)
    for c in (0.3, 2.0):
        assert np.array_equal(pot.modified_potential(r, c, GIN), GIN.Q(r))
    rr = np.linspace(0, 3, 13)
    assert np.allclose(pot.modified_potential(rr, 1.0, QUARTIC), QUARTIC.Q(rr))
    assert pot.modified_potential(1.5, 2.0, GIN) == pytest.approx(2 * 2.25 - (1 + 2 * math.log(1.5)), abs=1e-14)
    with pytest.raises(DomainError):
        pot.modified_potential(1.0, 0.0, GIN)


def test_boundary_expansion_is_cubic():
    assert pot.boundary_expansion_check(GIN, 1.0, 0.0) == 0.0
    ratio = pot.boundary_expansion_check(GIN, 1.0, 0.02) / pot.boundary_expansion_check(GIN, 1.0, 0.01)
    assert ratio == pytest.approx(8.0, rel=0.05)
    v = 0.01
    exact = (1 + v) ** 2 - 1 - 2 * math.log1p(v) - 2 * v * v
    assert pot.boundary_expansion_check(GIN, 1.0, v) == pytest.approx(exact, rel=1e-9)
    with pytest.raises(DomainError):
        pot.boundary_expansion_check(GIN, 1.0, 0.5)


def test_growth_speed_second_order():
    for p in (GIN, QUARTIC):
        r1 = pot.growth_speed_check(p, 0.5, 1e-2)
        r2 = pot.growth_speed_check(p, 0.5, 5e-3)
        assert r1 / r2 == pytest.approx(4.0, rel=0.02)
    with pytest.raises(DomainError):
        pot.growth_speed_check(GIN, 0.001, 0.01)


def test_rtau_expansion():
    a, b = pot.rtau_check(GIN, 0.99)
    assert a == pytest.approx(1 / math.sqrt(0.99), abs=1e-15)
    assert b == pytest.approx(1 + 0.01 / (2 * 0.99), abs=1e-15)
    assert abs(a - b) < 2 * 0.01**2


@pytest.mark.parametrize("n", [100, 10_000])
def test_taye_ratio(n):
    x = np.linspace(0.1, 3, 12)
    for p in (GIN, QUARTIC):
        assert np.all(np.abs(pot.taye_ratio(p, n, x) - 1) < 5 / math.sqrt(n))


def test_annulus_integral_symmetry():
    assert pot.annulus_integral(QUARTIC, 0.3, 0.8, m=0) == pytest.approx(0.5, abs=1e-10)
    for m in (1, 2, 5):
        assert abs(pot.annulus_integral(QUARTIC, 0.3, 0.8, m=m)) < 1e-12


def test_from_config():
    assert pot.from_config("ginibre").name == "ginibre"
    p = pot.from_config({"family": "monomial", "k": 2, "scale": 3.0})
    assert p.Q(1.0) == pytest.approx(3.0)
    with pytest.raises(ConfigError):
        pot.from_config({"family": "monomial", "power": 2})
    with pytest.raises(ConfigError):
        pot.from_config("cubic")
    with pytest.raises(DomainError):
        pot.monomial(0.5)
    pot.validate(QUARTIC)
