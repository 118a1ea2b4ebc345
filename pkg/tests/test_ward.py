import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confgas import profiles, ward
from confgas.errors import DomainError

Spec = ward.EdgeProfileSpec


def test_gaussian_identity_trivial_case():
    assert ward.gaussian_identity_residual(0.0, 1.0) < 1e-10


@pytest.mark.parametrize("xi", [-4.0, -1.0, 0.0, 1.0, 4.0])
@pytest.mark.parametrize("c", [0.25, 1.0, 4.0])
def test_gaussian_identity_grid(xi, c):
    assert ward.gaussian_identity_residual(xi, c) < 1e-8


@settings(max_examples=30, deadline=None)
@given(xi=st.floats(-8, 8), c=st.floats(0.05, 20))
def test_gaussian_identity_property(xi, c):
    assert ward.gaussian_identity_residual(xi, c) < 1e-8


def test_gaussian_identity_domain():
    with pytest.raises(DomainError):
        ward.gaussian_identity_residual(9.0, 1.0)


def test_s_convolution_is_profile():
    # S with s = 1/Phi_c on the negative half-line is the convolution profile
    for c in (0.5, 3.0):
        spec = Spec(c)
        for x in (-1.0, 0.5):
            assert ward.S(x, spec) == pytest.approx(profiles.b_profile(x, c), rel=1e-10)


@pytest.mark.parametrize("x", [-2.0, 0.0, 1.0])
def test_mass_one_free_boundary(x):
    assert ward.mass_one_residual(x, Spec(1.0)) < 1e-8


def test_mass_one_bounded_set():
    spec = Spec(2.0, intervals=((-1.0, 0.0),))
    assert ward.mass_one_residual(0.0, spec) < 1e-8
    spec = Spec(0.5, intervals=((-math.inf, -3.0), (-1.0, 0.0)))
    assert ward.mass_one_residual(-0.5, spec) < 1e-8


def test_mass_one_double_quadrature():
    assert ward.mass_one_residual(-0.5, Spec(3.0), method="double") < 1e-8
    with pytest.raises(DomainError):
        ward.mass_one_residual(0.0, Spec(1.0), method="other")


def test_mass_one_detects_doubling():
    assert ward.mass_one_residual(0.0, Spec(1.0, scale=2.0)) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("x", [-2.0, 0.0, 1.0])
def test_ward_free_boundary(x):
    assert ward.ward_residual(x, Spec(1.0)) < 1e-6


def test_ward_shifted_endpoint():
    spec = Spec(1.5, intervals=((-math.inf, 0.5),))
    for x in (-1.0, 0.5):
        assert ward.ward_residual(x, spec, c0=0.5) < 1e-6
    assert ward.ward_residual(0.5, spec, c0=0.0) > 1e-2


def test_ward_without_phi_division_detected():
    assert ward.ward_residual(0.0, Spec(2.0, divide_by_phi=False)) > 1e-2


@pytest.mark.xfail(strict=True, reason="the violation at c=2, x=0 is about 0.03, below the 0.1 quoted as an example")
def test_ward_without_phi_division_example_threshold():
    assert ward.ward_residual(0.0, Spec(2.0, divide_by_phi=False)) > 0.1


def test_ward_detects_non_interval():
    spec = Spec(1.0, intervals=((-math.inf, -1.0), (-0.5, 0.0)))
    assert ward.ward_residual(0.0, spec) > 1e-2


def test_spec_validation():
    with pytest.raises(DomainError):
        Spec(0.0)
    with pytest.raises(DomainError):
        Spec(1.0, intervals=((-1.0, 0.0), (-0.5, 1.0)))
    with pytest.raises(DomainError):
        ward.L1(0.0, Spec(1.0, intervals=((0.0, math.inf),)))


def test_tail_chain_ratio():
    ratios = []
    for r in (5.0, 8.0):
        e, a = ward.tail_constant_chain(r, Spec(1.0))
        ratios.append(e / a)
    assert abs(ratios[1] - 1) < abs(ratios[0] - 1)
    assert abs(ratios[1] - 1) < 0.25
    with pytest.raises(DomainError):
        ward.tail_constant_chain(3.0, Spec(1.0))


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_tail_f_values(c):
    assert ward.tail_f(0.0, c) == 0.0
    assert ward.tail_f1(0.0, c) == pytest.approx(c / float(profiles.confinement_fn(0.0, c)), rel=1e-14)
