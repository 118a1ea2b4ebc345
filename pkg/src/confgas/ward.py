"""Numerical checks of the mass-one and Ward equations for edge profiles.

A candidate profile is a density ``s(xi)`` on the real line.  Its Gaussian
convolution is ``S(z) = (2 pi)**-1/2 int exp(-(xi - z)**2 / 2) s(xi) dxi``.
The admissible choice is ``s = 1_E / Phi_c``; for Ward's equation ``E`` must
be a left half-line ``(-inf, c0)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import profiles
from .errors import ConvergenceError, DomainError

__all__ = [
    "EdgeProfileSpec",
    "gaussian_identity_residual",
    "mass_one_residual",
    "ward_residual",
    "S",
    "S_prime",
    "L1",
    "tail_E",
    "tail_asymptote",
    "tail_constant_chain",
    "tail_f",
    "tail_f1",
]

RTOL = 1e-12
# Gaussian factors are truncated 12 standard deviations from their centre
GAUSS_CUT = 12.0
_SQRT2PI = math.sqrt(2.0 * math.pi)


def _quad(f, a, b, points=None, rtol=RTOL):
    if not b > a:
        return 0.0
    pts = None
    if points:
        pts = sorted(p for p in points if a < p < b) or None
    with warnings.catch_warnings():
        # the error estimate is checked below instead
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, points=pts, epsabs=0.0, epsrel=rtol, limit=500)
    if not np.isfinite(val) or err > 1e3 * rtol * abs(val) + 1e-300:
        raise ConvergenceError(f"quadrature on [{a}, {b}] did not reach rtol {rtol}")
    return val


@dataclass(frozen=True)
class EdgeProfileSpec:
    """``s(xi) = scale * 1_E(xi) / Phi_c(xi)`` (or without the division by ``Phi_c``).

    ``intervals`` lists the disjoint components of ``E`` as ``(a, b)`` pairs;
    ``a`` may be ``-inf``.
    """

    c: float
    intervals: tuple = ((-math.inf, 0.0),)
    scale: float = 1.0
    divide_by_phi: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0.0 < self.c < math.inf:
            raise DomainError("EdgeProfileSpec needs a finite c > 0")
        ivs = tuple(sorted((float(a), float(b)) for a, b in self.intervals))
        for (a, b), (a2, _) in zip(ivs, ivs[1:] + ((math.inf, math.inf),)):
            if not a < b <= a2:
                raise DomainError("intervals must be nonempty and disjoint")
        object.__setattr__(self, "intervals", ivs)

    def phi(self, xi):
        return profiles.confinement_fn(xi, self.c)

    def s(self, xi):
        inside = any(a < xi < b for a, b in self.intervals)
        if not inside:
            return 0.0
        return self.scale / float(self.phi(xi)) if self.divide_by_phi else self.scale

    @property
    def endpoint(self) -> float:
        """Right end of the rightmost interval."""
        return self.intervals[-1][1]

    def pieces(self, centre: float):
        """The support intersected with the Gaussian window around ``centre``."""
        lo, hi = centre - GAUSS_CUT, centre + GAUSS_CUT
        out = []
        for a, b in self.intervals:
            a2, b2 = max(a, lo), min(b, hi)
            if a2 < b2:
                out.append((a2, b2))
        return out


def gaussian_identity_residual(xi: float, c: float) -> float:
    """Relative residual of the Gaussian integral identity behind the mass-one equation.

    LHS ``sqrt(2/pi) int exp(-2u**2 + 2 xi u + 2(1-c) u_+**2) du`` by quadrature,
    RHS ``e**(xi**2/2) phi(xi) + c**-1/2 e**(xi**2/(2c)) (1 - phi(xi/sqrt c))``.
    Both are divided by ``e**(xi**2/2)``; the RHS is then ``Phi_c(xi)``.
    """
    if not -8.0 <= xi <= 8.0:
        raise DomainError("xi must lie in [-8, 8]")
    lhs = _phi_by_quadrature(xi, c)
    rhs = float(profiles.confinement_fn(xi, c))
    return abs(lhs - rhs) / rhs


def _phi_by_quadrature(xi: float, c: float, rtol: float = RTOL) -> float:
    """``Phi_c(xi)`` as ``sqrt(2/pi) int exp(-2(u - xi/2)**2 + 2(1-c) u_+**2) du``."""
    def neg(u):
        return math.exp(-2.0 * (u - 0.5 * xi) ** 2)

    # for u > 0 the exponent is -2c u**2 + 2 xi u - xi**2/2, peaked at xi / (2c)
    upeak = max(xi / (2.0 * c), 0.0)
    shift = -2.0 * c * upeak**2 + 2.0 * xi * upeak - 0.5 * xi * xi

    def pos(u):
        return math.exp(-2.0 * c * u * u + 2.0 * xi * u - 0.5 * xi * xi - shift)

    w_neg = GAUSS_CUT / 2.0
    w_pos = GAUSS_CUT / (2.0 * math.sqrt(c))
    left = _quad(neg, min(0.5 * xi, 0.0) - w_neg, 0.0, points=[0.5 * xi], rtol=rtol)
    right = _quad(pos, 0.0, upeak + w_pos, points=[upeak], rtol=rtol)
    return math.sqrt(2.0 / math.pi) * (left + math.exp(shift) * right)


def S(x: float, spec: EdgeProfileSpec) -> float:
    """Gaussian convolution of ``s`` at the real point ``x``."""
    total = 0.0
    for a, b in spec.pieces(x):
        total += _quad(lambda t: math.exp(-0.5 * (t - x) ** 2) * spec.s(t), a, b, points=[x])
    return total / _SQRT2PI


def S_prime(x: float, spec: EdgeProfileSpec) -> float:
    """``S'(x)``, differentiating the Gaussian under the integral sign."""
    total = 0.0
    for a, b in spec.pieces(x):
        total += _quad(lambda t: (t - x) * math.exp(-0.5 * (t - x) ** 2) * spec.s(t), a, b, points=[x])
    return total / _SQRT2PI


def mass_one_residual(x: float, spec: EdgeProfileSpec, method: str = "reduced") -> float:
    """``|M(x) - S(2x)| / S(2x)`` where ``M(x) = (2 pi)**-1/2 int e**(-(xi-2x)**2/2) s**2 Phi_c dxi``.

    ``method="double"`` evaluates ``Phi_c`` inside ``M`` through its Gaussian
    integral representation instead of the closed form.
    """
    if method not in ("reduced", "double"):
        raise DomainError("method must be 'reduced' or 'double'")
    centre = 2.0 * x
    if method == "reduced":
        def phi(t):
            return float(spec.phi(t))
    else:
        def phi(t):
            return _phi_by_quadrature(t, spec.c, rtol=1e-11)

    total = 0.0
    for a, b in spec.pieces(centre):
        total += _quad(lambda t: math.exp(-0.5 * (t - centre) ** 2) * spec.s(t) ** 2 * phi(t),
                       a, b, points=[centre], rtol=1e-11)
    m = total / _SQRT2PI
    s2 = S(centre, spec)
    return abs(m - s2) / s2


def _inner_T(eta: float, spec: EdgeProfileSpec) -> float:
    """``T(eta) = int_eta^inf s(xi) Phi_c(xi) dxi`` over the (bounded above) support."""
    total = 0.0
    for a, b in spec.intervals:
        lo = max(a, eta)
        if lo < b:
            total += _quad(lambda t: spec.s(t) * float(spec.phi(t)), lo, b)
    return total


def L1(x: float, spec: EdgeProfileSpec) -> float:
    """``-(2 pi)**-1/2 int int_{xi > eta} e**(-(eta-x)**2/2) s(xi) s(eta) Phi_c(xi) dxi deta``."""
    if math.isinf(spec.endpoint):
        raise DomainError("L1 needs a support bounded above")
    total = 0.0
    for a, b in spec.pieces(x):
        total += _quad(lambda e: math.exp(-0.5 * (e - x) ** 2) * spec.s(e) * _inner_T(e, spec),
                       a, b, points=[x], rtol=1e-11)
    return -total / _SQRT2PI


def ward_residual(x: float, spec: EdgeProfileSpec, c0: float | None = None) -> float:
    """Normalised residual of ``L1(x) = S'(x) + (x - c0) S(x)``.

    ``c0`` defaults to the right endpoint of the support.
    """
    c0 = spec.endpoint if c0 is None else float(c0)
    s_val = S(x, spec)
    sp = S_prime(x, spec)
    l1 = L1(x, spec)
    return abs(l1 - sp - (x - c0) * s_val) / (abs(sp) + abs(x - c0) * s_val + s_val)


# ---------------------------------------------------------------------------
# tail constant of the maximum-modulus law


def tail_E(r: float, c: float, scaled: bool = True) -> float:
    """``E(r) = int_r^inf e**((1-c)s**2/2) int_{-inf}^0 e**(-(s-xi)**2/2) / Phi_c(xi) dxi ds``.

    Computed by nested quadrature; with ``scaled`` the result is multiplied by
    ``e**(c r**2/2)``.
    """
    # combined exponent (1-c)s**2/2 - (s-xi)**2/2 = -c s**2/2 + s xi - xi**2/2
    def inner(s):
        def f(xi):
            return math.exp(-0.5 * c * (s * s - r * r) + s * xi - 0.5 * xi * xi) / float(profiles.confinement_fn(xi, c))

        # the integrand hugs xi = 0 on the scale 1/s
        width = min(1.0, 1.0 / max(s, 1e-12))
        lo = -max(GAUSS_CUT, 40.0 * width)
        return _quad(f, lo, 0.0, points=[-width, -10.0 * width], rtol=1e-11)

    # outer decays like e**(-c (s - r) r) near s = r
    scale = 1.0 / max(c * r, 1e-12)
    hi = r + max(40.0 * scale, GAUSS_CUT / math.sqrt(c))
    val = _quad(inner, r, hi, points=[r + scale, r + 10.0 * scale], rtol=1e-10)
    return val if scaled else val * math.exp(-0.5 * c * r * r)


def tail_asymptote(r: float, c: float, scaled: bool = True) -> float:
    """Leading term ``1 / (c Phi_c(0) r**2)`` (times ``e**(-c r**2/2)`` unless ``scaled``)."""
    lead = 1.0 / (c * float(profiles.confinement_fn(0.0, c)) * r * r)
    return lead if scaled else lead * math.exp(-0.5 * c * r * r)


def tail_constant_chain(x_large: float, spec: EdgeProfileSpec) -> tuple[float, float]:
    """``(E(r), asymptote(r))`` at ``r = x_large``, both scaled by ``e**(c r**2/2)``."""
    if x_large < 5:
        raise DomainError("tail_constant_chain needs x_large >= 5")
    return tail_E(x_large, spec.c), tail_asymptote(x_large, spec.c)


def tail_f(v: float, c: float) -> float:
    """``f(v) = int_{-cv}^0 e**((1-c) xi**2 / (2c)) / Phi_c(xi) dxi``."""
    if v == 0:
        return 0.0
    return _quad(lambda t: math.exp((1.0 - c) * t * t / (2.0 * c)) / float(profiles.confinement_fn(t, c)), -c * v, 0.0)


def tail_f1(v: float, c: float) -> float:
    """``f_1(v) = f'(v) - c v f(v)`` with ``f'(v) = c e**((1-c) c v**2/2) / Phi_c(-cv)``."""
    fp = c * math.exp((1.0 - c) * c * v * v / 2.0) / float(profiles.confinement_fn(-c * v, c))
    return fp - c * v * tail_f(v, c)
