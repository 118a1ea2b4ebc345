"""Limiting boundary profiles of the confined Coulomb gas.

The confinement function ``Phi_c`` interpolates between the free boundary
(``c = 1``, ``Phi_1 = 1``) and the hard edge (``c = inf``, ``Phi_inf = phi``);
``c = 0`` is the ultraweak edge.  The edge profile is the Gaussian convolution

    b_c(z) = (2 pi)**-1/2 int_{-inf}^0 exp(-(z - t)**2 / 2) / Phi_c(t) dt

and the 1-point intensity is ``R(z) = b_c(2 Re z) exp(2 (1 - c) (Re z)_+**2)``.
All convolution integrals are done in log space: the ultraweak intensity at
``x = 20`` involves ``b_0(40) ~ e**-800`` times ``e**800``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import specfun
from .errors import ConvergenceError, DomainError

__all__ = [
    "ConfinementParam",
    "confinement",
    "ProfileCurve",
    "confinement_fn",
    "log_confinement_fn",
    "b_profile",
    "log_b_profile",
    "density",
    "log_density",
    "kernel",
    "correlation_det",
    "profile_curve",
]

QUAD_RTOL = 1e-12
# Gaussian truncation: exp(-9**2/2) is below 1e-17 of the peak
GAUSS_HALF_WIDTH = 9.0
_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ConfinementParam:
    """Confinement parameter with explicit limit modes.

    ``mode`` is ``"ultraweak"`` (c = 0), ``"finite"`` or ``"hard"`` (c = inf).
    """

    mode: str
    value: float | None = None

    def __post_init__(self):
        if self.mode == "finite":
            if self.value is None or not (0.0 < self.value < math.inf):
                raise DomainError("finite confinement needs 0 < c < inf")
        elif self.mode in ("ultraweak", "hard"):
            if self.value is not None:
                raise DomainError(f"{self.mode} confinement takes no value")
        else:
            raise DomainError(f"unknown confinement mode {self.mode!r}")

    @property
    def c(self) -> float:
        if self.mode == "finite":
            return self.value
        return 0.0 if self.mode == "ultraweak" else math.inf

    def __str__(self):
        return {"ultraweak": "0", "hard": "inf"}.get(self.mode, repr(self.value))


def confinement(c) -> ConfinementParam:
    """Coerce ``0``, ``inf``, a positive float or the strings ``"0"``/``"inf"``."""
    if isinstance(c, ConfinementParam):
        return c
    c = float(c)
    if c == 0.0:
        return ConfinementParam("ultraweak")
    if c == math.inf:
        return ConfinementParam("hard")
    return ConfinementParam("finite", c)


@dataclass
class ProfileCurve:
    """Sampled intensity ``R`` along the real axis, with provenance."""

    c: ConfinementParam
    abscissae: np.ndarray
    values: np.ndarray
    tolerance: float = QUAD_RTOL
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# confinement function


def log_confinement_fn(t, c):
    """``log Phi_c(t)``, finite wherever ``Phi_c`` is defined."""
    cp = confinement(c)
    t = np.asarray(t, dtype=float)
    if cp.mode == "hard":
        out = specfun.log_phi(t)
    elif cp.mode == "ultraweak":
        if np.any(t >= 0):
            raise DomainError("the ultraweak confinement function is only defined for t < 0")
        with np.errstate(divide="ignore"):
            out = np.logaddexp(specfun.log_phi(t), -0.5 * t * t - math.log(_SQRT2PI) - np.log(-t))
    else:
        cv = cp.value
        neg = t <= 0
        tn = np.where(neg, t, 0.0)
        tp = np.where(neg, 0.0, t)
        # t <= 0: (2 sqrt c)**-1 erfcx(-t / sqrt(2c)) exp(-t**2/2), no overflow
        second_neg = np.log(specfun.erfcx_scaled(-tn / math.sqrt(2.0 * cv)) / (2.0 * math.sqrt(cv))) - 0.5 * tn * tn
        # t > 0: c**-1/2 phi(-t/sqrt c) exp((1 - c) t**2 / (2c)), bounded factor phi
        second_pos = -0.5 * math.log(cv) + specfun.log_phi(-tp / math.sqrt(cv)) + (1.0 - cv) * tp * tp / (2.0 * cv)
        out = np.logaddexp(specfun.log_phi(t), np.where(neg, second_neg, second_pos))
    return out[()] if np.ndim(out) == 0 else out


def confinement_fn(t, c):
    """The confinement function ``Phi_c(t)``.

    Finite ``c``: ``phi(t) + c**-1/2 (1 - phi(t / sqrt c)) exp((1 - c) t**2 / (2c))``.
    Hard edge: ``phi(t)``.  Ultraweak: ``phi(t) - exp(-t**2/2) / (sqrt(2 pi) t)``
    for ``t < 0`` only (DomainError otherwise).
    """
    cp = confinement(c)
    if cp.mode == "finite" and cp.value == 1.0:
        t = np.asarray(t, dtype=float)
        out = np.ones_like(t)
        return out[()] if out.ndim == 0 else out
    return np.exp(log_confinement_fn(t, cp))


# ---------------------------------------------------------------------------
# convolution profile


def _b_parts(z: complex, cp: ConfinementParam):
    """Return ``(log_scale, J)`` with ``b_c(z) = exp(log_scale + (Im z)**2 / 2) * J``.

    ``J`` is the integral of ``exp(-(a - t)**2 / 2 - i y (a - t)) / Phi_c(t)``
    over ``t < 0`` (``z = a + i y``), divided by ``sqrt(2 pi) exp(log_scale)``.
    """
    a, y = float(np.real(z)), float(np.imag(z))

    def logg(t):
        return -0.5 * (a - t) ** 2 - log_confinement_fn(t, cp)

    lo = min(a, 0.0) - GAUSS_HALF_WIDTH
    # locate the peak on a grid that also resolves the corner at t = 0
    grid = np.concatenate([np.linspace(lo, 0.0, 1601)[:-1], -np.geomspace(1e-8, 1.0, 161)])
    grid = np.sort(grid)
    vals = logg(grid)
    k = int(np.argmax(vals))
    shift = float(vals[k])
    t_peak = float(grid[k])
    marks = [t_peak + d for d in (-2.0, -0.5, -0.1, 0.0, 0.1, 0.5)]
    if a > 1.0:
        # the mass hugs t = 0 on the scale 1/a
        marks += [-1.0 / a, -10.0 / a]
    points = sorted({m for m in marks if lo < m < 0.0}) or None

    def quad(f):
        with warnings.catch_warnings():
            # the error estimate is checked by the caller instead
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return integrate.quad(f, lo, 0.0, points=points, epsabs=0.0, epsrel=QUAD_RTOL, limit=400)

    def base(t):
        return np.exp(logg(t) - shift)

    mag, err = quad(base)
    if not (np.isfinite(mag) and mag > 0 and err <= 1e-9 * mag):
        raise ConvergenceError(f"profile quadrature did not converge at z={z!r}")
    if y == 0.0:
        re, im = mag, 0.0
    else:
        re, e1 = quad(lambda t: base(t) * math.cos(-y * (a - t)))
        im, e2 = quad(lambda t: base(t) * math.sin(-y * (a - t)))
        if max(e1, e2) > 1e-9 * mag:
            raise ConvergenceError(f"profile quadrature did not converge at z={z!r}")
    return shift - math.log(_SQRT2PI), complex(re, im)


def log_b_profile(x: float, c) -> float:
    """``log b_c(x)`` for real ``x``."""
    log_scale, J = _b_parts(complex(x, 0.0), confinement(c))
    return log_scale + math.log(J.real)


def b_profile(z, c):
    """The convolution profile ``b_c(z)``; complex for complex ``z``."""
    cp = confinement(c)
    z = complex(z)
    log_scale, J = _b_parts(z, cp)
    val = math.exp(log_scale + 0.5 * z.imag**2) * J
    return val.real if z.imag == 0.0 else val


def _edge_exponent(x: float, cp: ConfinementParam) -> float:
    xp = max(x, 0.0)
    if xp == 0.0:
        return 0.0
    return (1.0 - cp.c) * xp * xp


def log_density(z, c) -> float:
    """``log R(z)``; ``-inf`` on the right half plane at the hard edge."""
    cp = confinement(c)
    x = float(np.real(z))
    if cp.mode == "hard" and x > 0:
        return -math.inf
    return log_b_profile(2.0 * x, cp) + 2.0 * _edge_exponent(x, cp)


def density(z, c) -> float:
    """1-point intensity ``R(z) = b_c(2 Re z) exp(2 (1 - c) (Re z)_+**2)``."""
    return math.exp(log_density(z, c))


def kernel(z, w, c) -> complex:
    """Limiting correlation kernel ``G(z, w) b_c(z + conj w) exp((1-c)(x_+**2 + u_+**2))``.

    ``G(z, w) = exp(-|z|**2/2 - |w|**2/2 + z conj(w))`` is the Ginibre kernel.
    """
    cp = confinement(c)
    z, w = complex(z), complex(w)
    if cp.mode == "hard" and (z.real > 0 or w.real > 0):
        return 0j
    log_scale, J = _b_parts(z + w.conjugate(), cp)
    # |G| exp((Im(z + conj w))**2 / 2) = exp(-(Re z - Re w)**2 / 2)
    mod = -0.5 * (z.real - w.real) ** 2 + log_scale + _edge_exponent(z.real, cp) + _edge_exponent(w.real, cp)
    phase = (z * w.conjugate()).imag
    return math.exp(mod) * complex(math.cos(phase), math.sin(phase)) * J


def correlation_det(points, c) -> float:
    """``det(K(z_i, z_j))`` for up to 12 points."""
    pts = [complex(p) for p in points]
    if not 1 <= len(pts) <= 12:
        raise DomainError("correlation_det takes between 1 and 12 points")
    cp = confinement(c)
    mat = np.empty((len(pts), len(pts)), dtype=complex)
    for i, zi in enumerate(pts):
        for j in range(i, len(pts)):
            k = kernel(zi, pts[j], cp)
            mat[i, j] = k
            mat[j, i] = k.conjugate()
    return float(np.linalg.det(mat).real)


def profile_curve(xs, c) -> ProfileCurve:
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        raise DomainError("empty abscissa grid")
    cp = confinement(c)
    vals = np.array([density(x, cp) for x in xs])
    return ProfileCurve(c=cp, abscissae=xs, values=vals, meta={"quad_rtol": QUAD_RTOL})
