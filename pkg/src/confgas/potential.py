"""Radially symmetric external potentials and their droplet geometry.

Only potentials Q(r) whose droplets are centred disks are supported: the mass
function ``m(r) = r Q'(r) / 2`` must be strictly increasing.  The droplet at
total mass ``tau`` is then the disk of radius ``rho_tau`` with ``m(rho_tau) = tau``.

Throughout, ``Delta`` is one quarter of the usual Laplacian, so for a radial
function ``Delta Q = (Q'' + Q'/r) / 4`` and the equilibrium measure is
``Delta Q dA`` with ``dA = dx dy / pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BracketError, ConfigError, DomainError

__all__ = [
    "RadialPotential",
    "ginibre",
    "monomial",
    "from_config",
    "droplet_radius",
    "mass_residual",
    "obstacle",
    "harmonic_continuation",
    "modified_potential",
    "boundary_expansion_check",
    "growth_speed_check",
    "rtau_check",
    "taye_ratio",
    "annulus_integral",
    "validate",
]

ROOT_TOL = 1e-12


@dataclass(frozen=True)
class RadialPotential:
    """A radial potential ``Q(r)`` with its first two radial derivatives."""

    name: str
    Q: Callable
    dQ: Callable
    d2Q: Callable
    domain_max: float = math.inf
    params: dict = field(default_factory=dict)

    def laplacian(self, r):
        """``Delta Q(r) = (Q''(r) + Q'(r)/r) / 4``; the ``r -> 0`` limit is ``Q''(0)/2``."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(r > 0, self.dQ(r) / np.where(r > 0, r, 1.0), self.d2Q(r))
        out = 0.25 * (self.d2Q(r) + ratio)
        return out[()] if out.ndim == 0 else out

    def mass(self, r):
        """Equilibrium mass of the disk of radius ``r``, ``r Q'(r) / 2``."""
        r = np.asarray(r, dtype=float)
        out = 0.5 * r * self.dQ(r)
        return out[()] if out.ndim == 0 else out


def ginibre() -> RadialPotential:
    """``Q(r) = r**2``; droplet radius ``sqrt(tau)``."""
    return RadialPotential(
        name="ginibre",
        Q=lambda r: np.asarray(r, dtype=float) ** 2,
        dQ=lambda r: 2.0 * np.asarray(r, dtype=float),
        d2Q=lambda r: np.full_like(np.asarray(r, dtype=float), 2.0),
    )


def monomial(k: float, scale: float = 1.0) -> RadialPotential:
    """``Q(r) = scale * r**(2k)`` for ``k >= 1`` and ``scale > 0``."""
    if not (k >= 1.0 and scale > 0.0):
        raise DomainError("monomial potential needs k >= 1 and scale > 0")
    p = 2.0 * k

    def Q(r):
        return scale * np.asarray(r, dtype=float) ** p

    def dQ(r):
        return scale * p * np.asarray(r, dtype=float) ** (p - 1.0)

    def d2Q(r):
        return scale * p * (p - 1.0) * np.asarray(r, dtype=float) ** (p - 2.0)

    return RadialPotential(name="monomial", Q=Q, dQ=dQ, d2Q=d2Q, params={"k": k, "scale": scale})


def from_config(spec) -> RadialPotential:
    """Build a potential from ``"ginibre"`` or a mapping with a ``family`` key."""
    if isinstance(spec, RadialPotential):
        return spec
    if isinstance(spec, str):
        spec = {"family": spec}
    spec = dict(spec)
    family = spec.pop("family", None)
    if family == "ginibre":
        if spec:
            raise ConfigError(f"unknown keys for ginibre potential: {sorted(spec)}")
        return ginibre()
    if family == "monomial":
        unknown = set(spec) - {"k", "scale"}
        if unknown:
            raise ConfigError(f"unknown keys for monomial potential: {sorted(unknown)}")
        return monomial(float(spec.get("k", 1.0)), float(spec.get("scale", 1.0)))
    raise ConfigError(f"unknown potential family {family!r}")


def validate(p: RadialPotential, rmax: float = 10.0) -> None:
    """Check the standing assumptions numerically; raise DomainError on failure."""
    hi = min(rmax, p.domain_max * (1 - 1e-9))
    r = np.linspace(1e-6, hi, 2001)
    if np.any(np.diff(p.mass(r)) <= 0):
        raise DomainError("r Q'(r) is not strictly increasing")
    if math.isinf(p.domain_max):
        for big in (1e2, 1e3):
            if not p.Q(big) / (2.0 * math.log(big)) > 1.0:
                raise DomainError("potential fails the growth condition")
    rho = droplet_radius(1.0, p)
    if not p.laplacian(rho) > 0:
        raise DomainError("Delta Q must be positive at the droplet boundary")


def droplet_radius(tau, p: RadialPotential):
    """Radius of the droplet of mass ``tau``: the root of ``r Q'(r) / 2 = tau``.

    Vectorised over ``tau``.  Bisection on a bracket, then Newton polish.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(~(tau > 0)):
        raise DomainError("droplet_radius needs tau > 0")
    shape = tau.shape
    tau = tau.ravel()
    lo = np.full_like(tau, 1e-8)
    cap = p.domain_max if math.isfinite(p.domain_max) else 1e12
    hi = np.ones_like(tau)
    while True:
        short = p.mass(hi) < tau
        if not short.any():
            break
        if np.any(hi[short] >= cap):
            raise BracketError("no sign change for the droplet mass condition")
        hi[short] = np.minimum(hi[short] * 2.0, cap)
    if np.any(p.mass(lo) > tau):
        raise BracketError("droplet mass condition already exceeded at r = 1e-8")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        up = p.mass(mid) >= tau
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
        if np.all(hi - lo <= 1e-15 * hi):
            break
    r = 0.5 * (lo + hi)
    for _ in range(3):
        # d/dr (r Q'/2) = 2 r Delta Q
        step = (p.mass(r) - tau) / (2.0 * r * p.laplacian(r))
        r = np.clip(r - step, lo, hi)
    r = r.reshape(shape)
    return r[()] if r.ndim == 0 else r


def mass_residual(tau, p: RadialPotential) -> float:
    """``|rho_tau Q'(rho_tau) / 2 - tau|``."""
    return float(abs(p.mass(droplet_radius(tau, p)) - tau))


def harmonic_continuation(r, tau, p: RadialPotential):
    """``V_tau(r) = Q(rho_tau) + 2 tau log(r / rho_tau)``."""
    rho = droplet_radius(tau, p)
    return p.Q(rho) + 2.0 * tau * np.log(np.asarray(r, dtype=float) / rho)


def obstacle(r, tau, p: RadialPotential):
    """Obstacle function: ``Q`` on the droplet, ``V_tau`` outside it."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    rho = droplet_radius(tau, p)
    with np.errstate(divide="ignore"):
        out = np.where(r <= rho, p.Q(r), p.Q(rho) + 2.0 * tau * np.log(np.where(r > 0, r, 1.0) / rho))
    return out[()] if out.ndim == 0 else out


def obstacle_derivative(r, tau, p: RadialPotential):
    r = np.asarray(r, dtype=float)
    rho = droplet_radius(tau, p)
    with np.errstate(divide="ignore"):
        out = np.where(r <= rho, p.dQ(r), 2.0 * tau / np.where(r > 0, r, 1.0))
    return out[()] if out.ndim == 0 else out


def modified_potential(r, c: float, p: RadialPotential):
    """``Q^(c) = c Q + (1 - c) Qcheck_1``; equals ``Q`` on the droplet."""
    if not c > 0:
        raise DomainError("modified potential needs c > 0")
    r = np.asarray(r, dtype=float)
    rho = droplet_radius(1.0, p)
    q = p.Q(r)
    with np.errstate(divide="ignore"):
        out = np.where(r <= rho, q, c * q + (1.0 - c) * (p.Q(rho) + 2.0 * np.log(np.where(r > 0, r, 1.0) / rho)))
    return out[()] if out.ndim == 0 else out


def boundary_expansion_check(p: RadialPotential, tau: float, v: float) -> float:
    """Residual ``(Q - V_tau)(rho_tau + v) - 2 Delta Q(rho_tau) v**2``, which is O(v**3)."""
    rho = droplet_radius(tau, p)
    if abs(v) > 0.1 * rho:
        raise DomainError("boundary expansion needs |v| <= 0.1 rho_tau")
    r = rho + v
    gap = p.Q(r) - p.Q(rho) - 2.0 * tau * math.log1p(v / rho)
    return float(gap - 2.0 * p.laplacian(rho) * v * v)


def growth_speed_check(p: RadialPotential, tau: float, h: float = 1e-3) -> float:
    """Centred difference of ``tau -> rho_tau`` minus ``1 / (2 rho_tau Delta Q(rho_tau))``."""
    if not tau - h > 0:
        raise DomainError("difference stencil must stay at positive tau")
    rho = droplet_radius(tau, p)
    fd = (droplet_radius(tau + h, p) - droplet_radius(tau - h, p)) / (2.0 * h)
    return float(fd - 1.0 / (2.0 * rho * p.laplacian(rho)))


def rtau_check(p: RadialPotential, tau: float) -> tuple[float, float]:
    """``(rho_1 / rho_tau, 1 + (1 - tau) / (2 rho_tau**2 Delta Q(rho_tau)))``.

    The two agree to O((1 - tau)**2) as ``tau -> 1``.
    """
    rho = droplet_radius(tau, p)
    rho1 = droplet_radius(1.0, p)
    return float(rho1 / rho), float(1.0 + (1.0 - tau) / (2.0 * rho * rho * p.laplacian(rho)))


def taye_ratio(p: RadialPotential, n: int, x) -> np.ndarray:
    """``(Q - Qcheck_1)(rho_1 + x / sqrt(n Delta Q)) / (2 x**2 / n)`` for ``x > 0``."""
    x = np.asarray(x, dtype=float)
    rho = droplet_radius(1.0, p)
    r = rho + x / math.sqrt(n * p.laplacian(rho))
    gap = p.Q(r) - obstacle(r, 1.0, p)
    return gap / (2.0 * x * x / n)


def annulus_integral(p: RadialPotential, tau: float, tau2: float, m: int = 0, nr: int = 400, ntheta: int = 256) -> float:
    """``int_{S_tau2 minus S_tau} Re(zeta**-m) Delta Q dA`` by tensor quadrature.

    Radial part by Gauss-Legendre, angular part by the trapezoid rule (exact for
    trigonometric polynomials of degree below ``ntheta``).
    """
    r0, r1 = droplet_radius(tau, p), droplet_radius(tau2, p)
    nodes, weights = np.polynomial.legendre.leggauss(nr)
    r = 0.5 * (r1 - r0) * nodes + 0.5 * (r1 + r0)
    wr = 0.5 * (r1 - r0) * weights
    theta = 2.0 * math.pi * np.arange(ntheta) / ntheta
    h = r[:, None] ** (-m) * np.cos(m * theta)[None, :]
    # dA = r dr dtheta / pi
    inner = h.sum(axis=1) * (2.0 * math.pi / ntheta)
    return float(np.sum(wr * r * p.laplacian(r) * inner) / math.pi)
