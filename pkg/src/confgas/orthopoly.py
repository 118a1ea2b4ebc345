"""Finite-n radial ensembles for general radial potentials.

Norms come from log-space quadrature.  Near the edge the orthonormal
polynomials are compared with the explicit quasipolynomials

    |F_j(zeta)|**2 = (n / 2 pi)**(1/2) rho_tau**-1 |zeta / rho_tau|**(2j)
                     e**(n Q(rho_tau)) sqrt(Delta Q(rho_tau)) / Phi_c(xi)

with ``tau = j / n`` and ``xi = (j - n) / (sqrt(n) rho_tau sqrt(Delta Q(rho_tau)))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from . import potential as pot
from . import profiles
from ._radial import RadialEnsemble, RadialWeights
from .errors import DomainError

__all__ = [
    "EnsembleModel",
    "QuasiPolynomial",
    "build_ensemble",
    "integrand_peak",
    "one_point_function",
    "boundary_radius",
    "truncation_index",
    "truncated_boundary_density",
    "discarded_sum",
    "quasipoly",
    "cutoff",
    "check_P1",
    "check_P2",
    "P2Result",
    "check_pointwise",
]

# radial cutoff chi_0: 0 below RHO0 rho_tau, 1 above (RHO0 + DELTA) rho_tau
RHO0 = 0.8
DELTA = 0.05
# half-width of the belt around the boundary, in units of 1/sqrt(n)
BELT_C = 10.0
# P2 tail region: |r - rho_tau| > P2_M log(n) / sqrt(n)
P2_M = 2.0


class EnsembleModel(RadialEnsemble):
    """``(n, c, potential)`` with quadrature norms; read-only once built."""


def build_ensemble(n: int, c: float, potential=None) -> EnsembleModel:
    """Compute ``log h_j = log 2 int r**(2j+1) e**(-n Q^(c)) dr`` for ``j < n``."""
    potential = pot.ginibre() if potential is None else pot.from_config(potential)
    weights = RadialWeights(n, c, potential)
    return EnsembleModel(n, c, potential, weights.log_norms(np.arange(n)))


def integrand_peak(j: int, model: RadialEnsemble) -> float:
    """Maximiser of ``2j log r - n Q^(c)(r)``, found numerically (no saddle formula)."""
    rho = model.rho1
    res = optimize.minimize_scalar(lambda r: -(2 * j * math.log(r) - model.n * float(model.weights.qc(r))),
                                   bounds=(1e-6 * rho, 2.0 * rho), method="bounded",
                                   options={"xatol": 1e-12})
    return float(res.x)


def one_point_function(r: float, model: RadialEnsemble) -> float:
    """``R_n(zeta) = sum_{j<n} |w_j(zeta)|**2`` at ``|zeta| = r``."""
    if r < 0:
        raise DomainError("radius must be nonnegative")
    return model.one_point(r)


def boundary_radius(x: float, model: RadialEnsemble) -> float:
    """Radius ``rho_1 + x / sqrt(n Delta Q(rho_1))`` of the rescaled point ``x``."""
    return model.rho1 + x / math.sqrt(model.n * model.lap1)


def truncation_index(n: int) -> int:
    """``m_n = n - n delta_n`` with ``delta_n = log(n) / sqrt(n)``, rounded up, at least 0."""
    return max(0, math.ceil(n - math.sqrt(n) * math.log(n)))


def _check_belt(r, model, belt):
    if abs(r - model.rho1) > belt / math.sqrt(model.n):
        raise DomainError(f"radius {r} is outside the boundary belt of half-width {belt}/sqrt(n)")


def truncated_boundary_density(r: float, model: RadialEnsemble, m: int | None = None, belt: float = BELT_C) -> float:
    """Rescaled boundary sum ``e**(-nQ^(c)) / (n Delta Q) sum_{j >= m_n} |zeta|**(2j) / h_j``."""
    _check_belt(r, model, belt)
    m = truncation_index(model.n) if m is None else int(m)
    return model.one_point(r, np.arange(m, model.n)) / (model.n * model.lap1)


def discarded_sum(r: float, model: RadialEnsemble, belt: float = BELT_C) -> float:
    """Rescaled lower-degree part ``sum_{j < m_n} |w_j|**2 / (n Delta Q)`` on the belt."""
    _check_belt(r, model, belt)
    m = truncation_index(model.n)
    if m == 0:
        return 0.0
    return model.one_point(r, np.arange(m)) / (model.n * model.lap1)


@dataclass(frozen=True)
class QuasiPolynomial:
    j: int
    n: int
    tau: float
    rho_tau: float
    xi: float
    re_H: float
    log_amplitude: float
    c: float

    def log_modulus(self, r):
        """``log |F_j(zeta)|`` at ``|zeta| = r``."""
        return self.log_amplitude + self.j * np.log(np.asarray(r, dtype=float) / self.rho_tau)

    def log_weighted_sq(self, r, model: RadialEnsemble):
        """``log(|F_j|**2 e**(-n Q^(c)))`` at ``|zeta| = r``."""
        return 2.0 * self.log_modulus(r) - model.n * model.weights.qc(r)


def quasipoly(j: int, model: RadialEnsemble) -> QuasiPolynomial:
    n = model.n
    if not (n - n * math.log(n) / math.sqrt(n) <= j <= n - 1):
        raise DomainError(f"degree {j} outside [n - sqrt(n) log n, n - 1]")
    tau = j / n
    p = model.potential
    rho = float(pot.droplet_radius(tau, p))
    lap = float(p.laplacian(rho))
    xi = (j - n) / (math.sqrt(n) * rho * math.sqrt(lap))
    re_H = 0.5 * math.log(lap) - float(profiles.log_confinement_fn(xi, model.c))
    log_amp = 0.25 * math.log(n / (2.0 * math.pi)) - 0.5 * math.log(rho) + 0.5 * n * float(p.Q(rho)) + 0.5 * re_H
    return QuasiPolynomial(j=j, n=n, tau=tau, rho_tau=rho, xi=xi, re_H=re_H, log_amplitude=log_amp, c=model.c)


def cutoff(r, rho_tau: float, rho0: float = RHO0, delta: float = DELTA):
    """Smooth radial cutoff: 0 for ``r <= rho0 rho_tau``, 1 for ``r >= (rho0 + delta) rho_tau``."""
    t = (np.asarray(r, dtype=float) / rho_tau - rho0) / delta
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        g0 = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        g1 = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return g0 / (g0 + g1)


def _log_cutoff_integral(model, q: QuasiPolynomial, jeff: float, log_const: float, power: int = 2) -> float:
    """log of ``int chi_0**power r**(2 jeff + 1) e**(-nQ^(c)) 2 dr`` times ``e**log_const``.

    The ramp of ``chi_0`` is integrated by Gauss-Legendre with the cutoff in
    the log integrand; the rest is the radial tail beyond the ramp.
    """
    w = model.weights
    a, b = RHO0 * q.rho_tau, (RHO0 + DELTA) * q.rho_tau
    nodes, wts = np.polynomial.legendre.leggauss(64)
    edges = np.linspace(a, b, 33)
    logs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        with np.errstate(divide="ignore"):
            vals = w.logf(jeff, r) + power * np.log(cutoff(r, q.rho_tau))
        logs.append(logsumexp(vals, b=0.5 * (hi - lo) * wts))
    ramp = math.log(2.0) + logsumexp(logs)
    tail = float(w.log_tail(np.array([jeff]), b, upper=True)[0])
    return float(np.logaddexp(ramp, tail)) + log_const


def check_P1(j: int, model: RadialEnsemble) -> float:
    """``|int chi_0**2 |F_j|**2 e**(-n Q^(c)) dA - 1|``."""
    q = quasipoly(j, model)
    # |F|**2 = e**(2 log_amp) rho_tau**(-2j) r**(2j); radially dA = 2 r dr
    log_const = 2.0 * q.log_amplitude - 2.0 * j * math.log(q.rho_tau)
    return abs(math.expm1(_log_cutoff_integral(model, q, float(j), log_const)))


@dataclass(frozen=True)
class P2Result:
    """Inner product magnitude and exterior-tail bound, both relative to ``||zeta**ell||``.

    The norms themselves underflow for large ``n``, hence ``log_norm``.
    """

    relative: float
    tail_relative: float
    log_norm: float


def check_P2(j: int, ell: int, model: RadialEnsemble, ntheta: int = 512) -> P2Result:
    """``|int chi_0 zeta**ell conj(F_j) e**(-n Q^(c)) dA|`` computed radially.

    The angular factor ``int e**(i (ell - j) theta) dtheta`` is evaluated by the
    trapezoid rule, so the magnitude sits at roundoff level.  The tail bound is
    the Cauchy-Schwarz bound ``||zeta**ell|| (int_T chi_0**2 |F_j|**2 e**(-nQ^(c)) dA)**(1/2)``
    over ``T = {|r - rho_tau| > P2_M log(n) / sqrt(n)}``.
    """
    if not ell < j:
        raise DomainError("check_P2 needs ell < j")
    q = quasipoly(j, model)
    n = model.n
    theta = 2.0 * math.pi * np.arange(ntheta) / ntheta
    angular = abs(np.sum(np.exp(1j * (ell - j) * theta))) * (2.0 * math.pi / ntheta)
    # radial part: int chi_0 r**(ell + j) e**(-nQ^(c)) r dr / pi, times the amplitude
    log_const = q.log_amplitude - j * math.log(q.rho_tau) - math.log(2.0 * math.pi)
    radial = _log_cutoff_integral(model, q, 0.5 * (ell + j), log_const, power=1)
    log_norm = 0.5 * float(model.log_norms[ell])
    with np.errstate(divide="ignore"):
        relative = math.exp(radial - log_norm) * angular
    # Cauchy-Schwarz on the region away from the boundary circle
    w = model.weights
    gap = P2_M * math.log(n) / math.sqrt(n)
    lo_r, hi_r = q.rho_tau - gap, q.rho_tau + gap
    log_sq = 2.0 * q.log_amplitude - 2.0 * j * math.log(q.rho_tau)
    outer = float(w.log_tail(np.array([float(j)]), hi_r, upper=True)[0])
    # chi_0 <= 1, so dropping it only enlarges the bound
    inner = float(w.log_tail(np.array([float(j)]), lo_r, upper=False)[0])
    tail = math.exp(0.5 * (log_sq + float(np.logaddexp(outer, inner))))
    return P2Result(relative=relative, tail_relative=tail, log_norm=log_norm)


def check_pointwise(j: int, model: RadialEnsemble, x: float) -> float:
    """``| |p_j(zeta)| - |F_j(zeta)| | / |F_j(zeta)|`` at ``|zeta| = rho_tau + x / sqrt(n)``."""
    n = model.n
    if not abs(x) <= math.sqrt(math.log(math.log(n))):
        raise DomainError("pointwise check needs |x| <= sqrt(log log n)")
    q = quasipoly(j, model)
    r = q.rho_tau + x / math.sqrt(n)
    log_p = j * math.log(r) - 0.5 * model.log_norms[j]
    return abs(math.expm1(log_p - float(q.log_modulus(r))))
