"""Exact finite-n confined Ginibre ensemble, ``Q(r) = r**2``.

With ``s = j + 1 - n(1 - c)`` the monomial norms are

    h_j = n**-(j+1) lower_gamma(j + 1, n) + e**(-n(1-c)) (nc)**-s Gamma(s, nc)

where ``Gamma(s, .)`` is the upper incomplete gamma for any real ``s``.  The
same substitution gives the radial masses inside and outside any radius.
"""

from __future__ import annotations

import math

import numpy as np

from . import potential as pot
from . import specfun
from ._radial import RadialEnsemble, RadialWeights
from .errors import ConvergenceError, DomainError, ToleranceError

__all__ = [
    "GinibreModel",
    "build_model",
    "closed_form_log_norms",
    "rescaled_density",
    "rescaled_kernel",
    "edge_error",
]

CROSSCHECK_RTOL = 1e-6


def _exterior_log(j, n, c, x):
    """log of ``e**(-n(1-c)) (nc)**-s Gamma(s, x)`` with ``s = j + 1 - n(1-c)``."""
    s = j + 1.0 - n * (1.0 - c)
    return -n * (1.0 - c) - s * math.log(n * c) + specfun.log_upper_gamma_general(s, x)


def closed_form_log_norms(n: int, c: float, j=None) -> np.ndarray:
    """log ``h_j`` from the incomplete gamma closed form (vectorised over ``j``)."""
    j = np.arange(n, dtype=float) if j is None else np.atleast_1d(np.asarray(j, dtype=float))
    inner = specfun.log_lower_gamma(j + 1.0, float(n)) - (j + 1.0) * math.log(n)
    outer = _exterior_log(j, n, c, n * c)
    return np.logaddexp(inner, outer)


class GinibreModel(RadialEnsemble):
    """Confined Ginibre ensemble with closed-form norms.

    ``norm_path[j]`` is ``"closed"`` or ``"quadrature"``.
    """

    def __init__(self, n: int, c: float, log_norms, norm_path):
        super().__init__(n, c, pot.ginibre(), log_norms)
        self.norm_path = tuple(norm_path)

    def log_upper_masses(self, r, j=None):
        j = self._degrees(j).astype(float)
        n, c = self.n, self.c
        r = float(r)
        if r <= 0:
            return np.zeros(j.shape)
        x = n * r * r
        if r >= 1.0:
            val = _exterior_log(j, n, c, c * x)
        else:
            part = specfun.logdiffexp(specfun.log_upper_gamma_general(j + 1.0, x),
                                      specfun.log_upper_gamma_general(j + 1.0, float(n)))
            val = np.logaddexp(part - (j + 1.0) * math.log(n), _exterior_log(j, n, c, n * c))
        return np.minimum(val - self.log_norms[j.astype(int)], 0.0)

    def log_lower_masses(self, r, j=None):
        j = self._degrees(j).astype(float)
        n, c = self.n, self.c
        r = float(r)
        if r <= 0:
            return np.full(j.shape, -np.inf)
        x = n * r * r
        if r < 1.0:
            val = specfun.log_lower_gamma(j + 1.0, x) - (j + 1.0) * math.log(n)
        else:
            inner = specfun.log_lower_gamma(j + 1.0, float(n)) - (j + 1.0) * math.log(n)
            ring = specfun.logdiffexp(_exterior_log(j, n, c, n * c), _exterior_log(j, n, c, c * x))
            val = np.logaddexp(inner, ring)
        return np.minimum(val - self.log_norms[j.astype(int)], 0.0)


def build_model(n: int, c: float, verify: bool = True) -> GinibreModel:
    """Tabulate the norms by the closed form, falling back to quadrature per degree.

    With ``verify`` the closed form is also checked against quadrature and a
    ToleranceError is raised on a relative disagreement above 1e-6.
    """
    if n < 2:
        raise DomainError("build_model needs n >= 2")
    if not c > 0:
        raise DomainError("build_model needs c > 0")
    weights = RadialWeights(n, c, pot.ginibre())
    j = np.arange(n)
    try:
        closed = closed_form_log_norms(n, c, j)
        path = ["closed"] * n
    except ConvergenceError:
        closed = np.empty(n)
        path = []
        for k in range(n):
            try:
                closed[k] = closed_form_log_norms(n, c, k)[0]
                path.append("closed")
            except ConvergenceError:
                closed[k] = weights.log_norms(np.array([k]))[0]
                path.append("quadrature")
    if verify:
        quad = weights.log_norms(j)
        use = np.array([p == "closed" for p in path])
        rel = np.abs(np.expm1(closed[use] - quad[use]))
        if rel.size and rel.max() > CROSSCHECK_RTOL:
            bad = int(j[use][np.argmax(rel)])
            raise ToleranceError(f"closed-form and quadrature norms disagree at j={bad} (rel {rel.max():.2e})")
    return GinibreModel(n, c, closed, path)


def rescaled_density(z, model: GinibreModel) -> float:
    """``R_n(z) = (1/n) sum_j |w_j(zeta)|**2`` at ``zeta = 1 + z / sqrt(n)``."""
    z = complex(z)
    if abs(z) > math.sqrt(model.n) / 2:
        raise DomainError("rescaled_density needs |z| <= sqrt(n)/2")
    return model.rescaled_density(z)


def rescaled_kernel(z, w, model: GinibreModel) -> complex:
    """Rescaled kernel ``(1/n) K_n(1 + z/sqrt n, 1 + w/sqrt n)`` (gauge as computed)."""
    for v in (z, w):
        if abs(complex(v)) > math.sqrt(model.n) / 2:
            raise DomainError("rescaled_kernel needs |z|, |w| <= sqrt(n)/2")
    return model.rescaled_kernel(z, w)


def edge_error(model: GinibreModel, xs=(-3, -2, -1, 0, 1, 2)) -> float:
    """``max_x |R_n(x) - R(x)|`` against the limiting profile."""
    from . import profiles

    return max(abs(rescaled_density(x, model) - profiles.density(x, model.c)) for x in xs)
