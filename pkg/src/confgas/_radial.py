"""Vectorised log-space quadrature for radial weights ``r**(2j+1) exp(-n Q^(c)(r))``.

Every degree ``j`` gets its own window around the saddle of its integrand;
all degrees are then integrated at once with composite Gauss-Legendre rules.
The window is split at the droplet radius, where ``Q^(c)`` is only C^{1,1}.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from . import potential as pot
from .errors import ConvergenceError, DomainError

# window ends where the integrand is below exp(-DROP) times its peak
DROP = 46.0
QUAD_RTOL = 1e-13
_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


def _composite_log(f, lo, hi, panels):
    """log of int_lo^hi exp(f(j, r)) dr for each row, ``panels`` equal panels.

    ``lo``/``hi`` are 1-d arrays (one entry per row); empty intervals give -inf.
    """
    width = np.maximum(hi - lo, 0.0)
    h = width / panels
    k = np.arange(panels)
    # nodes: (rows, panels, order)
    mid = lo[:, None, None] + h[:, None, None] * (k[None, :, None] + 0.5)
    r = mid + 0.5 * h[:, None, None] * _GL_NODES[None, None, :]
    w = 0.5 * h[:, None, None] * _GL_WEIGHTS[None, None, :] * np.ones_like(r)
    vals = f(r.reshape(len(lo), -1))
    with np.errstate(divide="ignore"):
        out = logsumexp(vals, b=w.reshape(len(lo), -1), axis=1)
    return np.where(width > 0, out, -np.inf)


class RadialWeights:
    """Log integrand ``(2j+1) log r - n Q^(c)(r)`` for a block of degrees."""

    def __init__(self, n: int, c: float, potential: pot.RadialPotential):
        if n < 2:
            raise DomainError("need n >= 2")
        if not c > 0:
            raise DomainError("need c > 0")
        self.n = int(n)
        self.c = float(c)
        self.potential = potential
        self.rho1 = float(pot.droplet_radius(1.0, potential))
        self._q_rho1 = float(potential.Q(self.rho1))

    def qc(self, r):
        """Modified potential ``Q^(c)``, vectorised with the droplet radius cached."""
        r = np.asarray(r, dtype=float)
        q = self.potential.Q(r)
        if self.c == 1.0:
            return q
        with np.errstate(divide="ignore"):
            outside = self.c * q + (1.0 - self.c) * (self._q_rho1 + 2.0 * np.log(np.where(r > 0, r, 1.0) / self.rho1))
        return np.where(r <= self.rho1, q, outside)

    def d2qc(self, r):
        r = np.asarray(r, dtype=float)
        d2 = self.potential.d2Q(r)
        return np.where(r <= self.rho1, d2, self.c * d2 - 2.0 * (1.0 - self.c) / (r * r))

    def logf(self, j, r):
        """``(2j+1) log r - n Q^(c)(r)``; ``j`` broadcasts against ``r``."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return (2.0 * np.asarray(j, dtype=float) + 1.0) * np.log(r) - self.n * self.qc(r)

    def saddle(self, j):
        """Peak radius: inside the droplet ``r Q'(r) = (2j+1)/n``, i.e. ``rho_{(j+1/2)/n}``."""
        j = np.asarray(j, dtype=float)
        return pot.droplet_radius((j + 0.5) / self.n, self.potential)

    def peak_scale(self, j, rs):
        curv = (2.0 * np.asarray(j, dtype=float) + 1.0) / rs**2 + self.n * self.d2qc(rs)
        return 1.0 / np.sqrt(np.maximum(curv, 1e-300))

    def _extend(self, j, anchor, level, step, direction, floor=0.0):
        """Move from ``anchor`` in ``direction`` until ``logf`` drops below ``level``."""
        pos = anchor.copy()
        step = step.copy()
        for _ in range(200):
            trial = pos + direction * step
            if direction < 0:
                trial = np.maximum(trial, floor)
            vals = self.logf(j, trial)
            done = (vals < level) | (trial <= floor)
            pos = trial
            if done.all():
                return pos
            step = np.where(done, 0.0, step * 1.6)
            # rows that are done stay put
        raise ConvergenceError("could not bracket the radial integrand")

    def window(self, j):
        """Integration window ``[lo, hi]`` per degree, peak value and scale."""
        j = np.asarray(j, dtype=float)
        rs = self.saddle(j)
        sig = self.peak_scale(j, rs)
        peak = self.logf(j, rs)
        lo = self._extend(j, rs, peak - DROP, sig, -1)
        hi = self._extend(j, rs, peak - DROP, sig, +1)
        return lo, hi, rs, sig, peak

    def log_integral(self, j, lo, hi, chunk: int = 1024):
        j = np.atleast_1d(np.asarray(j, dtype=float))
        lo = np.broadcast_to(np.asarray(lo, dtype=float), j.shape)
        hi = np.broadcast_to(np.asarray(hi, dtype=float), j.shape)
        parts = [self._log_integral(j[s:s + chunk], lo[s:s + chunk], hi[s:s + chunk])
                 for s in range(0, j.size, chunk)]
        return np.concatenate(parts) if parts else np.empty(0)

    def _log_integral(self, j, lo, hi):
        """log of ``2 int_lo^hi r**(2j+1) exp(-n Q^(c)) dr`` per degree.

        Each interval is split at the droplet radius; panels double until the
        relative change is below QUAD_RTOL.
        """
        cut = np.clip(self.rho1, lo, hi)

        def f(jj):
            return lambda r: self.logf(jj[:, None], r)

        panels = 4
        prev = None
        active = np.arange(j.size)
        result = np.empty(j.size)
        while True:
            jj = j[active]
            a = _composite_log(f(jj), lo[active], cut[active], panels)
            b = _composite_log(f(jj), cut[active], hi[active], panels)
            cur = np.logaddexp(a, b)
            if prev is not None:
                with np.errstate(invalid="ignore"):
                    diff = np.abs(np.expm1(cur - prev))
                ok = (diff < QUAD_RTOL) | (np.isneginf(cur) & np.isneginf(prev))
                result[active[ok]] = cur[ok]
                active = active[~ok]
                cur = cur[~ok]
                if active.size == 0:
                    break
            if panels > 4096:
                raise ConvergenceError("radial quadrature did not converge")
            prev = cur
            panels *= 2
        return math.log(2.0) + result

    def log_norms(self, j):
        lo, hi, *_ = self.window(j)
        return self.log_integral(j, lo, hi)

    def log_tail(self, j, r, upper: bool):
        """log of the weight integral above (``upper``) or below ``r``, per degree."""
        j = np.atleast_1d(np.asarray(j, dtype=float))
        r = float(r)
        lo, hi, rs, sig, peak = self.window(j)
        rr = np.full(j.shape, r)
        # a tail far from the peak must be resolved relative to its own size
        if upper:
            a = np.maximum(lo, rr)
            b = hi.copy()
            far = rr > rs
            if far.any():
                level = self.logf(j[far], rr[far]) - DROP
                ext = self._extend(j[far], rr[far], level, sig[far], +1)
                b[far] = np.maximum(b[far], ext)
        else:
            a = lo.copy()
            b = np.minimum(hi, rr)
            far = rr < rs
            if far.any():
                level = self.logf(j[far], rr[far]) - DROP
                ext = self._extend(j[far], rr[far], level, sig[far], -1)
                a[far] = np.minimum(a[far], ext)
        if r <= 0:
            return np.full(j.shape, -np.inf) if not upper else self.log_integral(j, lo, hi)
        return self.log_integral(j, a, b)


class RadialEnsemble:
    """Finite-n radial ensemble: monomial norms plus kernel and mass evaluations.

    Subclasses fill ``log_norms``; the instance is read-only afterwards.  The
    orthonormal polynomials are ``zeta**j / sqrt(h_j)`` and the weighted ones
    ``w_j = p_j exp(-n Q^(c) / 2)``; masses refer to the radial law of ``|zeta|``
    under ``|w_j|**2 dA``.
    """

    def __init__(self, n: int, c: float, potential: pot.RadialPotential, log_norms: np.ndarray):
        self.weights = RadialWeights(n, c, potential)
        self.n = self.weights.n
        self.c = self.weights.c
        self.potential = potential
        self.rho1 = self.weights.rho1
        self.lap1 = float(potential.laplacian(self.rho1))
        log_norms = np.array(log_norms, dtype=float)
        log_norms.flags.writeable = False
        self.log_norms = log_norms
        if log_norms.shape != (self.n,) or not np.all(np.isfinite(log_norms)):
            raise ConvergenceError("log norms must be finite, one per degree")

    # -- per-degree radial laws ---------------------------------------------

    def _degrees(self, j):
        return np.arange(self.n) if j is None else np.atleast_1d(np.asarray(j, dtype=int))

    def log_pdf(self, j, r):
        """log density of ``|zeta|`` under ``|w_j|**2 dA``: ``2 r**(2j+1) e**(-nQ^(c)) / h_j``."""
        j = np.asarray(j, dtype=int)
        return math.log(2.0) + self.weights.logf(j, r) - self.log_norms[j]

    def log_upper_masses(self, r, j=None):
        """log of ``int_{|zeta| > r} |w_j|**2 dA`` for each degree."""
        j = self._degrees(j)
        return np.minimum(self.weights.log_tail(j, r, upper=True) - self.log_norms[j], 0.0)

    def log_lower_masses(self, r, j=None):
        """log of ``int_{|zeta| <= r} |w_j|**2 dA`` for each degree."""
        j = self._degrees(j)
        return np.minimum(self.weights.log_tail(j, r, upper=False) - self.log_norms[j], 0.0)

    # -- kernel ----------------------------------------------------------------

    def log_terms(self, r, j=None):
        """``log |w_j(zeta)|**2`` at ``|zeta| = r``."""
        j = self._degrees(j)
        r = float(r)
        if r == 0.0:
            out = np.full(j.shape, -np.inf)
            out[j == 0] = -self.n * float(self.weights.qc(0.0)) - self.log_norms[0]
            return out
        return 2.0 * j * math.log(r) - self.n * float(self.weights.qc(r)) - self.log_norms[j]

    def one_point(self, r, j=None) -> float:
        """``R_n = sum_j |w_j|**2`` at modulus ``r`` (optionally over a subset of degrees)."""
        t = self.log_terms(r, j)
        return float(np.exp(logsumexp(t))) if np.any(np.isfinite(t)) else 0.0

    def kernel(self, zeta, eta) -> complex:
        """``K_n(zeta, eta) = sum_j w_j(zeta) conj(w_j(eta))`` with log-sum-exp."""
        zeta, eta = complex(zeta), complex(eta)
        j = np.arange(self.n)
        prod = zeta * eta.conjugate()
        if prod == 0:
            t = np.full(self.n, -np.inf, dtype=complex)
            t[0] = 0.0
        else:
            t = j * np.log(prod)
        t = t - 0.5 * self.n * (float(self.weights.qc(abs(zeta))) + float(self.weights.qc(abs(eta)))) - self.log_norms
        m = np.max(t.real)
        if not np.isfinite(m):
            return 0j
        return complex(np.exp(m) * np.sum(np.exp(t - m)))

    # -- boundary chart --------------------------------------------------------

    def chart(self, z) -> complex:
        """``zeta = rho_1 + z / sqrt(n Delta Q(rho_1))``."""
        return self.rho1 + complex(z) / math.sqrt(self.n * self.lap1)

    def rescaled_density(self, z) -> float:
        return self.one_point(abs(self.chart(z))) / (self.n * self.lap1)

    def rescaled_kernel(self, z, w) -> complex:
        return self.kernel(self.chart(z), self.chart(w)) / (self.n * self.lap1)

    def total_mass(self, rmax: float, panels: int = 400) -> float:
        """``int_{|zeta| < rmax} R_n dA`` by composite Gauss-Legendre in ``r``."""
        nodes, wts = np.polynomial.legendre.leggauss(_GL_ORDER)
        edges = np.unique(np.concatenate([np.linspace(0.0, rmax, panels + 1), [min(self.rho1, rmax)]]))
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            r = 0.5 * (b - a) * nodes + 0.5 * (a + b)
            vals = np.array([self.one_point(x) for x in r])
            total += 0.5 * (b - a) * np.sum(wts * 2.0 * r * vals)
        return total
