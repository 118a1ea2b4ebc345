"""Scalar special functions with log-space variants.

Everything here accepts numpy arrays (broadcasting) as well as plain floats;
scalar input gives scalar output.  The incomplete gamma routines work in log
space throughout so that parameters of order 10**5 and beyond neither overflow
nor underflow.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError

__all__ = [
    "phi",
    "log_phi",
    "erfcx_scaled",
    "reg_gamma_lower",
    "reg_gamma_upper",
    "log_reg_gamma_lower",
    "log_reg_gamma_upper",
    "log_upper_gamma_general",
    "log_lower_gamma",
    "logdiffexp",
]

EPS = np.finfo(float).eps
_TINY = 1e-300
_MAX_ITER = 200_000
_EULER_GAMMA = 0.57721566490153286061


def _out(arr):
    arr = np.asarray(arr)
    return arr[()] if arr.ndim == 0 else arr


def phi(x):
    """Upper Gaussian tail ``(2*pi)**-0.5 * int_x^inf exp(-t**2/2) dt``."""
    return _out(0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0)))


def log_phi(x):
    """``log(phi(x))`` without underflow for large positive ``x``."""
    return _out(special.log_ndtr(-np.asarray(x, dtype=float)))


def erfcx_scaled(x):
    """Scaled complementary error function ``exp(x**2) * erfc(x)``."""
    return _out(special.erfcx(np.asarray(x, dtype=float)))


def logdiffexp(a, b):
    """``log(exp(a) - exp(b))`` for ``a >= b``; ``-inf`` when they coincide."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a + np.log1p(-np.exp(b - a))
    out = np.where(np.isneginf(b), a, out)
    return _out(out)


def _stirling_corr(a):
    """``gammaln(a + 1) - (a log a - a + log(2 pi a) / 2)`` for ``a >= 10``."""
    r = 1.0 / (a * a)
    return (1.0 / 12.0 - r * (1.0 / 360.0 - r * (1.0 / 1260.0 - r / 1680.0))) / a


def _log_prefactor(a, x):
    """``a log x - x - gammaln(a + 1)`` without the cancellation of large terms."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    big = a >= 10.0
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = a * np.log(x) - x - special.gammaln(a + 1.0)
        ab = np.where(big, a, 10.0)
        t = (x - ab) / ab
        stir = ab * (np.log1p(t) - t) - 0.5 * np.log(2.0 * np.pi * ab) - _stirling_corr(ab)
    return np.where(big, stir, direct)


# ---------------------------------------------------------------------------
# series and continued fraction kernels (vectorised with active-set compaction)


def _log_series_lower(a, x):
    """log P(a, x) from the power series; intended for 0 < x < a + 1."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    total = np.ones_like(x)
    term = np.ones_like(x)
    active = np.arange(x.size)
    av, xv = a.ravel(), x.ravel()
    tot, trm = total.ravel(), term.ravel()
    k = 0
    while active.size:
        k += 1
        if k > _MAX_ITER:
            raise ConvergenceError("incomplete gamma series did not converge")
        trm[active] *= xv[active] / (av[active] + k)
        tot[active] += trm[active]
        active = active[trm[active] > EPS * tot[active]]
    return _log_prefactor(a, x) + np.log(total)


def _log_cf(s, x):
    """Log of the Legendre continued fraction for ``Gamma(s, x) x**-s e**x``.

    Evaluated by the modified Lentz method.

    Valid for every real ``s`` when ``x > 0``; converges quickly once ``x`` is
    not small compared with ``s``.
    """
    s = np.asarray(s, dtype=float).ravel()
    x = np.asarray(x, dtype=float).ravel()
    b = x + 1.0 - s
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / np.where(np.abs(b) < _TINY, _TINY, b)
    h = d.copy()
    active = np.arange(x.size)
    i = 0
    while active.size:
        i += 1
        if i > _MAX_ITER:
            raise ConvergenceError("incomplete gamma continued fraction did not converge")
        an = -i * (i - s[active])
        b[active] += 2.0
        dd = an * d[active] + b[active]
        dd = np.where(np.abs(dd) < _TINY, _TINY, dd)
        cc = b[active] + an / c[active]
        cc = np.where(np.abs(cc) < _TINY, _TINY, cc)
        dd = 1.0 / dd
        delta = dd * cc
        d[active] = dd
        c[active] = cc
        h[active] *= delta
        active = active[np.abs(delta - 1.0) > EPS]
    return np.log(h)


def _log_exp1_small(x):
    """log E_1(x) for 0 < x <= 1 via the convergent series."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 80):
        term = term * (-x) / k
        total -= term / k
    return np.log(-_EULER_GAMMA - np.log(x) + total)


def _lgamma1p(s):
    """``log Gamma(1 + s)`` accurate for tiny ``|s|`` (``|s| < 1``)."""
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < 0.5
    total = -_EULER_GAMMA * s
    power = -s
    for k in range(2, 60):
        power = power * -s
        total = total + special.zeta(k) * power / k
    return np.where(small, total, special.gammaln(1.0 + s))


def _log_upper_unit_interval(s, x):
    """log Gamma(s, x) for -0.5 <= s < 1 (s != 0) and 0 < x <= 1.5.

    Splits off Gamma(s) - x**s / s, written with expm1 so that nothing cancels
    when ``s`` is tiny and Gamma(s) is huge.
    """
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    logx = np.log(x)
    head = (np.expm1(_lgamma1p(s)) - np.expm1(s * logx)) / s
    term = np.ones_like(x)
    tail = np.zeros_like(x)
    for k in range(1, 60):
        term = term * (-x) / k
        tail = tail + term / (s + k)
    return np.log(head - np.exp(s * logx) * tail)


def _log_upper_small_x(s, x):
    """log Gamma(s, x) for s < 1 and 0 < x < 1.

    For s <= 0 uses Gamma(t, x) = (x**t e**-x - Gamma(t + 1, x)) / (-t),
    t < 0, which involves no cancellation when x is small.
    """
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    # base point: s itself on (0, 1), else s - round(s) in [-0.5, 0.5]; the
    # latter keeps tiny negative s away from a cancelling recurrence step
    start = np.where(s > 0, s, s - np.rint(s))
    integer = start == 0.0
    logg = np.empty_like(x)
    if np.any(integer):
        logg[integer] = _log_exp1_small(x[integer])
    if np.any(~integer):
        logg[~integer] = _log_upper_unit_interval(start[~integer], x[~integer])
    steps = np.rint(start - s).astype(int)
    t = start.copy()
    logx = np.log(x)
    for k in range(1, int(steps.max(initial=0)) + 1):
        m = steps >= k
        t[m] -= 1.0
        lead = t[m] * logx[m] - x[m]
        logg[m] = lead + np.log1p(-np.exp(logg[m] - lead)) - np.log(-t[m])
    return logg


# ---------------------------------------------------------------------------
# public incomplete gamma API


def _check_gamma_args(a, x):
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(~(a > 0)):
        raise DomainError("regularized incomplete gamma requires a > 0")
    if np.any(~(x >= 0)):
        raise DomainError("regularized incomplete gamma requires x >= 0")
    return np.broadcast_arrays(a, x)


def _log_reg_pair(a, x):
    a, x = _check_gamma_args(a, x)
    a = np.array(a, dtype=float)
    x = np.array(x, dtype=float)
    logp = np.empty(a.shape)
    logq = np.empty(a.shape)
    zero = x == 0.0
    logp[zero] = -np.inf
    logq[zero] = 0.0
    small = (~zero) & (a < 1.0) & (x < 1.0)
    ser = (~zero) & ~small & (x < a + 1.0)
    cf = (~zero) & ~(ser | small)
    if np.any(small):
        # Q from the small-x formula, P from its own series: 1 - Q cancels when x is tiny
        logq[small] = np.minimum(_log_upper_small_x(a[small], x[small]) - special.gammaln(a[small]), 0.0)
        logp[small] = _log_series_lower(a[small], x[small])
    if np.any(ser):
        lp = _log_series_lower(a[ser], x[ser])
        logp[ser] = lp
        logq[ser] = np.log1p(-np.exp(lp))
    if np.any(cf):
        ac, xc = a[cf], x[cf]
        lq = _log_cf(ac, xc) + _log_prefactor(ac, xc) + np.log(ac)
        logq[cf] = lq
        logp[cf] = np.log1p(-np.exp(lq))
    return logp, logq


def log_reg_gamma_lower(a, x):
    """``log P(a, x)``, the log of the regularized lower incomplete gamma."""
    return _out(_log_reg_pair(a, x)[0])


def log_reg_gamma_upper(a, x):
    """``log Q(a, x)``, the log of the regularized upper incomplete gamma."""
    return _out(_log_reg_pair(a, x)[1])


def reg_gamma_lower(a, x):
    """Regularized lower incomplete gamma ``P(a, x) = gamma(a, x) / Gamma(a)``.

    Raises DomainError unless ``a > 0`` and ``x >= 0``.
    """
    return _out(np.exp(_log_reg_pair(a, x)[0]))


def reg_gamma_upper(a, x):
    """Regularized upper incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    return _out(np.exp(_log_reg_pair(a, x)[1]))


def log_lower_gamma(a, x):
    """``log gamma(a, x)`` (non-regularized lower incomplete gamma), ``a > 0``."""
    a_, _ = _check_gamma_args(a, x)
    return _out(special.gammaln(a_) + _log_reg_pair(a, x)[0])


def log_upper_gamma_general(s, x):
    """``log Gamma(s, x)`` for any real ``s`` and ``x > 0``.

    ``Gamma(s, x) = int_x^inf t**(s-1) exp(-t) dt`` is finite for every real
    ``s`` once ``x > 0``, including nonpositive integers where ``Gamma(s)``
    itself is singular.  The routine never goes through ``Gamma(s)`` for
    ``s < 1``: it uses the continued fraction for ``x >= 1`` and a
    cancellation-free series plus downward recurrence for ``x < 1``.

    Raises ConvergenceError if the continued fraction stalls.
    """
    s, x = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(x, dtype=float))
    if np.any(~(x > 0)):
        raise DomainError("log_upper_gamma_general requires x > 0")
    if not np.all(np.isfinite(s)):
        raise DomainError("log_upper_gamma_general requires finite s")
    s = np.array(s)
    x = np.array(x)
    out = np.empty(s.shape)
    ser = (s >= 1.0) & (x < s + 1.0)
    small = (~ser) & (x < 1.0)
    cf = ~(ser | small)
    if np.any(ser):
        lp = _log_series_lower(s[ser], x[ser])
        out[ser] = special.gammaln(s[ser]) + np.log1p(-np.exp(lp))
    if np.any(small):
        out[small] = _log_upper_small_x(s[small], x[small])
    if np.any(cf):
        sc, xc = s[cf], x[cf]
        out[cf] = _log_cf(sc, xc) + sc * np.log(xc) - xc
    return _out(out)
