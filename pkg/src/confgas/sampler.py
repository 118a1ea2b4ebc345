"""Maximum modulus of radial confined ensembles and its Gumbel limit.

For a radial weight the moduli ``|zeta_j|`` behave like independent variables,
the j-th with density ``2 r**(2j+1) e**(-nQ^(c)(r)) / h_j``, so that

    P(max |zeta| <= r) = prod_j (1 - m_j(r)),   m_j(r) = mass of |w_j|**2 beyond r.

The sampler draws every degree independently by inverse transform and keeps the
maximum.  Only degrees near the edge can produce the maximum, so each degree's
survival function is tabulated on ``[rho - 10/sqrt(n), r_hi]``; draws in the
panel that holds a replicate's maximum are then polished by Newton's method on
the exact survival function.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from . import profiles
from ._radial import RadialEnsemble
from .errors import BracketError, DomainError, ToleranceError

__all__ = [
    "gamma_n",
    "scale_constant",
    "h_n",
    "r_n",
    "omega",
    "gap_probability",
    "log_gap_probability",
    "tail_sum",
    "lower_block_fraction",
    "ModulusLaws",
    "build_laws",
    "MaxModulusBatch",
    "sample_max_modulus",
    "gumbel_cdf",
    "ks_distance",
    "crosscheck",
]

EULER_GAMMA = 0.5772156649015329
GUMBEL_MEDIAN = -math.log(math.log(2.0))
# tabulation window: from rho - TABLE_BELOW / sqrt(n) to where every survival is below TABLE_TOP
TABLE_BELOW = 10.0
TABLE_TOP = 1e-14
PANELS_PER_UNIT = 4.0  # panels per 1/sqrt(n)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_KEY_MASK = (1 << 64) - 1


# ---------------------------------------------------------------------------
# normalising constants


def scale_constant(model: RadialEnsemble) -> float:
    """``C_c = rho sqrt(Delta Q(rho)) / Phi_c(0)``."""
    phi0 = float(profiles.confinement_fn(0.0, model.c))
    return model.rho1 * math.sqrt(model.lap1) / phi0


def gamma_n(model: RadialEnsemble) -> float:
    """``gamma_n = log(n / 2 pi) - 2 log log n + 2 log C_c``.

    Cross-checked against the form ``log(rho**2 Delta Q(rho) / Phi_c(0)**2)``
    for the last term.
    """
    n = model.n
    if n < 16:
        raise DomainError("gamma_n needs n >= 16")
    base = math.log(n / (2.0 * math.pi)) - 2.0 * math.log(math.log(n))
    first = base + 2.0 * math.log(scale_constant(model))
    phi0 = float(profiles.confinement_fn(0.0, model.c))
    second = base + math.log(model.rho1**2 * model.lap1 / phi0**2)
    if abs(first - second) > 1e-12:
        raise ToleranceError("the two forms of gamma_n disagree")
    return first


def _positive_gamma(model) -> float:
    g = gamma_n(model)
    if not g > 0:
        # log(n / 2 pi) < 2 log log n + ..., which happens for n below about 150 at c = 1
        raise DomainError(f"gamma_n = {g:.3g} is not positive; the rescaling needs larger n")
    return g


def r_n(model: RadialEnsemble, x):
    """``r_n(c, x) = (sqrt(gamma_n) + x / sqrt(gamma_n)) / sqrt(c)``."""
    g = _positive_gamma(model)
    return (math.sqrt(g) + np.asarray(x, dtype=float) / math.sqrt(g)) / math.sqrt(model.c)


def h_n(model: RadialEnsemble, x):
    """Offset of the threshold radius: ``r_n(c, x) / sqrt(4 n Delta Q(rho))``."""
    return r_n(model, x) / math.sqrt(4.0 * model.n * model.lap1)


def omega(model: RadialEnsemble, radius):
    """Rescaled maximum ``sqrt(4 n c gamma_n dQ)(|zeta| - rho - sqrt(gamma_n / (4 n c dQ)))``."""
    g = _positive_gamma(model)
    k = 4.0 * model.n * model.c * model.lap1
    return math.sqrt(k * g) * (np.asarray(radius, dtype=float) - model.rho1 - math.sqrt(g / k))


def radius_of_omega(model: RadialEnsemble, x):
    return model.rho1 + h_n(model, x)


# ---------------------------------------------------------------------------
# exact product formula


def log_gap_probability(model: RadialEnsemble, r: float) -> float:
    """``sum_j log(1 - m_j(r))``, accumulated from the inner masses directly."""
    if not r > 0:
        raise DomainError("gap probability needs r > 0")
    return float(np.sum(model.log_lower_masses(r)))


def gap_probability(model: RadialEnsemble, r: float) -> float:
    """``P(max |zeta| <= r) = prod_j (1 - m_j(r))``."""
    return math.exp(log_gap_probability(model, r))


def tail_sum(model: RadialEnsemble, x: float) -> float:
    """``sum_j m_j(rho + h_n(x))``, which tends to ``e**-x``."""
    r = float(radius_of_omega(model, x))
    return float(np.exp(logsumexp(model.log_upper_masses(r))))


def lower_block_fraction(model: RadialEnsemble, x: float) -> float:
    """Share of ``tail_sum`` carried by degrees ``j <= n - sqrt(n) log n``."""
    r = float(radius_of_omega(model, x))
    logs = model.log_upper_masses(r)
    cut = int(math.floor(model.n - math.sqrt(model.n) * math.log(model.n)))
    if cut < 0:
        return 0.0
    return float(np.exp(logsumexp(logs[: cut + 1]) - logsumexp(logs)))


# ---------------------------------------------------------------------------
# per-degree tables


@dataclass(frozen=True)
class ModulusLaws:
    """Survival tables ``S_j(r_k)`` for the degrees that can reach the table.

    ``log_surv[i, k]`` is ``log S_{degrees[i]}(grid[k])``, decreasing in ``k``.
    """

    model: RadialEnsemble
    grid: np.ndarray
    degrees: np.ndarray
    log_surv: np.ndarray
    max_local_error: float


def _log_panel_integrals(model, j, a, b):
    """log of ``int_a^b pdf_j`` for rows ``j`` and matching interval arrays."""
    h = b - a
    r = a[..., None] + 0.5 * h[..., None] * (_GL_NODES + 1.0)
    vals = model.log_pdf(j[..., None], r)
    return logsumexp(vals, b=0.5 * h[..., None] * _GL_WEIGHTS, axis=-1)


def build_laws(model: RadialEnsemble) -> ModulusLaws:
    """Tabulate survival functions by cumulative Gauss-Legendre integration.

    Each row is anchored at the top node by the exact outer mass and summed
    downwards; two interior nodes per row are compared with exact masses.
    """
    n = model.n
    rho = model.rho1
    # for small n the window is clipped so that it stays away from the origin
    r0 = max(rho - TABLE_BELOW / math.sqrt(n), 0.05 * rho)
    # top of table: the highest degree has the heaviest tail
    step = 1.0 / math.sqrt(n)
    r_hi = rho + step
    while model.log_upper_masses(r_hi, [n - 1])[0] > math.log(TABLE_TOP):
        r_hi += step
    # degrees with non-negligible mass above r0
    log_m0 = model.log_upper_masses(r0)
    degrees = np.nonzero(log_m0 > -700.0)[0]
    # grid with rho as a node whenever the window contains it
    split = max(r0, rho)
    below = np.linspace(r0, split, int(math.ceil((split - r0) / step * PANELS_PER_UNIT)) + 1)
    above_n = int(math.ceil((r_hi - split) / step * PANELS_PER_UNIT))
    above = np.linspace(split, r_hi, above_n + 1)
    grid = np.concatenate([below, above[1:]])
    jj = degrees[:, None].astype(float)
    a = np.broadcast_to(grid[:-1], (degrees.size, grid.size - 1))
    b = np.broadcast_to(grid[1:], (degrees.size, grid.size - 1))
    panels = _log_panel_integrals(model, np.broadcast_to(jj, a.shape), a, b)
    top = model.log_upper_masses(grid[-1], degrees)
    # survival at node k: top mass plus panels k .. end, via reverse cumulative logaddexp
    cols = np.concatenate([panels, top[:, None]], axis=1)
    log_surv = np.minimum(np.logaddexp.accumulate(cols[:, ::-1], axis=1)[:, ::-1], 0.0)
    # spot check against exact masses at two nodes
    err = 0.0
    for k in (len(below) // 2, len(below) - 1 + above_n // 4):
        exact = model.log_upper_masses(grid[k], degrees)
        ok = exact > -600
        if ok.any():
            err = max(err, float(np.max(np.abs(np.expm1(log_surv[ok, k] - exact[ok])))))
    if err > 1e-10:
        raise ToleranceError(f"survival tables off by {err:.2e}")
    return ModulusLaws(model=model, grid=grid, degrees=degrees, log_surv=log_surv, max_local_error=err)


# ---------------------------------------------------------------------------
# sampling


def _stream(seed: int, j: int, count: int) -> np.ndarray:
    """Upper-tail uniforms in (0, 1] for degree ``j``: entry ``k`` belongs to replicate ``k``."""
    key = (int(seed) & _KEY_MASK) | (int(j) << 64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.random(count) + 2.0**-54


def _exact_log_surv(laws: ModulusLaws, row: int, j: int, k: int, r):
    """``log S_j(r)`` for ``r`` in panel ``[grid[k], grid[k+1]]``."""
    a = np.full_like(r, laws.grid[k])
    part = _log_panel_integrals(laws.model, np.full_like(r, j), a, r)
    with np.errstate(invalid="ignore"):
        return laws.log_surv[row, k] + np.log1p(-np.exp(part - laws.log_surv[row, k]))


def _invert_in_panel(laws: ModulusLaws, row: int, j: int, k: int, logu: np.ndarray) -> np.ndarray:
    """Solve ``S_j(r) = u`` inside panel ``k`` (between nodes ``k`` and ``k + 1``)."""
    g = laws.grid
    lo = np.full_like(logu, g[k])
    hi = np.full_like(logu, g[k + 1])
    s0, s1 = laws.log_surv[row, k], laws.log_surv[row, k + 1]
    # start from linear interpolation of log S
    t = np.clip((logu - s0) / (s1 - s0), 0.0, 1.0) if s1 < s0 else np.full_like(logu, 0.5)
    r = g[k] + t * (g[k + 1] - g[k])
    # entries are frozen once converged, so each draw depends on its own uniform only
    active = np.ones(r.shape, dtype=bool)
    for _ in range(60):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        ra = r[idx]
        ls = _exact_log_surv(laws, row, j, k, ra)
        # d/dr log S = -pdf / S
        dlog = -np.exp(laws.model.log_pdf(j, ra) - ls)
        f = ls - logu[idx]
        hi[idx] = np.where(f < 0, ra, hi[idx])
        lo[idx] = np.where(f >= 0, ra, lo[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            new = ra - f / dlog
        bad = ~np.isfinite(new) | (new <= lo[idx]) | (new >= hi[idx])
        new = np.where(bad, 0.5 * (lo[idx] + hi[idx]), new)
        r[idx] = new
        active[idx] = np.abs(new - ra) > 1e-15 * ra
    return r


def _invert_above(laws: ModulusLaws, j: int, logu: np.ndarray) -> np.ndarray:
    """Root-find ``S_j(r) = u`` beyond the table by bisection on exact masses."""
    model = laws.model
    out = np.empty_like(logu)
    step = 1.0 / math.sqrt(model.n)
    for i, lu in enumerate(logu):
        lo = laws.grid[-1]
        hi = lo + step
        while model.log_upper_masses(hi, [j])[0] > lu:
            hi += step
            if hi > 100 * model.rho1:
                raise BracketError("could not bracket an extreme draw")
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if model.log_upper_masses(mid, [j])[0] > lu:
                lo = mid
            else:
                hi = mid
        out[i] = 0.5 * (lo + hi)
    return out


def _max_below_table(laws: ModulusLaws, seed: int, rep: int) -> float:
    """Exact maximum for a replicate with no draw in the table.

    The maximum is the smallest ``r`` with ``S_j(r) <= u_j`` for every degree.
    """
    model = laws.model
    logu = np.array([math.log(_stream(seed, j, rep + 1)[rep]) for j in range(model.n)])
    lo, hi = 0.0, laws.grid[0]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if np.all(model.log_upper_masses(mid) <= logu):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class MaxModulusBatch:
    n: int
    c: float
    sample_count: int
    seed: int
    gamma_n: float
    radii: np.ndarray
    omegas: np.ndarray
    meta: dict = field(default_factory=dict)

    def ks_distance(self) -> float:
        return ks_distance(self.omegas)

    def quantiles(self, probs=(0.05, 0.25, 0.5, 0.75, 0.95)) -> dict:
        qs = np.quantile(self.omegas, probs)
        return {f"{p:g}": float(q) for p, q in zip(probs, qs)}

    def summary(self) -> dict:
        return {
            "n": self.n,
            "c": self.c,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "gamma_n": self.gamma_n,
            "ks_distance": self.ks_distance(),
            "median": float(np.median(self.omegas)),
            "mean": float(np.mean(self.omegas)),
            "quantiles": self.quantiles(),
            **self.meta,
        }

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["replicate", "omega"])
            for i, v in enumerate(self.omegas):
                w.writerow([i, f"{v:.12g}"])

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)


def sample_max_modulus(model: RadialEnsemble, sample_count: int, seed: int, laws: ModulusLaws | None = None) -> MaxModulusBatch:
    """Draw ``sample_count`` replicates of the rescaled maximum modulus ``omega_n``.

    Degree ``j`` of replicate ``k`` uses the ``k``-th output of a Philox stream
    keyed by ``(seed, j)``, so results do not depend on evaluation order.
    """
    if sample_count < 1:
        raise DomainError("sample_count must be positive")
    laws = build_laws(model) if laws is None else laws
    K = int(sample_count)
    M = laws.grid.size - 1  # panels 0 .. M-1; M means beyond the table
    # pass 1: the highest panel reached in each replicate (-1: none)
    top = np.full(K, -1)
    for row, j in enumerate(laws.degrees):
        logu = np.log(_stream(seed, j, K))
        hit = logu < laws.log_surv[row, 0]
        if not hit.any():
            continue
        # panel k holds u with S(grid[k+1]) <= u < S(grid[k])
        idx = np.searchsorted(-laws.log_surv[row], -logu[hit], side="right") - 1
        top[hit] = np.maximum(top[hit], idx)
    # pass 2: exact draws for the candidates in each replicate's top panel
    best = np.full(K, -np.inf)
    for row, j in enumerate(laws.degrees):
        logu = np.log(_stream(seed, j, K))
        hit = logu < laws.log_surv[row, 0]
        if not hit.any():
            continue
        reps = np.nonzero(hit)[0]
        idx = np.searchsorted(-laws.log_surv[row], -logu[hit], side="right") - 1
        sel = idx == top[reps]
        if not sel.any():
            continue
        reps, idx = reps[sel], idx[sel]
        for k in np.unique(idx):
            m = idx == k
            if k >= M:
                r = _invert_above(laws, int(j), logu[reps[m]])
            else:
                r = _invert_in_panel(laws, row, int(j), int(k), logu[reps[m]])
            best[reps[m]] = np.maximum(best[reps[m]], r)
    fallback = np.nonzero(top < 0)[0]
    for rep in fallback:
        best[rep] = _max_below_table(laws, seed, int(rep))
    g = gamma_n(model)
    return MaxModulusBatch(
        n=model.n,
        c=model.c,
        sample_count=K,
        seed=int(seed),
        gamma_n=g,
        radii=best,
        omegas=omega(model, best),
        meta={"fallback_replicates": int(fallback.size), "table_error": laws.max_local_error,
              "table_degrees": int(laws.degrees.size)},
    )


# ---------------------------------------------------------------------------
# diagnostics


def gumbel_cdf(x):
    return np.exp(-np.exp(-np.asarray(x, dtype=float)))


def ks_distance(samples) -> float:
    """Kolmogorov-Smirnov distance between the sample and the standard Gumbel law."""
    return float(stats.kstest(np.asarray(samples), stats.gumbel_r.cdf).statistic)


def crosscheck(batch: MaxModulusBatch, model: RadialEnsemble, xs=(-1.0, 0.0, 2.0)) -> list[dict]:
    """Empirical ``P(omega <= x)`` against the exact product formula, in standard errors."""
    out = []
    for x in xs:
        exact = gap_probability(model, float(radius_of_omega(model, x)))
        emp = float(np.mean(batch.omegas <= x))
        se = math.sqrt(max(exact * (1.0 - exact), 1e-300) / batch.sample_count)
        out.append({"x": float(x), "exact": exact, "empirical": emp, "se": se, "z": abs(emp - exact) / se})
    return out
