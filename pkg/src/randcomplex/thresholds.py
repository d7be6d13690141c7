"""Closed-form thresholds and limiting densities for random d-complexes.

Everything here is plain float64 numerics.  The only delicate quantity is
``d + 1 - c_d``, which underflows relative to ``d + 1`` for large d; it is
computed in log space by ``log10_gap``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

DEFAULT_TOL = 1e-12


def psi(x: float, d: int) -> float:
    """-ln(x) / (1-x)^d on the open unit interval."""
    if not 0.0 < x < 1.0:
        raise ValueError(f"psi is defined on (0, 1), got x={x}")
    return -math.log(x) / (1.0 - x) ** d


def _log_psi_u(u: float, d: int) -> float:
    # log psi in the coordinate u = ln x < 0
    return math.log(-u) - d * math.log1p(-math.exp(u))


def _argmin_u(d: int, tol: float) -> float:
    # psi is unimodal; stationary point solves (1-x) + d x ln x = 0.
    # For large d the minimiser sits near x ~ 1/(d ln d), so bracket in u.
    lo, hi = -math.log(d + 1.0) - 2.0 * math.log(math.log(d + 2.0)) - 5.0, -1e-9
    res = optimize.minimize_scalar(
        _log_psi_u, bounds=(lo, hi), args=(d,), method="bounded",
        options={"xatol": tol},
    )
    return float(res.x)


def gamma_d(d: int, tol: float = DEFAULT_TOL) -> float:
    """Minimum of psi over (0, 1): the collapsibility threshold."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return math.exp(_log_psi_u(_argmin_u(d, tol), d))


def _xstar_equation_u(u: float, d: int) -> float:
    x = math.exp(u)
    return (d + 1) * (-math.expm1(u)) + (1.0 + d * x) * u


def x_star_log(d: int, tol: float = DEFAULT_TOL) -> float:
    """ln(x_*), where x_* is the root of (d+1)(1-x) + (1+dx) ln x = 0 in (0,1)."""
    if d < 2:
        raise ValueError("x_star requires d >= 2")
    # f(u) > 0 for u near 0-, f(u) < 0 for u < -(d+1) - 1
    lo, hi = -(d + 1.0) - 2.0, -1e-6
    flo, fhi = _xstar_equation_u(lo, d), _xstar_equation_u(hi, d)
    if not (flo < 0.0 < fhi):
        raise ArithmeticError(f"x_star bracket failure for d={d}")
    return float(optimize.bisect(_xstar_equation_u, lo, hi, args=(d,), xtol=tol, maxiter=500))


def x_star(d: int, tol: float = DEFAULT_TOL) -> float:
    return math.exp(x_star_log(d, tol))


def c_d(d: int, tol: float = DEFAULT_TOL) -> float:
    """Acyclicity threshold psi(x_*)."""
    u = x_star_log(d, tol)
    x = math.exp(u)
    return -u / math.exp(d * math.log1p(-x)) if x > 0 else -u


def log10_gap(d: int, tol: float = DEFAULT_TOL) -> float:
    """log10(d + 1 - c_d), accurate even when the gap is below double precision.

    On the root, ln x = -(d+1)(1-x)/(1+dx), so c_d = (d+1) / ((1+dx)(1-x)^(d-1))
    and d+1-c_d = (d+1)(1 - e^{-L}) with L = ln(1+dx) + (d-1) ln(1-x) = x + O(d x^2).
    """
    u = x_star_log(d, tol)
    x = math.exp(u)
    if x > 1e-290:
        L = math.log1p(d * x) + (d - 1) * math.log1p(-x)
        log_gap = math.log(d + 1.0) + math.log(-math.expm1(-L))
    else:
        # x underflows; L/x -> 1 with relative error O(d^2 x)
        log_gap = math.log(d + 1.0) + u
    return log_gap / math.log(10.0)


def poisson_tail(k: int, lam: float) -> float:
    """Pr[Poi(lam) >= k]."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if k <= 0:
        return 1.0
    if lam == 0:
        return 0.0
    return float(stats.poisson.sf(k - 1, lam))


def fixed_point_roots(c: float, d: int, tol: float = DEFAULT_TOL, grid: int = 10_000) -> list[float]:
    """All roots of t = exp(-c (1-t)^d) in (0, 1], ascending.  t = 1 is always a root.

    A sign scan of h(t) = t - exp(-c(1-t)^d) on a uniform grid finds the
    transversal roots; each bracket is refined by bisection.  Roots in (0,1)
    are exactly the solutions of psi(t) = c, so a tangential root (c = gamma_d)
    missed by the scan is recovered from the minimiser of psi.
    """
    if c <= 0:
        return [1.0]

    def h(t):
        return t - np.exp(-c * (1.0 - t) ** d)

    ts = np.linspace(0.0, 1.0, grid + 1)[:-1]
    hv = h(ts)
    roots = []
    sign_change = np.nonzero(np.sign(hv[:-1]) * np.sign(hv[1:]) < 0)[0]
    for i in sign_change:
        roots.append(float(optimize.bisect(h, ts[i], ts[i + 1], xtol=tol, maxiter=500)))
    roots.extend(float(t) for t in ts[hv == 0.0] if t > 0)
    # the scan misses roots closer to 0 than the grid spacing (large d) and
    # tangencies; psi gives both branches exactly
    if not roots and c >= gamma_d(d, tol):
        roots = _psi_branches(c, d, tol)
    elif len(roots) == 1 and d > 1:
        roots = _psi_branches(c, d, tol)
    roots = sorted(set(roots))
    return roots + [1.0]


def _psi_branches(c: float, d: int, tol: float) -> list[float]:
    # solve psi(x) = c on each side of the minimiser (in u = ln x)
    um = _argmin_u(d, tol)
    lc = math.log(c)

    def g(u):
        return _log_psi_u(u, d) - lc

    gm = g(um)
    if gm > 0:
        return []
    if gm == 0:
        return [math.exp(um)]
    lo = um
    while g(lo) < 0:
        lo = 2.0 * lo - 1.0
    hi = um
    while g(hi) < 0 and hi < -1e-300:
        hi = hi / 2.0
    out = [math.exp(optimize.bisect(g, lo, um, xtol=tol, maxiter=2000))]
    if g(hi) >= 0:
        out.append(math.exp(optimize.bisect(g, um, hi, xtol=tol, maxiter=2000)))
    return out


def t_fixed_point(c: float, d: int, tol: float = DEFAULT_TOL) -> float:
    """Smallest positive root of t = exp(-c (1-t)^d); equals 1 below gamma_d."""
    if c <= 0:
        raise ValueError("c must be positive")
    roots = fixed_point_roots(c, d, tol)
    t = roots[0]
    if t < 1.0:
        # polish with the monotone iteration, which converges to the smallest root
        for _ in range(50):
            nt = math.exp(-c * (1.0 - t) ** d)
            if abs(nt - t) < tol:
                t = nt
                break
            t = nt
    return t


def t_sequence(c: float, d: int, k: int) -> np.ndarray:
    """t_0..t_k from t_{-1} = 0, t_{j+1} = exp(-c (1-t_j)^d)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    out = np.empty(k + 1)
    t = 0.0
    for j in range(k + 1):
        t = math.exp(-c * (1.0 - t) ** d)
        out[j] = t
    return out


def betti_density_formula(c: float, d: int, t: float) -> float:
    """c/(d+1)(1-t)^{d+1} - (1-t) + c t (1-t)^d."""
    s = 1.0 - t
    return c / (d + 1) * s ** (d + 1) - s + c * t * s ** d


@dataclass(frozen=True)
class ThresholdTable:
    d: int
    gamma_d: float
    c_d: float
    x_star: float
    log10_gap: float
    tolerance: float = DEFAULT_TOL


def threshold_table(d: int, tol: float = DEFAULT_TOL) -> ThresholdTable:
    g = gamma_d(d, tol)
    if d >= 2:
        c = c_d(d, tol)
        xs = x_star(d, tol)
        lg = log10_gap(d, tol)
    else:
        # d = 1: x_* degenerates; only gamma_1 = 1 is meaningful
        c, xs, lg = float("nan"), float("nan"), float("nan")
    return ThresholdTable(d=d, gamma_d=g, c_d=c, x_star=xs, log10_gap=lg, tolerance=tol)


@dataclass(frozen=True)
class RegimeDensities:
    c: float
    d: int
    t: float
    core_dminus1_density: float  # f_{d-1}(core) / C(n, d)
    core_d_density: float        # f_d(core) / C(n, d)
    betti_density: float         # beta_d / C(n, d)
    shadow_density: float        # |C-shadow| / C(n, d+1)
    r_shadow_density: float      # |R-shadow| / C(n, d+1)
    avg_core_degree: float
    boundary_point: bool = False


def regime_densities(c: float, d: int, tol: float = DEFAULT_TOL) -> RegimeDensities:
    if c < 0:
        raise ValueError("c must be nonnegative")
    g, cd = gamma_d(d, tol), (c_d(d, tol) if d >= 2 else float("inf"))
    boundary = abs(c - g) < 1e-9 or abs(c - cd) < 1e-9
    if c == 0:
        return RegimeDensities(c, d, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, float("nan"), boundary)
    t = t_fixed_point(c, d, tol)
    s = 1.0 - t
    lam = c * s ** d
    f1 = poisson_tail(2, lam)
    f2 = c * s ** (d + 1) / (d + 1)
    beta = max(0.0, betti_density_formula(c, d, t))
    shadow = s ** (d + 1)
    r_shadow = shadow if c > cd else 0.0
    # 1 - t - lam t = Pr[Poi(lam) >= 2]
    denom = s - lam * t
    avg = c * s ** (d + 1) / denom if denom > 0 else float("nan")
    return RegimeDensities(c, d, t, f1, f2, beta, shadow, r_shadow, avg, boundary)


def ex_xT_bound(c: float, d: int, tol: float = DEFAULT_TOL) -> float:
    """max over fixed-point roots t of t + c t (1-t)^d - c/(d+1) (1 - (1-t)^{d+1})."""
    best = -math.inf
    for t in fixed_point_roots(c, d, tol):
        s = 1.0 - t
        best = max(best, t + c * t * s ** d - c / (d + 1) * (1.0 - s ** (d + 1)))
    return best
