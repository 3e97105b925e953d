"""Whitham modulation parameters (d, mu) and the elliptic data B, tau, Delta.

All contour integrals along [id, ic] and [0, id] are written on the imaginary
axis k = is.  On (d, c) the branch of w = sqrt((k^2+c^2)(k^2+d^2)) is fixed by
w_+ = i sqrt((c^2-s^2)(s^2-d^2)), which is the unique choice giving both
B >= 0 and tau < 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .specfun import DomainError, quad_singular

LN2 = math.log(2.0)
TOL = 1e-14


@dataclass
class WhithamPoint:
    d: float
    mu: float
    eta: float
    xi: float
    c: float = 1.0


@dataclass
class EllipticData:
    B: float
    tau: float
    delta: float
    tau_star: float
    z: float | None = None


# ---------------------------------------------------------------------------
# modulation equations
# ---------------------------------------------------------------------------

def _moment(n, d, c):
    # int_0^1 lam^n sqrt((1-lam^2)/(c^2-lam^2 d^2)) dlam with u = 1 - lam
    eta_c = c - d

    def g(u):
        lam = 1.0 - u
        return lam ** n * np.sqrt((2.0 - u) / ((eta_c + d * u) * (c + d * lam)))

    return quad_singular(g, 0.0, 1.0, alpha=0.5, tol=TOL)


def mu_of_d(d, c=1.0):
    """Nonnegative root mu of the first modulation equation."""
    if not 0 <= d <= c:
        raise DomainError("d must lie in [0, c]")
    if d == 0:
        return 0.0
    return d * math.sqrt(_moment(2, d, c) / _moment(0, d, c))


def xi_of_d(d, c=1.0):
    mu = mu_of_d(d, c)
    return mu * mu + 0.5 * d * d - 0.5 * c * c


def solve_whitham(xi, c=1.0):
    """(d, mu) with xi_of_d(d) = xi for xi in [-c^2/2, c^2/3]."""
    lo, hi = -0.5 * c * c, c * c / 3.0
    if not lo <= xi <= hi:
        raise DomainError("xi = %g outside the elliptic region [%g, %g]" % (xi, lo, hi))
    if xi == hi:
        return WhithamPoint(c, c / math.sqrt(3.0), 0.0, xi, c)
    if xi == lo:
        return WhithamPoint(0.0, 0.0, 1.0, xi, c)
    # bracketing root finder; d -> xi is increasing on [0, c]
    d = brentq(lambda dd: xi_of_d(dd, c) - xi, 0.0, c, xtol=1e-15 * c, rtol=1e-15,
               maxiter=200)
    mu = mu_of_d(d, c)
    return WhithamPoint(d, mu, 1.0 - d / c, xi, c)


# ---------------------------------------------------------------------------
# elliptic data
# ---------------------------------------------------------------------------

def big_B(d, c=1.0, mu=None):
    """B(d) = 24 int_{id}^{ic} (k^2+mu^2)(k^2+d^2)/w_+ dk (real, >= 0)."""
    if not 0 < d <= c:
        raise DomainError("B needs 0 < d <= c")
    if d == c:
        return 0.0
    if mu is None:
        mu = mu_of_d(d, c)
    eps = c - d

    def g(u):
        s = d + eps * u
        return (s * s - mu * mu) * np.sqrt((s + d) / (c + s))

    # weight u^(1/2) (1-u)^(-1/2) carries sqrt((s-d)/(c-s))
    return 24.0 * eps * quad_singular(g, 0.0, 1.0, alpha=0.5, beta=-0.5, tol=TOL)


def _k_upper(d, c):
    # int_d^c ds / sqrt((c^2-s^2)(s^2-d^2))
    eps = c - d

    def g(u):
        s = d + eps * u
        return 1.0 / np.sqrt((s + d) * (c + s))

    return quad_singular(g, 0.0, 1.0, alpha=-0.5, beta=-0.5, tol=TOL)


def _k_lower(d, c):
    # int_0^d ds / sqrt((c^2-s^2)(d^2-s^2)); d - s = (c-d) sinh^2(th) removes
    # the nearly coalescing endpoint singularities at s = d and s = c
    eps = c - d
    top = math.asinh(math.sqrt(d / eps))

    def g(th):
        s = d - eps * np.sinh(th) ** 2
        return 2.0 / np.sqrt((c + s) * (d + s))

    return quad_singular(g, 0.0, top, tol=TOL)


def tau_of_d(d, c=1.0):
    """tau(d) = -pi i int_{id}^{ic} dk/w_+ / int_0^{id} dk/w  (real, < 0)."""
    if not 0 < d < c:
        raise DomainError("tau is degenerate at d = 0 and d = c")
    return -math.pi * _k_upper(d, c) / _k_lower(d, c)


def delta_of_d(d, c=1.0):
    """Delta(d) from log(a_+ a_-) of the pure step along (id, ic).

    On the cut log(a_+ a_-) = log(c/2) - log(c^2 - s^2)/2.  With
    s = d + (c-d) sin^2(th) the log(c - s) singularity is subtracted at
    th = pi/2 and integrated in closed form.
    """
    if not 0 < d < c:
        raise DomainError("Delta is degenerate at d = 0 and d = c")
    eps = c - d

    def F(th):
        s = d + eps * np.sin(th) ** 2
        return 2.0 / np.sqrt((s + d) * (c + s))

    F_top = 2.0 / math.sqrt((c + d) * 2 * c)

    def g(th):
        s = d + eps * np.sin(th) ** 2
        smooth = math.log(c / 2) - 0.5 * math.log(eps) - 0.5 * np.log(c + s)
        cs = np.cos(th)
        return F(th) * smooth - np.log(cs) * (F(th) - F_top)

    num = quad_singular(g, 0.0, 0.5 * math.pi, tol=TOL)
    # int_0^{pi/2} -log cos = (pi/2) ln 2
    num += F_top * 0.5 * math.pi * LN2
    return -num / _k_lower(d, c)


def elliptic_data(d, c=1.0, t=None):
    B = big_B(d, c)
    tau = tau_of_d(d, c)
    delta = delta_of_d(d, c)
    z = None if t is None else (t * B + delta) / math.pi
    return EllipticData(B, tau, delta, 4 * math.pi ** 2 / tau, z)


# ---------------------------------------------------------------------------
# small-eta series
# ---------------------------------------------------------------------------

def series_P(j, eta):
    L = math.log(eta)
    if j == 1:
        return -(2.0 + 0.5 * math.log(eta / 8.0))
    if j == 2:
        return (13 - 42 * LN2 + 36 * LN2 ** 2 + 2 * L * (7 - 12 * LN2 + 2 * L)) / 16.0
    raise ValueError("only P_1, P_2 are known")


def series_Q(j, eta):
    L = math.log(eta)
    if j == 2:
        return 0.5 * (-2 - 9 * LN2 + 9 * LN2 ** 2 + (3 + math.log(eta / 64.0)) * L)
    if j == 3:
        return ((9 - 6 * LN2 + 18 * LN2 ** 2 * (-5 + 6 * LN2)) / 16.0
                + L / 8.0 * (1 + 30 * LN2 - 54 * LN2 ** 2)
                + L * L / 8.0 * (-5 + 18 * LN2) - L ** 3 / 4.0)
    raise ValueError("only Q_2, Q_3 are known")


def B_series(eta, c=1.0, M=2):
    """8 c^3 eta (1 + sum_{j<M} eta^j P_j) times pi."""
    s = 1.0
    for j in range(1, M):
        s += eta ** j * series_P(j, eta)
    return math.pi * 8 * c ** 3 * eta * s


def v_of_eta(eta, M=1):
    if eta == 0:
        return 0.0
    v = eta * math.log(8 * math.e / eta)
    for j in range(2, M + 1):
        v += eta ** j * series_Q(j, eta)
    return v


def _dv_deta(eta, M, h=1e-7):
    # analytic for the leading term, central difference for the corrections
    d = math.log(8.0 / eta)
    if M >= 2:
        e1, e2 = eta * (1 - h), eta * (1 + h)
        corr = lambda e: v_of_eta(e, M) - e * math.log(8 * math.e / e)
        d += (corr(e2) - corr(e1)) / (e2 - e1)
    return d


def eta_from_v(v, M=1):
    """Small root of v = v_of_eta(eta, M), Newton from v/ln(1/v) with bisection guard."""
    if v < 0:
        raise DomainError("v must be nonnegative")
    if v == 0:
        return 0.0
    if v > 0.2:
        raise DomainError("v = %g too large for the small-eta series" % v)
    lo, hi = 1e-300, 0.2
    f = lambda e: v_of_eta(e, M) - v
    # shrink the bracket to the branch through the origin
    while f(hi) < 0:
        hi *= 1.5
    eta = min(max(v / math.log(1.0 / v), lo * 10), hi)
    for _ in range(200):
        r = f(eta)
        if r > 0:
            hi = min(hi, eta)
        else:
            lo = max(lo, eta)
        if abs(r) <= 1e-16 * v:
            break
        step = r / _dv_deta(eta, M)
        cand = eta - step
        if not lo < cand < hi:
            cand = 0.5 * (lo + hi) if hi / lo < 4 else math.sqrt(lo * hi)
        if abs(cand - eta) <= 1e-16 * eta:
            eta = cand
            break
        eta = cand
    return eta


# ---------------------------------------------------------------------------
# count diagnostic along x = 4c^2 t - beta t^sigma ln t
# ---------------------------------------------------------------------------

def curve_v(t, sigma, beta, c=1.0):
    return beta * t ** sigma * math.log(t) / (4 * c * c * t)


def z_lemma_check(t, sigma=0.3, beta=1.0, c=1.0, full_output=False):
    """8c^3 v t + (z + 1/2)(ln(z/2t) - (Q + 1)), Q + 1 = ln(B/2pi) + 8c^3 v pi / B."""
    v = curve_v(t, sigma, beta, c)
    xi = c * c * (1.0 - v) / 3.0
    pt = solve_whitham(xi, c)
    ed = elliptic_data(pt.d, c, t)
    q1 = math.log(ed.B / (2 * math.pi)) + 8 * c ** 3 * v * math.pi / ed.B
    z = ed.z
    val = 8 * c ** 3 * v * t + (z + 0.5) * (math.log(z / (2 * t)) - q1)
    if full_output:
        return val, {"v": v, "eta": pt.eta, "z": z, "Q_plus_1": q1, "B": ed.B}
    return val
