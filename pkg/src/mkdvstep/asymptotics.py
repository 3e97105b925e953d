"""Asymptotic solution formulas near the leading edge of the step.

Everything here is parameter-level: no PDE is solved.  All ``1/cosh`` are
evaluated as ``2 e^{-|a|} / (1 + e^{-2|a|})`` so that large phases do not
overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scattering import StepProblem
from .specfun import DomainError, theta
from .whitham import (EllipticData, elliptic_data, eta_from_v, series_P,
                      solve_whitham)

TWO_PI = 2.0 * math.pi


class SolverError(RuntimeError):
    """Root finder could not bracket or converge."""


class MapDomainError(DomainError):
    """Conformal normal form could not be solved at the requested point."""


def sech(a):
    a = np.abs(np.asarray(a, dtype=float))
    e = np.exp(-a)
    out = 2.0 * e / (1.0 + e * e)
    return float(out) if out.ndim == 0 else out


def _lgamma_pair(n):
    # ln(Gamma(n+1) Gamma(n+3/2))
    return math.lgamma(n + 1.0) + math.lgamma(n + 1.5)


# ---------------------------------------------------------------------------
# modulated elliptic wave
# ---------------------------------------------------------------------------

@dataclass
class EllipticState:
    d: float
    eta: float
    data: EllipticData
    phase: float          # tB + Delta
    z: float              # (tB + Delta)/pi


def elliptic_state(x, t, prob: StepProblem):
    c = prob.c
    xi = x / (12.0 * t)
    if not -0.5 * c * c < xi < c * c / 3.0:
        raise DomainError("xi = %g outside the open elliptic region" % xi)
    pt = solve_whitham(xi, c)
    ed = elliptic_data(pt.d, c, t)
    ph = t * ed.B + ed.delta
    return EllipticState(pt.d, pt.eta, ed, ph, ph / math.pi)


def q_ell(x, t, prob: StepProblem, tol=1e-14):
    """Modulated elliptic wave sqrt(c^2-d^2) Theta(pi i + i phi)/Theta(i phi), phi = tB + Delta."""
    st = elliptic_state(x, t, prob)
    c = prob.c
    # Theta is 2 pi i periodic in its first argument
    ph = math.fmod(st.phase, TWO_PI)
    tau = st.data.tau
    num = theta(1j * (math.pi + ph), tau, tol)
    den = theta(1j * ph, tau, tol)
    val = math.sqrt(c * c - st.d * st.d) * num / den
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ArithmeticError("q_ell picked up an imaginary part %g" % val.imag)
    return val.real


def q_ell_soliton_form(x, t, prob: StepProblem):
    """2c / cosh(tau*(z - 2n - 1)/4) with n = floor(z/2)."""
    st = elliptic_state(x, t, prob)
    n = math.floor(st.z / 2.0)
    return 2 * prob.c * sech(st.data.tau_star * (st.z - 2 * n - 1) / 4.0)


# ---------------------------------------------------------------------------
# soliton trains
# ---------------------------------------------------------------------------

def h0_abs(prob: StepProblem):
    return 1.0 / (prob.h_star ** 2 * math.pi * (2 * prob.c) ** 1.5)


def alpha_tilde(n, prob: StepProblem):
    """Phase of the n-th asymptotic soliton of a finite train."""
    c, h = prob.c, prob.h_star
    return -(math.log(2.0) + _lgamma_pair(n) - math.log(h * h * math.pi)
             - (2 * n + 1.5) * math.log(32 * c ** 3))


def alpha_refined(n, v, prob: StepProblem):
    c, h = prob.c, prob.h_star
    return (math.log(math.pi * h * h / 2.0) - _lgamma_pair(n)
            + (2 * n + 1.5) * math.log(16 * c ** 3 * (2 + v)))


def soliton_peak(n, t, prob: StepProblem):
    """x where the cosh argument of soliton n vanishes."""
    c = prob.c
    return 4 * c * c * t - ((2 * n + 1.5) * math.log(t) + alpha_tilde(n, prob)) / (2 * c)


def soliton_train(x, t, N, prob: StepProblem, strict=False):
    """Sum of the first N asymptotic solitons.

    The formula is valid for x > 4c^2 t - (N + 1/2) ln t / c; with
    ``strict`` a point outside raises DomainError.
    """
    c = prob.c
    x = np.asarray(x, dtype=float)
    if strict and np.any(x <= 4 * c * c * t - (N + 0.5) * math.log(t) / c):
        raise DomainError("x outside the finite-train region")
    lt = math.log(t)
    out = np.zeros_like(x)
    for n in range(N):
        out = out + 2 * c * sech(2 * c * (x - 4 * c * c * t) + (2 * n + 1.5) * lt
                                 + alpha_tilde(n, prob))
    return float(out) if out.ndim == 0 else out


def soliton_train_refined(x, t, N, prob: StepProblem):
    c = prob.c
    x = np.asarray(x, dtype=float)
    v = 1.0 - x / (4 * c * c * t)
    lt = math.log(t)
    out = np.zeros_like(x)
    for n in range(N):
        a = np.vectorize(lambda vv: alpha_refined(n, vv, prob))(v)
        out = out + 2 * c * sech(2 * c * (x - 4 * c * c * t) + (2 * n + 1.5) * lt + a)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# profile along x = 4c^2 t - beta t^sigma ln t
# ---------------------------------------------------------------------------

def curve_x(t, sigma, beta, prob: StepProblem):
    return 4 * prob.c ** 2 * t - beta * t ** sigma * math.log(t)


def corollary_phase(n, t, M, prob: StepProblem):
    """Phase alpha_n^(M), M = 1, 2, 3.

    At n = 0 the closed forms are singular (ln(1/n)); the finite-train phase
    alpha_tilde(0) is returned instead.
    """
    if M not in (1, 2, 3):
        raise DomainError("M must be 1, 2 or 3")
    if n == 0:
        return alpha_tilde(0, prob)
    c, h = prob.c, prob.h_star
    a = (2 * n + 1.5) * math.log(32 * c ** 3 / n) + 2 * n - math.log(4.0 / (h * h))
    if M >= 2:
        a += n * n / (4 * c ** 3 * t) * math.log(32 * c ** 3 * t / (math.e ** 2 * n))
    if M >= 3:
        L = math.log(32 * c ** 3 * math.e * t / n)
        a += n ** 3 / (64 * c ** 6 * t * t) * (-31 + 12.5 * L - L * L)
    return a


@dataclass
class CorollaryResult:
    n: int
    eta: float
    ztilde: float
    phase: float
    value: float
    v: float


def corollary_ztilde(eta, t, M, c=1.0):
    s = 1.0
    for j in range(1, M):
        s += eta ** j * series_P(j, eta)
    return 8 * c ** 3 * t * eta * s - 0.5


def corollary_profile(x, t, sigma, beta, M, prob: StepProblem):
    """Soliton profile along x = 4c^2t - beta t^sigma ln t at refinement order M.

    ``x=None`` evaluates on the curve itself; otherwise v = 1 - x/(4c^2 t).
    """
    if M not in (1, 2, 3):
        raise DomainError("M must be 1, 2 or 3")
    if not 0 < sigma < M / (M + 1.0):
        raise DomainError("sigma must lie in (0, %g) for M = %d" % (M / (M + 1.0), M))
    c = prob.c
    if x is None:
        x = curve_x(t, sigma, beta, prob)
    v = 1.0 - x / (4 * c * c * t)
    eta = eta_from_v(v, M)
    zt = corollary_ztilde(eta, t, M, c)
    n = max(int(math.floor(zt / 2.0)), 0)
    ph = corollary_phase(n, t, M, prob)
    val = 2 * c * sech(2 * c * (x - 4 * c * c * t) + (2 * n + 1.5) * math.log(t) + ph)
    return CorollaryResult(n, eta, zt, ph, val, v)


# ---------------------------------------------------------------------------
# mesoscopic regime
# ---------------------------------------------------------------------------

def select_n(gamma):
    """Fractional part in [0, 1/2] rounds down, (1/2, 1) rounds up."""
    fl = math.floor(gamma)
    return int(fl) if gamma - fl <= 0.5 else int(fl) + 1


def min_order_K(sigma):
    if not 0 <= sigma < 1:
        raise DomainError("sigma must lie in [0, 1)")
    return max(0, math.ceil((2 * sigma - 1) / (1 - sigma) - 1e-12))


def _check_K(sigma, K):
    if K < min_order_K(sigma):
        raise DomainError("K = %d too small for sigma = %g" % (K, sigma))


def Q_series(n, t, v, K, c=1.0):
    """Shift constant of the conformal normal form, truncated at order K."""
    q = math.log(16 * c ** 3 * (2 + v))
    e = n / (c ** 3 * t)
    if K >= 1:
        q -= 3 * (8 + v) / (16 * (2 + v) ** 2) * e
    if K >= 2:
        q -= (400 + 48 * v + 5 * v * v) / (128 * (2 + v) ** 4) * e * e
    if K >= 3:
        raise DomainError("Q is tabulated for K <= 2 only")
    return q


def ztilde_y_series(n, t, v, c=1.0):
    return c * c * (16 + 8 * v - (8 + v) / (2 + v) * n / (c ** 3 * t))


def gamma_residual(g, t, sigma, beta, K, c=1.0):
    """Logarithm of omega at n -> gamma; zero at the soliton count."""
    v = beta * t ** sigma * math.log(t) / (4 * c * c * t)
    lt = math.log(t)
    q = Q_series(g, t, v, K, c)
    return math.fsum([2 * c * beta * t ** sigma * lt, (2 * g + 0.5) * math.log(g),
                      -2 * g * (q + 1), -(2 * g + 0.5) * lt])


def _gamma_slope(g, t, sigma, beta, K, c):
    v = beta * t ** sigma * math.log(t) / (4 * c * c * t)
    q = Q_series(g, t, v, K, c)
    h = 1e-6 * g
    dq = (Q_series(g + h, t, v, K, c) - Q_series(g - h, t, v, K, c)) / (2 * h)
    return 2 * math.log(g) + (2 * g + 0.5) / g - 2 * (q + 1) - 2 * g * dq - 2 * math.log(t)


def gamma_mesoscopic(t, sigma, beta, K, prob: StepProblem, tol=1e-12, maxiter=200):
    """Soliton count gamma: Newton kept inside a sign-change bracket."""
    if not t > 1:
        raise DomainError("t must exceed 1")
    _check_K(sigma, K)
    c = prob.c
    f = lambda g: gamma_residual(g, t, sigma, beta, K, c)
    seed = beta * t ** sigma / (1 - sigma)
    lo, hi = seed, seed
    while f(lo) <= 0:
        lo *= 0.5
        if lo < 1e-300:
            raise SolverError("no positive residual below the seed")
    while f(hi) >= 0:
        hi *= 2.0
        if hi > 1e3 * t:
            raise SolverError("no sign change of the count equation in (0, 1000 t)")
    g = min(max(seed, lo), hi)
    for _ in range(maxiter):
        r = f(g)
        if abs(r) < tol * 0.1:
            return g
        if r > 0:
            lo = g
        else:
            hi = g
        step = r / _gamma_slope(g, t, sigma, beta, K, c)
        cand = g - step
        if not lo < cand < hi:
            cand = 0.5 * (lo + hi)
        if abs(cand - g) <= 4e-16 * g:
            return cand
        g = cand
    if abs(f(g)) < tol:
        return g
    raise SolverError("count equation did not converge")


# conformal normal form -----------------------------------------------------

def b_coeff(j):
    """b_j in h(zeta) = sum_j b_j zeta^-j."""
    return 2.0 * math.factorial(2 * j - 1) / ((j + 1) * math.factorial(j) ** 2 * 4 ** j)


def _z_phase(y, v, c):
    return 8 * c * c * (2 + v) * y - 24 * c * y * y + 8 * y ** 3


def _z_phase_d(y, v, c):
    return 8 * c * c * (2 + v) - 48 * c * y + 24 * y * y


@dataclass
class ConformalMapData:
    ztilde: complex
    Q: float
    ztilde_y: float
    A: list = field(default_factory=list)
    b: list = field(default_factory=list)
    residual: float = 0.0
    Q_series: float | None = None


class _NormalForm:
    """Both sides of the normal-form identity, with the log(y) cancelled.

    Left:   z(y) + eps ln(2c - y) + eps sum_j a_j (c - y)/(y(2c-y))^j
    Right:  y u - eps ln u + eps Q + eps sum_j b_j (2 eps)^j / (y u)^j
    with eps = 2n/t, u = ztilde/y; a_j = i A_j is real for real data.
    """

    def __init__(self, n, t, v, K, c):
        self.eps = 2.0 * n / t
        self.v, self.K, self.c = v, K, c
        self.b = [b_coeff(j) for j in range(1, K + 1)]

    def left(self, y, a):
        e, c = self.eps, self.c
        s = _z_phase(y, self.v, c) + e * np.log(2 * c - y)
        for j, aj in enumerate(a, start=1):
            s = s + e * aj * (c - y) / (y * (2 * c - y)) ** j
        return s

    def left_d(self, y, a):
        # derivative of left + the cancelled -eps ln y
        e, c = self.eps, self.c
        s = _z_phase_d(y, self.v, c) - e / (2 * c - y) - e / y
        for j, aj in enumerate(a, start=1):
            p = y * (2 * c - y)
            s = s + e * aj * (-p ** j - (c - y) * j * p ** (j - 1) * (2 * c - 2 * y)) / p ** (2 * j)
        return s

    def F(self, w):
        # ztilde - eps ln ztilde + eps sum b_j (2eps)^j / ztilde^j, without Q
        e = self.eps
        s = w - e * np.log(w)
        for j, bj in enumerate(self.b, start=1):
            s = s + e * bj * (2 * e) ** j / w ** j
        return s

    def F_crit(self):
        # roots of w^(K+1) F'(w) = w^(K+1) - eps w^K - eps sum j b_j (2eps)^j w^(K-j)
        e, K = self.eps, self.K
        coef = np.zeros(K + 2)
        coef[0] = 1.0
        coef[1] = -e
        for j, bj in enumerate(self.b, start=1):
            coef[j + 1] -= e * j * bj * (2 * e) ** j
        return np.roots(coef)


def _left_crit(nf, a, seeds):
    out = []
    for y in seeds:
        y = complex(y)
        for _ in range(100):
            f = nf.left_d(y, a)
            h = 1e-7 * max(abs(y), 1e-300)
            fp = (nf.left_d(y + h, a) - nf.left_d(y - h, a)) / (2 * h)
            dy = f / fp
            y -= dy
            if abs(dy) < 1e-15 * abs(y):
                break
        out.append(y)
    return np.array(out)


def normal_form_constants(n, t, v, K, c=1.0, tol=1e-13):
    """(Q, a_1..a_K, lambda) making the normal form conformal near y = 0.

    The map is conformal on a t-independent disk only if each critical point
    of the left side is carried onto a critical point of the right side with
    the same value; K+1 critical pairs fix Q and a_1..a_K.
    """
    from scipy.optimize import fsolve

    nf = _NormalForm(n, t, v, K, c)
    e = nf.eps
    lam = 8 * c * c * (2 + v)
    wc = nf.F_crit().astype(complex)
    # right side without its -eps ln w term
    Fw = nf.F(wc) + e * np.log(wc)

    def solve_for(a):
        yc = _left_crit(nf, a, wc / lam)
        # restore the cancelled logs as one ratio; y_c / w_c stays near 1/lambda
        L = nf.left(yc, a) - e * np.log(yc / wc)
        return yc, L

    def unpack(p):
        return p[0], list(p[1:])

    def resid(p):
        Q, a = unpack(p)
        _, L = solve_for(a)
        r = (L - Fw - e * Q) / e
        # conjugate pairs carry the same information twice
        out = []
        used = set()
        for i, ri in enumerate(r):
            if i in used:
                continue
            if abs(wc[i].imag) > 1e-14 * abs(wc[i]):
                j = int(np.argmin(np.abs(wc - np.conj(wc[i]))))
                used.add(j)
                out.extend([ri.real, ri.imag])
            else:
                out.append(ri.real)
            used.add(i)
        return out

    # leading-order start: the pole terms match at lambda = z'(0)
    q0 = math.log(2 * c * lam)
    a0 = [b_coeff(j) * (2 * e) ** j * (2 * c) ** j / (c * lam ** j) for j in range(1, K + 1)]
    p, info, ier, msg = fsolve(resid, [q0] + a0, full_output=True, xtol=1e-14)
    res = max(abs(np.asarray(resid(p))))
    if ier != 1 and res > tol:
        raise MapDomainError("normal form constants did not converge: " + msg)
    Q, a = unpack(p)
    return Q, a, nf


def _solve_u(nf, y, Q, a, u0, tol=1e-13):
    e = nf.eps
    target = nf.left(y, a) - e * Q
    u = complex(u0)
    for _ in range(60):
        w = y * u
        # dF/du = y F'(w), F'(w) = 1 - eps/w - eps sum j b_j (2eps)^j / w^(j+1)
        dF = 1 - e / w
        for j, bj in enumerate(nf.b, start=1):
            dF = dF - e * j * bj * (2 * e) ** j / w ** (j + 1)
        # ln(y u) - ln y may differ from ln u by 2 pi i; work in u directly
        r =y * u - e * np.log(u) + sum(e * bj * (2 * e) ** j / w ** j
                                        for j, bj in enumerate(nf.b, start=1)) - target
        du = r / (y * dF)
        u -= du
        if abs(du) < tol * abs(u):
            return u, abs(r)
    raise MapDomainError("Newton did not converge at y = %r" % (y,))


def conformal_map(y, n, t, v, K, prob: StepProblem, tol=1e-12):
    """Normal-form coordinate ztilde(y), with Q and a_j = i A_j fixed by conformality."""
    c = prob.c
    if n <= 0:
        raise MapDomainError("normal form needs n >= 1")
    Q, a, nf = normal_form_constants(n, t, v, K, c)
    zy = ztilde_y_series(n, t, v, c)
    y = complex(y)
    # seed: leading polynomial of the expansion of ztilde
    seed = zy * y + c * y * y * (-24 - (24 - 4 * v + v * v) / (4 * (2 + v) ** 2) * n / (c ** 3 * t)) + 8 * y ** 3
    u, r = _solve_u(nf, y, Q, a, seed / y)
    lam = _ztilde_y_from(nf, Q, a, c)
    data = ConformalMapData(y * u, Q, lam, [-1j * aj for aj in a],
                            [b_coeff(j) for j in range(1, K + 1)], r,
                            Q_series(n, t, v, K, c) if K <= 2 else None)
    if r > tol * max(1.0, abs(y)):
        raise MapDomainError("normal form residual %g" % r)
    return data


def _ztilde_y_from(nf, Q, a, c, radius=None, m=32):
    # mean of ztilde(y)/y over a small circle; ztilde is analytic there
    radius = radius or 0.05 * c
    lam = 8 * c * c * (2 + nf.v)
    th = (np.arange(m) + 0.5) * TWO_PI / m
    acc = 0.0
    for s in th:
        y = radius * np.exp(1j * s)
        u, _ = _solve_u(nf, y, Q, a, lam)
        acc += u
    # ztilde/y = ztilde_y + O(y); the circle mean removes the O(y^k) terms
    return (acc / m).real


def mesoscopic_phase(t, sigma, beta, K, prob: StepProblem):
    """(n, shift): the soliton index and the x-independent part of its cosh argument.

    select_n(gamma) picks the parametrix (index floor(gamma) or floor(gamma)+1),
    but the second one reconstructs the first-order soliton one index lower, so
    the soliton is always n = floor(gamma).
    """
    c, h = prob.c, prob.h_star
    g = gamma_mesoscopic(t, sigma, beta, K, prob)
    n = int(math.floor(g))
    v = beta * t ** sigma * math.log(t) / (4 * c * c * t)
    q = Q_series(n, t, v, K, c)
    zy = ztilde_y_series(n, t, v, c)
    shift = ((2 * n + 1.5) * math.log(t) + 2 * n * q + 1.5 * math.log(2 * c * zy)
             - (_lgamma_pair(n) - math.log(TWO_PI)) - math.log(4.0 / (h * h)))
    return n, shift


def q_mesoscopic(x, t, sigma, beta, K, prob: StepProblem):
    """Soliton at the count gamma along x = 4c^2t - beta t^sigma ln t.

    ``x=None`` uses the curve point.  Q and ztilde_y are the truncated series.
    """
    c = prob.c
    if x is None:
        x = curve_x(t, sigma, beta, prob)
    n, shift = mesoscopic_phase(t, sigma, beta, K, prob)
    return 2 * c * sech(2 * c * (x - 4 * c * c * t) + shift)


# ---------------------------------------------------------------------------
# elliptic wave versus its soliton decomposition
# ---------------------------------------------------------------------------

def _ell_at_phase(st, z, c, tol=1e-14):
    ph = math.fmod(math.pi * z, TWO_PI)
    tau = st.data.tau
    val = math.sqrt(c * c - st.d * st.d) * theta(1j * (math.pi + ph), tau, tol) / theta(1j * ph, tau, tol)
    return val.real


def soliton_form_gap(t, sigma, beta, prob: StepProblem, samples=81):
    """sup over one z period of |q_ell - soliton form| / eta on the curve point.

    The modulation (d, tau, eta) is frozen at x = 4c^2t - beta t^sigma ln t and
    the phase z sweeps [2n, 2n+2].
    """
    c = prob.c
    st = elliptic_state(curve_x(t, sigma, beta, prob), t, prob)
    n = math.floor(st.z / 2.0)
    gap = 0.0
    for s in np.linspace(0.0, 2.0, samples):
        z = 2 * n + s
        a = _ell_at_phase(st, z, c)
        b = 2 * c * sech(st.data.tau_star * (z - 2 * n - 1) / 4.0)
        gap = max(gap, abs(a - b))
    return gap / st.eta
