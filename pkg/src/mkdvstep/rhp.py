"""Local parametrices of the Riemann-Hilbert problem near k = +-ic.

Laguerre parametrix (index 1/2), the large-n functions of its uniform
expansion, the Airy parametrix, the pole-removing G-matrix, and a numerical
audit of the error jumps on the circles |k -+ ic| = r.

Matrices are plain ``numpy`` 2x2 complex arrays.  Sides of cuts follow one
rule: '+' is the left side of the oriented contour.  For (0, inf) oriented
to the right this is Im zeta > 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import b_coeff
from .scattering import StepProblem
from .specfun import DomainError, airy_ai, quad_singular

TWO_PI_I = 2j * math.pi
SIGMA3 = np.diag([1.0, -1.0])
RICHARDSON_EPS = (1e-4, 1e-5, 1e-6)


def _diag(d):
    return np.array([[d, 0.0], [0.0, 1.0 / d]], dtype=complex)


# ---------------------------------------------------------------------------
# Laguerre polynomials, index 1/2
# ---------------------------------------------------------------------------

def _rec(j):
    # monic recurrence pi_{j+1} = (s - a_j) pi_j - b_j pi_{j-1}
    return 2 * j + 1.5, j * (j + 0.5)


def laguerre_log_norm(n):
    return math.lgamma(n + 1.5) + math.lgamma(n + 1.0)


def laguerre_norm(n):
    """int_0^inf s^(1/2) e^(-s) pi_n(s)^2 ds = Gamma(n+3/2) n!."""
    return math.exp(laguerre_log_norm(n))


def laguerre_pi(n, z):
    """Monic pi_n(z) by the three-term recurrence (vectorized in z)."""
    z = np.asarray(z)
    p_prev = np.zeros_like(z, dtype=complex if np.iscomplexobj(z) else float)
    p = np.ones_like(p_prev)
    for j in range(n):
        a, b = _rec(j)
        p, p_prev = (z - a) * p - b * p_prev, p
    return p


def _pi_hat(n, w):
    # pi_j(w)/w^j for j = n-1, n, from the scaled recurrence
    w = complex(w)
    prev, cur = 0.0 + 0j, 1.0 + 0j
    hist = [cur]
    for j in range(n):
        a, b = _rec(j)
        prev, cur = cur, (1 - a / w) * cur - (b / (w * w)) * prev
        hist.append(cur)
    return (hist[n - 1] if n >= 1 else 0j), hist[n]


def _orthonormal(n, s):
    # P_n = pi_n / sqrt(h_n); bounded against the weight on the support
    s = np.asarray(s)
    Pm = np.zeros_like(s, dtype=float if not np.iscomplexobj(s) else complex)
    P = np.full_like(Pm, 1.0 / math.sqrt(laguerre_norm(0)))
    for j in range(n):
        a, b = _rec(j)
        b1 = (j + 1) * (j + 1.5)
        P, Pm = ((s - a) * P - (math.sqrt(b) * Pm if j else 0.0)) / math.sqrt(b1), P
    return P


def _cut_end(k):
    return 4.0 * k + 40.0 * math.sqrt(k) + 60.0


def _sqrt_kernel(w, S):
    # int_0^S sqrt(s)/(s - w) ds for w off [0, S]
    r = np.sqrt(w)
    rs = math.sqrt(S)
    return 2 * rs + r * (np.log(rs - r) - np.log(rs + r) - np.log(-r) + np.log(r))


def _J_direct(k, w, m=None):
    """w^-m int_0^inf sqrt(s) e^-s P_k(s) s^m / (s - w) ds by quadrature.

    By orthogonality every 0 <= m <= k gives the same value.  The default m
    minimizes a coarse L1 size of the integrand, which avoids the w^k / sqrt(h_k)
    cancellation of the plain transform once w is past the zeros of P_k.
    """
    S = max(_cut_end(k), w.real + 60.0)
    rs = math.sqrt(S)
    grid = np.linspace(0.0, S, 4001)[1:]
    base = np.sqrt(grid) * np.abs(np.exp(-grid) * _orthonormal(k, grid)) / np.maximum(np.abs(grid - w), 1.0)
    with np.errstate(divide="ignore"):
        lb = np.log(base)
    ms = np.arange(k + 1)
    logs = lb[None, :] + ms[:, None] * (np.log(grid)[None, :] - math.log(abs(w)))
    top = logs.max(axis=1)
    l1 = top + np.log(np.exp(logs - top[:, None]).sum(axis=1) * (S / 4000))
    if m is None:
        m = int(np.argmin(l1))
    tol = 1e-14 * math.exp(l1[m])
    near = 0 < w.real < S and abs(w.imag) < 1.0
    p = lambda x: np.exp(-x) * _orthonormal(k, x) * (x / w) ** m
    if not near:
        g = lambda x: rs * p(x) / (x - w)
        return quad_singular(g, 0.0, S, alpha=0.5, tol=tol)
    # subtract the pole: p(s) - p(w) is divisible by s - w
    pw = cmath.exp(-w) * complex(_orthonormal(k, np.array([w]))[0])

    def g(x):
        return rs * (p(x) - pw) / (x - w)

    return quad_singular(g, 0.0, S, alpha=0.5, tol=tol) + pw * _sqrt_kernel(w, S)


def _far_from_support(k, w):
    # near (0, inf) the continued fraction tail sits inside the zeros and
    # stalls at the size of the jump; far past the zeros it settles again
    if w.real < 0 or abs(w.imag) >= 0.5 * abs(w):
        return True
    return w.real > 2.0 * (4 * k + 2) + 20.0


def _log_C0(w):
    # log(C_0) with C_0 = (1/2 pi i) int sqrt(s) e^-s / (s - w) ds
    J0 = _J_direct(0, w)
    return cmath.log(math.sqrt(laguerre_norm(0)) * J0 / TWO_PI_I)


def _log_ratio_sum(k, w):
    # sum_{j<k} log(C_{j+1}/C_j); ratios from the backward continued fraction
    if k == 0:
        return 0j
    K = k + 40
    last = None
    for _ in range(12):
        r = 0j
        ratios = [0j] * k
        for j in range(K, 0, -1):
            a, b = _rec(j)
            r = b / (w - a - r)
            if j - 1 < k:
                ratios[j - 1] = r
        tot = sum(cmath.log(x) for x in ratios)
        if last is not None and abs(tot - last) < 1e-15 * max(1.0, abs(tot)):
            return tot
        last = tot
        K *= 2
    raise ArithmeticError("continued fraction for C_%d(%r) did not settle" % (k, w))


def cauchy_hat(k, w, side=None):
    """C_k(w) 2 pi i w^(k+1) / h_k, which tends to -1 as w -> inf.

    C_k is the Cauchy transform (1/2 pi i) int_0^inf sqrt(s) e^-s pi_k(s)/(s-w) ds.
    Far from the support the recessive solution of the recurrence is used,
    since direct quadrature cancels about w^k / sqrt(h_k).
    """
    w = complex(w)
    if w.imag == 0 and w.real >= 0:
        if side not in ("+", "-"):
            raise DomainError("w on the cut [0, inf); pass side='+' or '-'")
        return complex(_richardson(lambda u: cauchy_hat(k, u), w.real, side, w.real))
    lw = cmath.log(w)
    if k == 0 or not _far_from_support(k, w):
        J = _J_direct(k, w)
        return cmath.exp(cmath.log(J) + (k + 1) * lw - 0.5 * laguerre_log_norm(k))
    try:
        logc = _log_C0(w) + _log_ratio_sum(k, w)
    except ArithmeticError:
        J = _J_direct(k, w)
        return cmath.exp(cmath.log(J) + (k + 1) * lw - 0.5 * laguerre_log_norm(k))
    return cmath.exp(logc + cmath.log(TWO_PI_I) + (k + 1) * lw - laguerre_log_norm(k))


def cauchy_laguerre(k, w):
    w = complex(w)
    return cauchy_hat(k, w) * math.exp(laguerre_log_norm(k)) / (TWO_PI_I * w ** (k + 1))


def _normalized_off_cut(n, w):
    # L(w) w^(n sigma_3) from scaled pieces
    if n == 0:
        c0 = cauchy_hat(0, w) * laguerre_norm(0) / (TWO_PI_I * w)
        return np.array([[1.0, 0.0], [c0, 1.0]], dtype=complex)
    pm, pn = _pi_hat(n, w)
    l11 = -cauchy_hat(n - 1, w)
    l12 = -TWO_PI_I * math.exp(-laguerre_log_norm(n - 1)) * pm / w
    l21 = math.exp(laguerre_log_norm(n)) / TWO_PI_I * cauchy_hat(n, w) / w
    return np.array([[l11, l12], [l21, pn]], dtype=complex)


def _richardson(f, x, side, dist):
    # polynomial extrapolation in eps of f(x +- i eps) to eps = 0; the boundary
    # value expands in eps/dist, dist the distance to the nearest branch point
    if not dist > 0:
        raise DomainError("side limits are not taken at a branch point")
    sgn = 1.0 if side == "+" else -1.0
    scale = min(max(1.0, abs(x)), dist)
    eps = [e * scale for e in RICHARDSON_EPS]
    vals = [f(complex(x, sgn * e)) for e in eps]
    # Neville on eps
    T = [np.array(v) for v in vals]
    m = len(eps)
    for lev in range(1, m):
        for i in range(m - lev):
            T[i] = (eps[i + lev] * T[i] - eps[i] * T[i + 1]) / (eps[i + lev] - eps[i])
    return T[0]


def laguerre_matrix_normalized(n, zeta, side=None):
    """L(zeta) zeta^(n sigma_3); tends to I at infinity."""
    w = complex(zeta)
    if w.imag == 0 and w.real >= 0:
        if side not in ("+", "-"):
            raise DomainError("zeta on (0, inf); pass side='+' or '-'")
        # zeta^(n sigma_3) is single valued, so the factor commutes with the limit
        return _richardson(lambda u: _normalized_off_cut(n, u), w.real, side, w.real)
    return _normalized_off_cut(n, w)


def laguerre_matrix(n, zeta, side=None):
    """Laguerre parametrix L(zeta), normalized as (I + O(1/zeta)) zeta^(-n sigma_3)."""
    Lh = laguerre_matrix_normalized(n, zeta, side)
    w = complex(zeta)
    f = w ** n
    return Lh @ np.diag([1.0 / f, f])


def laguerre_jump(zeta):
    s = float(zeta)
    return np.array([[1.0, 0.0], [-math.sqrt(s) * math.exp(-s), 1.0]], dtype=complex)


def laguerre_las2(n, zeta):
    """Two-term expansion of L(zeta) zeta^(n sigma_3) at infinity."""
    w = complex(zeta)
    d = (n * n + 0.5 * n) / w
    l12 = -TWO_PI_I * n / (math.gamma(n + 0.5) * math.factorial(n) * w) if n else 0.0
    l21 = -math.exp(laguerre_log_norm(n)) / (TWO_PI_I * w)
    return np.array([[1 + d, l12], [l21, 1 - d]], dtype=complex)


def laguerre_gram(nmax, rtol=1e-14):
    """Gram matrix of pi_0..pi_nmax against s^(1/2) e^(-s) on [0, inf).

    Entry (i, j) is integrated to an absolute tolerance rtol sqrt(h_i h_j),
    so off-diagonal zeros do not stall the quadrature.
    """
    S = _cut_end(nmax)
    rs = math.sqrt(S)
    G = np.zeros((nmax + 1, nmax + 1))
    for i in range(nmax + 1):
        for j in range(i, nmax + 1):
            g = lambda x, i=i, j=j: rs * np.exp(-x) * laguerre_pi(i, x) * laguerre_pi(j, x)
            tol = rtol * math.exp(0.5 * (laguerre_log_norm(i) + laguerre_log_norm(j)))
            G[i, j] = G[j, i] = quad_singular(g, 0.0, S, alpha=0.5, tol=tol)
    return G


# ---------------------------------------------------------------------------
# functions of the uniform large-n expansion
# ---------------------------------------------------------------------------

def _on_unit_cut(z):
    return z.imag == 0 and 0 <= z.real <= 1


def _with_side(zeta, side, cut):
    z = complex(zeta)
    if cut(z):
        if side not in ("+", "-"):
            raise DomainError("argument on the branch cut; pass side='+' or '-'")
        # a signed zero picks the boundary value of every principal root
        z = complex(z.real, 0.0 if side == "+" else -0.0)
    return z


def _R(z):
    # sqrt(z (z - 1)) with its cut on [0, 1]; ~ z - 1/2 at infinity
    return cmath.sqrt(z) * cmath.sqrt(z - 1)


def h_fn(zeta, side=None):
    """h(zeta) = 2R - 2 zeta + ln(4 e zeta / (2 zeta - 1 + 2R)), R = sqrt(zeta(zeta-1))."""
    z = _with_side(zeta, side, _on_unit_cut)
    R = _R(z)
    # 2 zeta - 1 - 2R = 1 / (2 zeta - 1 + 2R) avoids the cancellation at large zeta
    return 2 * R - 2 * z + cmath.log(4 * math.e * z / (2 * z - 1 + 2 * R))


def h_series(zeta, terms=30):
    return sum(b_coeff(j) / complex(zeta) ** j for j in range(1, terms + 1))


def delta_fn(zeta, side=None):
    z = _with_side(zeta, side, _on_unit_cut)
    return (z / (2 * z - 1 + 2 * _R(z))) ** 0.25


def _gamma_mod(z):
    return ((z - 1) / z) ** 0.25


def m_mod(zeta, side=None):
    z = _with_side(zeta, side, _on_unit_cut)
    g = _gamma_mod(z)
    a, b = 0.5 * (g + 1 / g), 0.5 * (g - 1 / g)
    return np.array([[a, 1j * b], [-1j * b, a]], dtype=complex)


def psi_fn(lam, side=None):
    """psi = -2R + ln(2 lam - 1 + 2R), analytic off (-inf, 1]."""
    z = _with_side(lam, side, lambda u: u.imag == 0 and u.real <= 1)
    R = _R(z)
    return -2 * R + cmath.log(2 * z - 1 + 2 * R)


def g_fn(zeta, a, side=None):
    """Log-transform of the semicircle-type density on [0, a]; ~ ln zeta."""
    z = _with_side(zeta, side, lambda u: u.imag == 0 and u.real <= a)
    R = cmath.sqrt(z) * cmath.sqrt(z - a)
    ell = math.log(a / (4 * math.e))
    return -2 / a * R - math.log(a) + cmath.log(2 * z - a + 2 * R) + 2 * z / a + ell


def g_series(zeta, a, terms=30):
    z = complex(zeta)
    return cmath.log(z) - sum(b_coeff(j) * a ** j / z ** j for j in range(1, terms + 1))


def q_n_matrix(n, zeta, side=None):
    """Scaled Laguerre parametrix Q_n(zeta) = I + O(1/zeta) uniformly in n.

    On (1, inf) the Laguerre jump survives only at exponentially small size,
    but a side is still required there.
    """
    if n < 1:
        raise DomainError("Q_n needs n >= 1")
    z = complex(zeta)
    if _on_unit_cut(z):
        raise DomainError("zeta must stay off [0, 1]")
    if z.imag == 0 and z.real > 1:
        if side not in ("+", "-"):
            raise DomainError("zeta on (1, inf); pass side='+' or '-'")
        return _richardson(lambda u: q_n_matrix(n, u), z.real, side, z.real - 1.0)
    w = 4 * n * z
    h = h_fn(z)
    ls = 2 * ((n + 0.25) * math.log(n) - n)       # log of (n^(n+1/4)/e^n)^2
    pm, pn = _pi_hat(n, w)
    q11 = -cauchy_hat(n - 1, w) * cmath.exp(-n * h)
    q22 = pn * cmath.exp(n * h)
    q12 = -TWO_PI_I * pm / w * cmath.exp(ls - laguerre_log_norm(n - 1) + n * h)
    q21 = cauchy_hat(n, w) / (TWO_PI_I * w) * cmath.exp(laguerre_log_norm(n) - ls - n * h)
    return np.array([[q11, q12], [q21, q22]], dtype=complex)


def e_n_matrix(n, zeta, side=None):
    z = complex(zeta)
    Q = q_n_matrix(n, z, side)
    d = math.sqrt(2.0) * delta_fn(z)
    return Q @ _diag(1.0 / d) @ np.linalg.inv(m_mod(z))


# ---------------------------------------------------------------------------
# Airy parametrix
# ---------------------------------------------------------------------------

_W = cmath.exp(2j * math.pi / 3)
_SQ2PI = math.sqrt(2 * math.pi)


def airy_v(zeta):
    """(v0, v0', v1, v1', v_-1, v_-1') built from Ai at the three rotated points."""
    z = complex(zeta)
    a0, d0 = airy_ai(z)
    a1, d1 = airy_ai(z, rot=-1)
    am, dm = airy_ai(z, rot=1)
    e1, em = cmath.exp(-1j * math.pi / 6), cmath.exp(1j * math.pi / 6)
    return (_SQ2PI * a0, _SQ2PI * d0,
            _SQ2PI * e1 * a1, _SQ2PI * e1 * d1 / _W,
            _SQ2PI * em * am, _SQ2PI * em * dm * _W)


AIRY_RAYS = (0.0, 2 * math.pi / 3, math.pi, -2 * math.pi / 3)
_E_PI4 = np.diag([cmath.exp(1j * math.pi / 4), cmath.exp(-1j * math.pi / 4)])


def _airy_sector_matrix(z, sector):
    v0, v0p, v1, v1p, vm, vmp = airy_v(z)
    if sector == 0:
        M = [[v1, v0], [v1p, v0p]]
    elif sector == 1:
        M = [[vm, v0], [vmp, v0p]]
    elif sector == 2:
        M = [[v1, -1j * vm], [v1p, -1j * vmp]]
    else:
        M = [[vm, 1j * v1], [vmp, 1j * v1p]]
    return np.array(M, dtype=complex) @ _E_PI4


def _airy_sector(arg):
    # 0: (0, 2pi/3), 1: (-2pi/3, 0), 2: (2pi/3, pi), 3: (-pi, -2pi/3)
    if 0 < arg < 2 * math.pi / 3:
        return 0
    if -2 * math.pi / 3 < arg < 0:
        return 1
    if arg > 2 * math.pi / 3:
        return 2
    return 3


def airy_parametrix(zeta, side=None):
    """Psi_Ai(zeta).  On a ray, side='ccw' or 'cw' picks the adjacent sector."""
    z = complex(zeta)
    if z == 0:
        raise DomainError("zeta = 0 is the junction of all rays")
    arg = cmath.phase(z)
    on_ray = any(abs(arg - r) < 1e-15 for r in AIRY_RAYS) or abs(arg + math.pi) < 1e-15
    if on_ray:
        if side not in ("ccw", "cw"):
            raise DomainError("zeta on a jump ray; pass side='ccw' or 'cw'")
        if abs(abs(arg) - math.pi) < 1e-15:
            arg = math.pi if side == "cw" else -math.pi
        arg = arg + (1e-9 if side == "ccw" else -1e-9)
        if arg > math.pi:
            arg -= 2 * math.pi
    return _airy_sector_matrix(z, _airy_sector(arg))


AIRY_CORRECTION = np.array([[-1.0 / 48, -1.0 / 8], [1.0 / 8, 1.0 / 48]])


def airy_normalized(zeta):
    """Psi_Ai with the outer factors removed; I + C zeta^(-3/2) + O(zeta^-3)."""
    z = complex(zeta)
    P = airy_parametrix(z)
    left = np.diag([z ** -0.25, z ** 0.25]) @ np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    e = cmath.exp(2.0 / 3.0 * z ** 1.5)
    right = np.diag([e, 1 / e]) @ _E_PI4
    return np.linalg.solve(left, P) @ np.linalg.inv(right)


# ---------------------------------------------------------------------------
# pole removal and reconstruction
# ---------------------------------------------------------------------------

def _S(t, rho, c):
    return 16 * c * c + 2 * rho * math.log(t) / t


def g_matrix_system(a, b, at, bt, R, Rd, S, c, relative=False):
    """Residuals of the four pole conditions; all vanish at the solution.

    With relative=True each row is divided by the sum of its term magnitudes
    (normwise backward error). For |R| >> S the terms are large and cancel,
    so the absolute residual of even the exact solution is ~eps |R| / S.
    """
    terms = [
        (a * Rd / (-2j * c * S), -1j * bt, Rd / S),
        (b * Rd / (2j * c * S), 1j * at),
        (at * R / (2j * c * S), 1j * b, R / S),
        (bt * R / (2j * c * S), 1j * a),
    ]
    res = np.array([sum(row) for row in terms])
    if relative:
        res = res / np.array([max(sum(abs(v) for v in row), 1e-300) for row in terms])
    return res


def g_matrix_solve(R, Rd, S, c=1.0):
    """(a, b, a~, b~) of the pole-removing factor G = I + A/(k-ic) + A~/(k+ic)."""
    D = 4 * c * c * S * S - R * Rd
    if D == 0:
        raise ZeroDivisionError("4c^2 S^2 = R Rd")
    a = -2j * c * R * Rd / D
    b = 4j * c * c * S * R / D
    at = 2j * c * R * Rd / D
    bt = -4j * c * c * S * Rd / D
    return a, b, at, bt


def gamma_of_rho(rho, c=1.0):
    return c * rho - 0.25


def rhat_first(n, t, rho, prob: StepProblem):
    c, h = prob.c, prob.h_star
    g = gamma_of_rho(rho, c)
    S = _S(t, rho, c)
    lr = (math.log(2.0) + math.lgamma(n + 1) + math.lgamma(n + 1.5) + (2 * g - 2 * n - 1) * math.log(t)
          - math.log(math.pi * h * h) - (2 * n + 0.5) * math.log(2 * c * S))
    r = math.exp(lr)
    return -r, r


def rhat_second(n, t, rho, prob: StepProblem):
    """R^_2 and R^_2d = -R^_2; zero when n = 0."""
    if n == 0:
        return 0.0, 0.0
    c, h = prob.c, prob.h_star
    g = gamma_of_rho(rho, c)
    S = _S(t, rho, c)
    lr = (math.log(2 * math.pi) - math.lgamma(n) - math.lgamma(n + 0.5) + math.log(h * h / 4)
          + (2 * n + 0.5) * math.log(2 * c * S) + (2 * n - 2 * g - 1) * math.log(t))
    r = math.exp(lr)
    return -r, r


def _sech_log(lu):
    return 1.0 / math.cosh(lu) if abs(lu) < 700 else 2.0 * math.exp(-abs(lu))


def q_inf_first(n, t, rho, prob: StepProblem):
    c, h = prob.c, prob.h_star
    g = gamma_of_rho(rho, c)
    S = _S(t, rho, c)
    lu = ((2 * g - 2 * n - 1) * math.log(t) + math.log(2.0) + math.lgamma(n + 1) + math.lgamma(n + 1.5)
          - math.log(math.pi * h * h) - (2 * n + 1.5) * math.log(2 * c * S))
    return 2 * c * _sech_log(lu)


def q_inf_second(n, t, rho, prob: StepProblem):
    if n == 0:
        return 0.0
    c, h = prob.c, prob.h_star
    g = gamma_of_rho(rho, c)
    S = _S(t, rho, c)
    lu = ((2 * g - 2 * n + 1) * math.log(t) + math.log(2.0) + math.lgamma(n) + math.lgamma(n + 0.5)
          - math.log(math.pi * h * h) - (2 * n - 0.5) * math.log(2 * c * S))
    return 2 * c * _sech_log(lu)


def q_inf(t, rho, prob: StepProblem):
    """Reconstruction at the soliton index chosen from the fractional part of gamma."""
    g = gamma_of_rho(rho, prob.c)
    fl = math.floor(g)
    if g - fl <= 0.5:
        return max(int(fl), 0), q_inf_first(max(int(fl), 0), t, rho, prob)
    return int(fl) + 1, q_inf_second(int(fl) + 1, t, rho, prob)


# ---------------------------------------------------------------------------
# local coordinates and the error-jump audit
# ---------------------------------------------------------------------------

def _zcubic(y, S, c):
    return S * y - 24 * c * y * y + 8 * y ** 3


@dataclass
class LocalCoords:
    k: complex
    y: complex
    y_d: complex
    z: complex
    z_d: complex
    zeta: complex
    zeta_d: complex
    Lambda: float
    phi: complex
    phi_d: complex


def _phi(y, z, c):
    # pure step: f = (2i/c) sqrt(y(2c-y)) = i phi sqrt(z)
    return (2.0 / c) * np.sqrt(y * (2 * c - y) / z)


def local_coords(k, t, rho, prob: StepProblem, Lambda=1.0):
    c = prob.c
    k = complex(k)
    S = _S(t, rho, c)
    y = c + 1j * k
    yd = c - 1j * k
    z, zd = _zcubic(y, S, c), _zcubic(yd, S, c)
    return LocalCoords(k, y, yd, z, zd, t * z / Lambda, t * zd / Lambda, Lambda,
                       _phi(y, z, c), _phi(yd, zd, c))


@dataclass
class JumpAuditReport:
    regime: str
    n: int
    gamma: float
    times: list
    sup12: list
    sup21: list
    fitted: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    non_decaying: list = field(default_factory=list)
    segment_residual: float | None = None

    def within(self, tol=0.15):
        out = {}
        for key, e in self.expected.items():
            f = self.fitted.get(key)
            out[key] = f is not None and e is not None and abs(f - e) <= tol
        return out


EXPECTED_EXPONENTS = {
    # (circle, entry) -> exponent in terms of (gamma - n)
    "rough": {("C", 12): lambda d: -2 * d - 1, ("C", 21): lambda d: 2 * d - 1,
              ("Cd", 12): lambda d: 2 * d - 1, ("Cd", 21): lambda d: -2 * d - 1},
    "refined_1": {("C", 12): lambda d: -2 * d - 1, ("C", 21): lambda d: 2 * d - 2,
                  ("Cd", 12): lambda d: 2 * d - 2, ("Cd", 21): lambda d: -2 * d - 1},
    "refined_2": {("C", 12): lambda d: -2 * d - 2, ("C", 21): lambda d: 2 * d - 1,
                  ("Cd", 12): lambda d: 2 * d - 1, ("Cd", 21): lambda d: -2 * d - 2},
}


def _inner_jump(n, gam, t, y, S, c, regime, R1, R2, disk):
    # D T Lhat D^-1 on the circle; the bounded G conjugation is left out
    z = _zcubic(y, S, c)
    zeta = t * z
    phi = complex(_phi(y, z, c))
    Lh = laguerre_matrix_normalized(n, zeta)
    if disk == "C":
        w = -y / (2 * c - y)
        T = np.eye(2, dtype=complex)
        if regime == "refined_1":
            T[1, 0] = R1 / zeta
        elif regime == "refined_2":
            T[0, 1] = R2 / zeta
        X = T @ Lh
        d2 = (z / w) ** (2 * n) / (-1j * phi) * t ** (2 * n - 2 * gam)
        return X[0, 1] * d2, X[1, 0] / d2
    # lower disk: L_d = sigma_1 L sigma_1, triangular factors transposed
    w = (y - 2 * c) / y
    Ld = Lh[::-1, ::-1]
    T = np.eye(2, dtype=complex)
    if regime == "refined_1":
        T[0, 1] = R1 / zeta
    elif regime == "refined_2":
        T[1, 0] = R2 / zeta
    X = T @ Ld
    # D_d = (w z_d)^(-n) (i phi_d)^(1/2) t^(gamma - n)
    d2 = (w * z) ** (-2 * n) * (1j * phi) * t ** (2 * gam - 2 * n)
    return X[0, 1] * d2, X[1, 0] / d2


def parametrix_jump_audit(n, rho, prob: StepProblem, regime="refined_1", r=0.2,
                          times=(1e2, 1e3, 1e4, 1e5), samples=24, decay_tol=0.15):
    """Observed t-decay of the off-diagonal error-jump entries on both circles."""
    if regime not in EXPECTED_EXPONENTS:
        raise ValueError("regime must be rough, refined_1 or refined_2")
    c = prob.c
    gam = gamma_of_rho(rho, c)
    R1 = math.exp(laguerre_log_norm(n)) / TWO_PI_I
    R2 = TWO_PI_I * n / (math.factorial(n) * math.gamma(n + 0.5)) if n else 0.0
    th = (np.arange(samples) + 0.5) * 2 * math.pi / samples
    sup = {("C", 12): [], ("C", 21): [], ("Cd", 12): [], ("Cd", 21): []}
    for t in times:
        S = _S(t, rho, c)
        m = {key: 0.0 for key in sup}
        for s in th:
            y = r * cmath.exp(1j * s)
            for disk in ("C", "Cd"):
                e12, e21 = _inner_jump(n, gam, t, y, S, c, regime, R1, R2, disk)
                m[(disk, 12)] = max(m[(disk, 12)], abs(e12))
                m[(disk, 21)] = max(m[(disk, 21)], abs(e21))
        for key in sup:
            sup[key].append(m[key])
    lt = np.log(np.asarray(times))
    fitted, expected, flat = {}, {}, []
    for key, vals in sup.items():
        vals = np.asarray(vals)
        expected[key] = EXPECTED_EXPONENTS[regime][key](gam - n)
        if np.all(vals > 0):
            fitted[key] = float(np.polyfit(lt, np.log(vals), 1)[0])
            if fitted[key] > -decay_tol:
                flat.append(key)
        else:
            fitted[key] = None
    rep = JumpAuditReport(regime, n, gam, list(times), sup[("C", 12)], sup[("C", 21)],
                          fitted, expected, flat)
    rep.segment_residual = segment_jump_residual(n, rho, 1e3, prob)
    return rep


def segment_jump_residual(n, rho, t, prob: StepProblem, zetas=(0.5, 2.0, 5.0, 10.0), _flip=1.0):
    """Relative size of M_inf,+ J M_inf,-^(-1) - I on (ic, i(c - r)).

    The jump is built from f(k) e^(2it theta) directly; the '+' side of the
    downward segment is Re k > 0, i.e. Im zeta > 0.
    """
    c = prob.c
    gam = gamma_of_rho(rho, c)
    S = _S(t, rho, c)
    worst = 0.0
    for zt in zetas:
        # points where e^(-zeta) is not negligible; y ~ zeta / (S t)
        y = zt / (S * t)
        z = _zcubic(y, S, c)
        zeta = t * z
        phi = float(_phi(y, z, c).real)
        k = 1j * (c - y)
        f = _flip * (2j / c) * cmath.sqrt(k * k + c * c)
        J = np.array([[1, 0], [f * t ** (2 * c * rho) * math.exp(-zeta), 1]], dtype=complex)
        # conjugate by (-i phi)^(sigma_3/2) t^(gamma sigma_3) so L's scale sets the size
        right = np.diag([(-1j * phi) ** 0.5 * t ** gam, (-1j * phi) ** -0.5 * t ** -gam])
        Jc = right @ J @ np.linalg.inv(right)
        Lp = laguerre_matrix(n, zeta, side="+")
        Lm_inv = np.linalg.inv(laguerre_matrix(n, zeta, side="-"))
        E = Lp @ Jc @ Lm_inv - np.eye(2)
        worst = max(worst, np.abs(E).max() / (np.abs(Lp).max() * np.abs(Lm_inv).max()))
    return worst
