"""Special functions and quadrature used throughout the package.

Contents:

* ``theta``          -- the one-dimensional theta series sum_m exp(tau m^2/2 + z m)
* ``quad_singular``  -- adaptive Gauss-Legendre with algebraic endpoint weights
* ``airy_ai``        -- complex Airy function Ai and Ai' (series + asymptotics)
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss


class DomainError(ValueError):
    """Argument outside the region where a function is defined."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature ran out of refinement depth."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


# ---------------------------------------------------------------------------
# theta series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaArgs:
    z: complex
    tau: complex

    def __post_init__(self):
        if complex(self.tau).real >= 0:
            raise DomainError("theta series needs Re(tau) < 0, got %r" % (self.tau,))


def theta_order(z, tau, tol=1e-12):
    """Smallest M with exp(Re(tau) M^2/2 + |Re z| M) < tol relative to the peak term."""
    a = -0.5 * complex(tau).real
    b = abs(complex(z).real)
    # peak term sits near m* = b/(2a); truncate well beyond it
    m = int(math.ceil(b / (2 * a))) + 1
    target = math.log(tol) + (b * b / (4 * a))
    while -a * m * m + b * m > target:
        m += 1
    return m


def theta(z, tau, tol=1e-12):
    """Theta(z | tau) by symmetric truncation of the Gaussian series."""
    args = ThetaArgs(complex(z), complex(tau))
    M = theta_order(args.z, args.tau, tol)
    m = np.arange(-M, M + 1, dtype=float)
    e = 0.5 * args.tau * m * m + args.z * m
    # factor out the largest exponent to keep the sum finite
    shift = e.real.max()
    return complex(np.exp(shift) * np.sum(np.exp(e - shift)))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass
class QuadSpec:
    a: complex
    b: complex
    alpha: float = 0.0
    beta: float = 0.0
    tol: float = 1e-13
    max_depth: int = 40

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.alpha <= -1 or self.beta <= -1:
            raise ValueError("endpoint exponents must exceed -1")


_GL_CACHE = {}


def _gauss(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = leggauss(n)
    return _GL_CACHE[n]


def _power_for(exponent):
    # x - a = h s^p turns (x-a)^e dx into s^(p(e+1)-1) ds, a polynomial when
    # p is the denominator of e
    if exponent == 0:
        return 1
    return Fraction(exponent).limit_denominator(12).denominator


def _rule(g, a, b, order):
    x1, w1 = _gauss(order)
    x2, w2 = _gauss(2 * order)
    h = 0.5 * (b - a)
    m = 0.5 * (a + b)
    i1 = h * np.dot(w1, g(m + h * x1))
    i2 = h * np.dot(w2, g(m + h * x2))
    err = abs(i2 - i1)
    if not np.isfinite(err):
        raise QuadratureError("non-finite integrand on [%g, %g]" % (a, b),
                              estimate=None, error=float("inf"))
    return i2, err


def _adaptive(g, lo, hi, tol, max_depth, order=20, rtol=1e-15):
    """Globally adaptive Gauss-Legendre on [lo, hi]; worst interval is split first.

    ``max_depth`` bounds the number of bisections of any single interval.
    """
    val, err = _rule(g, lo, hi, order)
    heap = [(-err, lo, hi, val, 0)]
    total, etot = val, err
    while etot > max(tol, rtol * abs(total)):
        negerr, a, b, v, depth = heapq.heappop(heap)
        if depth >= max_depth:
            raise QuadratureError(
                "refinement depth %d exhausted near [%g, %g]" % (max_depth, a, b),
                estimate=total, error=etot)
        m = 0.5 * (a + b)
        v1, e1 = _rule(g, a, m, order)
        v2, e2 = _rule(g, m, b, order)
        total = total - v + v1 + v2
        etot = etot + negerr + e1 + e2
        heapq.heappush(heap, (-e1, a, m, v1, depth + 1))
        heapq.heappush(heap, (-e2, m, b, v2, depth + 1))
        if len(heap) > 64 and len(heap) % 64 == 0:
            # refresh the running sums against drift
            total = sum(item[3] for item in heap)
            etot = sum(-item[0] for item in heap)
    return total, etot


def quad_singular(g, a, b=None, alpha=0.0, beta=0.0, tol=1e-13, max_depth=40,
                  full_output=False):
    """Integrate u^alpha (1-u)^beta g(x) dx along the segment x = a + (b-a) u.

    The algebraic weight is written in the normalized parameter u in [0, 1],
    so complex segments need no branch choice; any constant phase belongs to
    ``g``.  Each half of the segment is mapped by u = s^p / 2 (p the
    denominator of the exponent), which turns the weight into an integer power
    of s, and the result goes to adaptive Gauss-Legendre.  ``g`` must accept
    numpy arrays.  A QuadSpec may be passed in place of (a, b, ...).
    """
    if isinstance(a, QuadSpec):
        spec = a
    else:
        spec = QuadSpec(a, b, alpha, beta, tol, max_depth)
    za, zb = complex(spec.a), complex(spec.b)
    L = zb - za
    al, be = float(spec.alpha), float(spec.beta)
    pa, pb = _power_for(al), _power_for(be)
    real_path = za.imag == 0 and zb.imag == 0
    if real_path:
        za, zb, L = za.real, zb.real, L.real

    def left(s):
        u = 0.5 * s ** pa
        w = 0.5 ** (al + 1) * pa * s ** (pa * (al + 1) - 1) * (1 - u) ** be
        return g(za + L * u) * w * L

    def right(s):
        r = 0.5 * s ** pb
        w = 0.5 ** (be + 1) * pb * s ** (pb * (be + 1) - 1) * (1 - r) ** al
        return g(zb - L * r) * w * L

    t = 0.5 * spec.tol
    v1, e1 = _adaptive(left, 0.0, 1.0, t, spec.max_depth)
    v2, e2 = _adaptive(right, 0.0, 1.0, t, spec.max_depth)
    val = v1 + v2
    val = complex(val) if np.iscomplexobj(val) else float(val)
    if full_output:
        return val, e1 + e2
    return val


# ---------------------------------------------------------------------------
# Airy function
# ---------------------------------------------------------------------------

_AI0 = 1.0 / (3 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
_AIP0 = -1.0 / (3 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))
SERIES_RADIUS = 8.0
_OMEGA = np.exp(2j * np.pi / 3)


def _airy_series(z, rot=0):
    # Ai = Ai(0) f(z) + Ai'(0) g(z) with f, g the even/odd Maclaurin solutions of
    # w'' = z w.  Terms reach exp(2/3 |z|^1.5) before cancelling, so the sum is
    # carried in extended precision to keep the absolute error near 1e-16.
    # rot != 0 evaluates at w^rot z with the rotation done in extended precision.
    z = complex(z)
    if z == 0:
        return complex(_AI0), complex(_AIP0)
    if abs(z) <= 2.5 and rot == 0:
        return _airy_series_double(z)
    with mpmath.workdps(32):
        zm = mpmath.mpc(z.real, z.imag)
        if rot:
            zm = zm * mpmath.expjpi(mpmath.mpf(2 * rot) / 3)
        z3 = zm ** 3
        tf = mpmath.mpc(1)
        tg = zm
        f, g = tf, tg
        fp, gp = mpmath.mpc(0), mpmath.mpc(1)
        eps = mpmath.mpf(10) ** -30
        k = 0
        while True:
            k += 1
            tf = tf * z3 / ((3 * k - 1) * (3 * k))
            tg = tg * z3 / ((3 * k) * (3 * k + 1))
            f += tf
            g += tg
            fp += tf * (3 * k) / zm
            gp += tg * (3 * k + 1) / zm
            if k > 3 and abs(tf) + abs(tg) < eps * (abs(f) + abs(g)):
                break
        a0 = 1 / (mpmath.cbrt(9) * mpmath.gamma(mpmath.mpf(2) / 3))
        a1 = -1 / (mpmath.cbrt(3) * mpmath.gamma(mpmath.mpf(1) / 3))
        ai = a0 * f + a1 * g
        aip = a0 * fp + a1 * gp
        return complex(ai), complex(aip)


def _airy_series_double(z):
    z3 = z * z * z
    tf, tg = 1.0 + 0j, z
    f, g = tf, tg
    fp, gp = 0j, 1.0 + 0j
    k = 0
    while True:
        k += 1
        tf = tf * z3 / ((3 * k - 1) * (3 * k))
        tg = tg * z3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        fp += tf * (3 * k) / z
        gp += tg * (3 * k + 1) / z
        if k > 3 and abs(tf) + abs(tg) < 1e-18 * (abs(f) + abs(g)):
            break
    return _AI0 * f + _AIP0 * g, _AI0 * fp + _AIP0 * gp


def _airy_asym(z):
    # valid for |arg z| < pi; used for |arg z| <= 2pi/3
    z = complex(z)
    zeta = (2.0 / 3.0) * z ** 1.5
    u = 1.0
    su = 1.0 + 0j
    sv = 1.0 + 0j
    last = float("inf")
    k = 0
    while k < 60:
        k += 1
        u = u * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v = -u * (6 * k + 1) / (6 * k - 1)
        term = u / zeta ** k
        if abs(term) > last:
            break
        last = abs(term)
        sign = (-1) ** k
        su += sign * term
        sv += sign * v / zeta ** k
        if abs(term) < 1e-17:
            break
    pre = np.exp(-zeta) / (2 * math.sqrt(math.pi))
    return pre * su / z ** 0.25, -pre * sv * z ** 0.25


def _airy_large(z):
    if abs(np.angle(z)) <= 2 * np.pi / 3:
        return _airy_asym(z)
    # Ai(z) = -w Ai(w z) - w^2 Ai(w^2 z); both rotated points sit in |arg| < 2pi/3
    a1, d1 = _airy_asym(_OMEGA * z)
    a2, d2 = _airy_asym(_OMEGA ** 2 * z)
    w, w2 = _OMEGA, _OMEGA ** 2
    return -w * a1 - w2 * a2, -w2 * d1 - w * d2


def airy_ai(z, rot=0):
    """Return (Ai(u), Ai'(u)) at u = w^rot z, w = exp(2 pi i/3).

    Inside the series radius the rotation is applied in extended precision:
    rounding w z to double shifts Ai by about |z|^1.5 ulp, which spoils
    identities between the three rotated values once they grow.
    """
    z = complex(z)
    if abs(z) <= SERIES_RADIUS:
        ai, aip = _airy_series(z, int(rot) % 3)
    else:
        ai, aip = _airy_large(z * _OMEGA ** (int(rot) % 3) if rot else z)
    return complex(ai), complex(aip)


def airy_ai_series(z):
    return _airy_series(z)


def airy_ai_asymptotic(z):
    return _airy_large(complex(z))
