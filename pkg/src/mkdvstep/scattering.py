"""Scattering data of the pure step and the cubic phase."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .specfun import DomainError


@dataclass
class StepProblem:
    """Background amplitude ``c`` (left limit), constant ``h_star`` in the
    quartic-root behaviour of a(k) at k = ic, plus an optional point (x, t)."""

    c: float = 1.0
    h_star: float = 1.0
    x: float | None = None
    t: float | None = None

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("background amplitude c must be positive")
        if self.h_star == 0:
            raise ValueError("h_star must be nonzero")

    @property
    def xi(self):
        return self.x / (12.0 * self.t)

    @property
    def v(self):
        return 1.0 - 3.0 * self.xi / self.c ** 2

    def at(self, x, t):
        return StepProblem(self.c, self.h_star, x, t)


class PoleError(ZeroDivisionError):
    pass


def _on_cut(k, c):
    k = np.asarray(k, dtype=complex)
    return (np.abs(k.real) == 0) & (np.abs(k.imag) <= c)


def gamma_root(k, c, side=None):
    """((k - ic)/(k + ic))^(1/4), principal branch, cut on [-ic, ic].

    ``side`` selects a boundary value on the cut: '+' is the limit from
    Re k > 0, '-' from Re k < 0.
    """
    k = np.asarray(k, dtype=complex)
    w = (k - 1j * c) / (k + 1j * c)
    if side is None:
        if np.any(_on_cut(k, c) & (np.abs(k.imag) < c)):
            raise DomainError("k on the cut [-ic, ic]; pass side='+' or '-'")
        return w ** 0.25
    # on the cut w is negative real; Re k > 0 approaches it from below
    mod = np.abs(w)
    arg = np.where(side == "+", -np.pi, np.pi)
    inside = _on_cut(k, c)
    out = np.where(inside, mod ** 0.25 * np.exp(0.25j * arg), w ** 0.25)
    return out


def a_pure(k, c=1.0, side=None):
    """Transmission-type coefficient a(k) of the pure step, a -> 1 at infinity."""
    g = gamma_root(k, c, side)
    return 0.5 * (g + 1.0 / g)


def b_pure(k, c=1.0, side=None):
    g = gamma_root(k, c, side)
    return 0.5 * (g - 1.0 / g)


def r_pure(k, c=1.0, side=None):
    """Reflection coefficient b/a of the pure step."""
    g = gamma_root(k, c, side)
    den = g + 1.0 / g
    if np.any(den == 0):
        raise PoleError("r evaluated at a zero of a(k)")
    return (g - 1.0 / g) / den


def f_pure(k, c=1.0):
    """f(k) = (2i/c) sqrt(k^2 + c^2), principal root (real positive on (-ic, ic))."""
    k = np.asarray(k, dtype=complex)
    return (2j / c) * np.sqrt(k * k + c * c)


def a_edge(k, c=1.0, h_star=1.0):
    """Leading behaviour (h*/2) (2ic/(k - ic))^(1/4) of a(k) near k = ic."""
    k = np.asarray(k, dtype=complex)
    return 0.5 * h_star * (2j * c / (k - 1j * c)) ** 0.25


def log_a_product_on_cut(s, c=1.0):
    """log(a_+ a_-) at k = is, 0 <= s < c, from the two explicit side limits."""
    k = 1j * np.asarray(s, dtype=float)
    ap = a_pure(k, c, side="+")
    am = a_pure(k, c, side="-")
    return np.log(ap * am).real


def phase_theta(k, xi):
    """theta(k, xi) = 4k^3 + 12 xi k."""
    k = np.asarray(k, dtype=complex) if np.iscomplexobj(k) else np.asarray(k)
    return 4 * k ** 3 + 12 * xi * k


def phase_cubic_local(y, c, t, rho):
    """t z(y) with z = (16c^2 + 2 rho ln t / t) y - 24 c y^2 + 8 y^3."""
    return t * ((16 * c * c + 2 * rho * np.log(t) / t) * y - 24 * c * y * y + 8 * y ** 3)
