import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mkdvstep.scattering import (PoleError, StepProblem, a_edge, a_pure, b_pure,
                                 f_pure, gamma_root, log_a_product_on_cut,
                                 phase_cubic_local, phase_theta, r_pure)
from mkdvstep.specfun import DomainError

off_cut = st.tuples(st.floats(0.05, 5), st.floats(-5, 5)).map(lambda p: complex(*p))


def test_step_problem_validation_and_derived():
    with pytest.raises(ValueError):
        StepProblem(c=0.0)
    with pytest.raises(ValueError):
        StepProblem(h_star=0.0)
    p = StepProblem(2.0).at(12.0, 1.0)
    assert p.xi == 1.0
    assert p.v == 1.0 - 3.0 / 4.0


@settings(max_examples=80, deadline=None)
@given(off_cut, st.floats(0.2, 3))
def test_a_squared_minus_b_squared_is_one(k, c):
    a, b = a_pure(k, c), b_pure(k, c)
    assert abs(a * a - b * b - 1) < 1e-12
    assert abs(r_pure(k, c) - b / a) < 1e-12 * max(1, abs(b / a))


def test_a_tends_to_one_at_infinity():
    for k in [1e6, 1e6j + 3, -2e6 + 1e5j]:
        assert abs(a_pure(k) - 1) < 1e-11


def test_edge_behaviour_near_ic():
    c = 1.3
    for eps in [1e-4, 1e-6]:
        k = 1j * c + eps * np.exp(0.3j)
        assert abs(a_pure(k, c) / a_edge(k, c, 1.0) - 1) < 10 * eps ** 0.5


def test_cut_requires_side():
    with pytest.raises(DomainError):
        gamma_root(0.5j, 1.0)
    g_p = gamma_root(0.5j, 1.0, side="+")
    g_m = gamma_root(0.5j, 1.0, side="-")
    # boundary values are limits from the right and left half-planes
    assert abs(g_p - gamma_root(1e-12 + 0.5j, 1.0)) < 1e-9
    assert abs(g_m - gamma_root(-1e-12 + 0.5j, 1.0)) < 1e-9


@pytest.mark.parametrize("s", [0.0, 0.3, 0.7, 0.95])
def test_log_a_product_closed_form(s):
    # log(a_+ a_-) = log(c/2) - log(c^2 - s^2)/2 on the cut
    c = 1.0
    ref = math.log(c / 2) - 0.5 * math.log(c * c - s * s)
    assert abs(log_a_product_on_cut(s, c) - ref) < 1e-13


def test_r_pole():
    # a has no zeros off the cut for the pure step; force one through gamma = i
    with pytest.raises(PoleError):
        import mkdvstep.scattering as sc
        orig = sc.gamma_root
        try:
            sc.gamma_root = lambda k, c, side=None: np.asarray(1j)
            r_pure(1.0)
        finally:
            sc.gamma_root = orig


def test_f_and_phases():
    assert abs(f_pure(0.0, 2.0) - 2j) < 1e-15
    assert phase_theta(1.0, 0.5) == 10.0
    assert phase_cubic_local(0.0, 1.0, 10.0, 0.3) == 0.0
    y, c, t, rho = 0.01, 1.0, 50.0, 0.4
    z = (16 + 2 * rho * math.log(t) / t) * y - 24 * y * y + 8 * y ** 3
    assert abs(phase_cubic_local(y, c, t, rho) - t * z) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50).filter(lambda k: abs(k) > 1e-9), st.floats(0.2, 3))
def test_unitarity_on_real_axis(k, c):
    # a conj(a) + b conj(b) = 1 for real k
    a, b = a_pure(k, c), b_pure(k, c)
    assert abs(a * np.conj(a) + b * np.conj(b) - 1) < 1e-12
