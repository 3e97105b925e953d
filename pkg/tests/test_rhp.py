import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_genlaguerre

from mkdvstep import rhp
from mkdvstep.scattering import StepProblem
from mkdvstep.specfun import DomainError

P = StepProblem()

# frozen from mpmath.quad at 80 digits, breakpoints at the bulk and at Re w
CAUCHY_ORACLE = [
    (0, 2 + 1j, 0.074228379920769231598 + 0.031279714345533113813j),
    (5, 3 + 2j, -0.65032945111220866209 + 0.17332469026610794479j),
    (10, -20 + 5j, 0.00034446888697130336869 + 0.00012992465705436270895j),
    (10, 40 + 0.5j, 0.0031857755673705565007 + 0.0013758930424593390846j),
    (20, 200 + 1j, 3.1681022966600580638e-12 + 2.6333285237552486187e-11j),
    (20, 30j, -1342.4134541020422188 + 1943.0165495724553908j),
    (12, -60 - 1j, -1.5890319914444533727e-8 - 8.6194141693930942391e-8j),
]


@pytest.mark.parametrize("k,w,ref", CAUCHY_ORACLE)
def test_cauchy_transform_against_mpmath(k, w, ref):
    assert abs(rhp.cauchy_laguerre(k, w) / ref - 1) < 1e-13


@pytest.mark.parametrize("k,w", [(5, -4 + 3j), (8, 2 + 30j), (12, -60 - 1j), (6, 90 + 2j)])
def test_continued_fraction_matches_quadrature(k, w):
    # recessive-solution route against the orthogonality-shifted quadrature; the
    # quadrature side is the weaker one far out on the negative axis (~1e-11)
    assert rhp._far_from_support(k, w)
    via_cf = rhp._log_C0(w) + rhp._log_ratio_sum(k, w)
    J = rhp._J_direct(k, w)
    via_quad = cmath.log(J * math.exp(0.5 * rhp.laguerre_log_norm(k)) / rhp.TWO_PI_I)
    assert abs(cmath.exp(via_cf - via_quad) - 1) < 5e-11


def test_orthogonality_shift_is_invariant():
    # every 0 <= m <= k gives the same transform (up to quadrature error)
    k, w = 6, 1.0 + 4.0j
    vals = [rhp._J_direct(k, w, m) for m in range(k + 1)]
    assert max(abs(v / vals[0] - 1) for v in vals) < 1e-11


@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_monic_laguerre_against_scipy(n):
    s = np.linspace(0, 30, 7)
    ref = (-1) ** n * math.factorial(n) * eval_genlaguerre(n, 0.5, s)
    assert np.allclose(rhp.laguerre_pi(n, s), ref, rtol=1e-12, atol=1e-10 * math.factorial(n))


def test_gram_matrix_small():
    G = rhp.laguerre_gram(4)
    h = np.array([rhp.laguerre_norm(k) for k in range(5)])
    assert np.abs(np.diag(G) / h - 1).max() < 1e-12
    off = (G - np.diag(np.diag(G))) / np.sqrt(np.outer(h, h))
    assert np.abs(off).max() < 1e-12


@pytest.mark.parametrize("n", [0, 1, 3])
@pytest.mark.parametrize("x", [0.4, 2.0, 9.5])
def test_laguerre_jump_and_det(n, x):
    Lp = rhp.laguerre_matrix(n, x, side="+")
    Lm = rhp.laguerre_matrix(n, x, side="-")
    assert np.abs(Lm - Lp @ rhp.laguerre_jump(x)).max() < 1e-9 * np.abs(Lp).max()
    assert abs(np.linalg.det(rhp.laguerre_matrix(n, x + 1j)) - 1) < 1e-12


def test_laguerre_needs_side_on_cut():
    with pytest.raises(DomainError):
        rhp.laguerre_matrix(2, 3.0)
    with pytest.raises(DomainError):
        rhp.cauchy_hat(2, 3.0)


@pytest.mark.parametrize("n", [0, 1, 4])
def test_laguerre_two_term_expansion(n):
    # L zeta^(n sigma3) - las2 = O(zeta^-2)
    errs = []
    for R in (200.0, 400.0):
        z = R * cmath.exp(0.9j)
        errs.append(np.abs(rhp.laguerre_matrix_normalized(n, z) - rhp.laguerre_las2(n, z)).max())
    assert math.log(errs[0] / errs[1], 2) > 1.8


@settings(max_examples=30, deadline=None)
@given(st.floats(2.5, 20), st.floats(-math.pi + 0.01, math.pi - 0.01))
def test_h_against_series(r, a):
    z = r * cmath.exp(1j * a)
    if abs(z.imag) < 1e-9 and z.real > 0:
        return
    assert abs(rhp.h_fn(z, side="+") - rhp.h_series(z, 60)) < 1e-12


def test_psi_relation_and_jumps():
    for z in (2 + 1j, -3 + 0.5j, 0.4 - 2j):
        lhs = rhp.psi_fn(z)
        rhs = -2 * z + cmath.log(z) + math.log(4 * math.e) - rhp.h_fn(z)
        assert abs(lhs - rhs) < 1e-13
    for x in (-2.0, -0.3):
        assert abs(rhp.psi_fn(x, "+") - rhp.psi_fn(x, "-") - 2j * math.pi) < 1e-13
    for x in (0.2, 0.8):
        assert abs(rhp.psi_fn(x, "+") + rhp.psi_fn(x, "-")) < 1e-13
    with pytest.raises(DomainError):
        rhp.psi_fn(0.5)


@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
def test_g_function_series(a):
    z = 4 * a * cmath.exp(0.7j)
    assert abs(rhp.g_fn(z, a) - rhp.g_series(z, a, 60)) < 1e-12


def test_model_matrix():
    for z in (2 + 1j, -1 - 1j):
        assert abs(np.linalg.det(rhp.m_mod(z)) - 1) < 1e-14
    for x in (0.25, 0.7):
        Mp, Mm = rhp.m_mod(x, "+"), rhp.m_mod(x, "-")
        assert np.abs(Mp - Mm @ np.array([[0, -1], [1, 0]])).max() < 1e-13
    assert abs(rhp.delta_fn(1e12) - 2 ** -0.5) < 1e-6


def test_q_n_uniform_decay():
    worst = max(np.abs(rhp.q_n_matrix(n, 5.0, side="+") - np.eye(2)).max() * 5 for n in (1, 3, 10, 30))
    assert worst < 1.0
    with pytest.raises(DomainError):
        rhp.q_n_matrix(3, 0.2)
    with pytest.raises(DomainError):
        rhp.q_n_matrix(3, 2.0)


def test_q_n_first_correction():
    # entry 11 of Q_n - I behaves like 1/(8 zeta)
    for n in (1, 5):
        z = 400 * cmath.exp(1.1j)
        assert abs((rhp.q_n_matrix(n, z)[0, 0] - 1) * z - 0.125) < 5e-3


def test_e_n_det_and_decay():
    errs = []
    for n in (4, 16):
        E = rhp.e_n_matrix(n, 3 + 0.5j)
        assert abs(np.linalg.det(E) - 1) < 1e-12
        errs.append(np.abs(E - np.eye(2)).max())
    assert errs[1] < errs[0]


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5), st.floats(-math.pi, math.pi))
def test_airy_connection_identity(r, a):
    v0, _, v1, _, vm, _ = rhp.airy_v(r * cmath.exp(1j * a))
    assert abs(v0 - 1j * v1 + 1j * vm) < 1e-13 * max(1.0, abs(v1), abs(vm))


AIRY_JUMPS = {0.0: [[1, 0], [1, 1]], 2 * math.pi / 3: [[1, 1], [0, 1]],
              math.pi: [[0, -1], [1, 0]], -2 * math.pi / 3: [[1, 1], [0, 1]]}


@pytest.mark.parametrize("ang", list(AIRY_JUMPS))
def test_airy_sector_jumps(ang):
    for r in (0.5, 2.0, 4.5):
        z = complex(-r, 0.0) if ang == math.pi else r * cmath.exp(1j * ang)
        ccw = rhp.airy_parametrix(z, side="ccw")
        cw = rhp.airy_parametrix(z, side="cw")
        plus, minus = (ccw, cw) if ang == 0.0 else (cw, ccw)
        assert np.abs(plus - minus @ np.array(AIRY_JUMPS[ang])).max() < 1e-10


def test_airy_det_and_rays():
    for z in (0.3 + 0.2j, -2 + 1j, 1 - 3j):
        assert abs(np.linalg.det(rhp.airy_parametrix(z)) + 1) < 1e-12
    with pytest.raises(DomainError):
        rhp.airy_parametrix(2.0)
    with pytest.raises(DomainError):
        rhp.airy_parametrix(0.0)


def test_airy_correction_rate():
    for th in (0.4, 2.0, -2.6):
        e = []
        for R in (10.0, 40.0):
            z = R * cmath.exp(1j * th)
            e.append(np.abs(rhp.airy_normalized(z) - np.eye(2) - rhp.AIRY_CORRECTION * z ** -1.5).max())
        assert math.log(e[0] / e[1], 4) > 2.8


@settings(max_examples=50, deadline=None)
@given(st.floats(0.3, 3), st.floats(-3, 3), st.floats(10, 30))
def test_g_matrix_solves_system(c, lr, s):
    R = -10 ** lr
    S = s * c * c
    sol = rhp.g_matrix_solve(R, -R, S, c)
    assert np.abs(rhp.g_matrix_system(*sol, R, -R, S, c, relative=True)).max() < 1e-12
    u = -R / (2 * c * S)
    assert abs(2j * sol[1] - 2 * c / math.cosh(math.log(u))) < 1e-12 * 2 * c


def test_g_matrix_singular():
    with pytest.raises(ZeroDivisionError):
        rhp.g_matrix_solve(2.0, 2.0, 1.0, 1.0)


def test_reconstruction_chain():
    for n in range(1, 6):
        for t, rho in ((1e2, 0.9), (1e4, 1.7)):
            a, b = rhp.q_inf_second(n, t, rho, P), rhp.q_inf_first(n - 1, t, rho, P)
            assert abs(a - b) <= 1e-12 * max(abs(b), 1e-300)
    # 2ib from the R^_1 solve is the first reconstruction
    n, t, rho = 2, 1e3, 1.4
    R, Rd = rhp.rhat_first(n, t, rho, P)
    sol = rhp.g_matrix_solve(R, Rd, rhp._S(t, rho, 1.0), 1.0)
    assert abs(2j * sol[1] - rhp.q_inf_first(n, t, rho, P)) < 1e-13
    assert rhp.rhat_second(0, t, rho, P) == (0.0, 0.0)
    idx, val = rhp.q_inf(1e3, 1.0, P)
    assert idx == 1 and 0 < val <= 2.0


def test_jump_audit_refined_and_rough():
    rep = rhp.parametrix_jump_audit(1, 1.55, P, "refined_1")
    assert all(rep.within(0.15).values())
    assert rep.non_decaying == []
    assert rep.segment_residual < 1e-10
    rough = rhp.parametrix_jump_audit(1, 1.75, P, "rough")
    assert set(rough.non_decaying) == {("C", 21), ("Cd", 12)}
    with pytest.raises(ValueError):
        rhp.parametrix_jump_audit(1, 1.3, P, "bogus")


def test_segment_residual_detects_wrong_jump():
    good = rhp.segment_jump_residual(1, 1.55, 1e3, P)
    bad = rhp.segment_jump_residual(1, 1.55, 1e3, P, _flip=-1.0)
    assert good < 1e-10 < 0.1 < bad


def test_rhat_sign_display():
    R, Rd = rhp.rhat_first(2, 100.0, 1.0, P)
    assert -R == Rd > 0
    assert abs(rhp.laguerre_norm(0) - 0.886226925452758) < 1e-15
