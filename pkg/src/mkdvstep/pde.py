"""Finite-difference mKdV solver q_t + 6 q^2 q_x + q_xxx = 0 for step-like data.

Conservative method of lines q_t = -d/dx (2 q^3 + q_xx): fourth-order central
differences in space, classical RK4 in time, and NB frozen cells at each end
holding the background constants.  The spatial derivative is written as a
difference of interface fluxes so that the discrete mass changes only by the
two boundary fluxes, which are accumulated with the RK4 weights.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .specfun import DomainError

NB = 4              # frozen cells per side; the flux stencil reaches 4 cells
DT_FACTOR = 0.2     # explicit stability: dt <= 0.2 dx^3
AMP_SLACK = 0.2


class ConfigError(ValueError):
    pass


class BlowUpError(RuntimeError):
    pass


def smooth_step_ic(x, c=1.0, w=1.0):
    """(c/2)(1 - tanh(x/w)): c on the left, 0 on the right."""
    if not w > 0:
        raise ValueError("smoothing width must be positive")
    return 0.5 * c * (1.0 - np.tanh(np.asarray(x, dtype=float) / w))


def soliton(x, t, kappa, x0=0.0):
    """Exact mKdV soliton kappa sech(kappa (x - kappa^2 t - x0))."""
    return kappa / np.cosh(kappa * (np.asarray(x, dtype=float) - kappa * kappa * t - x0))


@dataclass
class SimConfig:
    c: float = 1.0
    w: float = 1.0
    L_left: float = 520.0
    L_right: float = 360.0
    dx: float = 0.05
    dt: float | None = None
    T: float = 80.0
    snapshots: tuple = (20.0, 40.0, 80.0)
    margin: float = 20.0
    check_domain: bool = True
    # initial datum; None means the smooth step
    q0: object = None
    left_value: float | None = None
    right_value: float = 0.0

    def __post_init__(self):
        if self.dt is None:
            self.dt = DT_FACTOR * self.dx ** 3
        if self.dx <= 0 or self.dt <= 0:
            raise ConfigError("dx and dt must be positive")
        if self.dt > DT_FACTOR * self.dx ** 3 * (1 + 1e-12):
            raise ConfigError("dt = %g violates dt <= %g dx^3" % (self.dt, DT_FACTOR))
        if self.left_value is None:
            self.left_value = self.c
        if self.check_domain:
            need_l = 6 * self.c ** 2 * self.T + self.margin
            need_r = 4 * self.c ** 2 * self.T + self.margin
            if self.L_left <= need_l or self.L_right <= need_r:
                raise ConfigError("domain [-%g, %g] too small for T = %g: need [-%g, %g]"
                                  % (self.L_left, self.L_right, self.T, need_l, need_r))
        snaps = tuple(sorted(float(s) for s in self.snapshots))
        if any(s <= 0 or s > self.T + 1e-12 for s in snaps):
            raise ConfigError("snapshot times must lie in (0, T]")
        self.snapshots = snaps

    def grid(self):
        n = int(round((self.L_left + self.L_right) / self.dx)) + 1
        return -self.L_left + self.dx * np.arange(n)

    def initial(self, x):
        if self.q0 is None:
            return smooth_step_ic(x, self.c, self.w)
        return np.asarray(self.q0(x), dtype=float)


@dataclass
class SimState:
    q: np.ndarray
    t: float
    mass: float = 0.0
    boundary_flux: float = 0.0
    boundary_dev: tuple = (0.0, 0.0)


@dataclass
class Snapshot:
    t: float
    x: np.ndarray
    q: np.ndarray


@dataclass
class SimResult:
    config: SimConfig
    snapshots: list
    mass0: float
    mass_drift: list = field(default_factory=list)   # per snapshot: mass - mass0 + flux
    steps: int = 0
    # max |q - background| within margin/2 of the (left, right) boundary, per snapshot
    boundary_dev: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# compiled kernels
# ---------------------------------------------------------------------------

@njit(cache=True, fastmath=True)
def _rhs(q, inv_dx, F, out):
    # out = -d/dx(2q^3 + q_xx) on the live cells; returns (flux at left face, flux at right face)
    n = q.size
    c2 = inv_dx * inv_dx / 12.0
    for i in range(2, n - 2):
        qi = q[i]
        qxx = (-q[i + 2] + 16.0 * q[i + 1] - 30.0 * qi + 16.0 * q[i - 1] - q[i - 2]) * c2
        F[i] = 2.0 * qi * qi * qi + qxx
    a = NB
    b = n - NB
    for i in range(a, b):
        g_r = (-F[i + 2] + 7.0 * F[i + 1] + 7.0 * F[i] - F[i - 1]) / 12.0
        g_l = (-F[i + 1] + 7.0 * F[i] + 7.0 * F[i - 1] - F[i - 2]) / 12.0
        out[i] = -(g_r - g_l) * inv_dx
    for i in range(a):
        out[i] = 0.0
    for i in range(b, n):
        out[i] = 0.0
    gl = (-F[a + 1] + 7.0 * F[a] + 7.0 * F[a - 1] - F[a - 2]) / 12.0
    gr = (-F[b + 1] + 7.0 * F[b] + 7.0 * F[b - 1] - F[b - 2]) / 12.0
    return gl, gr


@njit(cache=True, fastmath=True)
def _advance(q, dt, inv_dx, nsteps, amp_cap, band):
    """RK4 for nsteps; returns (net boundary outflow, status, left dev, right dev).

    The deviations are max |q - background| over the first/last ``band`` cells,
    sampled every 256 steps.
    """
    n = q.size
    F = np.zeros(n)
    k1 = np.zeros(n)
    k2 = np.zeros(n)
    k3 = np.zeros(n)
    k4 = np.zeros(n)
    tmp = np.zeros(n)
    flux = 0.0
    dev_l = 0.0
    dev_r = 0.0
    m = min(band, n)
    for s in range(nsteps):
        l1, r1 = _rhs(q, inv_dx, F, k1)
        for i in range(n):
            tmp[i] = q[i] + 0.5 * dt * k1[i]
        l2, r2 = _rhs(tmp, inv_dx, F, k2)
        for i in range(n):
            tmp[i] = q[i] + 0.5 * dt * k2[i]
        l3, r3 = _rhs(tmp, inv_dx, F, k3)
        for i in range(n):
            tmp[i] = q[i] + dt * k3[i]
        l4, r4 = _rhs(tmp, inv_dx, F, k4)
        for i in range(n):
            q[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        flux += dt / 6.0 * ((r1 - l1) + 2.0 * (r2 - l2) + 2.0 * (r3 - l3) + (r4 - l4))
        if s % 256 == 0:
            for i in range(n):
                v = q[i]
                if not (abs(v) <= amp_cap):
                    return flux, s + 1, dev_l, dev_r
            for i in range(m):
                dev_l = max(dev_l, abs(q[i] - q[0]))
                dev_r = max(dev_r, abs(q[n - 1 - i] - q[n - 1]))
    return flux, 0, dev_l, dev_r


def _live_mass(q, dx):
    return float(np.sum(q[NB:q.size - NB]) * dx)


def step(state: SimState, dt, dx, nsteps=1, amp_cap=np.inf, band=0):
    """Advance ``state`` in place by nsteps RK4 steps of size dt."""
    flux, bad, dev_l, dev_r = _advance(state.q, float(dt), 1.0 / dx, int(nsteps), float(amp_cap),
                                       int(band))
    if bad:
        raise BlowUpError("non-finite or runaway values near t = %g" % (state.t + bad * dt))
    state.t += nsteps * dt
    state.boundary_flux += flux
    state.mass = _live_mass(state.q, dx)
    state.boundary_dev = (max(state.boundary_dev[0], dev_l), max(state.boundary_dev[1], dev_r))
    return state


def simulate(config: SimConfig, out_dir=None):
    x = config.grid()
    q = config.initial(x).copy()
    # frozen cells hold the background limits exactly
    q[:NB] = config.left_value
    q[-NB:] = config.right_value
    state = SimState(q, 0.0, _live_mass(q, config.dx), 0.0)
    m0 = state.mass
    cap = 2 * config.c + AMP_SLACK if config.q0 is None else 10 * (np.abs(q).max() + 1)
    res = SimResult(config, [], m0)
    t_prev = 0.0
    band = NB + int(round(0.5 * config.margin / config.dx))
    for ts in config.snapshots:
        span = ts - t_prev
        n = max(1, int(math.ceil(span / config.dt - 1e-9)))
        dt = span / n
        step(state, dt, config.dx, n, cap, band)
        state.t = ts
        res.steps += n
        snap = Snapshot(ts, x, state.q.copy())
        res.snapshots.append(snap)
        res.mass_drift.append(state.mass - m0 + state.boundary_flux)
        res.boundary_dev.append(state.boundary_dev)
        if out_dir is not None:
            write_snapshot(snap, out_dir)
        t_prev = ts
    return res


def snapshot_name(t):
    return "snap_t%s.csv" % repr(float(t))


def write_snapshot(snap: Snapshot, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, snapshot_name(snap.t))
    with open(path, "w") as fh:
        fh.write("x,q\n")
        for xi, qi in zip(snap.x, snap.q):
            fh.write("%r,%r\n" % (float(xi), float(qi)))
    return path


def read_snapshot(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    name = os.path.basename(path)
    t = float(name[len("snap_t"):-len(".csv")])
    return Snapshot(t, data[:, 0].copy(), data[:, 1].copy())


# ---------------------------------------------------------------------------
# comparison against asymptotic predictors
# ---------------------------------------------------------------------------

@dataclass
class Peak:
    x: float
    height: float


@dataclass
class SnapshotError:
    t: float
    rel_linf: float
    rel_l2: float
    peaks: list
    predicted_peaks: list


@dataclass
class ErrorReport:
    region: tuple
    rows: list

    def linf(self):
        return [r.rel_linf for r in self.rows]


def find_peaks(x, q, threshold, count=None, right_to_left=True):
    """Local maxima above threshold, refined by a quadratic through three points."""
    idx = np.where((q[1:-1] > q[:-2]) & (q[1:-1] >= q[2:]) & (q[1:-1] > threshold))[0] + 1
    if right_to_left:
        idx = idx[::-1]
    if count is not None:
        idx = idx[:count]
    dx = x[1] - x[0]
    peaks = []
    for i in idx:
        ym, y0, yp = q[i - 1], q[i], q[i + 1]
        den = ym - 2 * y0 + yp
        s = 0.5 * (ym - yp) / den if den != 0 else 0.0
        peaks.append(Peak(float(x[i] + s * dx), float(y0 - 0.25 * (ym - yp) * s)))
    return peaks


def compare(snapshots, predictor, xi_range=(-0.3, 0.25), peak_lines=None, n_peaks=1,
            peak_threshold=None):
    """Relative L-inf / L2 errors of ``predictor(x, t)`` on x/(12t) in xi_range.

    ``peak_lines`` maps a peak index j (0 = leading) to a predicted position
    function of t; heights are reported as measured.
    """
    rows = []
    for snap in snapshots:
        lo, hi = 12 * snap.t * xi_range[0], 12 * snap.t * xi_range[1]
        if lo < snap.x[0] or hi > snap.x[-1]:
            raise DomainError("region [%g, %g] leaves the simulated domain at t = %g" % (lo, hi, snap.t))
        m = (snap.x >= lo) & (snap.x <= hi)
        xs, qs = snap.x[m], snap.q[m]
        pred = np.array([predictor(xx, snap.t) for xx in xs])
        err = qs - pred
        linf = float(np.abs(err).max() / np.abs(qs).max())
        l2 = float(np.sqrt(np.sum(err ** 2)) / np.sqrt(np.sum(qs ** 2)))
        thr = peak_threshold if peak_threshold is not None else 0.5 * float(np.abs(snap.q).max())
        pk = find_peaks(snap.x, snap.q, thr, n_peaks)
        pp = [] if peak_lines is None else [float(peak_lines(j, snap.t)) for j in range(len(pk))]
        rows.append(SnapshotError(snap.t, linf, l2, pk, pp))
    return ErrorReport(tuple(xi_range), rows)
