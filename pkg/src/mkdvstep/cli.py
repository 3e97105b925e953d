"""Command line: whitham, profile, simulate, compare, verify.

Parameters come from an optional flat ``key=value`` file (``--config``) and
are overridden by flags.  CSV and JSON outputs contain no timestamps, so
identical inputs give identical bytes.
"""
from __future__ import annotations

import argparse
import cmath
import csv
import glob
import json
import math
import os
import re
import sys

import numpy as np

from . import __version__
from . import asymptotics as A
from . import pde, rhp
from . import whitham as W
from .scattering import StepProblem
from .specfun import DomainError

SCHEMA = "mkdvstep-report/1"

DEFAULTS = {
    "c": 1.0, "hstar": 1.0, "t": "80", "sigma": 0.3, "beta": 1.0, "rho": 1.2,
    "N": 3, "M": 1, "K": 1, "tol": 1e-10, "out": ".", "xi": None, "x": None,
    "mode": "elliptic", "suite": "all", "n": "0..10", "dx": 0.1, "w": 1.0,
    "T": 80.0, "snapshots": "20,40,80", "L_left": None, "L_right": None,
    "run": None, "predictor": "elliptic",
}
FLOATS = {"c", "hstar", "sigma", "beta", "rho", "tol", "dx", "w", "T", "L_left", "L_right"}
INTS = {"N", "M", "K"}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def read_config(path):
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError("%s:%d: expected key=value" % (path, lineno))
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k.replace("-", "_")] = v
    return cfg


def _coerce(key, val):
    if val is None:
        return None
    try:
        if key in FLOATS:
            return float(val)
        if key in INTS:
            return int(val)
    except ValueError:
        raise UsageError("bad value for %s: %r" % (key, val))
    return val


def resolve(args):
    """Defaults, then the config file, then explicit flags."""
    params = dict(DEFAULTS)
    if getattr(args, "config", None):
        for k, v in read_config(args.config).items():
            if k not in params:
                raise UsageError("unknown config key %r" % k)
            params[k] = v
    for k in params:
        v = getattr(args, k, None)
        if v is not None:
            params[k] = v
    return {k: _coerce(k, v) for k, v in params.items()}


def parse_grid(spec, name):
    """'a:b:n' (inclusive, n points) or 'a,b,c' or a single number."""
    if spec is None:
        raise UsageError("--%s is required" % name)
    spec = str(spec)
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(n))]
        return [float(v) for v in spec.split(",")]
    except ValueError:
        raise UsageError("bad grid for --%s: %r" % (name, spec))


def parse_int_range(spec):
    spec = str(spec)
    if ".." in spec:
        a, b = spec.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in spec.split(",")]


def _problem(p):
    return StepProblem(p["c"], p["hstar"])


def _out_path(p, name):
    os.makedirs(p["out"], exist_ok=True)
    return os.path.join(p["out"], name)


def _num(v):
    return "" if v is None else repr(float(v))


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _report(command, params, body):
    return {"schema": SCHEMA, "version": __version__, "command": command,
            # the output directory is left out so reports are byte-identical wherever written
            "params": {k: v for k, v in sorted(params.items()) if v is not None and k != "out"},
            **body}


# ---------------------------------------------------------------------------
# whitham
# ---------------------------------------------------------------------------

def whitham_row(xi, c):
    pt = W.solve_whitham(xi, c)
    row = {"xi": xi, "d": pt.d, "mu": pt.mu, "eta": pt.eta,
           "B": None, "tau": None, "Delta": None, "tau_star": None}
    if pt.d > 0:
        row["B"] = W.big_B(pt.d, c, pt.mu) if pt.d < c else 0.0
    if 0 < pt.d < c:
        ed = W.elliptic_data(pt.d, c)
        row.update(tau=ed.tau, Delta=ed.delta, tau_star=ed.tau_star)
    return row


def cmd_whitham(p):
    c = p["c"]
    xs = parse_grid(p["xi"] or "%r:%r:11" % (-c * c / 2, c * c / 3), "xi")
    cols = ["xi", "d", "mu", "eta", "B", "tau", "Delta", "tau_star"]
    path = _out_path(p, "whitham.csv")
    flagged = 0
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(cols)
        for xi in xs:
            try:
                row = whitham_row(xi, c)
            except DomainError as e:
                flagged += 1
                print("xi = %r skipped: %s" % (xi, e), file=sys.stderr)
                row = {"xi": xi}
            wr.writerow([_num(row.get(k)) for k in cols])
    print(path)
    return 0


# ---------------------------------------------------------------------------
# profile
# ---------------------------------------------------------------------------

def _profile_point(mode, x, t, p, prob):
    c = prob.c
    if mode == "elliptic":
        st = A.elliptic_state(x, t, prob)
        return A.q_ell(x, t, prob), math.floor(st.z / 2.0), math.pi * st.z
    if mode == "train":
        N = p["N"]
        lt = math.log(t)
        shifts = [(2 * n + 1.5) * lt + A.alpha_tilde(n, prob) for n in range(N)]
        base = 2 * c * (x - 4 * c * c * t)
        n = int(np.argmin([abs(base + s) for s in shifts]))
        return A.soliton_train(x, t, N, prob), n, shifts[n]
    if mode == "corollary":
        r = A.corollary_profile(x, t, p["sigma"], p["beta"], p["M"], prob)
        return r.value, r.n, (2 * r.n + 1.5) * math.log(t) + r.phase
    if mode == "mesoscopic":
        n, shift = A.mesoscopic_phase(t, p["sigma"], p["beta"], p["K"], prob)
        xx = A.curve_x(t, p["sigma"], p["beta"], prob) if x is None else x
        return 2 * c * A.sech(2 * c * (xx - 4 * c * c * t) + shift), n, shift
    raise UsageError("unknown mode %r (elliptic, train, corollary, mesoscopic)" % mode)


def cmd_profile(p):
    prob = _problem(p)
    mode = p["mode"]
    ts = parse_grid(p["t"], "t")
    on_curve = p["x"] is None
    if on_curve and mode in ("elliptic", "train"):
        raise UsageError("mode %s needs --x a:b:n" % mode)
    xs = None if on_curve else parse_grid(p["x"], "x")
    path = _out_path(p, "profile_%s.csv" % mode)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["x", "t", "q_pred", "n", "phase"])
        for t in ts:
            pts = [A.curve_x(t, p["sigma"], p["beta"], prob)] if on_curve else xs
            for x in pts:
                q, n, ph = _profile_point(mode, x, t, p, prob)
                wr.writerow([_num(x), _num(t), _num(q), str(int(n)), _num(ph)])
    print(path)
    return 0


# ---------------------------------------------------------------------------
# simulate / compare
# ---------------------------------------------------------------------------

def _sim_config(p):
    c, T = p["c"], p["T"]
    margin = 20.0
    # fast dispersive radiation on the c background outruns 6c^2 t; keep it off the left edge
    L_left = p["L_left"] if p["L_left"] is not None else 12 * c * c * T + 2 * margin
    L_right = p["L_right"] if p["L_right"] is not None else 4 * c * c * T + 2 * margin
    snaps = tuple(parse_grid(p["snapshots"], "snapshots"))
    return pde.SimConfig(c=c, w=p["w"], L_left=L_left, L_right=L_right, dx=p["dx"],
                         T=T, snapshots=snaps, margin=margin)


def cmd_simulate(p):
    cfg = _sim_config(p)
    res = pde.simulate(cfg, out_dir=p["out"])
    body = {"steps": res.steps, "mass0": res.mass0,
            "snapshots": [{"t": s.t, "file": pde.snapshot_name(s.t), "mass_drift": d,
                           "max_q": float(np.max(s.q)), "boundary_dev": list(bd)}
                          for s, d, bd in zip(res.snapshots, res.mass_drift, res.boundary_dev)]}
    path = _out_path(p, "simulate.json")
    write_json(path, _report("simulate", p, body))
    print(path)
    return 0


def load_run(run_dir):
    files = sorted(glob.glob(os.path.join(run_dir, "snap_t*.csv")))
    if not files:
        raise UsageError("no snap_t*.csv files in %s" % run_dir)
    snaps = [pde.read_snapshot(f) for f in files]
    return sorted(snaps, key=lambda s: s.t)


def elliptic_predictor(prob):
    return lambda x, t: A.q_ell(x, t, prob)


def compare_run(snaps, prob, xi_range=(-0.3, 0.25), stride=4):
    """Elliptic-region errors on every ``stride``-th grid point plus leading-peak tracking."""
    c = prob.c
    thin = [pde.Snapshot(s.t, s.x[::stride], s.q[::stride]) for s in snaps]
    rep = pde.compare(thin, elliptic_predictor(prob), xi_range)
    a0 = A.alpha_tilde(0, prob)
    rows = []
    for s, r in zip(snaps, rep.rows):
        pk = pde.find_peaks(s.x, s.q, c, 1)
        x0 = 4 * c * c * s.t - (1.5 * math.log(s.t) + a0) / (2 * c)
        lead = pk[0] if pk else None
        rows.append({"t": s.t, "rel_linf": r.rel_linf, "rel_l2": r.rel_l2,
                     "peak_x": lead.x if lead else None,
                     "peak_height": lead.height if lead else None,
                     "peak_line_x": x0,
                     "peak_gap": abs(lead.x - x0) if lead else None})
    linf = [r["rel_linf"] for r in rows]
    gaps = [r["peak_gap"] for r in rows]
    trends = {
        "linf_decreasing": all(b < a for a, b in zip(linf, linf[1:])),
        "peak_gap_decreasing": None not in gaps and all(b < a for a, b in zip(gaps, gaps[1:])),
        "final_peak_within_10pct": rows[-1]["peak_height"] is not None
        and abs(rows[-1]["peak_height"] - 2 * c) <= 0.1 * 2 * c,
    }
    return {"xi_range": list(xi_range), "stride": stride, "rows": rows, "trends": trends}


def cmd_compare(p):
    if not p["run"]:
        raise UsageError("compare needs --run DIR with snapshot CSVs")
    if p["predictor"] != "elliptic":
        raise UsageError("only the elliptic predictor is supported by compare")
    body = compare_run(load_run(p["run"]), _problem(p))
    path = _out_path(p, "compare.json")
    write_json(path, _report("compare", p, body))
    print(path)
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _check(name, residual, threshold, kind="below"):
    ok = residual < threshold if kind == "below" else residual >= threshold
    return {"name": name, "residual": float(residual), "threshold": float(threshold),
            "kind": kind, "pass": bool(ok)}


def suite_airy(p):
    out = []
    worst = 0.0
    for r in (0.5, 2.0, 5.0):
        for k in range(12):
            z = r * cmath.exp(1j * (k + 0.3) * math.pi / 6)
            v0, _, v1, _, vm, _ = rhp.airy_v(z)
            worst = max(worst, abs(v0 - 1j * v1 + 1j * vm) / max(1.0, abs(v1), abs(vm)))
    out.append(_check("airy connection v0 - i v1 + i v-1 (relative)", worst, 1e-13))
    expected = {0.0: [[1, 0], [1, 1]], 2 * math.pi / 3: [[1, 1], [0, 1]],
                math.pi: [[0, -1], [1, 0]], -2 * math.pi / 3: [[1, 1], [0, 1]]}
    for ang, J in expected.items():
        res = 0.0
        for r in (0.7, 3.0):
            z = complex(-r, 0.0) if ang == math.pi else r * cmath.exp(1j * ang)
            ccw = rhp.airy_parametrix(z, side="ccw")
            cw = rhp.airy_parametrix(z, side="cw")
            # '+' is the left side: ccw on arg 0 (outward), cw on the inward rays
            plus, minus = (ccw, cw) if ang == 0.0 else (cw, ccw)
            res = max(res, np.abs(plus - minus @ np.array(J)).max())
        out.append(_check("airy jump arg %.4f" % ang, res, 1e-10))
    dets = [np.linalg.det(rhp.airy_parametrix(z)) for z in (0.4 + 0.3j, -2 + 1j, 3 - 1j, -1 - 2j)]
    out.append(_check("airy det constant", max(abs(d - dets[0]) for d in dets), 1e-12))
    slopes = []
    for th in (0.3, 1.5, 2.5, -1.0, -2.8):
        e = []
        for R in (10.0, 20.0, 40.0):
            z = R * cmath.exp(1j * th)
            N = rhp.airy_normalized(z)
            e.append(np.abs(N - np.eye(2) - rhp.AIRY_CORRECTION * z ** -1.5).max())
        slopes.append(math.log(e[1] / e[2]) / math.log(2.0))
    out.append(_check("airy correction slope", min(slopes), 2.8, "above"))
    return out


def suite_laguerre(p):
    ns = parse_int_range(p["n"])
    out = []
    for n in ns:
        jump = 0.0
        for x in (0.3, 1.0, 2.5, 4 * n + 1.0, 4 * n + 7.3):
            Lp = rhp.laguerre_matrix(n, x, side="+")
            Lm = rhp.laguerre_matrix(n, x, side="-")
            jump = max(jump, np.abs(Lm - Lp @ rhp.laguerre_jump(x)).max() / np.abs(Lp).max())
        out.append(_check("laguerre jump n=%d" % n, jump, 1e-6))
        det = max(abs(np.linalg.det(rhp.laguerre_matrix(n, z)) - 1)
                  for z in (1 + 1j, -3 + 0.2j, 4 * n + 2 - 0.7j, 30j))
        out.append(_check("laguerre det n=%d" % n, det, 1e-10))
    nmax = max(ns)
    G = rhp.laguerre_gram(nmax)
    h = np.array([rhp.laguerre_norm(k) for k in range(nmax + 1)])
    out.append(_check("laguerre norms", float(np.abs(np.diag(G) / h - 1).max()), 1e-9))
    off = (G - np.diag(np.diag(G))) / np.sqrt(np.outer(h, h))
    out.append(_check("laguerre orthogonality", float(np.abs(off).max()), 1e-9))
    return out


def _slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(np.abs(ys)), 1)[0])


def suite_series(p):
    c = 1.0
    etas = [1e-2, 1e-3, 1e-4]
    B, ts, dl = [], [], []
    for eta in etas:
        d = c * (1 - eta)
        ed = W.elliptic_data(d, c)
        B.append(ed.B / math.pi - 8 * eta * (1 + eta * W.series_P(1, eta)))
        ts.append(ed.tau_star / 4 - math.log(eta / 8) - eta / 2)
        dl.append(ed.delta / math.pi + 0.5 - math.log(4.0) / math.log(8 / eta))
    return [_check("B series slope", _slope(etas, B), 2.5, "above"),
            _check("tau* series slope", _slope(etas, ts), 1.8, "above"),
            _check("Delta series limit", abs(dl[-1]), abs(dl[0]))]


def suite_phase(p):
    prob = _problem(p)
    out = []
    worst = max(abs(A.alpha_refined(n, 0.0, prob) - A.alpha_tilde(n, prob)) for n in range(0, 30))
    out.append(_check("alpha_n(v=0) = alpha~_n", worst, 1e-12))
    gaps = [n * abs(A.corollary_phase(n, 1e6, 1, prob) - A.alpha_tilde(n, prob))
            for n in (1, 10, 100, 1000, 10000)]
    out.append(_check("n |alpha_n^(1) - alpha~_n| bounded", max(gaps), 1.0))
    rng = np.random.default_rng(7)
    mismatch = 0.0
    for n in range(1, 7):
        t, rho = 10 ** rng.uniform(2, 5), rng.uniform(0.5, 3.0)
        a, b = rhp.q_inf_second(n, t, rho, prob), rhp.q_inf_first(n - 1, t, rho, prob)
        mismatch = max(mismatch, abs(a - b) / max(abs(b), 1e-300))
    out.append(_check("q_inf_second(n) = q_inf_first(n-1)", mismatch, 1e-12))
    return out


def suite_gmatrix(p):
    rng = np.random.default_rng(11)
    sys_res, sech_res = 0.0, 0.0
    for _ in range(100):
        c = rng.uniform(0.3, 3.0)
        R = -10 ** rng.uniform(-3, 3)
        S = rng.uniform(10, 30) * c * c
        sol = rhp.g_matrix_solve(R, -R, S, c)
        sys_res = max(sys_res, np.abs(rhp.g_matrix_system(*sol, R, -R, S, c, relative=True)).max())
        u = -R / (2 * c * S)
        sech_res = max(sech_res, abs(2j * sol[1] - 2 * c / math.cosh(math.log(u))) / (2 * c))
    return [_check("G-matrix linear system (relative)", sys_res, 1e-12),
            _check("2ib sech form", sech_res, 1e-12)]


SUITES = {"airy": suite_airy, "laguerre": suite_laguerre, "series": suite_series,
          "phase": suite_phase, "gmatrix": suite_gmatrix}


def cmd_verify(p):
    name = p["suite"]
    names = sorted(SUITES) if name == "all" else [name]
    for nm in names:
        if nm not in SUITES:
            raise UsageError("unknown suite %r (%s, all)" % (nm, ", ".join(sorted(SUITES))))
    checks = []
    for nm in names:
        for ch in SUITES[nm](p):
            ch["suite"] = nm
            checks.append(ch)
    ok = all(ch["pass"] for ch in checks)
    path = _out_path(p, "verify_%s.json" % name)
    write_json(path, _report("verify", p, {"checks": checks, "pass": ok}))
    print(path)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

COMMANDS = {"whitham": cmd_whitham, "profile": cmd_profile, "simulate": cmd_simulate,
            "compare": cmd_compare, "verify": cmd_verify}


def build_parser():
    ap = argparse.ArgumentParser(prog="mkdvstep", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key=value file; flags override it")
        sp.add_argument("--c", type=float)
        sp.add_argument("--hstar", type=float)
        sp.add_argument("--t", help="time(s): a:b:n or a,b,...")
        sp.add_argument("--sigma", type=float)
        sp.add_argument("--beta", type=float)
        sp.add_argument("--rho", type=float)
        sp.add_argument("--N", type=int)
        sp.add_argument("--M", type=int)
        sp.add_argument("--K", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--out", help="output directory")
        if name == "whitham":
            sp.add_argument("--xi", help="xi grid a:b:n or a,b,...")
        if name == "profile":
            sp.add_argument("--mode", choices=["elliptic", "train", "corollary", "mesoscopic"])
            sp.add_argument("--x", help="x grid a:b:n; omit to use the curve point")
        if name == "simulate":
            sp.add_argument("--dx", type=float)
            sp.add_argument("--w", type=float)
            sp.add_argument("--T", type=float)
            sp.add_argument("--snapshots")
            sp.add_argument("--L-left", dest="L_left", type=float)
            sp.add_argument("--L-right", dest="L_right", type=float)
        if name == "compare":
            sp.add_argument("--run", help="directory with snap_t*.csv")
            sp.add_argument("--predictor", choices=["elliptic"])
        if name == "verify":
            sp.add_argument("--suite", choices=sorted(SUITES) + ["all"])
            sp.add_argument("--n", help="index range for the laguerre suite, e.g. 0..10")
    return ap


GRID_FLAGS = ("--xi", "--x", "--t", "--snapshots")


def _attach_negative_grids(argv):
    # argparse reads "--x -20:20:401" as two flags; glue such values on with '='
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in GRID_FLAGS and i + 1 < len(argv) and re.match(r"-\.?\d", argv[i + 1]):
            out.append(a + "=" + argv[i + 1])
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_negative_grids(argv))
    try:
        params = resolve(args)
        return COMMANDS[args.command](params)
    except UsageError as e:
        print("usage error: %s" % e, file=sys.stderr)
        return 2
    except DomainError as e:
        print("domain error: %s" % e, file=sys.stderr)
        return 2
    except (OSError, pde.ConfigError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
