"""Command-line front end.

Every command writes a CSV table, a JSON run summary with the same stem and,
unless ``--no-plot`` is given, a PNG figure next to them::

    invcone backbone [SYSTEM] --mode 1 --out out/bb.csv
    invcone frc [SYSTEM] --omega-range 0.6:0.9 --famp 0.05 --method both
    invcone cone [SYSTEM] --mode 1
    invcone shoot [SYSTEM] --mode 1 --energy 10
    invcone simulate [SYSTEM] --q0=-1.5,0 --t-end 50

``SYSTEM`` defaults to the bundled two-mass example. Exit status: 0 on
success, 2 for configuration errors, 3 for solver failures (including a
failed ``--verify``), 4 when an orbit grazes the contact plane. Failures
print ``error[<category>]: <message>`` on stderr.

System file (YAML mapping, matrices row-major, unknown keys rejected)::

    M:     [[m11, m12], [m21, m22]]   # required, symmetric positive definite
    K:     [[...], [...]]             # required, symmetric positive definite
    C:     [[...], [...]]             # optional damping matrix, default 0
    w:     [w1, w2]                   # required contact direction, gap = w.q - delta
    kn:    1.5                        # required contact stiffness, > 0
    delta: 1.0                        # required gap, >= 0
    f:     [f1, f2]                   # optional forcing shape, load f cos(Omega t)
    alpha: 1.0                        # optional damping multiplier on C, default 0

The equations of motion are ``M q'' + alpha C q' + K q + kn w max(gap, 0)
= f cos(Omega t)``. ``--delta``, ``--alpha`` and ``--famp`` override the
file; ``--famp`` rescales ``f`` so that its largest entry has that size.
"""

import argparse
import math
from pathlib import Path
import sys as _sys

import numpy as np

from . import backbone as bb
from . import continuation
from . import frc as fr
from . import shooting as sh
from .cone import attractivity
from .errors import ConfigError, GrazingError, InvconeError
from .io import bundled_system_path, load_system, read_table, write_summary, write_table
from .model import augment_autonomous, augment_forced, to_lure
from .timeint import integrate

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_GRAZING = 0, 2, 3, 4
VERIFY_TOL = 1e-8


def _range(text, name):
    try:
        a, b = (float(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"expected 'start:stop', got {text!r}", field=name) from None
    if not (0 < a < b and math.isfinite(b)):
        raise ConfigError("range must be positive and non-empty", field=name)
    return a, b


def _floats(text, name, size):
    try:
        out = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}", field=name) from None
    if out.shape[0] != size:
        raise ConfigError(f"expected {size} values", field=name)
    return out


def _iteration_stats(iters):
    it = np.asarray(iters, dtype=int)
    if it.size == 0:
        return {"steps": 0}
    return {
        "steps": int(it.size),
        "mean": float(it.mean()),
        "min": int(it.min()),
        "max": int(it.max()),
        "fraction_2_to_10": float(np.mean((it >= 2) & (it <= 10))),
    }


def _stability_flips(xs, stable):
    out = []
    for i in range(1, len(stable)):
        if stable[i] != stable[i - 1]:
            out.append({"at": 0.5 * (xs[i] + xs[i - 1]), "from_stable": bool(stable[i - 1]),
                        "to_stable": bool(stable[i])})
    return out


def _paths(out, suffix=""):
    out = Path(out)
    stem = out.with_suffix("")
    csv = stem.with_name(stem.name + suffix).with_suffix(".csv")
    return csv, stem.with_suffix(".json"), stem.with_suffix(".png")


# ----------------------------------------------------------------- backbone

def _backbone_header(lure, N):
    return (["crossing", "log10_energy", "omega", "t_minus", "t_plus", "stable"]
            + [f"x0_{i + 1}" for i in range(lure.n)] + [f"q0_{i + 1}" for i in range(N)] + ["max_abs_q1"])


def _shooting_row(state, psys, lure, delta):
    N = psys.N
    zp = state.zp0
    H, Phi, _, _, tr = sh._flow(psys, zp, state.T)
    t_plus = 0.0
    events = [0.0] + [c[0] for c in tr.crossings] + [state.T]
    side = -1 if psys.switch @ psys.extend(zp) < 0 else 1
    for j in range(len(events) - 1):
        if side > 0:
            t_plus += events[j + 1] - events[j]
        side = -side
    stable, _, _ = bb.stability_from_monodromy(Phi, 2, 0)
    amp = sh._amplitude(psys, tr, 0)
    x0 = lure.from_physical(zp[:N], zp[N:], delta)
    return ([int(t_plus > 0), math.log10(psys.energy(zp)), state.omega, state.T - t_plus, t_plus, stable]
            + list(x0) + list(zp[:N]) + [amp])


def cmd_backbone(args, sysm):
    mode = args.mode
    if not 1 <= mode <= sysm.N:
        raise ConfigError(f"mode must lie in 1..{sysm.N}", field="mode")
    delta = sysm.delta
    if not delta > 0:
        raise ConfigError("backbones with crossing need a positive gap; use 'cone' for delta = 0", field="delta")
    lure = to_lure(sysm)
    seed, e_cross, om_lin = bb.seed_from_lnm(mode, lure, sysm)
    e_lo, e_hi = args.energy_range if args.energy_range else (e_cross * 1e-2, e_cross * 1e4)
    if e_hi <= e_cross:
        raise ConfigError("upper energy must exceed the crossing energy", field="energy-range")
    header = _backbone_header(lure, sysm.N)
    csv_path, json_path, png_path = _paths(args.out)
    summary = {"command": "backbone", "system": args.system, "mode": mode, "method": args.method,
               "tolerance": args.tol, "linear_frequency": om_lin, "crossing_energy": e_cross,
               "energy_range": [e_lo, e_hi], "outputs": {}}
    linear_rows = []
    if e_lo < e_cross:
        for r in bb.linear_segment(mode, lure, sysm, e_cross, math.log10(e_cross / e_lo), delta=delta):
            linear_rows.append([0, r["log10_energy"], r["omega"], r["t_minus"], r["t_plus"], True]
                               + list(r["x0"]) + list(r["q0"]) + [r["max_abs_q1"]])
    curves = []
    mic_pts = None
    if args.method in ("mic", "both"):
        control = continuation.StepControl(initial=1e-3, maximum=5.0, tol=args.tol,
                                           max_param_step=math.log10(e_hi / e_cross) / 250.0)
        branch = bb.trace_backbone(seed, lure, sysm, energy_max=e_hi, control=control,
                                   mode_index=mode, linear_frequency=om_lin, crossing_energy=e_cross)
        mic_pts = [p for p in branch.points if p.energy_a >= e_lo]
        rows = list(linear_rows)
        for p in mic_pts:
            q0, _ = lure.to_physical(p.x0, delta)
            rows.append([1, p.log10_energy, p.omega, p.t_minus, p.t_plus, p.stable]
                        + list(p.x0) + list(q0) + [p.max_abs_q1])
        write_table(csv_path, header, rows)
        try:
            lim = bb.bilinear_limit(mode, lure, sysm).omega
        except InvconeError:
            lim = None
        summary["outputs"]["mic"] = str(csv_path)
        summary["mic"] = {
            "points": len(mic_pts),
            "stop_reason": branch.info["reason"],
            "corrector_iterations": _iteration_stats(branch.info["corrector_iterations"]),
            "stability_transitions": branch.transitions,
            "bilinear_limit_omega": lim,
            "terminal_relative_gap": None if lim is None else abs(lim - mic_pts[-1].omega) / lim,
        }
        curves.append(("cone", [r[2] for r in rows], [r[1] for r in rows], [bool(r[5]) for r in rows]))
    if args.method in ("shooting", "both"):
        psys = sh.physical_system(sysm)
        phi = sysm.linear_modes()[1][:, mode - 1]
        z, T = sh.linear_mode_state(sysm, mode, 0.5 * delta / abs(sysm.w @ phi))
        start = sh.shoot(sh.ShootingState(z, T), psys, tol=args.tol)
        states, info = sh.continue_branch(start, psys, lambda s: s.energy >= e_hi, tol=args.tol)
        if mic_pts is not None:
            # re-solve at the energies of the cone branch, seeded from the nearest shooting state
            E = np.array([s.energy for s in states])
            chosen = []
            for p in mic_pts:
                k = int(np.argmin(np.abs(np.log(E / p.energy_a))))
                chosen.append(sh.shoot(states[k], psys, energy=p.energy_a, tol=args.tol))
        else:
            chosen = [s for s in states if e_lo <= s.energy <= e_hi * (1 + 1e-12)]
        rows = [_shooting_row(s, psys, lure, delta) for s in chosen]
        shoot_csv = _paths(args.out, "_shooting")[0] if args.method == "both" else csv_path
        write_table(shoot_csv, header, rows)
        summary["outputs"]["shooting"] = str(shoot_csv)
        summary["shooting"] = {
            "points": len(rows),
            "corrector_iterations": _iteration_stats(info["corrector_iterations"]),
            "stability_transitions": _stability_flips([r[2] for r in rows], [r[5] for r in rows]),
        }
        if mic_pts is not None:
            summary["shooting"]["max_abs_delta_omega"] = float(max(abs(s.omega - p.omega) for s, p in zip(chosen, mic_pts)))
        curves.append(("shooting", [r[2] for r in rows], [r[1] for r in rows], [bool(r[5]) for r in rows]))
    if args.verify:
        summary["verify"] = _verify_backbone(summary["outputs"], lure, psys=sh.physical_system(sysm), delta=delta)
    if not args.no_plot:
        from .plotting import plot_backbone
        lim = summary.get("mic", {}).get("bilinear_limit_omega")
        plot_backbone(png_path, curves, linear_frequencies=[om_lin], limits=[lim] if lim else [])
        summary["outputs"]["figure"] = str(png_path)
    write_summary(json_path, summary)
    return _verify_status(summary)


def _verify_backbone(outputs, lure, psys, delta):
    n = lure.n
    N = lure.N
    worst = {}
    for method, path in outputs.items():
        header, data = read_table(path)
        res = 0.0
        for row in data:
            x0 = row[6: 6 + n]
            if method == "mic" and row[0] == 1:
                u = np.concatenate([x0, [row[3], row[4], 0.0, row[1]]])
                R, _ = bb.mic_residual(u, lure, delta)
                res = max(res, float(np.linalg.norm(R, np.inf)))
            elif method == "shooting":
                q, qd = lure.to_physical(x0, delta)
                zp = np.concatenate([q, qd])
                H = sh._flow(psys, zp, 2 * math.pi / row[2])[0]
                res = max(res, float(np.linalg.norm(H, np.inf)))
        worst[method] = {"max_residual": res, "passed": res <= VERIFY_TOL}
    return worst


def _verify_status(summary):
    v = summary.get("verify")
    if v and not all(x["passed"] for x in v.values()):
        print("error[verify]: re-checked residual above tolerance", file=_sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


# ---------------------------------------------------------------------- frc

def _frc_header(lure):
    return (["Omega", "response_amplitude", "phi0", "t_minus", "t_plus", "stable"]
            + [f"z0_{i + 1}" for i in range(lure.n + 3)])


def _phase_zero_state(p, lure):
    """Physical state of a cone orbit at the next instant of zero forcing phase."""
    ext = augment_forced(lure, lure.alpha, p.Omega)
    tau = ((-p.phi0) % (2 * math.pi)) / p.Omega
    y = p.z0 if tau == 0 else integrate(p.z0, ext.Aext_minus, ext.Aext_plus, tau).final
    q, qd = lure.to_physical(y[: lure.n], lure.delta)
    return np.concatenate([q, qd])


def _nonautonomous_row(zp, info, Omega, lure, sysm):
    tr = info["trajectory"]
    T = 2 * math.pi / Omega
    events = [0.0] + [c[0] for c in tr.crossings] + [T]
    delta = sysm.delta
    psys = sh.physical_forced_system(sysm, Omega)
    side = -1 if psys.switch @ tr.states[0] < 0 else 1
    t_plus = 0.0
    for j in range(len(events) - 1):
        if side > 0:
            t_plus += events[j + 1] - events[j]
        side = -side
    stable, _, _ = bb.stability_from_monodromy(info["monodromy"], 0, 0)
    N = lure.N
    x = lure.from_physical(zp[:N], zp[N:], delta)
    z0 = np.concatenate([x, [1.0, 0.0, delta]])
    return [Omega, info["response_amplitude"], 0.0, T - t_plus, t_plus, stable] + list(z0)



def cmd_frc(args, sysm):
    if sysm.f is None or not np.any(sysm.f):
        raise ConfigError("forcing is zero; set f in the system file or pass --famp", field="f")
    if not (sysm.alpha > 0 and sysm.has_damping):
        raise ConfigError("forced responses need damping (C and alpha > 0)", field="alpha")
    lo, hi = args.omega_range
    lure = to_lure(sysm)
    delta = sysm.delta
    header = _frc_header(lure)
    csv_path, json_path, png_path = _paths(args.out)
    summary = {"command": "frc", "system": args.system, "method": args.method, "tolerance": args.tol,
               "omega_range": [lo, hi], "forcing": sysm.f, "delta": delta, "outputs": {}}
    curves = []
    omegas = None
    if args.method in ("mic", "both"):
        if args.seed_omega is not None:
            if delta > 0:
                seed = fr.solve_forced_cone(fr.seed_frc_from_linear(sysm, lure, args.seed_omega, Omega_stop=hi), lure)
            else:
                seed = fr.find_frc_seed(sysm, lure, (args.seed_omega, hi))
        else:
            seed = fr.find_frc_seed(sysm, lure, (lo, hi))
        control = continuation.StepControl(initial=1e-3, maximum=0.05, tol=args.tol, max_param_step=(hi - lo) / 200)
        branch = fr.trace_frc_both_ways(seed, lure, (lo, hi), control=control)
        rows = [[p.Omega, p.response_amplitude, p.phi0, p.t_minus, p.t_plus, p.stable] + list(p.z0)
                for p in branch.points]
        write_table(csv_path, header, rows)
        omegas = [p.Omega for p in branch.points]
        amps = [p.response_amplitude for p in branch.points]
        k = int(np.argmax(amps)) if amps else None
        summary["outputs"]["mic"] = str(csv_path)
        summary["mic"] = {
            "points": len(rows),
            "excluded_multi_crossing": len(branch.excluded),
            "stop_reason": branch.info["reason"],
            "corrector_iterations": _iteration_stats(branch.info["corrector_iterations"]),
            "stability_transitions": _stability_flips(omegas, [p.stable for p in branch.points]),
            "peak": None if k is None else {"Omega": omegas[k], "amplitude": amps[k]},
        }
        curves.append(("cone", omegas, amps, [p.stable for p in branch.points]))
    if args.method in ("shooting", "both"):
        rows = []
        if omegas is not None:
            # each solve starts from the cone orbit at zero forcing phase, perturbed
            for p in branch.points:
                z0 = _phase_zero_state(p, lure) * (1 + 1e-6)
                z, info = sh.shoot_nonautonomous(z0, p.Omega, sysm, tol=args.tol)
                rows.append(_nonautonomous_row(z, info, p.Omega, lure, sysm))
        else:
            # natural-parameter sweep from the linear response, secant predictor
            hist = []
            for Om in np.linspace(lo, hi, 201):
                if len(hist) >= 2:
                    z0 = 2 * hist[-1] - hist[-2]
                elif hist:
                    z0 = hist[-1]
                else:
                    Q = fr.linear_response(sysm, Om)
                    z0 = np.concatenate([Q.real, (1j * Om * Q).real])
                z, info = sh.shoot_nonautonomous(z0, Om, sysm, tol=args.tol)
                hist.append(z)
                rows.append(_nonautonomous_row(z, info, Om, lure, sysm))
        shoot_csv = _paths(args.out, "_shooting")[0] if args.method == "both" else csv_path
        write_table(shoot_csv, header, rows)
        summary["outputs"]["shooting"] = str(shoot_csv)
        summary["shooting"] = {
            "points": len(rows),
            "stability_transitions": _stability_flips([r[0] for r in rows], [r[5] for r in rows]),
        }
        if omegas is not None:
            summary["shooting"]["max_abs_delta_amplitude"] = float(
                max(abs(r[1] - a) for r, a in zip(rows, amps))) if rows else 0.0
        curves.append(("shooting", [r[0] for r in rows], [r[1] for r in rows], [bool(r[5]) for r in rows]))
    if args.verify:
        summary["verify"] = _verify_frc(summary["outputs"], lure, sysm, delta)
    if not args.no_plot:
        from .plotting import plot_frc
        plot_frc(png_path, curves)
        summary["outputs"]["figure"] = str(png_path)
    write_summary(json_path, summary)
    return _verify_status(summary)


def _verify_frc(outputs, lure, sysm, delta):
    n = lure.n
    worst = {}
    for method, path in outputs.items():
        header, data = read_table(path)
        res = 0.0
        for row in data:
            Om, phi, tm, tp = row[0], row[2], row[3], row[4]
            z0 = row[6: 6 + n + 3]
            if method == "mic":
                R, _ = fr.forced_residual(np.concatenate([z0, [phi, tm, tp, Om]]), lure, delta)
            else:
                psys = sh.physical_forced_system(sysm, Om)
                q, qd = lure.to_physical(z0[:n], delta)
                R = sh._flow(psys, np.concatenate([q, qd]), 2 * math.pi / Om)[0]
            res = max(res, float(np.linalg.norm(R, np.inf)))
        worst[method] = {"max_residual": res, "passed": res <= VERIFY_TOL}
    return worst


# --------------------------------------------------------------------- cone

def cmd_cone(args, sysm):
    if not 1 <= args.mode <= sysm.N:
        raise ConfigError(f"mode must lie in 1..{sysm.N}", field="mode")
    lure = to_lure(sysm)
    sol = bb.bilinear_limit(args.mode, lure, sysm)
    Am, Ap = lure.matrices(0.0)
    attractive, rest = attractivity(sol, Am, Ap)
    if sol.grazing:
        raise GrazingError("cone orbit grazes the switching plane")
    csv_path, json_path, _ = _paths(args.out)
    header = ["omega", "t_minus", "t_plus", "mu", "attractive"] + [f"xi_{i + 1}" for i in range(lure.n)]
    write_table(csv_path, header, [[sol.omega, sol.t_minus, sol.t_plus, sol.mu, attractive] + list(sol.xi)])
    summary = {"command": "cone", "system": args.system, "mode": args.mode, "omega": sol.omega, "mu": sol.mu,
               "iterations": sol.iterations, "residual": sol.residual, "attractive": attractive,
               "transverse_moduli": rest.moduli, "outputs": {"cone": str(csv_path)}}
    write_summary(json_path, summary)
    return EXIT_OK


# -------------------------------------------------------------------- shoot

def cmd_shoot(args, sysm):
    lure = to_lure(sysm)
    csv_path, json_path, _ = _paths(args.out)
    if args.omega is not None:
        if not (sysm.alpha > 0 and sysm.has_damping):
            raise ConfigError("forced responses need damping (C and alpha > 0)", field="alpha")
        Q = fr.linear_response(sysm, args.omega)
        z, info = sh.shoot_nonautonomous(np.concatenate([Q.real, (1j * args.omega * Q).real]), args.omega,
                                         sysm, tol=args.tol)
        write_table(csv_path, _frc_header(lure), [_nonautonomous_row(z, info, args.omega, lure, sysm)])
        summary = {"command": "shoot", "forced": True, "Omega": args.omega, "iterations": info["iterations"],
                   "residual": info["residual"], "response_amplitude": info["response_amplitude"]}
    else:
        if not 1 <= args.mode <= sysm.N:
            raise ConfigError(f"mode must lie in 1..{sysm.N}", field="mode")
        psys = sh.physical_system(sysm)
        phi = sysm.linear_modes()[1][:, args.mode - 1]
        p = abs(sysm.w @ phi)
        graze = sysm.delta / p if p > 0 else math.inf
        z, T = sh.linear_mode_state(sysm, args.mode, 0.5 * graze if math.isfinite(graze) else 1.0)
        start = sh.shoot(sh.ShootingState(z, T), psys, tol=args.tol)
        target = args.energy if args.energy is not None else 10.0 * start.energy
        if target > start.energy:
            states, _ = sh.continue_branch(start, psys, lambda s: s.energy >= target, tol=args.tol)
            E = np.array([s.energy for s in states])
            start = states[int(np.argmin(np.abs(np.log(E / target))))]
        st = sh.shoot(start, psys, energy=target, tol=args.tol)
        write_table(csv_path, _backbone_header(lure, sysm.N), [_shooting_row(st, psys, lure, sysm.delta)])
        summary = {"command": "shoot", "forced": False, "mode": args.mode, "energy": target,
                   "omega": st.omega, "iterations": st.iterations, "residual": st.residual}
    summary["system"] = args.system
    summary["outputs"] = {"shooting": str(csv_path)}
    write_summary(json_path, summary)
    return EXIT_OK


# ----------------------------------------------------------------- simulate

def cmd_simulate(args, sysm):
    N = sysm.N
    lure = to_lure(sysm)
    q0 = _floats(args.q0, "q0", N) if args.q0 else np.zeros(N)
    qd0 = _floats(args.qd0, "qd0", N) if args.qd0 else np.zeros(N)
    if not args.t_end > 0:
        raise ConfigError("must be positive", field="t-end")
    x0 = lure.from_physical(q0, qd0, sysm.delta)
    forced = args.omega is not None and sysm.f is not None and np.any(sysm.f)
    if forced:
        ext = augment_forced(lure, sysm.alpha, args.omega)
        y0 = np.concatenate([x0, [1.0, 0.0, sysm.delta]])
        Am, Ap = ext.Aext_minus, ext.Aext_plus
    else:
        aug = augment_autonomous(lure, sysm.alpha)
        y0 = np.append(x0, sysm.delta)
        Am, Ap = aug.At_minus, aug.At_plus
    tr = integrate(y0, Am, Ap, args.t_end, sample_dt=args.dt)
    q, qd = lure.to_physical(tr.states[:, : lure.n], sysm.delta)
    header = (["t"] + [f"x_{i + 1}" for i in range(lure.n)] + [f"q_{i + 1}" for i in range(N)]
              + [f"qd_{i + 1}" for i in range(N)])
    rows = [[t] + list(x[: lure.n]) + list(a) + list(b) for t, x, a, b in zip(tr.times, tr.states, q, qd)]
    csv_path, json_path, png_path = _paths(args.out)
    write_table(csv_path, header, rows)
    summary = {"command": "simulate", "system": args.system, "t_end": args.t_end, "forced": forced,
               "Omega": args.omega, "crossings": len(tr.crossings), "outputs": {"trajectory": str(csv_path)}}
    if not args.no_plot:
        from .plotting import plot_trajectory
        plot_trajectory(png_path, tr.times, q)
        summary["outputs"]["figure"] = str(png_path)
    write_summary(json_path, summary)
    return EXIT_OK


# ------------------------------------------------------------------- driver

COMMANDS = {"backbone": cmd_backbone, "frc": cmd_frc, "cone": cmd_cone, "shoot": cmd_shoot,
            "simulate": cmd_simulate}


def build_parser():
    ap = argparse.ArgumentParser(prog="invcone", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, default_out):
        p.add_argument("system", nargs="?", default=None, help="YAML system file (default: bundled example)")
        p.add_argument("--out", default=default_out, help="CSV output path; summary and figure share its stem")
        p.add_argument("--tol", type=float, default=1e-10, help="residual tolerance")
        p.add_argument("--delta", type=float, default=None, help="override the gap")
        p.add_argument("--alpha", type=float, default=None, help="override the damping multiplier")
        p.add_argument("--famp", type=float, default=None, help="forcing amplitude (rescales f)")
        p.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
        p.add_argument("--verify", action="store_true", help="re-check the residual of every written row")

    p = sub.add_parser("backbone", help="backbone curve of a nonlinear normal mode")
    common(p, "backbone.csv")
    p.add_argument("--mode", type=int, default=1)
    p.add_argument("--energy-range", default=None, help="start:stop total energy")
    p.add_argument("--method", choices=("mic", "shooting", "both"), default="mic")

    p = sub.add_parser("frc", help="forced response curve")
    common(p, "frc.csv")
    p.add_argument("--omega-range", default="0.6:0.9", help="start:stop excitation frequency")
    p.add_argument("--seed-omega", type=float, default=None, help="frequency to start the trace from")
    p.add_argument("--method", choices=("mic", "shooting", "both"), default="mic")

    p = sub.add_parser("cone", help="invariant cone of the gap-free system")
    common(p, "cone.csv")
    p.add_argument("--mode", type=int, default=1)

    p = sub.add_parser("shoot", help="single periodic orbit by shooting")
    common(p, "shoot.csv")
    p.add_argument("--mode", type=int, default=1)
    p.add_argument("--energy", type=float, default=None, help="total energy of the free orbit")
    p.add_argument("--omega", type=float, default=None, help="excitation frequency (forced steady state)")

    p = sub.add_parser("simulate", help="event-exact time integration")
    common(p, "trajectory.csv")
    p.add_argument("--q0", default=None, help="initial displacements, comma separated")
    p.add_argument("--qd0", default=None, help="initial velocities, comma separated")
    p.add_argument("--t-end", type=float, default=50.0)
    p.add_argument("--dt", type=float, default=0.05, help="output sampling step")
    p.add_argument("--omega", type=float, default=None, help="excitation frequency")
    return ap


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "tol", 1.0) is not None and not args.tol > 0:
            raise ConfigError("must be positive", field="tol")
        if getattr(args, "energy_range", None):
            args.energy_range = _range(args.energy_range, "energy-range")
        if getattr(args, "omega_range", None):
            args.omega_range = _range(args.omega_range, "omega-range")
        path = args.system or bundled_system_path("jiang")
        args.system = str(path)
        sysm = load_system(path, {"delta": args.delta, "alpha": args.alpha, "f_amp": args.famp})
        return COMMANDS[args.command](args, sysm)
    except InvconeError as exc:
        print(f"error[{exc.category}]: {exc}", file=_sys.stderr)
        if isinstance(exc, ConfigError):
            return EXIT_CONFIG
        if isinstance(exc, GrazingError):
            return EXIT_GRAZING
        return EXIT_SOLVER


def main(argv=None):
    _sys.exit(run(argv))


if __name__ == "__main__":
    main()
