"""Command-line interface tying the modules into reproducible runs.

Commands: spectrum, rabi, swipht, cnot, sweep, estimate.  Every command
honors --output-dir and writes nothing outside it; floats are printed in
scientific notation with 12 significant digits so identical inputs give
byte-identical files.

Exit codes: 0 ok, 2 config/usage error, 3 numerical non-convergence,
4 degenerate physics input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import cavity as cavity_mod
from . import gates as gates_mod
from . import smm as smm_mod
from . import swipht as swipht_mod
from .config import Config, ConfigError, load_config
from .constants import TWO_PI
from .dynamics import ConvergenceError, rabi_simulation
from .gates import DegeneratePhysicsError
from .swipht import QuadratureError, SingularityError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_DEGENERATE = 4

_FRACTIONS = {1.5: "+3/2", 0.5: "+1/2", -0.5: "-1/2", -1.5: "-3/2"}


def _fmt(x) -> str:
    return f"{float(x):.11e}"


def _label(lab) -> str:
    mj, mi = lab
    return f"{int(mj):+d}:{_FRACTIONS[float(mi)]}"


def _out(args, name: str) -> str:
    os.makedirs(args.output_dir, exist_ok=True)
    return os.path.join(args.output_dir, name)


def cmd_spectrum(cfg: Config, args) -> int:
    if args.points < 2:
        raise ConfigError(f"--points must be >= 2, got {args.points}")
    diagram = smm_mod.sweep_spectrum(cfg.qubit1, args.bmin, args.bmax, args.points)
    crossings = smm_mod.find_avoided_crossings(diagram)
    diagram.crossings = crossings
    with open(_out(args, "spectrum.csv"), "w", encoding="utf-8") as fh:
        head = ",".join(
            ["B_T"]
            + [f"E{i}_GHz" for i in range(1, 9)]
            + [f"label{i}" for i in range(1, 9)]
        )
        fh.write(head + "\n")
        for k, b in enumerate(diagram.b_values):
            cells = [_fmt(b)] + [_fmt(e) for e in diagram.levels[k]]
            cells += [_label(lab) for lab in diagram.labels[k]]
            fh.write(",".join(cells) + "\n")
    with open(_out(args, "crossings.csv"), "w", encoding="utf-8") as fh:
        fh.write("B_center_T,gap_MHz,m_I\n")
        for c in crossings:
            fh.write(f"{_fmt(c.b_center_t)},{_fmt(c.gap_mhz)},{_FRACTIONS[c.nuclear_projection]}\n")
    print(f"spectrum: {len(diagram.b_values)} field points, {len(crossings)} avoided crossings")
    return EXIT_OK


def cmd_rabi(cfg: Config, args) -> int:
    p = cfg.qubit1
    if args.theta is not None:
        p = replace(p, theta=args.theta)
    if args.eta is not None:
        p = replace(p, eta=args.eta)
    trace = rabi_simulation(p, detuning_mhz=args.detuning, t_max_us=args.tmax)
    with open(_out(args, "rabi.csv"), "w", encoding="utf-8") as fh:
        fh.write("t_us,P_target,P_leak1,P_leak2\n")
        for k in range(len(trace.times)):
            fh.write(
                f"{_fmt(trace.times[k])},{_fmt(trace.populations[k, 1])},"
                f"{_fmt(trace.populations[k, 2])},{_fmt(trace.populations[k, 3])}\n"
            )
    print(f"rabi: theta={p.theta:g} rad, detuning={args.detuning:g} MHz, "
          f"max transfer {trace.p_target.max():.6f}")
    return EXIT_OK


def cmd_swipht(cfg: Config, args) -> int:
    if args.delta_mhz == 0.0:
        raise DegeneratePhysicsError("--delta-mhz must be nonzero")
    delta = TWO_PI * args.delta_mhz
    params = swipht_mod.solve_parameters(delta)
    pulse = swipht_mod.make_pulse(params, omega_p=0.0)
    report = swipht_mod.validate(params)
    with open(_out(args, "pulse.csv"), "w", encoding="utf-8") as fh:
        fh.write("t_us,omega_rad_per_us\n")
        for t, w in zip(pulse.times_us, pulse.omega_rad_per_us):
            fh.write(f"{_fmt(t)},{_fmt(w)}\n")
    meta = pulse.metadata()
    meta["constraint_ratio"] = report.constraint_ratio
    meta["valid"] = report.valid
    with open(_out(args, "pulse_meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"swipht: C={params.c:.6f}, tau={params.tau_us:.6f} us, area={pulse.area:.9f}")
    return EXIT_OK


def _gate_json(result) -> dict:
    return {
        "fidelity": result.fidelity,
        "fidelity_raw": result.fidelity_raw,
        "infidelity": 1.0 - result.fidelity,
        "leakage": result.leakage,
        "gate_time_us": result.gate_time_us,
        "converged": result.converged,
        "fock_drift": result.fock_drift,
        "u_logical_re": np.real(result.u_logical).tolist(),
        "u_logical_im": np.imag(result.u_logical).tolist(),
        "params": {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in result.params_echo.items()
        },
    }


def cmd_cnot(cfg: Config, args) -> int:
    p2 = cfg.qubit2
    if args.shift2 is not None:
        p2 = replace(p2, dc_shift_mhz=args.shift2)
    cav = replace(cfg.cavity, omega_c_ghz=args.omega_c)
    if args.n_max is not None:
        cav = replace(cav, n_max=args.n_max)
    system = cavity_mod.build_coupled_hamiltonian(cfg.qubit1, p2, cav, args.g)
    result = gates_mod.simulate_cnot(
        system, None, method=args.method, tol=cfg["solver_tol"], check_fock_convergence=True
    )
    if result.fock_drift > 0:
        print(
            f"fock convergence check: n_max {cav.n_max} -> {cav.n_max + 2} "
            f"moved the fidelity by {result.fock_drift:.3e}",
            file=sys.stderr,
        )
    with open(_out(args, "cnot.json"), "w", encoding="utf-8") as fh:
        json.dump(_gate_json(result), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(
        f"cnot: g={args.g:g} MHz, omega_c={args.omega_c:g} GHz -> "
        f"fidelity {result.fidelity:.6f}, gate time {result.gate_time_us:.4f} us"
    )
    return EXIT_OK


def cmd_sweep(cfg: Config, args) -> int:
    g_list = args.g_list if args.g_list else cfg["sweep_g_mhz"]
    wc_list = args.omega_c_list if args.omega_c_list else cfg["sweep_omega_c_ghz"]
    table = gates_mod.sweep(
        g_list, wc_list, cfg.qubit1, cfg.qubit2, cfg.cavity,
        jobs=args.jobs, tol=cfg["solver_tol"],
    )
    with open(_out(args, "sweep.csv"), "w", encoding="utf-8") as fh:
        for line in table.to_csv_lines():
            fh.write(line + "\n")
    with open(_out(args, "sweep.json"), "w", encoding="utf-8") as fh:
        json.dump(table.to_records(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    n_err = sum(1 for r in table.rows if r.error)
    print(f"sweep: {len(table.rows)} rows, {n_err} errors")
    return EXIT_OK


def cmd_estimate(cfg: Config, args) -> int:
    est = cavity_mod.estimate_coupling(
        a_mhz=cfg.qubit1.a_mhz,
        v_rms_uv=args.vrms_uv,
        g_n=cfg.qubit1.g_n,
    )
    cav = replace(cfg.cavity, omega_c_ghz=args.omega_c, q=args.q)
    budget = cavity_mod.strong_coupling_check(est.g_khz, cav, args.t2star_ms)
    payload = {
        "g_khz": budget.g_khz,
        "kappa_khz": budget.kappa_khz,
        "gamma_khz": budget.gamma_khz,
        "strong_coupling": budget.strong_coupling,
        "b_eff_t": est.b_eff_t,
        "note": "edge of the strong-coupling regime: g exceeds kappa and gamma "
        "by less than an order of magnitude",
    }
    with open(_out(args, "estimate.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(
        f"estimate: g={budget.g_khz:.2f} kHz, kappa={budget.kappa_khz:.2f} kHz, "
        f"gamma={budget.gamma_khz:.2f} kHz, strong_coupling={budget.strong_coupling}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tbpc2sim",
        description="Simulator for electrically driven molecular nuclear-spin qubits",
    )
    parser.add_argument("--config", default=None, help="path to a key = value config file")
    parser.add_argument("--output-dir", default=".", help="directory for all output files")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", help="Zeeman level diagram and avoided crossings")
    s.add_argument("--bmin", type=float, default=-0.06, help="field start (T)")
    s.add_argument("--bmax", type=float, default=0.06, help="field end (T)")
    s.add_argument("--points", type=int, default=2001)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("rabi", help="electrically driven nuclear Rabi oscillation trace")
    s.add_argument("--theta", type=float, default=None, help="anisotropy angle (rad)")
    s.add_argument("--eta", type=float, default=None, help="drive strength")
    s.add_argument("--detuning", type=float, default=0.0, help="drive detuning (MHz)")
    s.add_argument("--tmax", type=float, default=6.0, help="trace length (us)")
    s.set_defaults(func=cmd_rabi)

    s = sub.add_parser("swipht", help="solve and export the analytic pulse")
    s.add_argument("--delta-mhz", type=float, required=True, help="transition splitting (MHz)")
    s.set_defaults(func=cmd_swipht)

    s = sub.add_parser("cnot", help="single CNOT gate simulation")
    s.add_argument("--g", type=float, required=True, help="qubit-resonator coupling (MHz)")
    s.add_argument("--omega-c", type=float, required=True, help="resonator frequency (GHz)")
    s.add_argument("--shift2", type=float, default=None, help="qubit-2 dc shift (MHz)")
    s.add_argument("--n-max", type=int, default=None, help="Fock cutoff")
    s.add_argument("--method", choices=("secular", "carrier"), default="secular")
    s.set_defaults(func=cmd_cnot)

    s = sub.add_parser("sweep", help="fidelity/gate-time sweep over (g, omega_c)")
    s.add_argument("--g-list", type=lambda v: [float(x) for x in v.split(",")], default=None)
    s.add_argument(
        "--omega-c-list", type=lambda v: [float(x) for x in v.split(",")], default=None
    )
    s.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("estimate", help="coupling estimate and rate budget")
    s.add_argument("--vrms-uv", type=float, default=20.0, help="vacuum rms voltage (uV)")
    s.add_argument("--q", type=float, default=1e5, help="resonator quality factor")
    s.add_argument("--t2star-ms", type=float, default=0.3, help="dephasing time (ms)")
    s.add_argument("--omega-c", type=float, default=1.0, help="resonator frequency (GHz)")
    s.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegeneratePhysicsError as exc:
        print(f"degenerate physics input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConvergenceError, QuadratureError, SingularityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
