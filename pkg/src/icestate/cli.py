"""Command line front end: ``icestate {simulate,estimate,compare,sweep,kernels-check}``.

Every command writes CSV files, SVG plots and ``summary.txt`` into
``--out`` and exits with status 0 only if all of its checks pass.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .numerics import SolverError
from .output import gnuplot_script, svg_lines, write_csv
from .params import SECONDS_PER_DAY, ConfigError, load_config
from .plant import run_annual

DIAG_COLUMNS = ["t_days", "Phi", "Linf_C", "H_tilde_m", "fitted_rate"]


class Summary:
    def __init__(self):
        self.lines = []
        self.ok = True

    def check(self, name, passed, detail):
        self.ok &= bool(passed)
        self.lines.append(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")

    def note(self, text):
        self.lines.append(f"INFO {text}")

    def write(self, out: Path):
        text = "\n".join(self.lines) + "\n"
        (out / "summary.txt").write_text(text)
        sys.stdout.write(text)


def _config(args):
    cfg = load_config(args.config)
    run = cfg.run
    changes = {"seed": args.seed if args.seed is not None else run.seed}
    for flag, key in (("lam", "lam"), ("c", "c"), ("epsilon", "epsilon"), ("years", "years")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[key] = value
    cfg = dataclasses.replace(cfg, run=dataclasses.replace(run, **changes))
    if args.interp_forcing:
        cfg = dataclasses.replace(cfg, forcing=dataclasses.replace(
            cfg.forcing, lookup_mode="linear-midpoint-interpolation"))
    return cfg


def _write_diagnostics(path, run: ex.EstimationRun):
    rate = run.running_rate()
    write_csv(path, DIAG_COLUMNS,
              zip(run.t_days, run.Phi, run.Linf, run.H_tilde, rate))


def _gnuplot(args, out, csv_name, columns, using, title):
    if args.gnuplot:
        gnuplot_script(out / (Path(csv_name).stem + ".gp"), csv_name, columns, using, title)


# -- commands ------------------------------------------------------------------------


def cmd_simulate(args, cfg, out, summary):
    years = cfg.run.years
    result = run_annual(years, cfg)
    columns = ["t_days", "h_m", "H_m", "T_surface_C"] + [f"T_eta_{s:.2f}" for s in result.stations]
    rows = [] if years == 0 else [
        (t / SECONDS_PER_DAY, h, H, Ts, *prof)
        for t, h, H, Ts, prof in zip(result.t, result.h, result.H, result.T_surface, result.profiles)]
    write_csv(out / "plant.csv", columns, rows)
    days = result.t / SECONDS_PER_DAY
    svg_lines(out / "plant.svg", [("snow h", days, result.h), ("ice H", days, result.H)],
              title="Snow and ice thickness", xlabel="time (days)", ylabel="thickness (m)")
    _gnuplot(args, out, "plant.csv", columns, (2, 3), "Snow and ice thickness")

    for msg in result.assumption_violations:
        summary.check("assumptions", False, msg)
    if not result.assumption_violations:
        summary.check("assumptions", True,
                      f"max H = {result.max_H:.3f} m, max |dH/dt| = {result.max_abs_H_dot:.3g} m/s")
    if years >= 2:
        c = ex.annual_checks(result)
        summary.check("periodic", c.periodic,
                      f"max |H(t) - H(t - 1 yr)| in final year = {100 * c.periodic_drift:.2f} cm (< 1 cm)")
        summary.check("equilibrium", c.in_range, f"H in [{c.H_min:.3f}, {c.H_max:.3f}] m (within [2, 4])")
        summary.check("snow_season", c.snow_free_summer and c.snow_in_january,
                      f"snow-free in Jul-Aug: {c.snow_free_summer}, snow in January: {c.snow_in_january}")
    else:
        summary.note("periodicity check needs at least 2 years")


def _estimation_checks(run: ex.EstimationRun, summary):
    i3 = int(np.argmin(np.abs(run.t_days - 3.0)))
    ratio = run.Linf[i3] / run.Linf[0]
    summary.check("day3_profile", ratio < 0.1, f"Linf(3 d) / Linf(0) = {ratio:.4f} (< 0.1)")
    peak = float(np.max(np.abs(run.H_tilde)))
    back = abs(run.H_tilde[i3])
    summary.check("H_tilde_start", run.H_tilde[0] == 0.0, f"H_tilde(0) = {run.H_tilde[0]:g} m")
    summary.check("H_tilde_return", back < peak / 10,
                  f"|H_tilde(3 d)| = {back:.3g} m, max |H_tilde| = {peak:.3g} m (ratio < 0.1)")


def cmd_estimate(args, cfg, out, summary):
    mode = "open-loop" if args.open_loop else "backstepping"
    run = ex.run_estimation(cfg, mode, days=args.days)
    _write_diagnostics(out / "diagnostics.csv", run)
    series = []
    for day, (x, T_true, T_hat) in sorted(run.snapshots.items()):
        write_csv(out / f"profile_jan{int(day) + 1}.csv", ["x_m", "T_true_C", "T_hat_C"],
                  zip(x, T_true, T_hat))
        series += [(f"true, Jan {int(day) + 1}", x, T_true), (f"estimate, Jan {int(day) + 1}", x, T_hat)]
    svg_lines(out / "profiles.svg", series, title="Ice temperature profiles",
              xlabel="depth x (m)", ylabel="T (C)")
    svg_lines(out / "phi.svg", [(mode, run.t_days, run.Phi)], title="Estimation error Phi",
              xlabel="time (days)", ylabel="Phi", logy=True)
    svg_lines(out / "h_tilde.svg", [(mode, run.t_days, run.H_tilde)], title="Thickness error",
              xlabel="time (days)", ylabel="H_tilde (m)")
    _gnuplot(args, out, "diagnostics.csv", DIAG_COLUMNS, (2,), "Phi")
    summary.note(f"mode {mode}, lambda = {run.lam:g}, {run.t_days[-1]:g} days")
    if mode == "backstepping":
        _estimation_checks(run, summary)
    summary.check("finite", bool(np.all(np.isfinite(run.Phi))), "Phi finite throughout")


def cmd_compare(args, cfg, out, summary):
    runs = ex.run_pair(cfg, days=args.days, jobs=args.jobs)
    for run in runs:
        _write_diagnostics(out / f"diagnostics_{run.mode}.csv", run)
    svg_lines(out / "compare.svg", [(r.mode, r.t_days, r.Phi) for r in runs],
              title="Phi, open loop vs backstepping", xlabel="time (days)", ylabel="Phi", logy=True)
    s = ex.speedup(*runs)
    t_o = "never" if s.t_open is None else f"{s.t_open / SECONDS_PER_DAY:.3f} d"
    t_b = "never" if s.t_back is None else f"{s.t_back / SECONDS_PER_DAY:.3f} d"
    bound = " (lower bound: open loop never reached 10% within the horizon)" if s.lower_bound else ""
    summary.note(f"t10 open-loop = {t_o}, t10 backstepping = {t_b}")
    summary.check("speedup", s.ratio >= 3, f"ratio = {s.ratio:.2f}{bound} (>= 3)")


def cmd_sweep(args, cfg, out, summary):
    values = sorted(args.lambdas)
    runs = ex.sweep(cfg, values, days=args.days, jobs=args.jobs)
    rows = []
    for run in runs:
        _write_diagnostics(out / f"diagnostics_lambda_{run.lam:g}.csv", run)
        t10 = run.time_to_fraction()
        rows.append((run.lam, run.overshoot, np.nan if t10 is None else t10 / SECONDS_PER_DAY))
    write_csv(out / "sweep.csv", ["lambda", "overshoot_C", "t10_days"], rows)
    svg_lines(out / "sweep.svg", [(f"lambda = {r.lam:g}", r.t_days, r.Phi) for r in runs],
              title="Phi across lambda", xlabel="time (days)", ylabel="Phi", logy=True)
    over = [r.overshoot for r in runs]
    summary.check("overshoot_order", all(a < b for a, b in zip(over, over[1:])),
                  "overshoot by increasing lambda: " + ", ".join(f"{v:.4g} C" for v in over))


def cmd_kernels_check(args, cfg, out, summary):
    lam_sign = -1.0 if args.flip_q_lambda else 1.0
    checks = ex.kernel_checks(cfg, lam_sign=lam_sign, seed=cfg.run.seed)
    write_csv(out / "kernels_check.csv", ["check", "value", "tolerance", "pass"],
              [(c.name, c.value, c.tolerance, str(int(c.passed))) for c in checks])
    for c in checks:
        summary.check(c.name, c.passed, f"{c.value:.3e} (tolerance {c.tolerance:g})")


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "compare": cmd_compare,
            "sweep": cmd_sweep, "kernels-check": cmd_kernels_check}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI parameter file")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--c", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--interp-forcing", action="store_true",
                        help="interpolate monthly forcing between mid-month values")
    common.add_argument("--gnuplot", action="store_true", help="also write gnuplot scripts")

    parser = argparse.ArgumentParser(prog="icestate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="annual cycle of the snow/ice column")
    p.add_argument("--years", type=int)
    for name in ("estimate", "compare", "sweep"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--days", type=float, help="length of the estimation run")
        if name == "estimate":
            p.add_argument("--open-loop", action="store_true", help="all observer gains zero")
        else:
            p.add_argument("--jobs", type=int, default=1, help="concurrent member runs")
        if name == "sweep":
            p.add_argument("--lambdas", type=float, nargs="+", default=[5e-7, 5e-6, 1e-5])
    p = sub.add_parser("kernels-check", parents=[common])
    p.add_argument("--flip-q-lambda", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        args.out.mkdir(parents=True, exist_ok=True)
        summary = Summary()
        COMMANDS[args.command](args, cfg, args.out, summary)
    except (ConfigError, ValueError, SolverError, OSError) as err:
        print(f"icestate: error: {err}", file=sys.stderr)
        return 2
    summary.write(args.out)
    return 0 if summary.ok else 1


if __name__ == "__main__":
    sys.exit(main())
