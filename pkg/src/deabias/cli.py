"""Command-line front end.

Exit codes: 0 success, 1 model or validation error (message on stderr),
2 usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import csvio, dynamics, equilibrium, fitting, magnetics
from .bias import ExponentialBias, PmMre, PmPm, classify_bias
from .config import PAPER_V_ON, load_scenario, parse_quantity
from .errors import ModelError
from .svg import PlotSpec, Series, write_svg


def quantity(dimension):
    """argparse type: a number with an optional unit, bare numbers in SI."""
    def parse(text):
        try:
            return float(text)
        except ValueError:
            pass
        try:
            return parse_quantity(text, dimension)
        except ModelError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    parse.__name__ = dimension
    return parse


def gap_grid(text):
    """``lo:hi:n`` in mm."""
    try:
        lo, hi, n = text.split(":")
        return magnetics.default_gap_grid(int(n), float(lo) * 1e-3, float(hi) * 1e-3)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n in mm, got {text!r}") from None


def length_bounds(text):
    try:
        lo, hi = (float(v) * 1e-3 for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi in mm, got {text!r}") from None
    return lo, hi


def _map(fn, items, jobs):
    """Ordered map, in worker processes when ``jobs > 1``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _emit(text, out):
    if out:
        csvio.write_text(out, text)
    else:
        sys.stdout.write(text)


def _plot(args, title, x_label, y_label, series):
    if args.svg:
        write_svg(PlotSpec(title, x_label, y_label, tuple(series)), args.svg)


# --- subcommands --------------------------------------------------------

def _sweep_one(job):
    path, gaps = job
    bias = load_scenario(path).bias
    if isinstance(bias, PmMre):
        curve = magnetics.force_sweep("pm_mre", gaps, magnet=bias.magnet, disc=bias.disc,
                                      scale=bias.scale)
    elif isinstance(bias, PmPm):
        curve = magnetics.force_sweep("pm_pm", gaps, magnet_a=bias.magnet_a,
                                      magnet_b=bias.magnet_b)
    elif isinstance(bias, ExponentialBias):
        forces = bias.amplitude * np.exp(-bias.decay_rate * gaps) + bias.floor
        curve = magnetics.ForceCurve(tuple(gaps), tuple(np.maximum(forces, 0.0)), "fit")
    else:
        raise ModelError(f"{path}: force-sweep needs a magnetic bias, got {bias.kind}")
    return bias.label, curve


def cmd_force_sweep(args):
    gaps = args.gaps if args.gaps is not None else magnetics.default_gap_grid()
    results = _map(_sweep_one, [(p, gaps) for p in args.config], args.jobs)
    if len(results) == 1:
        text = csvio.force_curve_csv(results[0][1])
    else:
        header = ("gap_mm",) + tuple(f"{label}_N" for label, _ in results)
        cols = [gaps * 1e3] + [c.force_array for _, c in results]
        text = csvio.format_rows(header, zip(*cols))
    _emit(text, args.out)
    _plot(args, "Force versus gap", "gap (mm)", "force (N)",
          [Series(label, c.gap_array * 1e3, c.force_array) for label, c in results])
    return 0


def cmd_fit(args):
    curve = csvio.read_force_curve(args.data)
    if args.model == "exponential":
        fit = fitting.fit_exponential(curve)
    elif args.model == "power":
        fit = fitting.fit_power_law(curve)
    else:
        fit = fitting.fit_best(curve)
    report = fitting.format_fit_report(fit, source=str(args.data))
    if args.compare:
        other = fitting.fit_exponential(csvio.read_force_curve(args.compare))
        first = fit if isinstance(fit, fitting.FitResult) else fitting.fit_exponential(curve)
        flagged = fitting.compare_fits(first, other, args.threshold)
        report += "\n[repeatability]\n"
        report += f"compared_with = {args.compare}\n"
        report += f"threshold = {args.threshold:g}\n"
        report += f"consistent = {'no' if flagged else 'yes'}\n"
        for name, diff in sorted(flagged.items()):
            report += f"{name}_difference = {diff:.4g}\n"
    _emit(report, args.out)
    g = curve.gap_array
    fine = np.linspace(g[0], g[-1], 200)
    _plot(args, "Force-gap fit", "gap (mm)", "force (N)",
          [Series("data", g * 1e3, curve.force_array, "dotted"),
           Series("fit", fine * 1e3, fit(fine))])
    return 0


def cmd_steady_state(args):
    scenario = load_scenario(args.config)
    voltages = np.linspace(0.0, args.vmax, args.steps + 1)
    points = equilibrium.steady_state_sweep(scenario, voltages)
    _emit(csvio.sweep_csv(points), args.out)
    ok = [p for p in points if not math.isnan(p.deflection)]
    _plot(args, f"Steady state: {scenario.bias.label}", "voltage (kV)", "deflection (mm)",
          [Series(scenario.bias.label, [p.voltage / 1e3 for p in ok],
                  [p.deflection * 1e3 for p in ok])])
    snapped = [p for p in points if p.snapped]
    if snapped:
        print(f"snap-through at {snapped[0].voltage:g} V", file=sys.stderr)
    return 0


def _range_one(job):
    path, v_on = job
    return equilibrium.working_range(load_scenario(path), v_on)


def cmd_working_range(args):
    reports = _map(_range_one, [(p, args.von) for p in args.config], args.jobs)
    sys.stdout.write(csvio.working_range_table(reports))
    if args.out:
        csvio.write_text(args.out, csvio.working_range_csv(reports))
    _plot(args, "Working range", "bias", "range (mm)",
          [Series(r.label, [k, k], [0.0, r.w_m * 1e3]) for k, r in enumerate(reports)])
    return 0


def cmd_optimize_offset(args):
    scenario = load_scenario(args.config)
    lo, hi = args.bounds
    opt = equilibrium.optimize_offset(scenario, args.von, (lo, hi), tol=args.tol,
                                      coarse=args.coarse, jobs=args.jobs)
    rep = opt.report
    print(f"{rep.label}: optimum offset {opt.offset * 1e3:.6f} mm, "
          f"w_m {rep.w_m * 1e3:.4f} mm at {rep.v_on / 1e3:g} kV")
    if args.out:
        csvio.write_text(args.out, csvio.format_rows(
            ("offset_mm", "w_m_mm"), ((x * 1e3, w * 1e3) for x, w in opt.probes)))
    _plot(args, f"Offset search: {rep.label}", "offset (mm)", "working range (mm)",
          [Series("probes", [x * 1e3 for x, _ in opt.probes],
                  [w * 1e3 for _, w in opt.probes])])
    return 0


def cmd_transient(args):
    scenario = load_scenario(args.config)
    if args.schedule:
        schedule = csvio.read_schedule(args.schedule, args.duration)
    elif args.staircase:
        schedule = dynamics.paper_schedule(args.duration, 14, args.level)
    else:
        schedule = dynamics.VoltageSchedule.step(args.level, args.at, args.duration)
    dt = args.dt
    if dt is None:
        d0 = dynamics.initial_equilibrium(scenario, schedule.level_at(0.0))
        dt = 0.8 * dynamics.max_stable_step(scenario, d0, schedule.level_at(0.0))
    record = max(1, int(round(args.sample / dt)))
    result = dynamics.simulate(scenario, schedule, dt, record_every=record)
    _emit(csvio.transient_csv(result), args.out)
    _plot(args, f"Transient: {scenario.bias.label}", "time (s)", "deflection (mm)",
          [Series(scenario.bias.label, result.time, result.deflection * 1e3)])
    if result.pull_in:
        print("pull-in: contact reached", file=sys.stderr)
    return 0


def _classify_one(path):
    bias = load_scenario(path).bias
    return bias.label, classify_bias(bias)


def cmd_classify(args):
    results = _map(_classify_one, list(args.config), args.jobs)
    for label, cls in results:
        print(cls if len(results) == 1 else f"{label}: {cls}")
    if args.out:
        csvio.write_text(args.out, csvio.format_rows(
            ("bias", "class"), ((label, str(cls)) for label, cls in results)))
    return 0


# --- parser -------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="deabias", description="Biased conical dielectric elastomer actuator toolkit")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def add(name, func, help_text, multi=False, config=True):
        p = sub.add_parser(name, help=help_text, description=help_text)
        if config:
            p.add_argument("--config", required=True, action="append" if multi else None,
                           help="scenario file" + (" (repeatable)" if multi else ""))
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--svg", help="also write an SVG plot here")
        p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
        p.set_defaults(func=func)
        return p

    p = add("force-sweep", cmd_force_sweep, "force-gap curve of the configured bias",
            multi=True)
    p.add_argument("--gaps", type=gap_grid, help="lo:hi:n in mm (default 5:50:22)")

    p = add("fit", cmd_fit, "fit a gap_mm,force_N series", config=False)
    p.add_argument("--data", required=True, help="CSV with header gap_mm,force_N")
    p.add_argument("--model", choices=("exponential", "power", "best"),
                   default="exponential")
    p.add_argument("--compare", help="second series for the repeatability check")
    p.add_argument("--threshold", type=float, default=0.1,
                   help="relative disagreement flagged by --compare (default 0.1)")

    p = add("steady-state", cmd_steady_state, "quasi-static deflection versus voltage")
    p.add_argument("--vmax", type=quantity("voltage"), default=PAPER_V_ON)
    p.add_argument("--steps", type=int, default=50)

    p = add("working-range", cmd_working_range, "working range at the on-voltage",
            multi=True)
    p.add_argument("--von", type=quantity("voltage"), default=PAPER_V_ON)

    p = add("optimize-offset", cmd_optimize_offset,
            "offset of a magnetic bias maximizing the working range")
    p.add_argument("--von", type=quantity("voltage"), default=PAPER_V_ON)
    p.add_argument("--bounds", type=length_bounds, default=(6e-3, 30e-3),
                   help="lo:hi offset search interval in mm (default 6:30)")
    p.add_argument("--tol", type=quantity("length"), default=10e-6)
    p.add_argument("--coarse", type=int, default=25)

    p = add("transient", cmd_transient, "time response to a voltage step or schedule")
    p.add_argument("--level", type=quantity("voltage"), default=3e3)
    p.add_argument("--at", type=quantity("time"), default=0.5, help="step time")
    p.add_argument("--duration", type=quantity("time"), default=50.5)
    p.add_argument("--schedule", help="CSV with header t_s,level_V")
    p.add_argument("--staircase", action="store_true",
                   help="14-step up/down staircase peaking at --level")
    p.add_argument("--dt", type=quantity("time"), help="time step (default 0.8 x limit)")
    p.add_argument("--sample", type=quantity("time"), default=0.01,
                   help="output sample interval")

    add("classify", cmd_classify, "slope class of the bias force", multi=True)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "jobs", 1) < 1:
        print("deabias: error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ModelError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return 1


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
