"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data or validation error. Data files
go only to ``--out``; summaries go to stdout.
"""
from __future__ import annotations

import argparse
import math
import sys

from . import trace_io
from .fitter import FITTABLE, DEFAULT_FREE, AnnealConfig, DescentConfig, fit, make_fit_spec
from .model import validate_params
from .simulator import (
    DEFAULT_DT,
    DecayStepping,
    RetentionTimeout,
    SolverConfig,
    measure_retention,
    simulate,
    switching_time,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vvteam", description="Volatile memristor simulation and fitting.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="transient simulation of a stimulus")
    sim.add_argument("--params", required=True)
    sim.add_argument("--stimulus", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--dt", type=float, help="time step for segment-form stimuli (default 1e-5 s)")
    sim.add_argument("--x0", type=float, help="initial state (default x_off)")
    sim.add_argument("--record-every", type=int, default=1)
    sim.add_argument("--decay-stepping", choices=[m.value for m in DecayStepping],
                     default=DecayStepping.EXACT_MULTIPLICATIVE.value)
    sim.add_argument("--seed", type=int, help="accepted for interface uniformity; unused")

    ret = sub.add_parser("retention-sweep", help="retention time for a list of tau values")
    ret.add_argument("--params", required=True)
    ret.add_argument("--tau-list", required=True, type=_float_list)
    ret.add_argument("--out", required=True)
    ret.add_argument("--fraction", type=float, default=0.1)
    ret.add_argument("--dt", type=float, default=DEFAULT_DT)
    ret.add_argument("--horizon", type=float, help="give up after this many seconds (default 1000*tau)")
    ret.add_argument("--seed", type=int, help="accepted for interface uniformity; unused")

    fp = sub.add_parser("fit", help="fit parameters to a reference current trace")
    fp.add_argument("--params", required=True, help="initial guess and fixed values")
    fp.add_argument("--target", required=True, help="trace CSV holding the reference current")
    fp.add_argument("--stimulus", required=True)
    fp.add_argument("--out", required=True, help="fitted parameter file")
    fp.add_argument("--report", help="error-history CSV (default: <out>.history.csv)")
    fp.add_argument("--free", default=",".join(DEFAULT_FREE))
    fp.add_argument("--bounds", help="file of 'name = lower, upper' lines")
    fp.add_argument("--max-iter", type=int, default=100, help="gradient-descent iterations")
    fp.add_argument("--seed", type=int, default=0)
    fp.add_argument("--dt", type=float, help="time step for segment-form stimuli (default 1e-5 s)")

    val = sub.add_parser("validate", help="check a parameter file")
    val.add_argument("--params", required=True)
    return parser


def _stimulus(path, dt):
    with open(path) as fh:
        segment_form = fh.readline().strip() == trace_io.SEGMENT_HEADER
    if segment_form and dt is None:
        dt = DEFAULT_DT
    return trace_io.read_stimulus(path, dt)


def cmd_simulate(args) -> int:
    if args.record_every < 1:
        raise UsageError("--record-every must be >= 1")
    if args.dt is not None and not args.dt > 0:
        raise UsageError("--dt must be positive")
    p = trace_io.read_params(args.params)
    stim = _stimulus(args.stimulus, args.dt)
    cfg = SolverConfig(dt=stim.sample_interval, decay_stepping=DecayStepping(args.decay_stepping),
                       record_every=args.record_every)
    trace = simulate(p, stim, args.x0, cfg)
    trace_io.write_trace(trace, args.out)
    t_sw = switching_time(trace, p)
    print(
        f"samples={len(trace)} final_x={trace_io.fmt(trace.x[-1])} "
        f"i_min_A={trace_io.fmt(trace.i.min())} i_max_A={trace_io.fmt(trace.i.max())} "
        f"switching_time_s={'none' if t_sw is None else trace_io.fmt(t_sw)}"
    )
    return EXIT_OK


def cmd_retention_sweep(args) -> int:
    if not args.tau_list or any(not (math.isfinite(t) and t > 0) for t in args.tau_list):
        raise UsageError("--tau-list must be a nonempty list of positive seconds")
    if not 0 < args.fraction < 1:
        raise UsageError("--fraction must lie in (0, 1)")
    if not args.dt > 0:
        raise UsageError("--dt must be positive")
    p = trace_io.read_params(args.params)
    cfg = SolverConfig(dt=args.dt)
    rows, failed = [], 0
    for tau in args.tau_list:
        try:
            rows.append((tau, measure_retention(p.replace(tau=tau), fraction=args.fraction, cfg=cfg,
                                                horizon=args.horizon)))
        except RetentionTimeout as exc:
            print(f"tau={trace_io.fmt(tau)}: {exc}", file=sys.stderr)
            rows.append((tau, "error:timeout"))
            failed += 1
    trace_io.atomic_write(args.out, trace_io.format_retention(rows))
    for tau, ret in rows:
        shown = ret if isinstance(ret, str) else f"{trace_io.fmt(ret)} ratio={ret / tau:.6f}"
        print(f"tau_s={trace_io.fmt(tau)} retention_s={shown}")
    return EXIT_DATA if failed else EXIT_OK


def cmd_fit(args) -> int:
    free = tuple(s.strip() for s in args.free.split(",") if s.strip())
    unknown = [n for n in free if n not in FITTABLE]
    if not free or unknown:
        raise UsageError(f"--free must name parameters from {','.join(FITTABLE)}")
    if args.max_iter < 1:
        raise UsageError("--max-iter must be >= 1")
    p = trace_io.read_params(args.params)
    stim = _stimulus(args.stimulus, args.dt)
    target = trace_io.read_trace(args.target)
    if len(target) != len(stim):
        raise ValueError(f"target has {len(target)} samples but stimulus has {len(stim)}")
    if abs(target.dt - stim.sample_interval) > 1e-6 * stim.sample_interval:
        raise ValueError(f"target time step {target.dt!r} differs from stimulus step {stim.sample_interval!r}")
    bounds = trace_io.read_bounds(args.bounds) if args.bounds else {}
    extra = sorted(set(bounds) - set(free))
    if extra:
        raise ValueError(f"bounds given for parameters that are not free: {', '.join(extra)}")
    spec = make_fit_spec(stim, target.i, p, free=free, bounds=bounds)
    result = fit(spec, AnnealConfig(rng_seed=args.seed), DescentConfig(max_iterations=args.max_iter))
    report = args.report or f"{args.out}.history.csv"
    trace_io.atomic_write(report, trace_io.format_history(result.error_history))
    trace_io.write_params(result.best_params, args.out,
                          comment=f"fitted: relative RMSE {trace_io.fmt(result.best_error)}, seed {args.seed}")
    print(f"relative_rmse={trace_io.fmt(result.best_error)} ({100 * result.best_error:.4f}%) "
          f"anneal_steps={result.iterations['anneal']} descent_steps={result.iterations['descent']}")
    return EXIT_OK


def cmd_validate(args) -> int:
    p = trace_io.read_params(args.params, validate=False)
    problems = validate_params(p)
    if problems:
        for msg in problems:
            print(f"fail: {msg}")
        return EXIT_DATA
    print("pass")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "retention-sweep": cmd_retention_sweep,
    "fit": cmd_fit,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"vvteam {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"vvteam {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
