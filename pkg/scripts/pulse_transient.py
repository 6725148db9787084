"""Set pulse followed by release: voltage, current and state over 100 ms.

Writes a trace CSV (default ``pulse_trace.csv``) for the testing device and
prints the switching time and the current levels before and after release.
"""
import argparse

from vvteam import TESTING_PARAMS, make_stimulus, simulate, switching_time
from vvteam.trace_io import write_trace

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--out", default="pulse_trace.csv")
parser.add_argument("--dt", type=float, default=10e-6)
parser.add_argument("--set-volts", type=float, default=3.0)
parser.add_argument("--release-volts", type=float, default=-1.0)
args = parser.parse_args()

p = TESTING_PARAMS
stim = make_stimulus([(20e-3, args.set_volts), (80e-3, args.release_volts)], args.dt)
trace = simulate(p, stim, p.x_off)
write_trace(trace, args.out)

t_sw = switching_time(trace, p)
release = int(round(20e-3 / args.dt))
print(f"switching time: {t_sw * 1e3:.4f} ms" if t_sw is not None else "no switching")
print(f"current during set (LRS): {trace.i[release - 1] * 1e6:.3f} uA")
print(f"current right after release: {trace.i[release] * 1e6:.3f} uA")
print(f"current at end: {trace.i[-1] * 1e9:.4f} nA")
print(f"wrote {len(trace)} samples to {args.out}")
