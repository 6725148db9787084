"""Retention time against tau (10 ms to 100 ms) for the testing device."""
import argparse
import math

from vvteam import TESTING_PARAMS, SolverConfig, sweep_retention
from vvteam.trace_io import atomic_write, format_retention

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--out", default="retention_sweep.csv")
parser.add_argument("--fraction", type=float, default=0.1)
parser.add_argument("--dt", type=float, default=10e-6)
args = parser.parse_args()

taus = [i * 10e-3 for i in range(1, 11)]
rows = sweep_retention(TESTING_PARAMS, taus, args.fraction, SolverConfig(dt=args.dt))
atomic_write(args.out, format_retention(rows))

expected = math.log(1 / args.fraction) ** (1 / TESTING_PARAMS.beta)
print(f"closed-form retention/tau: {expected:.6f}")
for tau, ret in rows:
    print(f"tau = {tau * 1e3:5.1f} ms   retention = {ret * 1e3:8.4f} ms   ratio = {ret / tau:.6f}")
