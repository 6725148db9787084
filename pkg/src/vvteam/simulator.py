"""Fixed-step transient simulation under sample-and-hold voltage stimuli.

The stimulus is piecewise constant, so growth steps are exact (the growth
rate depends on the voltage only) and decay steps can use the closed-form
stretched exponential measured from the most recent entry into the decay
region. :func:`step` advances a single sample; :func:`simulate` processes
whole runs of same-region samples at once with numpy and agrees with
repeated :func:`step` calls to rounding error.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    ModelParams,
    Region,
    _resistance,
    classify_region,
    decay_rate,
    growth_rate,
)

DEFAULT_DT = 10e-6


class DecayStepping(enum.Enum):
    EXACT_MULTIPLICATIVE = "exact"
    FORWARD_EULER = "euler"


@dataclass(frozen=True)
class SolverConfig:
    dt: float = DEFAULT_DT
    decay_stepping: DecayStepping = DecayStepping.EXACT_MULTIPLICATIVE
    record_every: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be a positive integer, got {self.record_every!r}")


@dataclass(frozen=True, eq=False)
class Stimulus:
    """Uniformly sampled voltage waveform; ``samples[n]`` is held over
    ``[n*dt, (n+1)*dt)``."""

    sample_interval: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if not (math.isfinite(self.sample_interval) and self.sample_interval > 0):
            raise ValueError(f"sample_interval must be positive, got {self.sample_interval!r}")
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("a stimulus needs at least 2 samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("stimulus levels must be finite")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.sample_interval


@dataclass
class DeviceState:
    t: float
    x: float
    t_decay: float = 0.0
    # None until the first voltage sample has been applied.
    region: Region | None = None


@dataclass(eq=False)
class Trace:
    """Recorded samples: time, voltage, current, state and resistance."""

    t: np.ndarray
    v: np.ndarray
    i: np.ndarray
    x: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        for name in ("t", "v", "i", "x", "r"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.t.size
        if any(getattr(self, name).shape != (n,) for name in ("v", "i", "x", "r")):
            raise ValueError("all trace series must be 1-D with equal length")

    def __len__(self) -> int:
        return self.t.size

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else math.nan

    def columns(self) -> np.ndarray:
        return np.column_stack([self.t, self.v, self.i, self.x, self.r])


def make_stimulus(segments, dt: float) -> Stimulus:
    """Expand ``(duration, level)`` pairs into a sampled stimulus.

    Each duration is rounded to the nearest whole number of samples, ties up.
    """
    segments = list(segments)
    if not segments:
        raise ValueError("segment list is empty")
    if not (math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive, got {dt!r}")
    pieces = []
    for duration, level in segments:
        if not (math.isfinite(duration) and duration > 0):
            raise ValueError(f"segment duration must be positive, got {duration!r}")
        count = math.floor(duration / dt + 0.5)
        if count < 1:
            raise ValueError(f"segment of {duration!r} s is shorter than half a sample at dt={dt!r}")
        pieces.append(np.full(count, float(level)))
    return Stimulus(dt, np.concatenate(pieces))


def _decay_exponent_increment(t: float, t_next: float, p: ModelParams) -> float:
    """``(t_next/tau)**beta - (t/tau)**beta`` without cancellation."""
    if t == 0:
        return (t_next / p.tau) ** p.beta
    # t_next - t is exact for t_next <= 2*t; using it keeps the increments
    # telescoping onto the rounded clock.
    return (t / p.tau) ** p.beta * math.expm1(p.beta * math.log1p((t_next - t) / t))


def step(s: DeviceState, v: float, dt: float, p: ModelParams, cfg: SolverConfig) -> DeviceState:
    region = classify_region(v, p)
    x = s.x
    t_decay = s.t_decay
    if region is Region.GROWTH:
        if x < p.x_on:
            x = min(x + growth_rate(v, p) * dt, p.x_on)
        t_decay = 0.0
    elif region is Region.HOLD:
        t_decay = 0.0
    else:
        if s.region is not Region.DECAY:
            t_decay = 0.0
        t_next = t_decay + dt
        if x > p.x_off:
            if cfg.decay_stepping is DecayStepping.EXACT_MULTIPLICATIVE:
                x = x * math.exp(-_decay_exponent_increment(t_decay, t_next, p))
            else:
                x = x + decay_rate(x, max(t_decay, dt / 2), p) * dt
            x = max(x, p.x_off)
        t_decay = t_next
    return DeviceState(t=s.t + dt, x=x, t_decay=t_decay, region=region)


_CODES = (Region.DECAY, Region.HOLD, Region.GROWTH)


def _region_codes(volts: np.ndarray, p: ModelParams) -> np.ndarray:
    return np.where(volts <= p.v_h, 0, np.where(volts >= p.v_th, 2, 1))


def integrate(p: ModelParams, volts: np.ndarray, state: DeviceState, cfg: SolverConfig):
    """Apply ``volts`` sample by sample starting from ``state``.

    Returns the state value at the start of every sample and the final state.
    Same-region runs are advanced in closed form; forward-Euler decay falls
    back to per-sample stepping.
    """
    volts = np.asarray(volts, dtype=float)
    if not np.all(np.isfinite(volts)):
        raise ValueError("voltage samples must be finite")
    dt = cfg.dt
    n = volts.size
    xs = np.empty(n)
    if n == 0:
        return xs, state
    codes = _region_codes(volts, p)
    starts = np.concatenate(([0], np.flatnonzero(np.diff(codes)) + 1, [n]))
    x, t_decay, prev = state.x, state.t_decay, state.region
    for a, b in zip(starts[:-1], starts[1:]):
        region = _CODES[codes[a]]
        length = b - a
        if region is Region.HOLD:
            xs[a:b] = x
            t_decay = 0.0
        elif region is Region.GROWTH:
            xs[a] = x
            if x < p.x_on:
                rates = p.k * (volts[a:b] / p.v_th - 1.0) ** p.alpha * dt
                after = np.minimum(x + np.cumsum(rates), p.x_on)
                xs[a + 1:b] = after[:-1]
                x = float(after[-1])
            else:
                xs[a:b] = x
            t_decay = 0.0
        else:
            if prev is not Region.DECAY:
                t_decay = 0.0
            if cfg.decay_stepping is DecayStepping.EXACT_MULTIPLICATIVE:
                xs[a] = x
                if x > p.x_off:
                    elapsed = t_decay + np.arange(1, length + 1) * dt
                    base = (t_decay / p.tau) ** p.beta
                    after = np.maximum(
                        x * np.exp(-((elapsed / p.tau) ** p.beta - base)), p.x_off
                    )
                    xs[a + 1:b] = after[:-1]
                    x = float(after[-1])
                else:
                    xs[a:b] = x
                t_decay = t_decay + length * dt
            else:
                s = DeviceState(0.0, x, t_decay, Region.DECAY)
                for j in range(a, b):
                    xs[j] = s.x
                    s = step(s, volts[j], dt, p, cfg)
                x, t_decay = s.x, s.t_decay
        prev = region
    final = DeviceState(t=state.t + n * dt, x=x, t_decay=t_decay, region=prev)
    return xs, final


def simulate(p: ModelParams, stim: Stimulus, x0: float | None = None, cfg: SolverConfig | None = None) -> Trace:
    """Run ``stim`` through the device starting from state ``x0``.

    Sample ``n`` of the trace holds the state at ``t = n*dt`` together with
    the voltage applied from that instant, so ``i = v / R(x)`` row by row.
    ``x0`` defaults to ``x_off``; ``cfg`` defaults to the stimulus interval.
    """
    if cfg is None:
        cfg = SolverConfig(dt=stim.sample_interval)
    if cfg.dt != stim.sample_interval:
        raise ValueError(f"solver dt {cfg.dt!r} differs from stimulus interval {stim.sample_interval!r}")
    x0 = p.x_off if x0 is None else float(x0)
    if not p.x_off <= x0 <= p.x_on:
        raise ValueError(f"x0={x0!r} outside [{p.x_off!r}, {p.x_on!r}]")
    xs, _ = integrate(p, stim.samples, DeviceState(t=0.0, x=x0), cfg)
    idx = np.arange(0, xs.size, cfg.record_every)
    x = xs[idx]
    v = stim.samples[idx]
    r = _resistance(x, p)
    return Trace(t=idx * cfg.dt, v=v.copy(), i=v / r, x=x, r=r)


def simulate_current(p: ModelParams, stim: Stimulus, x0: float, cfg: SolverConfig) -> np.ndarray:
    """Current series only, for objective evaluation."""
    xs, _ = integrate(p, stim.samples, DeviceState(t=0.0, x=x0), cfg)
    idx = slice(None, None, cfg.record_every)
    return stim.samples[idx] / _resistance(xs[idx], p)


def analytic_growth(x0: float, v: float, t: float, p: ModelParams) -> float:
    return min(x0 + growth_rate(v, p) * t, p.x_on)


def analytic_decay(x0, t_decay, p: ModelParams):
    return x0 * np.exp(-((np.asarray(t_decay) / p.tau) ** p.beta))


def switching_time(trace: Trace, p: ModelParams) -> float | None:
    """Time at which ``x`` first reaches ``x_on``, or None if it never does.

    The crossing inside the last sample interval is located with the growth
    rate of the voltage held over that interval, which is exact for
    undecimated traces.
    """
    hits = np.flatnonzero(trace.x >= p.x_on)
    if hits.size == 0:
        return None
    j = int(hits[0])
    if j == 0:
        return float(trace.t[0])
    v_prev, x_prev = trace.v[j - 1], trace.x[j - 1]
    if v_prev < p.v_th:
        return float(trace.t[j])
    rate = growth_rate(float(v_prev), p)
    return float(min(trace.t[j - 1] + (p.x_on - x_prev) / rate, trace.t[j]))


class RetentionTimeout(RuntimeError):
    pass


def measure_retention(
    p: ModelParams,
    x_start: float | None = None,
    fraction: float = 0.1,
    cfg: SolverConfig | None = None,
    horizon: float | None = None,
) -> float:
    """Seconds after release until ``x`` falls to ``x_off + fraction*(x_on - x_off)``.

    The device is held below ``v_h`` from ``x_start`` (default ``x_on``) and
    the crossing is linearly interpolated between bracketing samples.
    Raises :class:`RetentionTimeout` if the level is not reached within
    ``horizon`` seconds (default ``1000*tau``).
    """
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction!r}")
    cfg = cfg or SolverConfig()
    x_start = p.x_on if x_start is None else float(x_start)
    if not p.x_off < x_start <= p.x_on:
        raise ValueError(f"x_start={x_start!r} must lie in ({p.x_off!r}, {p.x_on!r}]")
    horizon = 1000.0 * p.tau if horizon is None else horizon
    level = p.x_off + fraction * (p.x_on - p.x_off)
    if x_start <= level:
        return 0.0
    release = min(0.0, p.v_h)
    chunk = 4096
    state = DeviceState(t=0.0, x=x_start, region=Region.HOLD)
    done = 0
    while done * cfg.dt <= horizon:
        xs, final = integrate(p, np.full(chunk, release), state, cfg)
        xs = np.append(xs, final.x)
        below = np.flatnonzero(xs <= level)
        if below.size:
            j = int(below[0])
            x_hi, x_lo = xs[j - 1], xs[j]
            frac = (x_hi - level) / (x_hi - x_lo)
            t = (done + j - 1 + frac) * cfg.dt
            if t > horizon:
                break
            return float(t)
        state = final
        done += chunk
    raise RetentionTimeout(f"x did not fall below {level!r} within {horizon!r} s (tau={p.tau!r})")


def sweep_retention(p: ModelParams, tau_list, fraction: float = 0.1, cfg: SolverConfig | None = None,
                    horizon: float | None = None) -> list[tuple[float, float]]:
    tau_list = list(tau_list)
    if not tau_list:
        raise ValueError("tau_list is empty")
    out = []
    for tau in tau_list:
        if not (math.isfinite(tau) and tau > 0):
            raise ValueError(f"tau must be positive, got {tau!r}")
        out.append((tau, measure_retention(p.replace(tau=tau), fraction=fraction, cfg=cfg, horizon=horizon)))
    return out
