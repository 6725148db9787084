"""Volatile memristor state equations.

The internal state ``x`` is dimensionless on ``[x_off, x_on]``. Its
derivative is piecewise in the applied voltage: stretched-exponential
relaxation at or below the hold voltage, zero in the hold band, and a
power-law growth at or above the threshold voltage. Resistance is affine in
``x`` between ``r_off`` and ``r_on``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

PARAM_NAMES = ("x_on", "x_off", "v_th", "v_h", "r_on", "r_off", "k", "alpha", "tau", "beta")


class Region(enum.Enum):
    DECAY = "decay"
    HOLD = "hold"
    GROWTH = "growth"


@dataclass(frozen=True)
class ModelParams:
    """Model constants in SI base units.

    ``k`` is in 1/s because ``x`` is dimensionless.
    """

    x_on: float
    x_off: float
    v_th: float
    v_h: float
    r_on: float
    r_off: float
    k: float
    alpha: float
    tau: float
    beta: float

    def replace(self, **changes: float) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


# Device used to exercise the model (fast switching, 10 ms relaxation).
TESTING_PARAMS = ModelParams(
    x_on=1.0, x_off=0.0, v_th=1.8, v_h=1.4, r_on=30e3, r_off=15e9,
    k=150.0, alpha=0.45, tau=10e-3, beta=5.0,
)

# Values reported for the Ag/SiOx/C/W fit; state and resistance limits are
# shared with the testing set.
FITTING_PARAMS = TESTING_PARAMS.replace(
    v_th=1.744, v_h=1.5726, k=650.0, alpha=0.09999, tau=1.0444, beta=2.14262,
)


def validate_params(p: ModelParams) -> list[str]:
    """Return the violated invariants of ``p``; an empty list means valid."""
    problems = []
    for f in fields(p):
        value = getattr(p, f.name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            problems.append(f"{f.name} must be a finite number (got {value!r})")
    if problems:
        return problems
    if not p.x_on > p.x_off:
        problems.append(f"x_on > x_off violated (x_on={p.x_on!r}, x_off={p.x_off!r})")
    if not p.v_th > p.v_h:
        problems.append(f"v_th > v_h violated (v_th={p.v_th!r}, v_h={p.v_h!r})")
    if not p.r_on > 0:
        problems.append(f"r_on > 0 violated (r_on={p.r_on!r})")
    if not p.r_off > p.r_on:
        problems.append(f"r_off > r_on violated (r_off={p.r_off!r}, r_on={p.r_on!r})")
    for name in ("k", "alpha", "tau", "beta"):
        if not getattr(p, name) > 0:
            problems.append(f"{name} > 0 violated ({name}={getattr(p, name)!r})")
    return problems


def is_valid(p: ModelParams) -> bool:
    return not validate_params(p)


def _check_finite(v: float, name: str = "v") -> None:
    if not math.isfinite(v):
        raise ValueError(f"{name} must be finite, got {v!r}")


def classify_region(v: float, p: ModelParams) -> Region:
    _check_finite(v)
    if v <= p.v_h:
        return Region.DECAY
    if v >= p.v_th:
        return Region.GROWTH
    return Region.HOLD


def growth_rate(v: float, p: ModelParams) -> float:
    """Growth of ``x`` per second at voltage ``v >= v_th``."""
    _check_finite(v)
    if v < p.v_th:
        raise ValueError(f"growth_rate needs v >= v_th ({v!r} < {p.v_th!r})")
    return p.k * (v / p.v_th - 1.0) ** p.alpha


def decay_rate(x: float, t_decay: float, p: ModelParams) -> float:
    """Relaxation rate of ``x`` after ``t_decay`` seconds below the hold voltage.

    At ``t_decay == 0`` the rate is the one-sided limit, which is finite only
    for ``beta >= 1``.
    """
    if x < 0:
        raise ValueError(f"decay_rate needs x >= 0, got {x!r}")
    if t_decay < 0:
        raise ValueError(f"t_decay must be >= 0, got {t_decay!r}")
    if t_decay == 0:
        if p.beta < 1:
            raise ValueError("decay rate is singular at t_decay = 0 for beta < 1")
        if p.beta > 1:
            return 0.0
        return -x / p.tau
    return -x * p.beta * (t_decay / p.tau) ** (p.beta - 1.0) / p.tau


def state_derivative(x: float, v: float, t_decay: float, p: ModelParams) -> float:
    region = classify_region(v, p)
    if region is Region.HOLD:
        return 0.0
    if region is Region.GROWTH:
        if x >= p.x_on:
            return 0.0
        return growth_rate(v, p)
    if x <= p.x_off:
        return 0.0
    return decay_rate(x, t_decay, p)


def _check_state(x, p: ModelParams) -> None:
    xa = np.asarray(x)
    if not np.all((xa >= p.x_off) & (xa <= p.x_on)):
        raise ValueError(f"state outside [{p.x_off!r}, {p.x_on!r}]: {x!r}")


def resistance(x, p: ModelParams):
    """Device resistance in ohms; accepts scalars or arrays."""
    _check_state(x, p)
    return _resistance(x, p)


def _resistance(x, p: ModelParams):
    return p.r_on + (p.r_off - p.r_on) / (p.x_off - p.x_on) * (x - p.x_on)


def current(v, x, p: ModelParams):
    _check_state(x, p)
    return v / _resistance(x, p)
