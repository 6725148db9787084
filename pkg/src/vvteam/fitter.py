"""Parameter extraction by relative-RMSE minimisation.

The search runs in normalised coordinates: every free parameter is mapped to
``[0, 1]`` across its bounds, logarithmically for the parameters that span
decades (``k``, ``tau``, ``r_on``, ``r_off``) and linearly otherwise.
Simulated annealing explores globally; bounded gradient descent with
central finite differences polishes the annealing result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .model import ModelParams, is_valid
from .simulator import SolverConfig, Stimulus, simulate_current

FITTABLE = ("v_th", "v_h", "k", "alpha", "tau", "beta", "r_on", "r_off")
DEFAULT_FREE = ("v_th", "v_h", "k", "alpha", "tau", "beta")
LOG_SCALED = frozenset({"k", "tau", "r_on", "r_off"})

Objective = Callable[[ModelParams], float]


def relative_rmse(i_model, i_target) -> float:
    """``sqrt(1/N) * ||i_model - i_target|| / ||i_target||`` (Euclidean norms)."""
    a = np.asarray(i_model, dtype=float)
    b = np.asarray(i_target, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"series shapes differ: {a.shape} vs {b.shape}")
    if b.size == 0:
        raise ValueError("series are empty")
    denom = np.sum(b * b)
    if denom == 0:
        raise ValueError("target current is identically zero")
    return float(np.sqrt(np.sum((a - b) ** 2) / denom / b.size))


def default_bounds(name: str, value: float) -> tuple[float, float]:
    """One decade either side for log-scaled parameters, [0.5x, 2x] otherwise."""
    if name in LOG_SCALED:
        return value / 10.0, value * 10.0
    lo, hi = 0.5 * value, 2.0 * value
    return (lo, hi) if lo < hi else (hi, lo)


@dataclass
class FitSpec:
    """What to fit and against which data.

    ``initial`` supplies both the fixed parameters and the starting point for
    the free ones listed in ``bounds``. ``target`` is the reference current,
    decimated like the simulated trace (``config.record_every``).
    """

    stimulus: Stimulus
    target: np.ndarray
    initial: ModelParams
    bounds: Mapping[str, tuple[float, float]]
    config: SolverConfig | None = None
    x0: float | None = None

    def __post_init__(self):
        if self.config is None:
            self.config = SolverConfig(dt=self.stimulus.sample_interval)
        if self.config.dt != self.stimulus.sample_interval:
            raise ValueError("solver dt differs from the stimulus sample interval")
        self.target = np.asarray(self.target, dtype=float)
        expected = -(-len(self.stimulus) // self.config.record_every)
        if self.target.shape != (expected,):
            raise ValueError(f"target has {self.target.size} samples, stimulus gives {expected}")
        if not np.all(np.isfinite(self.target)):
            raise ValueError("target current must be finite")
        unknown = set(self.bounds) - set(FITTABLE)
        if unknown:
            raise ValueError(f"cannot fit {sorted(unknown)}; choose from {FITTABLE}")
        self.bounds = {name: tuple(map(float, self.bounds[name])) for name in FITTABLE if name in self.bounds}
        for name, (lo, hi) in self.bounds.items():
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"bounds for {name} must be finite with lower < upper, got {(lo, hi)}")
            if name in LOG_SCALED and lo <= 0:
                raise ValueError(f"log-scaled parameter {name} needs positive bounds")
            value = getattr(self.initial, name)
            if not lo <= value <= hi:
                raise ValueError(f"initial {name}={value!r} outside bounds {(lo, hi)}")
        if self.x0 is None:
            self.x0 = self.initial.x_off

    @property
    def free_params(self) -> tuple[str, ...]:
        return tuple(self.bounds)

    def _edges(self, name):
        lo, hi = self.bounds[name]
        if name in LOG_SCALED:
            return math.log(lo), math.log(hi)
        return lo, hi

    def to_search(self, p: ModelParams) -> np.ndarray:
        """Search coordinates: the value, or its natural log when log-scaled."""
        return np.array([
            math.log(getattr(p, n)) if n in LOG_SCALED else getattr(p, n) for n in self.free_params
        ])

    def search_widths(self) -> np.ndarray:
        return np.array([hi - lo for lo, hi in map(self._edges, self.free_params)])

    def to_unit(self, p: ModelParams) -> np.ndarray:
        s = self.to_search(p)
        lows = np.array([self._edges(n)[0] for n in self.free_params])
        return (s - lows) / self.search_widths()

    def from_unit(self, u) -> ModelParams:
        changes = {}
        for name, uj in zip(self.free_params, u):
            lo, hi = self._edges(name)
            s = lo + float(uj) * (hi - lo)
            value = math.exp(s) if name in LOG_SCALED else s
            # clamp against rounding in exp/log at the edges
            blo, bhi = self.bounds[name]
            changes[name] = min(max(value, blo), bhi)
        return self.initial.replace(**changes)


def make_fit_spec(stimulus: Stimulus, target, initial: ModelParams, free=DEFAULT_FREE,
                  bounds: Mapping[str, tuple[float, float]] | None = None,
                  config: SolverConfig | None = None) -> FitSpec:
    """FitSpec with default bounds for any free parameter not in ``bounds``."""
    bounds = dict(bounds or {})
    full = {name: bounds.get(name) or default_bounds(name, getattr(initial, name)) for name in free}
    return FitSpec(stimulus=stimulus, target=target, initial=initial, bounds=full, config=config)


@dataclass(frozen=True)
class AnnealConfig:
    # None selects 10 % of the starting error.
    initial_temperature: float | None = None
    cooling_rate: float = 0.9
    steps_per_temperature: int = 20
    proposal_scale: float = 0.1
    # None selects initial_temperature * 1e-3.
    min_temperature: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.cooling_rate < 1:
            raise ValueError("cooling_rate must lie in (0, 1)")
        if self.steps_per_temperature < 1 or self.proposal_scale <= 0:
            raise ValueError("steps_per_temperature and proposal_scale must be positive")
        for name in ("initial_temperature", "min_temperature"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class DescentConfig:
    learning_rate: float = 0.5
    finite_difference_step: float = 1e-4
    max_iterations: int = 100
    convergence_tolerance: float = 1e-12
    # Accepted steps grow the learning rate by this factor; rejected ones halve it.
    lr_growth: float = 2.0

    def __post_init__(self):
        if not (self.learning_rate > 0 and self.finite_difference_step > 0
                and self.max_iterations > 0 and self.convergence_tolerance > 0):
            raise ValueError("descent settings must be positive")
        if self.lr_growth < 1:
            raise ValueError("lr_growth must be >= 1")


@dataclass
class FitResult:
    best_params: ModelParams
    best_error: float
    iterations: dict[str, int]
    error_history: list[tuple[int, float]] = field(default_factory=list)
    rng_seed: int | None = None


def objective(candidate: ModelParams, spec: FitSpec) -> float:
    """Relative RMSE of the simulated current; ``inf`` for invalid parameters."""
    if not is_valid(candidate):
        return math.inf
    with np.errstate(all="ignore"):
        i_model = simulate_current(candidate, spec.stimulus, spec.x0, spec.config)
    if not np.all(np.isfinite(i_model)):
        return math.inf
    return relative_rmse(i_model, spec.target)


def _unit_objective(spec: FitSpec, fn: Objective | None):
    fn = fn or (lambda p: objective(p, spec))
    return lambda u: fn(spec.from_unit(u))


def _unit_gradient(f, u: np.ndarray, h: float, f_u: float | None = None) -> np.ndarray:
    f_u = f(u) if f_u is None else f_u
    g = np.zeros_like(u)
    for j in range(u.size):
        up, dn = u.copy(), u.copy()
        if u[j] + h > 1.0:
            dn[j] -= h
            g[j] = (f_u - f(dn)) / h
        elif u[j] - h < 0.0:
            up[j] += h
            g[j] = (f(up) - f_u) / h
        else:
            up[j] += h
            dn[j] -= h
            g[j] = (f(up) - f(dn)) / (2 * h)
    return g


def finite_diff_gradient(spec: FitSpec, candidate: ModelParams, cfg: DescentConfig,
                         objective_fn: Objective | None = None) -> np.ndarray:
    """Gradient with respect to the search coordinates (log for log-scaled names).

    The step for parameter ``j`` is ``finite_difference_step`` times its
    search-space bound width; differences turn one-sided within a step of a
    bound.
    """
    fn = objective_fn or (lambda p: objective(p, spec))
    f = _unit_objective(spec, fn)
    g_unit = _unit_gradient(f, spec.to_unit(candidate), cfg.finite_difference_step, fn(candidate))
    return g_unit / spec.search_widths()


def gradient_descent(spec: FitSpec, start: ModelParams, cfg: DescentConfig | None = None,
                     objective_fn: Objective | None = None) -> FitResult:
    """Projected descent in normalised coordinates with backtracking.

    A step that raises the error is discarded and the learning rate halved;
    accepted errors therefore never increase.
    """
    cfg = cfg or DescentConfig()
    fn = objective_fn or (lambda p: objective(p, spec))
    f = _unit_objective(spec, fn)
    u = spec.to_unit(start)
    # the start is scored as given, not after the round trip through u
    best, e = start, fn(start)
    history = [(0, e)]
    lr = cfg.learning_rate
    it = 0
    if u.size:
        while it < cfg.max_iterations:
            it += 1
            g = _unit_gradient(f, u, cfg.finite_difference_step, e)
            if not np.all(np.isfinite(g)) or not np.any(g):
                break
            accepted = False
            while lr > 1e-12:
                cand = np.clip(u - lr * g, 0.0, 1.0)
                if np.array_equal(cand, u):
                    break
                e_cand = f(cand)
                if e_cand <= e:
                    accepted = True
                    break
                lr /= 2
            if not accepted:
                break
            improvement = e - e_cand
            u, e = cand, e_cand
            best = spec.from_unit(u)
            history.append((it, e))
            lr *= cfg.lr_growth
            if improvement < cfg.convergence_tolerance:
                break
    return FitResult(best, e, {"descent": it}, history)


def simulated_annealing(spec: FitSpec, start: ModelParams, cfg: AnnealConfig | None = None,
                        objective_fn: Objective | None = None) -> FitResult:
    """Metropolis search with geometric cooling; returns the best point visited.

    Each proposal moves one randomly chosen free parameter by a uniform draw
    of up to ``proposal_scale`` of its (normalised) bound width.
    """
    cfg = cfg or AnnealConfig()
    rng = np.random.default_rng(cfg.rng_seed)
    fn = objective_fn or (lambda p: objective(p, spec))
    f = _unit_objective(spec, fn)
    u = spec.to_unit(start)
    e = fn(start)
    best, best_e = start, e
    history = [(0, e)]
    it = 0
    if u.size and math.isfinite(e):
        temp = cfg.initial_temperature or max(0.1 * e, np.finfo(float).tiny)
        t_min = cfg.min_temperature or temp * 1e-3
        while temp > t_min:
            for _ in range(cfg.steps_per_temperature):
                it += 1
                j = rng.integers(u.size)
                cand = u.copy()
                cand[j] = np.clip(u[j] + rng.uniform(-cfg.proposal_scale, cfg.proposal_scale), 0.0, 1.0)
                e_cand = f(cand)
                delta = e_cand - e
                # Metropolis: accept with probability exp(-delta / temp)
                if delta <= 0 or delta < -temp * math.log1p(-rng.random()):
                    u, e = cand, e_cand
                    if e < best_e:
                        best, best_e = spec.from_unit(u), e
                history.append((it, e))
            temp *= cfg.cooling_rate
    return FitResult(best, best_e, {"anneal": it}, history, cfg.rng_seed)


def fit(spec: FitSpec, anneal: AnnealConfig | None = None, descent: DescentConfig | None = None,
        objective_fn: Objective | None = None) -> FitResult:
    """Anneal from ``spec.initial``, then descend from the annealing optimum."""
    anneal = anneal or AnnealConfig()
    sa = simulated_annealing(spec, spec.initial, anneal, objective_fn)
    gd = gradient_descent(spec, sa.best_params, descent, objective_fn)
    offset = sa.iterations["anneal"]
    history = sa.error_history + [(offset + i, e) for i, e in gd.error_history]
    better = gd if gd.best_error <= sa.best_error else sa
    return FitResult(
        best_params=better.best_params,
        best_error=better.best_error,
        iterations={"anneal": sa.iterations["anneal"], "descent": gd.iterations["descent"]},
        error_history=history,
        rng_seed=anneal.rng_seed,
    )
