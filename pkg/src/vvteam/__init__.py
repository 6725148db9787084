"""Behavioral simulation and parameter fitting for volatile memristors."""
from .model import (
    FITTING_PARAMS,
    TESTING_PARAMS,
    ModelParams,
    Region,
    classify_region,
    current,
    decay_rate,
    growth_rate,
    resistance,
    state_derivative,
    validate_params,
)
from .simulator import (
    DecayStepping,
    DeviceState,
    SolverConfig,
    Stimulus,
    Trace,
    analytic_decay,
    analytic_growth,
    make_stimulus,
    measure_retention,
    simulate,
    step,
    sweep_retention,
    switching_time,
)
from .fitter import (
    AnnealConfig,
    DescentConfig,
    FitResult,
    FitSpec,
    fit,
    gradient_descent,
    make_fit_spec,
    objective,
    relative_rmse,
    simulated_annealing,
)

__version__ = "0.1.0"
