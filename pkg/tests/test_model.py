import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vvteam.model import (
    TESTING_PARAMS,
    Region,
    classify_region,
    current,
    decay_rate,
    growth_rate,
    resistance,
    state_derivative,
    validate_params,
)

P = TESTING_PARAMS
# 150 * (3/1.8 - 1)**0.45 evaluated with mpmath at 40 digits
RATE_AT_3V = 124.98278345390679769


def test_testing_column_is_valid():
    assert validate_params(P) == []


def test_swapped_voltages_reported():
    problems = validate_params(P.replace(v_h=2.0, v_th=1.8))
    assert len(problems) == 1
    assert "v_th > v_h" in problems[0]


def test_zero_tau_reported():
    problems = validate_params(P.replace(tau=0.0))
    assert any("tau > 0" in msg for msg in problems)


@pytest.mark.parametrize("field,value,needle", [
    ("x_off", 1.0, "x_on > x_off"),
    ("r_on", 0.0, "r_on > 0"),
    ("r_off", 10e3, "r_off > r_on"),
    ("k", -1.0, "k > 0"),
    ("alpha", 0.0, "alpha > 0"),
    ("beta", -2.0, "beta > 0"),
    ("tau", math.nan, "tau must be a finite number"),
])
def test_each_invariant_named(field, value, needle):
    problems = validate_params(P.replace(**{field: value}))
    assert any(needle in msg for msg in problems), problems


@pytest.mark.parametrize("v,region", [
    (3.0, Region.GROWTH),
    (-1.0, Region.DECAY),
    (1.5, Region.HOLD),
    (1.4, Region.DECAY),
    (1.8, Region.GROWTH),
])
def test_classify_region(v, region):
    assert classify_region(v, P) is region


def test_classify_rejects_nonfinite():
    with pytest.raises(ValueError):
        classify_region(math.inf, P)
    with pytest.raises(ValueError):
        classify_region(math.nan, P)


def test_growth_rate_examples():
    assert growth_rate(1.8, P) == 0.0
    assert growth_rate(3.0, P) == pytest.approx(RATE_AT_3V, rel=1e-14)
    assert growth_rate(3.6, P) == 150.0


def test_growth_rate_below_threshold_rejected():
    with pytest.raises(ValueError):
        growth_rate(1.79, P)


def test_decay_rate_examples():
    assert decay_rate(1.0, 10e-3, P) == pytest.approx(-500.0, rel=1e-14)
    assert decay_rate(0.0, 3e-3, P) == 0.0
    # -0.5 * 5 * 0.5**4 / 0.01
    assert decay_rate(0.5, 5e-3, P) == pytest.approx(-15.625, rel=1e-14)


def test_decay_rate_at_onset():
    assert decay_rate(0.7, 0.0, P) == 0.0
    assert decay_rate(0.7, 0.0, P.replace(beta=1.0)) == pytest.approx(-70.0)
    with pytest.raises(ValueError):
        decay_rate(0.7, 0.0, P.replace(beta=0.5))


def test_state_derivative_examples():
    assert state_derivative(0.5, 1.5, 1e-3, P) == 0.0
    assert state_derivative(1.0, 3.0, 0.0, P) == 0.0
    assert state_derivative(0.2, -1.0, 10e-3, P) == pytest.approx(-100.0, rel=1e-14)
    assert state_derivative(0.0, -1.0, 10e-3, P) == 0.0


def test_resistance_examples():
    assert resistance(1.0, P) == 30e3
    assert resistance(0.0, P) == 15e9
    assert resistance(0.5, P) == pytest.approx(7.500015e9, rel=1e-15)
    with pytest.raises(ValueError):
        resistance(1.2, P)
    with pytest.raises(ValueError):
        resistance(-0.1, P)


def test_current_examples():
    assert current(3.0, 1.0, P) == pytest.approx(100e-6, rel=1e-15)
    assert current(0.0, 0.3, P) == 0.0
    assert current(3.0, 0.0, P) == pytest.approx(0.2e-9, rel=1e-15)


finite_v = st.floats(min_value=-10, max_value=10, allow_nan=False)
unit_x = st.floats(min_value=0.0, max_value=1.0)


@given(finite_v, unit_x, st.floats(min_value=1e-6, max_value=1.0))
def test_derivative_follows_region(v, x, t_decay):
    dx = state_derivative(x, v, t_decay, P)
    region = classify_region(v, P)
    if region is Region.HOLD:
        assert dx == 0.0
    elif region is Region.GROWTH:
        assert dx == (0.0 if x >= P.x_on else growth_rate(v, P))
    else:
        assert dx == (0.0 if x <= P.x_off else decay_rate(x, t_decay, P))


@given(st.floats(min_value=1.8, max_value=20.0), st.floats(min_value=1.8, max_value=20.0))
def test_growth_monotone(v1, v2):
    lo, hi = sorted((v1, v2))
    assert growth_rate(lo, P) <= growth_rate(hi, P)


@given(unit_x, st.floats(min_value=1e-6, max_value=0.1))
def test_decay_linear_in_x(x, t):
    assert decay_rate(x, t, P) == pytest.approx(x * decay_rate(1.0, t, P), rel=1e-12, abs=1e-300)
    assert decay_rate(x, t, P) <= 0.0


@given(st.floats(min_value=0.0, max_value=0.98))
def test_resistance_affine(x):
    h = 0.01
    r = resistance(np.array([x, x + h, x + 2 * h]), P)
    assert abs(r[0] - 2 * r[1] + r[2]) <= 1e-15 * P.r_off * 8


@given(st.floats(min_value=-10, max_value=10).filter(lambda v: abs(v) > 1e-9), unit_x)
def test_ohm_consistency(v, x):
    assert current(v, x, P) * resistance(x, P) == pytest.approx(v, rel=1e-12)
