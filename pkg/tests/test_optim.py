import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from tcn_cws.errors import ConfigError, TrainingError
from tcn_cws.optim import AdamConfig, AdamState, adam_step


def fresh(**params):
    params = {k: np.array(v, dtype=float) for k, v in params.items()}
    return params, AdamState.zeros_like(params)


def test_zero_gradient_leaves_params():
    params, state = fresh(w=[1.0, -2.0, 3.0])
    adam_step(params, {"w": np.zeros(3)}, state, AdamConfig())
    assert np.array_equal(params["w"], [1.0, -2.0, 3.0])
    assert state.step == 1


def test_first_step_hand_case():
    params, state = fresh(theta=0.0)
    adam_step(params, {"theta": np.array(1.0)}, state, AdamConfig())
    # m_hat = v_hat = 1, so the step is lr / (1 + eps)
    assert float(params["theta"]) == pytest.approx(-0.001 / (1 + 1e-8), abs=1e-15)
    assert abs(float(params["theta"]) + 0.001) < 1e-9


def scalar_adam(theta, steps, lr=0.001, b1=0.9, b2=0.999, eps=1e-8):
    """Plain-float Adam on f(theta) = theta**2."""
    m = v = 0.0
    for t in range(1, steps + 1):
        g = 2 * theta
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        theta -= lr * (m / (1 - b1**t)) / (math.sqrt(v / (1 - b2**t)) + eps)
    return theta


def test_quadratic_descent_defaults():
    params, state = fresh(theta=1.0)
    cfg = AdamConfig()
    previous = 1.0
    for _ in range(200):
        adam_step(params, {"theta": 2 * params["theta"]}, state, cfg)
        current = abs(float(params["theta"]))
        assert current < previous
        previous = current
    assert float(params["theta"]) == pytest.approx(scalar_adam(1.0, 200), abs=1e-12)
    # Each step moves at most about lr, so 200 default steps cannot pass 0.8.
    assert previous > 1.0 - 200 * 0.001 * 1.01


def test_quadratic_descent_below_half_with_larger_step():
    params, state = fresh(theta=1.0)
    for _ in range(200):
        adam_step(params, {"theta": 2 * params["theta"]}, state, AdamConfig(lr=0.01))
    assert abs(float(params["theta"])) < 0.5
    assert float(params["theta"]) == pytest.approx(scalar_adam(1.0, 200, lr=0.01), abs=1e-12)


def test_nonfinite_gradient_names_parameter():
    params, state = fresh(a=[1.0], b=[2.0])
    with pytest.raises(TrainingError, match="b"):
        adam_step(params, {"a": np.ones(1), "b": np.array([np.nan])}, state, AdamConfig())
    assert state.step == 0 and params["a"][0] == 1.0


def test_frozen_parameters_skipped():
    params, state = fresh(emb=[1.0], w=[1.0])
    adam_step(params, {"emb": np.ones(1), "w": np.ones(1)}, state, AdamConfig(), frozen=("emb",))
    assert params["emb"][0] == 1.0 and params["w"][0] < 1.0


def test_config_validation():
    with pytest.raises(ConfigError):
        AdamConfig(lr=0)
    with pytest.raises(ConfigError):
        AdamConfig(beta2=1.0)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 5, elements=st.floats(-1e3, 1e3)))
def test_bias_correction_exact_after_one_step(g):
    params, state = fresh(w=np.zeros(5))
    cfg = AdamConfig()
    adam_step(params, {"w": g}, state, cfg)
    assert np.allclose(state.m["w"] / (1 - cfg.beta1), g, rtol=1e-12, atol=1e-300)
    assert np.allclose(state.v["w"] / (1 - cfg.beta2), g * g, rtol=1e-12, atol=1e-300)
    assert np.all(state.v["w"] >= 0)


@settings(max_examples=30, deadline=None)
@given(st.lists(arrays(np.float64, 4, elements=st.floats(-10, 10)), min_size=1, max_size=30))
def test_update_magnitude_bounded(grads):
    params, state = fresh(w=np.zeros(4))
    cfg = AdamConfig()
    for g in grads:
        before = params["w"].copy()
        adam_step(params, {"w": g}, state, cfg)
        assert np.all(np.abs(params["w"] - before) <= cfg.lr * 10)
