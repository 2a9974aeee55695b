"""Adam with bias-corrected moment estimates."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TrainingError


@dataclass
class AdamConfig:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.lr <= 0 or self.eps <= 0:
            raise ConfigError("lr and eps must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("beta1 and beta2 must lie in [0, 1)")


@dataclass
class AdamState:
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, params):
        return cls(
            0,
            {k: np.zeros_like(p) for k, p in params.items()},
            {k: np.zeros_like(p) for k, p in params.items()},
        )


def adam_step(params, grads, state, config, frozen=()):
    """Update ``params`` and ``state`` in place.

    Names in ``frozen`` are skipped entirely; their moments stay untouched.
    The step counter advances once per call.
    """
    for name, g in grads.items():
        if name in frozen:
            continue
        if g.shape != params[name].shape:
            raise TrainingError(
                f"gradient for {name} has shape {g.shape}, parameter has {params[name].shape}"
            )
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient for parameter {name}")

    state.step += 1
    t = state.step
    b1, b2 = config.beta1, config.beta2
    correction1 = 1.0 - b1**t
    correction2 = 1.0 - b2**t
    for name, g in grads.items():
        if name in frozen:
            continue
        if name not in state.m:
            state.m[name] = np.zeros_like(params[name])
            state.v[name] = np.zeros_like(params[name])
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / correction1
        v_hat = v / correction2
        params[name] -= config.lr * m_hat / (np.sqrt(v_hat) + config.eps)
    return params, state
