"""Adam with bias correction."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import ConfigError
from .layers import Param


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0


def adam_step(params: Iterable[Param], lr: float, state: AdamState) -> None:
    """Apply one Adam update in place to every param and advance ``state.t``."""
    if not lr > 0:
        raise ConfigError(f"learning rate must be positive, got {lr}")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p in params:
        g = p.grad
        dt = p.value.dtype.type
        p.adam_m *= dt(b1)
        p.adam_m += dt(1.0 - b1) * g
        p.adam_v *= dt(b2)
        p.adam_v += dt(1.0 - b2) * (g * g)
        denom = np.sqrt(p.adam_v / dt(c2))
        denom += dt(state.epsilon)
        p.value -= dt(lr) * (p.adam_m / dt(c1)) / denom


def zero_grad(params: Iterable[Param]) -> None:
    for p in params:
        p.grad.fill(0)
