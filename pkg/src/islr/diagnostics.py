"""Standard gradient-check suite over every layer type and a reduced model."""
from __future__ import annotations

import numpy as np

from .model import IslCnnConfig, build_isl_cnn
from .nn.gradcheck import GradCheckReport, SoftmaxCrossEntropyHead, grad_check
from .nn.layers import (
    Conv2D, Dense, DropoutLayer, MaxPoolLayer, ReLU, ReLULayer, Residual, Sequential,
    build_stack,
)

REDUCED_MODEL = IslCnnConfig(input_size=20, block1_filters=4, block2_filters=6, hidden_units=24)


def _stack(configs, shape, seed):
    return build_stack(configs, shape, np.random.default_rng(seed), np.float64)


def _away_from_zero(rng, shape):
    return rng.uniform(0.1, 1.0, shape) * rng.choice([-1.0, 1.0], shape)


def reduced_model_check(tolerance: float = 1e-4, seed: int = 0,
                        max_checks: int | None = 40) -> GradCheckReport:
    """Check the full classifier (reduced widths, 1x20x20 input) with its loss head."""
    rng = np.random.default_rng(seed)
    model = build_isl_cnn(REDUCED_MODEL, seed=seed)
    body = model.net.layers[:-1] if model.ends_with_softmax else model.net.layers
    labels = rng.integers(0, REDUCED_MODEL.num_classes, 2)
    net = Sequential(list(body) + [SoftmaxCrossEntropyHead(labels)])
    x = rng.uniform(0.0, 1.0, (2,) + REDUCED_MODEL.input_shape)
    return grad_check(net, x, tolerance, max_checks=max_checks, seed=seed)


def gradcheck_suite(tolerance: float = 1e-6, model_tolerance: float = 1e-4,
                    seed: int = 0) -> list[tuple[str, GradCheckReport]]:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((2, 2, 6, 7))
    rows = [
        ("conv3x3_same", grad_check(_stack([Conv2D(3, 3, 3)], (2, 6, 7), seed), x, tolerance)),
        ("conv1x3_valid", grad_check(_stack([Conv2D(2, 1, 3, padding="valid")], (2, 6, 7), seed),
                                     x, tolerance)),
        ("conv3x1_stride2", grad_check(_stack([Conv2D(2, 3, 1, stride=2)], (2, 6, 7), seed),
                                       x, tolerance)),
        ("maxpool2", grad_check(MaxPoolLayer(2, 2), x, tolerance)),
        ("maxpool3_overlap", grad_check(MaxPoolLayer(3, 2), x, tolerance)),
        ("dense", grad_check(_stack([Dense(4)], (5,), seed), rng.standard_normal((3, 5)),
                             tolerance)),
        ("relu", grad_check(ReLULayer(), _away_from_zero(rng, (2, 3, 4)), tolerance)),
        ("dropout_infer", grad_check(DropoutLayer(0.25), x, tolerance)),
        ("residual", grad_check(_stack([Residual((Dense(5), ReLU(), Dense(5)))], (5,), seed),
                                rng.standard_normal((2, 5)), tolerance)),
        ("softmax_cross_entropy", grad_check(SoftmaxCrossEntropyHead(rng.integers(0, 6, 3)),
                                             rng.standard_normal((3, 6)), tolerance)),
        ("reduced_model", reduced_model_check(model_tolerance, seed)),
    ]
    return rows
