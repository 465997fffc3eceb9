"""Central-difference gradient checking for layers and stacks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericError
from . import functional as F
from .layers import Layer


@dataclass
class GradCheckReport:
    max_rel_error: float
    tolerance: float
    errors: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


class SoftmaxCrossEntropyHead(Layer):
    """Adapter exposing the fused softmax + cross-entropy as a layer.

    ``forward`` returns the mean loss as a length-1 array so the loss can be
    checked like any other layer output.
    """

    def __init__(self, labels):
        self.labels = np.asarray(labels)

    def forward(self, x, train=False):
        loss, _, self._dlogits = F.softmax_cross_entropy(x, self.labels)
        return np.array([loss], dtype=x.dtype)

    def backward(self, grad):
        return self._dlogits * grad[0]


def _rel_error(a, n):
    return float(np.max(np.abs(a - n) / np.maximum(1.0, np.abs(a) + np.abs(n)), initial=0.0))


def grad_check(layer: Layer, x: np.ndarray, tolerance: float = 1e-6, h: float = 1e-5,
               max_checks: int | None = None, seed: int = 0) -> GradCheckReport:
    """Compare ``layer.backward`` against central differences in float64.

    The scalar objective is ``sum(out * R)`` for a fixed random ``R``, so every
    output element contributes. The layer is converted to float64 in place.
    When ``max_checks`` is set, at most that many coordinates per tensor are
    probed, chosen at random.
    """
    rng = np.random.default_rng(seed)
    layer.astype(np.float64)
    x = np.array(x, dtype=np.float64)

    out = layer.forward(x, train=False)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite forward output during gradient check")
    proj = rng.standard_normal(out.shape)

    def objective() -> float:
        val = float(np.sum(layer.forward(x, train=False) * proj))
        if not np.isfinite(val):
            raise NumericError("non-finite objective during gradient check")
        return val

    for p in layer.params():
        p.grad.fill(0)
    layer.forward(x, train=False)
    dx = layer.backward(proj.copy())
    if not np.all(np.isfinite(dx)):
        raise NumericError("non-finite analytic gradient")

    targets = [("input", x, dx)]
    targets += [(name, p.value, p.grad.copy()) for name, p in layer.named_params()]

    report = GradCheckReport(0.0, tolerance)
    for name, arr, analytic in targets:
        flat = arr.reshape(-1)
        idx = np.arange(flat.size)
        if max_checks is not None and flat.size > max_checks:
            idx = rng.choice(flat.size, max_checks, replace=False)
        numeric = np.empty(len(idx))
        for k, i in enumerate(idx):
            old = flat[i]
            flat[i] = old + h
            up = objective()
            flat[i] = old - h
            down = objective()
            flat[i] = old
            numeric[k] = (up - down) / (2 * h)
        err = _rel_error(analytic.reshape(-1)[idx], numeric)
        report.errors[name] = err
        report.max_rel_error = max(report.max_rel_error, err)
    return report
