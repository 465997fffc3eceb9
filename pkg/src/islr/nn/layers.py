"""Layer configurations, stateful layers, and stack construction."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np

from ..errors import ConfigError, ShapeError
from . import functional as F


class Param:
    """A learnable tensor with its gradient and Adam moment buffers."""

    def __init__(self, value: np.ndarray):
        self.value = value
        self.grad = np.zeros_like(value)
        self.adam_m = np.zeros_like(value)
        self.adam_v = np.zeros_like(value)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def astype(self, dtype) -> None:
        for name in ("value", "grad", "adam_m", "adam_v"):
            setattr(self, name, getattr(self, name).astype(dtype))

    def __repr__(self) -> str:
        return f"Param(shape={self.shape}, dtype={self.value.dtype})"


# ---------------------------------------------------------------- configs

@dataclass(frozen=True)
class Conv2D:
    out_channels: int
    kernel_h: int = 3
    kernel_w: int = 3
    stride: int = 1
    padding: str = "same"
    use_bias: bool = True

    def __post_init__(self):
        if self.out_channels < 1 or self.kernel_h < 1 or self.kernel_w < 1:
            raise ConfigError(f"invalid Conv2D config {self}")
        if self.stride < 1:
            raise ConfigError(f"Conv2D stride must be >= 1, got {self.stride}")
        if self.padding not in ("same", "valid"):
            raise ConfigError(f"Conv2D padding must be 'same' or 'valid', got {self.padding!r}")

    def output_shape(self, shape):
        if len(shape) != 3:
            raise ShapeError(f"Conv2D needs a C x H x W input, got {shape}")
        c, h, w = shape
        oh, pt, pb = F.conv_output_size(h, self.kernel_h, self.stride, self.padding)
        ow, pl, pr = F.conv_output_size(w, self.kernel_w, self.stride, self.padding)
        if oh < 1 or ow < 1 or h + pt + pb < self.kernel_h or w + pl + pr < self.kernel_w:
            raise ShapeError(f"kernel {self.kernel_h}x{self.kernel_w} larger than input {h}x{w}")
        return (self.out_channels, oh, ow)

    def num_params(self, shape):
        n = self.out_channels * shape[0] * self.kernel_h * self.kernel_w
        return n + (self.out_channels if self.use_bias else 0)


@dataclass(frozen=True)
class MaxPool:
    kernel: int = 2
    stride: int = 2

    def __post_init__(self):
        if self.kernel < 1 or self.stride < 1:
            raise ConfigError(f"invalid MaxPool config {self}")

    def output_shape(self, shape):
        if len(shape) != 3:
            raise ShapeError(f"MaxPool needs a C x H x W input, got {shape}")
        c, h, w = shape
        if self.kernel > h or self.kernel > w:
            raise ShapeError(f"pool kernel {self.kernel} exceeds input {h}x{w}")
        return (c, (h - self.kernel) // self.stride + 1, (w - self.kernel) // self.stride + 1)

    def num_params(self, shape):
        return 0


@dataclass(frozen=True)
class Dropout:
    rate: float = 0.25

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ConfigError(f"dropout rate must be in [0, 1), got {self.rate}")

    def output_shape(self, shape):
        return tuple(shape)

    def num_params(self, shape):
        return 0


@dataclass(frozen=True)
class Dense:
    units: int
    use_bias: bool = True

    def __post_init__(self):
        if self.units < 1:
            raise ConfigError(f"Dense units must be >= 1, got {self.units}")

    def output_shape(self, shape):
        if len(shape) != 1:
            raise ShapeError(f"Dense needs a flat input, got {shape}; insert Flatten first")
        return (self.units,)

    def num_params(self, shape):
        return shape[0] * self.units + (self.units if self.use_bias else 0)


@dataclass(frozen=True)
class ReLU:
    def output_shape(self, shape):
        return tuple(shape)

    def num_params(self, shape):
        return 0


@dataclass(frozen=True)
class Flatten:
    def output_shape(self, shape):
        return (math.prod(shape),)

    def num_params(self, shape):
        return 0


@dataclass(frozen=True)
class Softmax:
    def output_shape(self, shape):
        if len(shape) != 1:
            raise ShapeError(f"Softmax needs a flat input, got {shape}")
        return tuple(shape)

    def num_params(self, shape):
        return 0


@dataclass(frozen=True)
class Residual:
    """Identity skip around an inner stack: ``out = inner(x) + x``."""

    inner: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "inner", tuple(self.inner))

    def output_shape(self, shape):
        out = infer_shapes(self.inner, shape)[-1]
        if tuple(out) != tuple(shape):
            raise ShapeError(f"residual inner stack maps {tuple(shape)} to {tuple(out)}")
        return tuple(shape)

    def num_params(self, shape):
        return param_count(self.inner, shape)


LayerConfig = Union[Conv2D, MaxPool, Dropout, Dense, ReLU, Flatten, Softmax, Residual]

_KINDS = {
    "conv2d": Conv2D, "maxpool": MaxPool, "dropout": Dropout, "dense": Dense,
    "relu": ReLU, "flatten": Flatten, "softmax": Softmax, "residual": Residual,
}
_KIND_OF = {cls: kind for kind, cls in _KINDS.items()}


def config_to_dict(cfg: LayerConfig) -> dict:
    d = {"type": _KIND_OF[type(cfg)]}
    if isinstance(cfg, Residual):
        d["inner"] = [config_to_dict(c) for c in cfg.inner]
    else:
        d.update(asdict(cfg))
    return d


def config_from_dict(d: dict) -> LayerConfig:
    d = dict(d)
    try:
        cls = _KINDS[d.pop("type")]
    except KeyError as exc:
        raise ConfigError(f"unknown or missing layer type in {d}") from exc
    if cls is Residual:
        return Residual(tuple(config_from_dict(c) for c in d.get("inner", [])))
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(f"bad fields for {cls.__name__}: {exc}") from exc


def infer_shapes(stack: Sequence[LayerConfig], input_shape) -> list[tuple[int, ...]]:
    """Shapes before the first layer and after each layer (batch axis excluded)."""
    shapes = [tuple(input_shape)]
    for cfg in stack:
        shapes.append(tuple(cfg.output_shape(shapes[-1])))
    return shapes


def param_count(stack: Sequence[LayerConfig], input_shape) -> int:
    """Total number of learnable scalars in ``stack`` for the given input shape."""
    shapes = infer_shapes(stack, input_shape)
    return sum(cfg.num_params(shape) for cfg, shape in zip(stack, shapes))


# ----------------------------------------------------------------- layers

class Layer:
    """Base layer: stateless by default, no parameters."""

    def params(self) -> list[Param]:
        return []

    def named_params(self, prefix: str = "") -> list[tuple[str, Param]]:
        return []

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def astype(self, dtype) -> None:
        for p in self.params():
            p.astype(dtype)


class Conv2DLayer(Layer):
    def __init__(self, weight: np.ndarray, bias: np.ndarray | None, stride: int = 1,
                 padding: str = "same"):
        self.weight = Param(weight)
        self.bias = Param(bias) if bias is not None else None
        self.stride = stride
        self.padding = padding
        self._cache = None

    def params(self):
        return [self.weight] + ([self.bias] if self.bias is not None else [])

    def named_params(self, prefix=""):
        out = [(prefix + "weight", self.weight)]
        if self.bias is not None:
            out.append((prefix + "bias", self.bias))
        return out

    def forward(self, x, train=False):
        b = self.bias.value if self.bias is not None else None
        out, self._cache = F.conv2d_forward(x, self.weight.value, b, self.stride, self.padding)
        return out

    def backward(self, grad):
        dx, dw, db = F.conv2d_backward(grad, self._cache)
        self.weight.grad += dw
        if self.bias is not None:
            self.bias.grad += db
        self._cache = None
        return dx


class MaxPoolLayer(Layer):
    def __init__(self, kernel: int = 2, stride: int = 2):
        self.kernel = kernel
        self.stride = stride
        self._cache = None

    def forward(self, x, train=False):
        out, self._cache = F.maxpool_forward(x, self.kernel, self.stride)
        return out

    def backward(self, grad):
        dx = F.maxpool_backward(grad, self._cache)
        self._cache = None
        return dx


class ReLULayer(Layer):
    def forward(self, x, train=False):
        out, self._mask = F.relu_forward(x)
        return out

    def backward(self, grad):
        return F.relu_backward(grad, self._mask)


class DropoutLayer(Layer):
    def __init__(self, rate: float, rng: np.random.Generator | None = None):
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._mask = None

    def forward(self, x, train=False):
        out, self._mask = F.dropout_forward(x, self.rate, train, self.rng)
        return out

    def backward(self, grad):
        return F.dropout_backward(grad, self._mask)


class DenseLayer(Layer):
    def __init__(self, weight: np.ndarray, bias: np.ndarray | None):
        self.weight = Param(weight)
        self.bias = Param(bias) if bias is not None else None
        self._cache = None

    def params(self):
        return [self.weight] + ([self.bias] if self.bias is not None else [])

    def named_params(self, prefix=""):
        out = [(prefix + "weight", self.weight)]
        if self.bias is not None:
            out.append((prefix + "bias", self.bias))
        return out

    def forward(self, x, train=False):
        b = self.bias.value if self.bias is not None else None
        out, self._cache = F.dense_forward(x, self.weight.value, b)
        return out

    def backward(self, grad):
        dx, dw, db = F.dense_backward(grad, self._cache)
        self.weight.grad += dw
        if self.bias is not None:
            self.bias.grad += db
        self._cache = None
        return dx


class FlattenLayer(Layer):
    def forward(self, x, train=False):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._shape)


class SoftmaxLayer(Layer):
    def forward(self, x, train=False):
        self._probs = F.softmax(x)
        return self._probs

    def backward(self, grad):
        return F.softmax_backward(grad, self._probs)


class Sequential(Layer):
    def __init__(self, layers: Sequence[Layer]):
        self.layers = list(layers)

    def params(self):
        return [p for layer in self.layers for p in layer.params()]

    def named_params(self, prefix=""):
        out = []
        for i, layer in enumerate(self.layers):
            out.extend(layer.named_params(f"{prefix}{i}."))
        return out

    def forward(self, x, train=False):
        for layer in self.layers:
            x = layer.forward(x, train)
        return x

    def backward(self, grad):
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad


class ResidualLayer(Layer):
    def __init__(self, inner: Sequential):
        self.inner = inner

    def params(self):
        return self.inner.params()

    def named_params(self, prefix=""):
        return self.inner.named_params(prefix + "inner.")

    def forward(self, x, train=False):
        fx = self.inner.forward(x, train)
        if fx.shape != x.shape:
            raise ShapeError(f"residual inner output {fx.shape} != input {x.shape}")
        return fx + x

    def backward(self, grad):
        return self.inner.backward(grad) + grad


# ------------------------------------------------------------ construction

def he_normal(rng, shape, fan_in, dtype):
    return (rng.standard_normal(shape) * math.sqrt(2.0 / fan_in)).astype(dtype)


def glorot_uniform(rng, shape, fan_in, fan_out, dtype):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape).astype(dtype)


def build_stack(stack: Sequence[LayerConfig], input_shape, rng: np.random.Generator,
                dtype=np.float32) -> Sequential:
    """Instantiate layers for ``stack``, initializing weights from ``rng``.

    Conv/dense layers followed directly by a ReLU get He-normal weights, all
    others Glorot-uniform; biases start at zero.
    """
    shapes = infer_shapes(stack, input_shape)
    layers: list[Layer] = []
    for k, (cfg, shape) in enumerate(zip(stack, shapes)):
        feeds_relu = k + 1 < len(stack) and isinstance(stack[k + 1], ReLU)
        if isinstance(cfg, Conv2D):
            wshape = (cfg.out_channels, shape[0], cfg.kernel_h, cfg.kernel_w)
            fan_in = shape[0] * cfg.kernel_h * cfg.kernel_w
            fan_out = cfg.out_channels * cfg.kernel_h * cfg.kernel_w
            w = (he_normal(rng, wshape, fan_in, dtype) if feeds_relu
                 else glorot_uniform(rng, wshape, fan_in, fan_out, dtype))
            b = np.zeros(cfg.out_channels, dtype) if cfg.use_bias else None
            layers.append(Conv2DLayer(w, b, cfg.stride, cfg.padding))
        elif isinstance(cfg, Dense):
            wshape = (shape[0], cfg.units)
            w = (he_normal(rng, wshape, shape[0], dtype) if feeds_relu
                 else glorot_uniform(rng, wshape, shape[0], cfg.units, dtype))
            b = np.zeros(cfg.units, dtype) if cfg.use_bias else None
            layers.append(DenseLayer(w, b))
        elif isinstance(cfg, MaxPool):
            layers.append(MaxPoolLayer(cfg.kernel, cfg.stride))
        elif isinstance(cfg, Dropout):
            layers.append(DropoutLayer(cfg.rate, np.random.default_rng(rng.integers(2**63))))
        elif isinstance(cfg, ReLU):
            layers.append(ReLULayer())
        elif isinstance(cfg, Flatten):
            layers.append(FlattenLayer())
        elif isinstance(cfg, Softmax):
            layers.append(SoftmaxLayer())
        elif isinstance(cfg, Residual):
            layers.append(ResidualLayer(build_stack(cfg.inner, shape, rng, dtype)))
        else:
            raise ConfigError(f"unknown layer config {cfg!r}")
    return Sequential(layers)
