"""The sign classifier CNN: assembly, inference, and checkpoint files."""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BadMagicError, ConfigError, ShapeError, TensorMismatchError, TruncatedCheckpointError,
    UnsupportedVersionError,
)
from .nn import functional as F
from .nn.layers import (
    Conv2D, Dense, Dropout, Flatten, LayerConfig, MaxPool, ReLU, Sequential, Softmax,
    build_stack, config_from_dict, config_to_dict, infer_shapes, param_count,
)

MAGIC = b"ISLCNN"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class IslCnnConfig:
    """Two conv pairs, a 512-unit hidden layer, and a softmax over the classes."""

    input_channels: int = 1
    input_size: int = 100
    block1_filters: int = 32
    block2_filters: int = 64
    kernel_size: int = 3
    padding: str = "same"
    pool_size: int = 2
    pool_stride: int = 2
    dropout_rate: float = 0.25
    hidden_units: int = 512
    num_classes: int = 36

    def __post_init__(self):
        if self.num_classes < 2:
            raise ConfigError(f"need at least 2 classes, got {self.num_classes}")
        if self.input_channels < 1 or self.input_size < 1:
            raise ConfigError("input_channels and input_size must be positive")

    @property
    def input_shape(self) -> tuple[int, int, int]:
        return (self.input_channels, self.input_size, self.input_size)

    def layers(self) -> list[LayerConfig]:
        k, pad = self.kernel_size, self.padding
        return [
            Conv2D(self.block1_filters, k, k, padding=pad), ReLU(),
            Conv2D(self.block1_filters, k, k, padding=pad), ReLU(),
            MaxPool(self.pool_size, self.pool_stride),
            Dropout(self.dropout_rate),
            Conv2D(self.block2_filters, k, k, padding=pad), ReLU(),
            Conv2D(self.block2_filters, k, k, padding=pad), ReLU(),
            MaxPool(self.pool_size, self.pool_stride),
            Flatten(),
            Dense(self.hidden_units), ReLU(),
            Dense(self.num_classes),
            Softmax(),
        ]

    @classmethod
    def from_dict(cls, d: dict) -> "IslCnnConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)


class Model:
    """A layer stack with a known input shape.

    ``layer_configs`` is kept so the model can be rebuilt from a checkpoint.
    """

    def __init__(self, layer_configs: Sequence[LayerConfig], input_shape, seed: int = 0,
                 dtype=np.float32):
        self.layer_configs = list(layer_configs)
        self.input_shape = tuple(input_shape)
        shapes = infer_shapes(self.layer_configs, self.input_shape)
        if len(shapes[-1]) != 1:
            raise ShapeError(f"model output must be flat, got {shapes[-1]}")
        self.num_classes = shapes[-1][0]
        self.net: Sequential = build_stack(self.layer_configs, self.input_shape,
                                           np.random.default_rng(seed), dtype)

    @property
    def ends_with_softmax(self) -> bool:
        return bool(self.layer_configs) and isinstance(self.layer_configs[-1], Softmax)

    def params(self):
        return self.net.params()

    def named_params(self):
        return self.net.named_params()

    def param_count(self) -> int:
        return param_count(self.layer_configs, self.input_shape)

    def astype(self, dtype) -> None:
        self.net.astype(dtype)

    @property
    def dtype(self):
        ps = self.params()
        return ps[0].value.dtype if ps else np.dtype(np.float32)

    def _check_input(self, x):
        if x.ndim != 4 or tuple(x.shape[1:]) != self.input_shape:
            raise ShapeError(f"expected input (N, {', '.join(map(str, self.input_shape))}), "
                             f"got {x.shape}")

    def logits(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        """Forward through every layer except a trailing Softmax."""
        self._check_input(x)
        x = np.asarray(x, dtype=self.dtype)
        layers = self.net.layers[:-1] if self.ends_with_softmax else self.net.layers
        for layer in layers:
            x = layer.forward(x, train)
        return x

    def backward_logits(self, grad: np.ndarray) -> np.ndarray:
        layers = self.net.layers[:-1] if self.ends_with_softmax else self.net.layers
        for layer in reversed(layers):
            grad = layer.backward(grad)
        return grad

    def predict_proba(self, x: np.ndarray, batch_size: int = 64) -> np.ndarray:
        """Class probabilities in inference mode, computed in chunks."""
        self._check_input(x)
        out = [F.softmax(self.logits(x[i:i + batch_size], train=False))
               for i in range(0, len(x), batch_size)]
        return np.concatenate(out) if out else np.zeros((0, self.num_classes), self.dtype)


def build_isl_cnn(cfg: IslCnnConfig | None = None, seed: int = 0) -> Model:
    cfg = cfg or IslCnnConfig()
    return Model(cfg.layers(), cfg.input_shape, seed=seed)


def forward_classify(model: Model, x: np.ndarray) -> tuple[np.ndarray, int]:
    """Classify one C x H x W input. Returns ``(probs, top_label)``."""
    x = np.asarray(x)
    if tuple(x.shape) != model.input_shape:
        raise ShapeError(f"expected input {model.input_shape}, got {x.shape}")
    probs = model.predict_proba(x[None])[0]
    return probs, int(np.argmax(probs))


# ------------------------------------------------------------- checkpoints
#
# Layout (all integers little-endian uint32):
#   b"ISLCNN" | u8 version | u32 len + UTF-8 JSON config echo
#   | u32 n_labels, then per label: u32 len + UTF-8 name
#   | u32 n_tensors, then per tensor: u32 len + UTF-8 name, u32 ndim, u32 dims..., f32 LE data

def _pack_str(s: str) -> bytes:
    b = s.encode("utf-8")
    return struct.pack("<I", len(b)) + b


def save_checkpoint(model: Model, label_map: Sequence[str], path) -> None:
    echo = {
        "input_shape": list(model.input_shape),
        "layers": [config_to_dict(c) for c in model.layer_configs],
    }
    parts = [MAGIC, struct.pack("<B", FORMAT_VERSION), _pack_str(json.dumps(echo, sort_keys=True))]
    parts.append(struct.pack("<I", len(label_map)))
    parts.extend(_pack_str(name) for name in label_map)
    named = model.named_params()
    parts.append(struct.pack("<I", len(named)))
    for name, p in named:
        parts.append(_pack_str(name))
        parts.append(struct.pack("<I", p.value.ndim))
        parts.append(struct.pack(f"<{p.value.ndim}I", *p.value.shape))
        parts.append(np.ascontiguousarray(p.value, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedCheckpointError(
                f"checkpoint truncated at byte {len(self.data)} (needed {self.pos + n})")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def string(self) -> str:
        return self.take(self.u32()).decode("utf-8")


def load_checkpoint(path) -> tuple[Model, list[str]]:
    data = Path(path).read_bytes()
    if data[:len(MAGIC)] != MAGIC:
        raise BadMagicError(f"{path}: not a checkpoint (bad magic)")
    r = _Reader(data)
    r.take(len(MAGIC))
    version = r.take(1)[0]
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported checkpoint version {version}")
    echo = json.loads(r.string())
    labels = [r.string() for _ in range(r.u32())]

    model = Model([config_from_dict(d) for d in echo["layers"]], echo["input_shape"])
    named = model.named_params()
    count = r.u32()
    if count != len(named):
        raise TensorMismatchError(f"{path}: checkpoint has {count} tensors, model needs {len(named)}")
    for name, p in named:
        got = r.string()
        if got != name:
            raise TensorMismatchError(f"{path}: expected tensor {name!r}, found {got!r}")
        ndim = r.u32()
        shape = struct.unpack(f"<{ndim}I", r.take(4 * ndim))
        if tuple(shape) != p.value.shape:
            raise TensorMismatchError(f"{path}: tensor {name} has shape {shape}, "
                                      f"expected {p.value.shape}")
        raw = r.take(4 * int(np.prod(shape, dtype=np.int64)))
        p.value = np.frombuffer(raw, dtype="<f4").astype(np.float32).reshape(shape)
    if r.pos != len(data):
        raise TensorMismatchError(f"{path}: {len(data) - r.pos} trailing bytes after tensors")
    return model, labels
