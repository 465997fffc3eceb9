"""Training loop, evaluation, and single-image prediction."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, fields
from typing import Callable, Iterator, Sequence

import numpy as np

from .data import Entry, Split, load_input, make_batch
from .errors import ConfigError, DatasetError, NumericError, ShapeError
from .imaging.pipeline import PipelineConfig
from .model import Model, forward_classify
from .nn import functional as F
from .nn.layers import DropoutLayer
from .nn.optim import AdamState, adam_step, zero_grad

log = logging.getLogger(__name__)

METRICS_HEADER = ("epoch", "train_loss", "train_acc", "val_loss", "val_acc")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 20
    batch_size: int = 32
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown train keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


def evaluate_arrays(model: Model, x: np.ndarray, y: np.ndarray,
                    batch_size: int = 64) -> tuple[float, float]:
    """Top-1 accuracy and mean cross-entropy in inference mode."""
    if len(x) == 0:
        raise DatasetError("cannot evaluate on an empty set")
    probs = model.predict_proba(x, batch_size)
    acc = float(np.mean(np.argmax(probs, axis=1) == y))
    return acc, F.cross_entropy(probs, y)


def evaluate(model: Model, entries: Sequence[Entry], pipeline: PipelineConfig | None = None
             ) -> tuple[float, float]:
    if not entries:
        raise DatasetError("cannot evaluate on an empty entry list")
    x, y = make_batch(entries, pipeline)
    return evaluate_arrays(model, x, y)


def _check_finite_params(model: Model, epoch: int) -> None:
    for name, p in model.named_params():
        if not np.all(np.isfinite(p.value)):
            raise NumericError(f"non-finite values in parameter {name} after epoch {epoch}")


def iter_epochs_arrays(model: Model, x_train, y_train, x_val, y_val,
                       cfg: TrainConfig | None = None) -> Iterator[EpochMetrics]:
    """Train on preprocessed arrays, yielding metrics after each epoch.

    The generator mutates ``model`` in place. Consumers may stop early; the
    model then holds the weights as of the last yielded epoch.
    """
    cfg = cfg or TrainConfig()
    if len(x_train) == 0 or len(x_val) == 0:
        raise DatasetError("training and validation sets must be non-empty")
    if int(max(np.max(y_train), np.max(y_val))) >= model.num_classes:
        raise ShapeError(f"labels exceed the model's {model.num_classes} classes")
    dropouts = [layer for layer in model.net.layers if isinstance(layer, DropoutLayer)]
    for i, layer in enumerate(dropouts):
        layer.rng = np.random.default_rng([cfg.seed, 1, i])
    params = model.params()
    state = AdamState()
    n = len(x_train)
    for epoch in range(1, cfg.epochs + 1):
        order = (np.random.default_rng([cfg.seed, 0, epoch]).permutation(n) if cfg.shuffle
                 else np.arange(n))
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            zero_grad(params)
            logits = model.logits(x_train[idx], train=True)
            loss, _, dlogits = F.softmax_cross_entropy(logits, y_train[idx])
            if not np.isfinite(loss):
                raise NumericError(f"non-finite loss at epoch {epoch}, batch {b}")
            model.backward_logits(dlogits)
            adam_step(params, cfg.learning_rate, state)
        _check_finite_params(model, epoch)
        train_acc, train_loss = evaluate_arrays(model, x_train, y_train)
        val_acc, val_loss = evaluate_arrays(model, x_val, y_val)
        m = EpochMetrics(epoch, train_loss, train_acc, val_loss, val_acc)
        log.info("epoch %d: train_loss=%.5f train_acc=%.4f val_loss=%.5f val_acc=%.4f",
                 epoch, train_loss, train_acc, val_loss, val_acc)
        yield m


def iter_epochs(model: Model, split: Split, pipeline: PipelineConfig | None = None,
                cfg: TrainConfig | None = None) -> Iterator[EpochMetrics]:
    """Preprocess the split once (the pipeline is pure), then train epoch by epoch."""
    if not split.train or not split.val:
        raise DatasetError("split has an empty train or validation part")
    x_train, y_train = make_batch(split.train, pipeline)
    x_val, y_val = make_batch(split.val, pipeline)
    yield from iter_epochs_arrays(model, x_train, y_train, x_val, y_val, cfg)


def train_epochs(model: Model, split: Split, pipeline: PipelineConfig | None = None,
                 cfg: TrainConfig | None = None,
                 on_epoch: Callable[[EpochMetrics, Model], None] | None = None
                 ) -> tuple[list[EpochMetrics], Model]:
    history = []
    for m in iter_epochs(model, split, pipeline, cfg):
        history.append(m)
        if on_epoch is not None:
            on_epoch(m, model)
    return history, model


def predict_image(model: Model, label_map: Sequence[str], image_path,
                  pipeline: PipelineConfig | None = None) -> tuple[str, float]:
    pipeline = pipeline or PipelineConfig()
    x = load_input(image_path, pipeline)[None]
    probs, top = forward_classify(model, x)
    return label_map[top], float(probs[top])


def format_metrics_csv(history: Sequence[EpochMetrics]) -> str:
    rows = [",".join(METRICS_HEADER)]
    for m in history:
        rows.append(f"{m.epoch},{m.train_loss!r},{m.train_accuracy!r},"
                    f"{m.val_loss!r},{m.val_accuracy!r}")
    return "\n".join(rows) + "\n"


def write_metrics_csv(history: Sequence[EpochMetrics], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_metrics_csv(history))


def read_metrics_csv(path) -> list[EpochMetrics]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [EpochMetrics(int(r["epoch"]), float(r["train_loss"]), float(r["train_acc"]),
                             float(r["val_loss"]), float(r["val_acc"])) for r in reader]
