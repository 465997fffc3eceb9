"""Dataset discovery, stratified splitting, batching, and synthetic data."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DatasetError, ImageIOError
from .glyphs import random_glyph
from .imaging.pipeline import PipelineConfig, run_pipeline
from .imaging.pnm import load_image, save_image

LABELS: tuple[str, ...] = tuple("0123456789") + tuple("ABCDEFGHIJKLMNOPQRSTUVWXYZ")
IMAGE_SUFFIXES = {".pgm", ".ppm", ".png", ".jpg", ".jpeg", ".bmp"}


def label_index(name: str) -> int:
    try:
        return LABELS.index(name)
    except ValueError:
        raise DatasetError(f"unknown class {name!r}") from None


@dataclass(frozen=True)
class Entry:
    path: Path
    label: int


@dataclass
class DatasetIndex:
    root: Path
    entries: list[Entry]
    counts: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.counts:
            self.counts = dict(sorted(Counter(e.label for e in self.entries).items()))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class Split:
    train: list[Entry]
    val: list[Entry]
    seed: int
    ratio: float


def scan_dataset(root) -> DatasetIndex:
    """Index ``<root>/<class>/<image>`` with classes "0"-"9" and "A"-"Z".

    Entries are sorted by class index, then by file name. Not every class
    has to be present, but every present class directory must hold images.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root not found: {root}")
    entries = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        if sub.name not in LABELS:
            raise DatasetError(f"unknown class directory {sub.name!r} in {root}")
        files = sorted(p for p in sub.iterdir()
                       if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
        if not files:
            raise DatasetError(f"class directory {sub} contains no images")
        label = LABELS.index(sub.name)
        entries.extend(Entry(f, label) for f in files)
    if not entries:
        raise DatasetError(f"no class directories under {root}")
    entries.sort(key=lambda e: (e.label, e.path.name))
    return DatasetIndex(root, entries)


def stratified_split(index: DatasetIndex, ratio: float = 0.2, seed: int = 0) -> Split:
    """Shuffle each class with ``seed``; the last ``ceil(ratio * n)`` go to validation."""
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"split ratio must be in (0, 1), got {ratio}")
    by_class: dict[int, list[Entry]] = {}
    for e in index.entries:
        by_class.setdefault(e.label, []).append(e)
    train, val = [], []
    for label in sorted(by_class):
        items = by_class[label]
        if len(items) < 2:
            raise DatasetError(f"class {LABELS[label]!r} has {len(items)} sample(s); need >= 2")
        order = np.random.default_rng([seed, label]).permutation(len(items))
        n_val = min(math.ceil(ratio * len(items)), len(items) - 1)
        cut = len(items) - n_val
        train.extend(items[i] for i in order[:cut])
        val.extend(items[i] for i in order[cut:])
    return Split(train, val, seed, ratio)


def load_input(path, pipeline: PipelineConfig) -> np.ndarray:
    """One preprocessed image as a float32 plane in [0, 1]."""
    try:
        img = load_image(path)
    except FileNotFoundError:
        raise
    except (ImageIOError, OSError) as exc:
        raise ImageIOError(f"cannot read {path}: {exc}") from exc
    return run_pipeline(img, pipeline).astype(np.float32) / np.float32(255.0)


def make_batch(entries: Sequence[Entry], pipeline: PipelineConfig | None = None
               ) -> tuple[np.ndarray, np.ndarray]:
    """Stack preprocessed images into ``(B, 1, S, S)`` plus their labels, in order."""
    pipeline = pipeline or PipelineConfig()
    s = pipeline.model_input_size
    x = np.empty((len(entries), 1, s, s), dtype=np.float32)
    for i, e in enumerate(entries):
        x[i, 0] = load_input(e.path, pipeline)
    y = np.array([e.label for e in entries], dtype=np.int64)
    return x, y


def generate_synthetic_glyphs(count_per_class: int, seed: int, out) -> DatasetIndex:
    """Write ``count_per_class`` jittered glyph PGMs for each of the 36 classes."""
    if count_per_class < 2:
        raise ConfigError(f"count_per_class must be >= 2, got {count_per_class}")
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for label, name in enumerate(LABELS):
            d = out / name
            d.mkdir(exist_ok=True)
            rng = np.random.default_rng([seed, label])
            for k in range(count_per_class):
                save_image(random_glyph(name, rng), d / f"{name}_{k:05d}.pgm")
    except OSError as exc:
        raise ImageIOError(f"cannot write synthetic dataset to {out}: {exc}") from exc
    return scan_dataset(out)
