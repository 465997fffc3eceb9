"""The preprocessing chain that turns a photo into a classifier input plane."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from ..errors import ConfigError
from .ops import (
    apply_mask, gaussian_blur, median_filter, resize_bilinear, stretch_contrast,
    threshold_binary, threshold_otsu, to_grayscale,
)
from .segment import canny, largest_foreground_mask


@dataclass(frozen=True)
class PipelineConfig:
    target_preprocess_size: int = 226
    model_input_size: int = 100
    blur_sigma: float = 1.0
    blur_kernel: int = 5
    median_window: int = 3
    binary_threshold: int = 90
    use_otsu: bool = False
    canny_low: int = 10
    canny_high: int = 100
    contrast: bool = True
    blur: bool = True
    median: bool = True
    segment: bool = True
    edges: bool = False

    def __post_init__(self):
        if not 0 <= self.canny_low < self.canny_high <= 255:
            raise ConfigError(f"need 0 <= canny_low < canny_high <= 255, "
                              f"got {self.canny_low}/{self.canny_high}")
        for name in ("blur_kernel", "median_window"):
            v = getattr(self, name)
            if v < 1 or v % 2 == 0:
                raise ConfigError(f"{name} must be odd and >= 1, got {v}")
        for name in ("target_preprocess_size", "model_input_size"):
            if getattr(self, name) < 8:
                raise ConfigError(f"{name} must be >= 8, got {getattr(self, name)}")
        if not self.blur_sigma > 0:
            raise ConfigError(f"blur_sigma must be positive, got {self.blur_sigma}")
        if not 0 <= self.binary_threshold <= 255:
            raise ConfigError(f"binary_threshold must be in [0, 255], got {self.binary_threshold}")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown pipeline keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def pipeline_stages(img: np.ndarray, cfg: PipelineConfig | None = None) -> list[tuple[str, np.ndarray]]:
    """Run the chain and return ``(stage_name, image)`` for every stage that ran.

    Order: grayscale, resize to the preprocessing size, contrast stretch,
    Gaussian blur, median filter, segmentation mask (threshold then largest
    component, multiplied onto the grayscale), Canny edges, final resize.
    """
    cfg = cfg or PipelineConfig()
    stages = []
    g = to_grayscale(img)
    stages.append(("gray", g))
    s = cfg.target_preprocess_size
    g = resize_bilinear(g, s, s)
    stages.append(("resize", g))
    if cfg.contrast:
        g = stretch_contrast(g)
        stages.append(("contrast", g))
    if cfg.blur:
        g = gaussian_blur(g, cfg.blur_sigma, cfg.blur_kernel)
        stages.append(("blur", g))
    if cfg.median:
        g = median_filter(g, cfg.median_window)
        stages.append(("median", g))
    if cfg.segment:
        binary = threshold_otsu(g)[0] if cfg.use_otsu else threshold_binary(g, cfg.binary_threshold)
        mask = largest_foreground_mask(binary)
        g = apply_mask(g, mask)
        stages.append(("segment", g))
    if cfg.edges:
        g = canny(g, cfg.canny_low, cfg.canny_high)
        stages.append(("edges", g))
    m = cfg.model_input_size
    g = resize_bilinear(g, m, m)
    stages.append(("final", g))
    return stages


def run_pipeline(img: np.ndarray, cfg: PipelineConfig | None = None) -> np.ndarray:
    return pipeline_stages(img, cfg)[-1][1]
