"""Image containers, I/O, and the preprocessing/segmentation operators."""
from .ops import (
    apply_mask, gaussian_blur, gaussian_kernel1d, median_filter, otsu_threshold_value,
    resize_bilinear, stretch_contrast, threshold_binary, threshold_otsu, to_grayscale,
)
from .pipeline import PipelineConfig, pipeline_stages, run_pipeline
from .pnm import decode_pnm, encode_pnm, load_gray, load_image, save_image
from .segment import canny, largest_foreground_mask, sobel_gradients

__all__ = [
    "PipelineConfig", "apply_mask", "canny", "decode_pnm", "encode_pnm", "gaussian_blur",
    "gaussian_kernel1d", "largest_foreground_mask", "load_gray", "load_image", "median_filter",
    "otsu_threshold_value", "pipeline_stages", "resize_bilinear", "run_pipeline", "save_image",
    "sobel_gradients", "stretch_contrast", "threshold_binary", "threshold_otsu", "to_grayscale",
]
