"""Edge detection and hand-mask extraction."""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..errors import ConfigError

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T


def sobel_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel responses (x to the right, y downward), edge-replicated borders."""
    a = np.pad(np.asarray(img, dtype=np.float64), 1, mode="edge")
    h, w = np.asarray(img).shape
    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    for i in range(3):
        for j in range(3):
            win = a[i:i + h, j:j + w]
            gx += SOBEL_X[i, j] * win
            gy += SOBEL_Y[i, j] * win
    return gx, gy


def non_max_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Zero every pixel that is not a ridge along its quantized gradient direction.

    Directions fall into four sectors (0, 45, 90, 135 degrees). A pixel
    survives when it is strictly larger than the neighbour behind it and at
    least as large as the one ahead, so a flat two-pixel ridge keeps exactly
    one pixel. The one-pixel image border is always suppressed.
    """
    h, w = mag.shape
    out = np.zeros_like(mag)
    if h < 3 or w < 3:
        return out
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    c = mag[1:-1, 1:-1]
    a = angle[1:-1, 1:-1]

    def shifted(dy, dx):
        return mag[1 + dy:h - 1 + dy, 1 + dx:w - 1 + dx]

    # (behind, ahead) neighbour offsets per sector, as (dy, dx)
    sectors = [
        ((a < 22.5) | (a >= 157.5), (0, -1), (0, 1)),
        ((a >= 22.5) & (a < 67.5), (-1, -1), (1, 1)),
        ((a >= 67.5) & (a < 112.5), (-1, 0), (1, 0)),
        ((a >= 112.5) & (a < 157.5), (1, -1), (-1, 1)),
    ]
    keep = np.zeros(c.shape, dtype=bool)
    for sel, behind, ahead in sectors:
        keep |= sel & (c > shifted(*behind)) & (c >= shifted(*ahead))
    out[1:-1, 1:-1] = np.where(keep, c, 0.0)
    return out


def hysteresis(thin: np.ndarray, low: float, high: float) -> np.ndarray:
    """Keep weak (> low) pixels 8-connected to at least one strong (> high) pixel."""
    weak = thin > low
    labels, n = ndimage.label(weak, structure=EIGHT_CONNECTED)
    if n == 0:
        return np.zeros(thin.shape, dtype=bool)
    strong_labels = np.unique(labels[thin > high])
    strong_labels = strong_labels[strong_labels > 0]
    return np.isin(labels, strong_labels)


def canny(img: np.ndarray, low: float = 10, high: float = 100) -> np.ndarray:
    """Canny edges: Sobel gradients, non-maximum suppression, hysteresis.

    Returns a binary image with 255 on retained edge pixels. No smoothing is
    applied here; blur beforehand if needed.
    """
    if not 0 <= low < high <= 255:
        raise ConfigError(f"need 0 <= low < high <= 255, got low={low}, high={high}")
    gx, gy = sobel_gradients(img)
    mag = np.hypot(gx, gy)
    edges = hysteresis(non_max_suppression(mag, gx, gy), low, high)
    return np.where(edges, 255, 0).astype(np.uint8)


def largest_foreground_mask(binary: np.ndarray) -> np.ndarray:
    """Keep only the largest 8-connected component of 255 pixels.

    Equal-sized components resolve to the one met first in raster order.
    """
    fg = np.asarray(binary) > 0
    labels, n = ndimage.label(fg, structure=EIGHT_CONNECTED)
    if n == 0:
        return np.zeros(fg.shape, dtype=np.uint8)
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    return np.where(labels == int(np.argmax(sizes)), 255, 0).astype(np.uint8)
