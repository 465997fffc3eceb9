"""Grayscale conversion, resampling, filtering, and thresholding.

All operators are pure: they never modify their input and return new uint8
arrays. Windowed operators replicate edge pixels at the borders.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ConfigError


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Rec.601 luma, ``round(0.299 R + 0.587 G + 0.114 B)`` with halves rounded up."""
    img = np.asarray(img)
    if img.ndim == 2:
        return img.astype(np.uint8, copy=True)
    rgb = img.astype(np.int32)
    # integer weights keep the rounding exact
    y = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return np.clip(y, 0, 255).astype(np.uint8)


def _bilinear_axis(n_in: int, n_out: int):
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0, n_in - 1)
    i0 = np.floor(src).astype(np.intp)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, src - i0


def resize_bilinear(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear resize with half-pixel-centre sampling.

    Source coordinates are ``(dst + 0.5) * in / out - 0.5``, clamped to the
    image, so resizing to the same size is exactly the identity.
    """
    if out_w < 1 or out_h < 1:
        raise ConfigError(f"target size must be positive, got {out_w}x{out_h}")
    img = np.asarray(img)
    h, w = img.shape
    if (h, w) == (out_h, out_w):
        return img.copy()
    y0, y1, fy = _bilinear_axis(h, out_h)
    x0, x1, fx = _bilinear_axis(w, out_w)
    a = img.astype(np.float64)
    rows = a[y0] * (1 - fy)[:, None] + a[y1] * fy[:, None]
    out = rows[:, x0] * (1 - fx) + rows[:, x1] * fx
    return _round_half_up(out)


def gaussian_kernel1d(sigma: float, ksize: int) -> np.ndarray:
    """Sampled Gaussian of odd length ``ksize``, normalized to sum to 1."""
    if not sigma > 0:
        raise ConfigError(f"sigma must be positive, got {sigma}")
    if ksize < 1 or ksize % 2 == 0:
        raise ConfigError(f"kernel size must be odd and >= 1, got {ksize}")
    r = ksize // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img: np.ndarray, sigma: float = 1.0, ksize: int = 5) -> np.ndarray:
    """Separable Gaussian blur with edge replication."""
    k = gaussian_kernel1d(sigma, ksize)
    r = ksize // 2
    a = np.pad(np.asarray(img, dtype=np.float64), r, mode="edge")
    h, w = np.asarray(img).shape
    tmp = sum(k[i] * a[:, i:i + w] for i in range(ksize))
    out = sum(k[i] * tmp[i:i + h, :] for i in range(ksize))
    return _round_half_up(out)


def median_filter(img: np.ndarray, window: int = 3) -> np.ndarray:
    """Replace each pixel with the median of its ``window`` x ``window`` neighbourhood."""
    if window < 1 or window % 2 == 0:
        raise ConfigError(f"median window must be odd, got {window}")
    if window == 1:
        return np.array(img, dtype=np.uint8)
    r = window // 2
    a = np.pad(np.asarray(img, dtype=np.uint8), r, mode="edge")
    win = sliding_window_view(a, (window, window)).reshape(*np.asarray(img).shape, -1)
    mid = window * window // 2
    return np.partition(win, mid, axis=-1)[..., mid].astype(np.uint8)


def stretch_contrast(img: np.ndarray) -> np.ndarray:
    """Linear min-max stretch onto [0, 255]; constant images come back unchanged."""
    img = np.asarray(img)
    lo, hi = int(img.min()), int(img.max())
    if lo == hi:
        return img.astype(np.uint8, copy=True)
    span = hi - lo
    p = img.astype(np.int64) - lo
    # round(255 * p / span) with halves up, in integers
    return ((510 * p + span) // (2 * span)).astype(np.uint8)


def threshold_binary(img: np.ndarray, t: int) -> np.ndarray:
    """255 where the pixel is strictly above ``t``, else 0."""
    if not 0 <= t <= 255:
        raise ConfigError(f"threshold must be in [0, 255], got {t}")
    return np.where(np.asarray(img) > t, 255, 0).astype(np.uint8)


def otsu_threshold_value(img: np.ndarray) -> int:
    """Threshold maximizing between-class variance; smallest one on ties.

    Class 0 is ``pixel <= t`` and class 1 is ``pixel > t``. The comparison is
    done in exact integer arithmetic: with counts ``n0, n1`` and intensity sums
    ``s0, s1`` the between-class variance is proportional to
    ``(n1*s0 - n0*s1)**2 / (n0*n1)``.
    """
    img = np.asarray(img)
    hist = np.bincount(img.ravel(), minlength=256)
    nz = np.flatnonzero(hist)
    if len(nz) == 1:
        return int(nz[0])
    n0 = np.cumsum(hist).tolist()
    s0 = np.cumsum(hist * np.arange(256)).tolist()
    total_n, total_s = n0[-1], s0[-1]
    best_t, best_num, best_den = 0, 0, 1
    for t in range(256):
        a, b = n0[t], total_n - n0[t]
        if a == 0 or b == 0:
            continue
        num = (b * s0[t] - a * (total_s - s0[t])) ** 2
        den = a * b
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def threshold_otsu(img: np.ndarray) -> tuple[np.ndarray, int]:
    t = otsu_threshold_value(img)
    return threshold_binary(img, t), t


def apply_mask(img: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Keep ``img`` where ``mask`` is nonzero, zero elsewhere."""
    return np.where(np.asarray(mask) > 0, img, 0).astype(np.uint8)

