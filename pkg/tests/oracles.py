"""Slow, direct reference implementations used only by the tests.

Nothing here shares code with the package; each follows the textbook
definition as literally as possible.
"""
from __future__ import annotations

import math
from collections import deque
from fractions import Fraction

import numpy as np


def otsu_brute_force(img: np.ndarray) -> int:
    """Try every t in 0..255, split pixels into <= t / > t, maximize w0*w1*(mu0-mu1)^2."""
    pixels = [int(v) for v in np.asarray(img).ravel()]
    n = len(pixels)
    if len(set(pixels)) == 1:
        return pixels[0]
    best_t, best = None, None
    for t in range(256):
        lo = [p for p in pixels if p <= t]
        hi = [p for p in pixels if p > t]
        if not lo or not hi:
            var = Fraction(0)
        else:
            w0, w1 = Fraction(len(lo), n), Fraction(len(hi), n)
            mu0, mu1 = Fraction(sum(lo), len(lo)), Fraction(sum(hi), len(hi))
            var = w0 * w1 * (mu0 - mu1) ** 2
        if best is None or var > best:
            best_t, best = t, var
    return best_t


def gaussian_2d_kernel(sigma: float, ksize: int) -> np.ndarray:
    r = ksize // 2
    k = np.array([[math.exp(-((i - r) ** 2 + (j - r) ** 2) / (2 * sigma ** 2))
                   for j in range(ksize)] for i in range(ksize)])
    return k / k.sum()


def median_direct(img: np.ndarray, window: int) -> np.ndarray:
    h, w = img.shape
    r = window // 2
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            vals = sorted(int(img[min(max(y + i, 0), h - 1), min(max(x + j, 0), w - 1)])
                          for i in range(-r, r + 1) for j in range(-r, r + 1))
            out[y, x] = vals[len(vals) // 2]
    return out


def sobel_magnitude_direct(img: np.ndarray) -> np.ndarray:
    kx = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
    h, w = img.shape
    mag = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            gx = gy = 0.0
            for i in range(3):
                for j in range(3):
                    v = float(img[min(max(y + i - 1, 0), h - 1), min(max(x + j - 1, 0), w - 1)])
                    gx += kx[i][j] * v
                    gy += kx[j][i] * v
            mag[y, x] = math.sqrt(gx * gx + gy * gy)
    return mag


def component_sizes(mask: np.ndarray) -> list[tuple[int, set]]:
    """8-connected components by BFS flood fill, as (size, pixel set), in scan order."""
    mask = np.asarray(mask) > 0
    h, w = mask.shape
    seen = np.zeros_like(mask)
    comps = []
    for y in range(h):
        for x in range(w):
            if mask[y, x] and not seen[y, x]:
                pix = set()
                q = deque([(y, x)])
                seen[y, x] = True
                while q:
                    cy, cx = q.popleft()
                    pix.add((cy, cx))
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            ny, nx = cy + dy, cx + dx
                            if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                                seen[ny, nx] = True
                                q.append((ny, nx))
                comps.append((len(pix), pix))
    return comps


def conv2d_naive(x, w, b, stride, padding):
    """Quadruple loop over (o, y, x, c/i/j) with explicit zero padding."""
    n, c, h, wd = x.shape
    o, _, kh, kw = w.shape
    if padding == "same":
        oh, ow = -(-h // stride), -(-wd // stride)
        ph = max((oh - 1) * stride + kh - h, 0) // 2
        pw = max((ow - 1) * stride + kw - wd, 0) // 2
    else:
        oh, ow = (h - kh) // stride + 1, (wd - kw) // stride + 1
        ph = pw = 0
    out = np.zeros((n, o, oh, ow))
    for bi in range(n):
        for oc in range(o):
            for yy in range(oh):
                for xx in range(ow):
                    acc = 0.0 if b is None else float(b[oc])
                    for ci in range(c):
                        for i in range(kh):
                            for j in range(kw):
                                sy, sx = yy * stride + i - ph, xx * stride + j - pw
                                if 0 <= sy < h and 0 <= sx < wd:
                                    acc += float(x[bi, ci, sy, sx]) * float(w[oc, ci, i, j])
                    out[bi, oc, yy, xx] = acc
    return out
