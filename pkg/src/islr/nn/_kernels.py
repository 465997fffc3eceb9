"""Compiled loops for the memory-bound parts of conv and pooling.

The matrix products stay in BLAS; these only gather/scatter patches and scan
pooling windows, which numpy does poorly when the innermost run is short.
"""
import numba
import numpy as np


@numba.njit(cache=True)
def im2col_hwc(xp, kh, kw, stride, oh, ow):
    """Patches of one padded H x W x C image as rows of (kh, kw, C) order."""
    c = xp.shape[2]
    cols = np.empty((oh * ow, kh * kw * c), dtype=xp.dtype)
    for y in range(oh):
        for x in range(ow):
            r = y * ow + x
            k = 0
            for i in range(kh):
                for j in range(kw):
                    yy = y * stride + i
                    xx = x * stride + j
                    for ch in range(c):
                        cols[r, k + ch] = xp[yy, xx, ch]
                    k += c
    return cols


@numba.njit(cache=True)
def im2col_hwc_t(xp, kh, kw, stride, oh, ow):
    """Transpose of ``im2col_hwc``: one row per (kh, kw, C) tap."""
    c = xp.shape[2]
    cols = np.empty((kh * kw * c, oh * ow), dtype=xp.dtype)
    k = 0
    for i in range(kh):
        for j in range(kw):
            for ch in range(c):
                r = 0
                for y in range(oh):
                    for x in range(ow):
                        cols[k, r] = xp[y * stride + i, x * stride + j, ch]
                        r += 1
                k += 1
    return cols


@numba.njit(cache=True)
def col2im_hwc(dcols, out, kh, kw, stride, oh, ow):
    """Scatter-add rows of patch gradients into a padded H x W x C image."""
    c = out.shape[2]
    for y in range(oh):
        for x in range(ow):
            r = y * ow + x
            k = 0
            for i in range(kh):
                for j in range(kw):
                    yy = y * stride + i
                    xx = x * stride + j
                    for ch in range(c):
                        out[yy, xx, ch] += dcols[r, k + ch]
                    k += c


@numba.njit(cache=True)
def maxpool_nchw(x, kernel, stride, oh, ow):
    """Window maxima plus the flat (row-major) index of the first maximum."""
    n, c = x.shape[0], x.shape[1]
    out = np.empty((n, c, oh, ow), dtype=x.dtype)
    arg = np.empty((n, c, oh, ow), dtype=np.int32)
    for b in range(n):
        for ch in range(c):
            for y in range(oh):
                for xx in range(ow):
                    y0 = y * stride
                    x0 = xx * stride
                    best = x[b, ch, y0, x0]
                    besti = 0
                    for i in range(kernel):
                        for j in range(kernel):
                            v = x[b, ch, y0 + i, x0 + j]
                            if v > best:
                                best = v
                                besti = i * kernel + j
                    out[b, ch, y, xx] = best
                    arg[b, ch, y, xx] = besti
    return out, arg


@numba.njit(cache=True)
def maxpool_backward_nchw(grad, arg, h, w, kernel, stride):
    n, c, oh, ow = grad.shape
    dx = np.zeros((n, c, h, w), dtype=grad.dtype)
    for b in range(n):
        for ch in range(c):
            for y in range(oh):
                for xx in range(ow):
                    a = arg[b, ch, y, xx]
                    dx[b, ch, y * stride + a // kernel, xx * stride + a % kernel] += grad[b, ch, y, xx]
    return dx
