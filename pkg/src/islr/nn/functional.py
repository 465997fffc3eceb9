"""Stateless forward/backward kernels on batched NCHW arrays.

Every forward function returns ``(output, cache)``; the matching backward takes
the upstream gradient and that cache. Arrays keep the dtype they come in with
(float32 for training, float64 for gradient checking).
"""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ShapeError
from . import _kernels as _k

LOG_FLOOR = 1e-12


def conv_output_size(size: int, kernel: int, stride: int, padding: str) -> tuple[int, int, int]:
    """Return ``(out, pad_before, pad_after)`` along one spatial axis.

    ``same`` padding follows the usual convention of putting the odd extra
    pixel after the data.
    """
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    if padding == "valid":
        out = (size - kernel) // stride + 1 if size >= kernel else 0
        return out, 0, 0
    if padding == "same":
        out = -(-size // stride)
        total = max((out - 1) * stride + kernel - size, 0)
        return out, total // 2, total - total // 2
    raise ConfigError(f"padding must be 'same' or 'valid', got {padding!r}")


def conv2d_forward(x, w, b=None, stride=1, padding="valid"):
    """2-D cross-correlation via per-image patch flattening.

    x: (N, C, H, W), w: (O, C, kh, kw), b: (O,) or None. Only the padded
    channels-last input is cached; backward rebuilds the patches.
    """
    if x.ndim != 4 or w.ndim != 4:
        raise ShapeError(f"conv2d expects 4-D input and weights, got {x.shape} and {w.shape}")
    n, c, h, wd = x.shape
    o, wc, kh, kw = w.shape
    if wc != c:
        raise ShapeError(f"input has {c} channels but weights expect {wc}")
    oh, pt, pb = conv_output_size(h, kh, stride, padding)
    ow, pl, pr = conv_output_size(wd, kw, stride, padding)
    if oh < 1 or ow < 1 or h + pt + pb < kh or wd + pl + pr < kw:
        raise ShapeError(f"kernel {kh}x{kw} larger than padded input {h}x{wd}")

    # channels-last: patch rows are (kh, kw, C) and each GEMM yields an HWC plane
    xp = np.ascontiguousarray(
        np.pad(x.transpose(0, 2, 3, 1), ((0, 0), (pt, pb), (pl, pr), (0, 0))))
    wmat = np.ascontiguousarray(w.transpose(0, 2, 3, 1).reshape(o, -1))
    wmat_t = np.ascontiguousarray(wmat.T)
    out = np.empty((n, oh * ow, o), dtype=x.dtype)
    for k in range(n):
        cols = _k.im2col_hwc(xp[k], kh, kw, stride, oh, ow)
        np.matmul(cols, wmat_t, out=out[k])
    if b is not None:
        out += b
    out = np.ascontiguousarray(out.reshape(n, oh, ow, o).transpose(0, 3, 1, 2))
    cache = (xp, wmat, w.shape, stride, (pt, pl, h, wd), b is not None)
    return out, cache


def conv2d_backward(grad, cache):
    """Returns ``(dx, dw, db)``; ``db`` is None when the layer has no bias."""
    xp, wmat, w_shape, stride, (pt, pl, h, wd), has_bias = cache
    n = xp.shape[0]
    o, c, kh, kw = w_shape
    oh, ow = grad.shape[2], grad.shape[3]

    g = np.ascontiguousarray(grad.transpose(0, 2, 3, 1)).reshape(n, oh * ow, o)
    dw_t = np.zeros((kh * kw * c, o), dtype=grad.dtype)
    dxp = np.zeros(xp.shape, dtype=grad.dtype)
    for k in range(n):
        dw_t += _k.im2col_hwc_t(xp[k], kh, kw, stride, oh, ow) @ g[k]
        _k.col2im_hwc(g[k] @ wmat, dxp[k], kh, kw, stride, oh, ow)
    dw = dw_t.T.reshape(o, kh, kw, c).transpose(0, 3, 1, 2)
    db = g.sum(axis=(0, 1)) if has_bias else None
    dx = dxp[:, pt:pt + h, pl:pl + wd, :].transpose(0, 3, 1, 2)
    return np.ascontiguousarray(dx), np.ascontiguousarray(dw), db


def maxpool_forward(x, kernel, stride):
    n, c, h, w = x.shape
    if kernel > h or kernel > w:
        raise ShapeError(f"pool kernel {kernel} exceeds input {h}x{w}")
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    oh = (h - kernel) // stride + 1
    ow = (w - kernel) // stride + 1
    # ties resolve to the first maximum in row-major window order
    out, arg = _k.maxpool_nchw(np.ascontiguousarray(x), kernel, stride, oh, ow)
    return out, (x.shape, arg, kernel, stride)


def maxpool_backward(grad, cache):
    (n, c, h, w), arg, kernel, stride = cache
    return _k.maxpool_backward_nchw(np.ascontiguousarray(grad), arg, h, w, kernel, stride)


def relu_forward(x):
    mask = x > 0
    return x * mask, mask


def relu_backward(grad, mask):
    return grad * mask


def dense_forward(x, w, b=None):
    """x: (N, n), w: (n, m) -> (N, m)."""
    if x.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ShapeError(f"dense input {x.shape} does not match weights {w.shape}")
    out = x @ w
    if b is not None:
        out += b
    return out, (x, w, b is not None)


def dense_backward(grad, cache):
    x, w, has_bias = cache
    dw = x.T @ grad
    db = grad.sum(axis=0) if has_bias else None
    return grad @ w.T, dw, db


def dropout_forward(x, rate, train, rng):
    """Inverted dropout. Returns ``(out, mask)``; mask is None in inference."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    if not train or rate == 0.0:
        return x, None
    keep = rng.random(x.shape) >= rate
    mask = keep.astype(x.dtype) / x.dtype.type(1.0 - rate)
    return x * mask, mask


def dropout_backward(grad, mask):
    return grad if mask is None else grad * mask


def softmax(logits):
    """Row-wise softmax over the last axis, stabilized by max subtraction."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_backward(grad, probs):
    # Jacobian-vector product of softmax: p * (g - <g, p>)
    return probs * (grad - (grad * probs).sum(axis=-1, keepdims=True))


def cross_entropy(probs, labels):
    """Mean of ``-ln p[label]`` over the batch, with the probability floored."""
    probs = np.atleast_2d(probs)
    labels = np.atleast_1d(np.asarray(labels))
    k = probs.shape[-1]
    if labels.shape[0] != probs.shape[0]:
        raise ShapeError(f"{labels.shape[0]} labels for {probs.shape[0]} rows")
    if np.any(labels < 0) or np.any(labels >= k):
        raise ConfigError(f"label out of range [0, {k})")
    picked = probs[np.arange(len(labels)), labels]
    return float(np.mean(-np.log(np.maximum(picked, LOG_FLOOR))))


def softmax_cross_entropy(logits, labels):
    """Fused softmax + mean cross-entropy.

    Returns ``(loss, probs, dlogits)`` where ``dlogits = (probs - onehot) / N``.
    """
    logits = np.atleast_2d(logits)
    labels = np.atleast_1d(np.asarray(labels))
    probs = softmax(logits)
    loss = cross_entropy(probs, labels)
    d = probs.copy()
    d[np.arange(len(labels)), labels] -= 1
    d /= len(labels)
    return loss, probs, d
