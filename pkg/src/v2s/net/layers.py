"""Layer primitives: forward passes and exact analytic gradients.

Activations travel channels-last as (B, H, W, C); convolution lowers 3x3
same-padded windows to a tall matrix and lets BLAS do the work, chunking
the batch so the lowered buffer stays modest.  The lowering buffer is
thread-local scratch reused across calls.
"""

from __future__ import annotations

import threading

import numpy as np

_COLS_BUDGET_BYTES = 96 << 20
_scratch = threading.local()


def _scratch_buffer(n_items: int, dtype) -> np.ndarray:
    store = getattr(_scratch, "bufs", None)
    if store is None:
        store = _scratch.bufs = {}
    key = np.dtype(dtype).str
    buf = store.get(key)
    if buf is None or buf.size < n_items:
        buf = store[key] = np.empty(n_items, dtype=dtype)
    return buf[:n_items]


def _conv_chunk(h: int, w: int, c: int, itemsize: int) -> int:
    per_sample = h * w * 9 * c * itemsize
    return max(1, _COLS_BUDGET_BYTES // per_sample)


def pad_same(x: np.ndarray) -> np.ndarray:
    """Zero-pad the spatial dims of an (n, h, w, c) batch by one pixel."""
    n, h, w, c = x.shape
    xp = np.zeros((n, h + 2, w + 2, c), dtype=x.dtype)
    xp[:, 1:-1, 1:-1, :] = x
    return xp


def _lower_windows(xp: np.ndarray, h: int, w: int) -> np.ndarray:
    """(n, h+2, w+2, c) padded input -> (n*h*w, 9c) window matrix."""
    n, _, _, c = xp.shape
    cols = _scratch_buffer(n * h * w * 9 * c, xp.dtype).reshape(n, h, w, 3, 3, c)
    for ky in range(3):
        for kx in range(3):
            cols[:, :, :, ky, kx, :] = xp[:, ky:ky + h, kx:kx + w, :]
    return cols.reshape(n * h * w, 9 * c)


def conv3x3_forward(xp: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Same-padded 3x3 convolution on a pre-padded input.

    xp is (n, h+2, w+2, c) from pad_same; w is (3, 3, C_in, C_out).
    """
    n, hp, wp, c = xp.shape
    h, wd = hp - 2, wp - 2
    out = w.shape[-1]
    wm = w.reshape(9 * c, out)
    y = np.empty((n, h, wd, out), dtype=xp.dtype)
    step = _conv_chunk(h, wd, c, xp.itemsize)
    for s in range(0, n, step):
        nn = min(step, n - s)
        cols = _lower_windows(xp[s:s + nn], h, wd)
        np.matmul(cols, wm, out=y[s:s + nn].reshape(nn * h * wd, out))
    y += b
    return y


def conv3x3_backward(dy: np.ndarray, xp: np.ndarray, w: np.ndarray,
                     need_dx: bool = True):
    """Gradients of conv3x3_forward given the cached padded input."""
    n, hp, wp, c = xp.shape
    h, wd = hp - 2, wp - 2
    out = w.shape[-1]
    wm = w.reshape(9 * c, out)
    dw = np.zeros((9 * c, out), dtype=xp.dtype)
    dxp = np.zeros_like(xp) if need_dx else None
    step = _conv_chunk(h, wd, c, xp.itemsize)
    for s in range(0, n, step):
        nn = min(step, n - s)
        cols = _lower_windows(xp[s:s + nn], h, wd)
        dyf = dy[s:s + nn].reshape(nn * h * wd, out)
        dw += cols.T @ dyf
        if need_dx:
            dcols = (dyf @ wm.T).reshape(nn, h, wd, 3, 3, c)
            for ky in range(3):
                for kx in range(3):
                    dxp[s:s + nn, ky:ky + h, kx:kx + wd, :] += dcols[:, :, :, ky, kx, :]
    db = dy.sum(axis=(0, 1, 2))
    dx = dxp[:, 1:-1, 1:-1, :] if need_dx else None
    return dx, dw.reshape(w.shape), db


def maxpool2_forward(x: np.ndarray):
    """2x2 max pooling, stride 2.  Returns (y, argmax) where argmax holds
    the within-window winner in row-major scan order (ties to the first)."""
    n, h, w, c = x.shape
    h2, w2 = h // 2, w // 2
    windows = (x.reshape(n, h2, 2, w2, 2, c)
                .transpose(0, 1, 3, 2, 4, 5)
                .reshape(n, h2, w2, 4, c))
    idx = windows.argmax(axis=3).astype(np.int8)
    y = windows.max(axis=3)
    return y, idx


def maxpool2_backward(dy: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Route pooled gradients back to the argmax positions."""
    n, h2, w2, c = dy.shape
    buf = np.zeros((n, h2, w2, 4, c), dtype=dy.dtype)
    np.put_along_axis(buf, idx[:, :, :, None, :].astype(np.int64), dy[:, :, :, None, :], axis=3)
    return (buf.reshape(n, h2, w2, 2, 2, c)
               .transpose(0, 1, 3, 2, 4, 5)
               .reshape(n, h2 * 2, w2 * 2, c))


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    return x @ w + b


def dense_backward(dy: np.ndarray, x: np.ndarray, w: np.ndarray):
    return dy @ w.T, x.T @ dy, dy.sum(axis=0)


def leaky_relu_forward(x: np.ndarray, alpha: float):
    neg = x < 0
    y = np.where(neg, x * alpha, x)
    return y, neg


def leaky_relu_backward(dy: np.ndarray, neg: np.ndarray, alpha: float) -> np.ndarray:
    return np.where(neg, dy * alpha, dy)


def tanh_forward(x: np.ndarray):
    y = np.tanh(x)
    return y, y


def tanh_backward(dy: np.ndarray, y: np.ndarray) -> np.ndarray:
    return dy * (1.0 - y * y)


def dropout_forward(x: np.ndarray, rate: float, rng: np.random.Generator):
    """Inverted dropout: surviving units are scaled by 1/(1-rate) so the
    expected activation matches eval mode."""
    if rate == 0.0:
        return x, None
    mask = rng.random(x.shape) >= rate
    return x * mask * (1.0 / (1.0 - rate)), mask


def dropout_backward(dy: np.ndarray, mask, rate: float) -> np.ndarray:
    if mask is None:
        return dy
    return dy * mask * (1.0 / (1.0 - rate))
