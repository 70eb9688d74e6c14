"""Layer implementations with exact manual forward/backward passes.

Dense-path values are [batch, features]; conv-path values are
[batch, m, m, channels].  Convolutions run as matrix products against im2col
patch matrices (channel-major vectorization, shared with `rpnet.linalg` and
`rpnet.complexity`).  Random-projection layers keep their projection matrix
out of the trainable parameter dicts; it is rebuilt from the recorded seed
(or overridden through the `fixed` attribute, e.g. with an identity matrix
in equivalence tests).
"""

from __future__ import annotations

import numpy as np

from ..linalg import gaussian_matrix, patch_indices


def he_normal(rng: np.random.Generator, shape: tuple, fan_in: int) -> np.ndarray:
    return rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)


def im2col_batch(x: np.ndarray, h: int, stride: int, padding: str) -> np.ndarray:
    """[B, m, m, c] -> [B, c*h*h, p*p] patch matrices."""
    b, m, _, c = x.shape
    p, pad, size, rows, cols, chans = patch_indices(m, c, h, stride, padding)
    padded = np.zeros((b, size, size, c))
    padded[:, pad : pad + m, pad : pad + m, :] = x
    # contiguous so downstream matrix products take one deterministic BLAS path
    return np.ascontiguousarray(padded[:, rows, cols, chans])


def col2im_batch(gcols: np.ndarray, m: int, c: int, h: int, stride: int, padding: str) -> np.ndarray:
    """Adjoint of im2col_batch: [B, c*h*h, p*p] -> [B, m, m, c]."""
    b = gcols.shape[0]
    p, pad, size, rows, cols, chans = patch_indices(m, c, h, stride, padding)
    flat = (rows * size + cols) * c + chans
    flat = flat[None, :, :] + (np.arange(b) * size * size * c)[:, None, None]
    acc = np.bincount(flat.ravel(), weights=gcols.ravel(), minlength=b * size * size * c)
    return acc.reshape(b, size, size, c)[:, pad : pad + m, pad : pad + m, :]


class Dense:
    """Trainable affine map on flat features."""

    kind = "dense"

    def __init__(self, d_in: int, d_out: int):
        self.d_in, self.d_out = d_in, d_out
        self.in_shape, self.out_shape = (d_in,), (d_out,)

    def init_params(self, rng):
        return {
            "weight": he_normal(rng, (self.d_out, self.d_in), self.d_in),
            "bias": np.zeros(self.d_out),
        }

    def forward(self, params, x, mode):
        return x @ params["weight"].T + params["bias"], x

    def backward(self, params, cache, gy):
        x = cache
        grads = {"weight": gy.T @ x, "bias": gy.sum(axis=0)}
        return grads, gy @ params["weight"]


class RpDense:
    """Trainable affine map applied after a fixed random projection."""

    kind = "rp_dense"

    def __init__(self, d_in: int, n: int, d_out: int, seed: int):
        self.d_in, self.n, self.d_out, self.seed = d_in, n, d_out, seed
        self.in_shape, self.out_shape = (d_in,), (d_out,)
        self.fixed = gaussian_matrix(n, d_in, seed).entries

    def init_params(self, rng):
        return {
            "u": he_normal(rng, (self.d_out, self.n), self.n),
            "bias": np.zeros(self.d_out),
        }

    def forward(self, params, x, mode):
        z = x @ self.fixed.T
        return z @ params["u"].T + params["bias"], z

    def backward(self, params, cache, gy):
        z = cache
        grads = {"u": gy.T @ z, "bias": gy.sum(axis=0)}
        return grads, (gy @ params["u"]) @ self.fixed


class Conv:
    """Standard convolution via patch matricization."""

    kind = "conv"

    def __init__(self, m: int, c_in: int, h: int, c_out: int, stride: int, padding: str):
        self.m, self.c_in, self.h, self.c_out = m, c_in, h, c_out
        self.stride, self.padding = stride, padding
        self.p = patch_indices(m, c_in, h, stride, padding)[0]
        self.in_shape = (m, m, c_in)
        self.out_shape = (self.p, self.p, c_out)

    def init_params(self, rng):
        fan_in = self.h * self.h * self.c_in
        return {
            "filters": he_normal(rng, (self.h, self.h, self.c_in, self.c_out), fan_in),
            "bias": np.zeros(self.c_out),
        }

    def _filter_matrix(self, filters):
        # rows are filters vectorized channel-major, matching im2col columns;
        # contiguous so the product matches an equal-valued plain matrix bitwise
        k = self.h * self.h * self.c_in
        return np.ascontiguousarray(filters.transpose(2, 0, 1, 3).reshape(k, self.c_out).T)

    def forward(self, params, x, mode):
        b = x.shape[0]
        cols = im2col_batch(x, self.h, self.stride, self.padding)
        out = self._filter_matrix(params["filters"]) @ cols + params["bias"][:, None]
        return out.transpose(0, 2, 1).reshape(b, self.p, self.p, self.c_out), cols

    def backward(self, params, cache, gy):
        cols = cache
        b = gy.shape[0]
        g_mat = gy.reshape(b, self.p * self.p, self.c_out).transpose(0, 2, 1)
        g_fmat = np.einsum("bop,bkp->ok", g_mat, cols)
        g_filters = (
            g_fmat.T.reshape(self.c_in, self.h, self.h, self.c_out).transpose(1, 2, 0, 3)
        )
        grads = {"filters": g_filters, "bias": g_mat.sum(axis=(0, 2))}
        gcols = self._filter_matrix(params["filters"]).T @ g_mat
        gx = col2im_batch(gcols, self.m, self.c_in, self.h, self.stride, self.padding)
        return grads, gx


class RpConvI:
    """Convolution with one fixed projection of the full vectorized patches."""

    kind = "rp_conv_i"

    def __init__(self, m, c_in, n, h, c_out, stride, padding, seed):
        self.m, self.c_in, self.n, self.h, self.c_out = m, c_in, n, h, c_out
        self.stride, self.padding, self.seed = stride, padding, seed
        self.p = patch_indices(m, c_in, h, stride, padding)[0]
        self.in_shape = (m, m, c_in)
        self.out_shape = (self.p, self.p, c_out)
        self.fixed = gaussian_matrix(n, c_in * h * h, seed).entries

    def init_params(self, rng):
        return {
            "u": he_normal(rng, (self.c_out, self.n), self.n),
            "bias": np.zeros(self.c_out),
        }

    def forward(self, params, x, mode):
        b = x.shape[0]
        cols = im2col_batch(x, self.h, self.stride, self.padding)
        z = self.fixed @ cols
        out = params["u"] @ z + params["bias"][:, None]
        return out.transpose(0, 2, 1).reshape(b, self.p, self.p, self.c_out), z

    def backward(self, params, cache, gy):
        z = cache
        b = gy.shape[0]
        g_mat = gy.reshape(b, self.p * self.p, self.c_out).transpose(0, 2, 1)
        grads = {"u": np.einsum("bop,bnp->on", g_mat, z), "bias": g_mat.sum(axis=(0, 2))}
        gcols = self.fixed.T @ (params["u"].T @ g_mat)
        gx = col2im_batch(gcols, self.m, self.c_in, self.h, self.stride, self.padding)
        return grads, gx


class RpConvII:
    """Per-channel shared projection followed by a trainable per-channel mix.

    Channel contributions are accumulated with the same matrix products as
    RpConvI so that the single-channel case reproduces it bit for bit.
    """

    kind = "rp_conv_ii"

    def __init__(self, m, c_in, n, h, c_out, stride, padding, seed):
        self.m, self.c_in, self.n, self.h, self.c_out = m, c_in, n, h, c_out
        self.stride, self.padding, self.seed = stride, padding, seed
        self.p = patch_indices(m, c_in, h, stride, padding)[0]
        self.in_shape = (m, m, c_in)
        self.out_shape = (self.p, self.p, c_out)
        self.fixed = gaussian_matrix(n, h * h, seed).entries

    def init_params(self, rng):
        fan_in = self.n * self.c_in
        return {
            "u": he_normal(rng, (self.c_out, self.n, self.c_in), fan_in),
            "bias": np.zeros(self.c_out),
        }

    def _channel_cols(self, cols, b):
        # channel-major vectorization makes per-channel blocks contiguous rows
        return cols.reshape(b, self.c_in, self.h * self.h, self.p * self.p)

    def forward(self, params, x, mode):
        b = x.shape[0]
        cols = im2col_batch(x, self.h, self.stride, self.padding)
        chan = self._channel_cols(cols, b)
        z = np.empty((b, self.c_in, self.n, self.p * self.p))
        out = None
        for j in range(self.c_in):
            z[:, j] = self.fixed @ chan[:, j]
            term = params["u"][:, :, j] @ z[:, j]
            out = term if out is None else out + term
        out = out + params["bias"][:, None]
        return out.transpose(0, 2, 1).reshape(b, self.p, self.p, self.c_out), z

    def backward(self, params, cache, gy):
        z = cache
        b = gy.shape[0]
        g_mat = gy.reshape(b, self.p * self.p, self.c_out).transpose(0, 2, 1)
        g_u = np.einsum("bop,bjnp->onj", g_mat, z)
        gchan = np.empty((b, self.c_in, self.h * self.h, self.p * self.p))
        for j in range(self.c_in):
            gchan[:, j] = self.fixed.T @ (params["u"][:, :, j].T @ g_mat)
        grads = {"u": g_u, "bias": g_mat.sum(axis=(0, 2))}
        gcols = gchan.reshape(b, self.c_in * self.h * self.h, self.p * self.p)
        gx = col2im_batch(gcols, self.m, self.c_in, self.h, self.stride, self.padding)
        return grads, gx


class MaxPool:
    """Per-channel max over h x h windows; ties keep the first scan position."""

    kind = "max_pool"

    def __init__(self, m, c, h, stride, padding):
        self.m, self.c, self.h = m, c, h
        self.stride, self.padding = stride, padding
        p, pad, size, rows, cols, _ = patch_indices(m, 1, h, stride, padding)
        self.p, self._pad, self._size = p, pad, size
        self._rows, self._cols = rows, cols
        self.in_shape = (m, m, c)
        self.out_shape = (p, p, c)

    def init_params(self, rng):
        return {}

    def _windows(self, x):
        b = x.shape[0]
        padded = np.full((b, self._size, self._size, self.c), -np.inf)
        padded[:, self._pad : self._pad + self.m, self._pad : self._pad + self.m, :] = x
        return padded[:, self._rows, self._cols, :]  # [B, h*h, P, c]

    def forward(self, params, x, mode):
        windows = self._windows(x)
        winners = windows.argmax(axis=1)  # [B, P, c]; argmax keeps the first tie
        out = windows.max(axis=1)
        b = x.shape[0]
        return out.reshape(b, self.p, self.p, self.c), winners

    def backward(self, params, cache, gy):
        winners = cache
        b = gy.shape[0]
        g = gy.reshape(b, self.p * self.p, self.c)
        j = np.arange(self.p * self.p)[None, :, None]
        rsel = self._rows[winners, j]
        csel = self._cols[winners, j]
        ch = np.broadcast_to(np.arange(self.c)[None, None, :], winners.shape)
        flat = (rsel * self._size + csel) * self.c + ch
        flat = flat + (np.arange(b) * self._size * self._size * self.c)[:, None, None]
        acc = np.bincount(
            flat.ravel(), weights=g.ravel(), minlength=b * self._size * self._size * self.c
        )
        padded = acc.reshape(b, self._size, self._size, self.c)
        gx = padded[:, self._pad : self._pad + self.m, self._pad : self._pad + self.m, :]
        return {}, gx


class BatchNorm:
    """Batch normalization over the batch (and spatial) axes per feature/channel."""

    kind = "batch_norm"

    def __init__(self, shape: tuple, epsilon: float, momentum: float):
        self.in_shape = self.out_shape = shape
        self.epsilon, self.momentum = epsilon, momentum
        self.features = shape[-1]
        self.axes = tuple(range(len(shape)))  # batch axis + spatial axes of x

    def init_params(self, rng):
        return {
            "scale": np.ones(self.features),
            "shift": np.zeros(self.features),
            "running_mean": np.zeros(self.features),
            "running_var": np.ones(self.features),
        }

    def forward(self, params, x, mode):
        if mode == "train":
            mean = x.mean(axis=self.axes)
            var = x.var(axis=self.axes)
            params["running_mean"] *= self.momentum
            params["running_mean"] += (1.0 - self.momentum) * mean
            params["running_var"] *= self.momentum
            params["running_var"] += (1.0 - self.momentum) * var
        else:
            mean, var = params["running_mean"], params["running_var"]
        inv_std = 1.0 / np.sqrt(var + self.epsilon)
        xhat = (x - mean) * inv_std
        return params["scale"] * xhat + params["shift"], (xhat, inv_std, mode)

    def backward(self, params, cache, gy):
        xhat, inv_std, mode = cache
        grads = {
            "scale": (gy * xhat).sum(axis=self.axes),
            "shift": gy.sum(axis=self.axes),
        }
        if mode != "train":
            return grads, gy * params["scale"] * inv_std
        count = int(np.prod([gy.shape[ax] for ax in self.axes]))
        gx = (params["scale"] * inv_std / count) * (
            count * gy - grads["shift"] - xhat * grads["scale"]
        )
        return grads, gx


class Relu:
    kind = "relu"

    def __init__(self, shape: tuple):
        self.in_shape = self.out_shape = shape

    def init_params(self, rng):
        return {}

    def forward(self, params, x, mode):
        return np.maximum(x, 0.0), x > 0

    def backward(self, params, cache, gy):
        return {}, gy * cache


class Flatten:
    kind = "flatten"

    def __init__(self, shape: tuple):
        self.in_shape = shape
        self.out_shape = (int(np.prod(shape)),)

    def init_params(self, rng):
        return {}

    def forward(self, params, x, mode):
        return x.reshape(x.shape[0], -1), None

    def backward(self, params, cache, gy):
        return {}, gy.reshape(gy.shape[0], *self.in_shape)
