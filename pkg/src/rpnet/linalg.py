"""Dense tensor kernels, seeded randomness, random matrices, and patch matricization.

All numeric values are numpy float64 arrays ("tensors"): dense, row-major,
double precision.  Randomness is frozen to one algorithm and never changed:
the Philox 4x64 counter-based bit generator, with normal variates drawn by
numpy's ziggurat sampler.  Identical seeds therefore produce bit-identical
streams across runs and platforms.

Patch vectorization order (shared contract with the network layers and the
complexity counter): a column of an im2col matrix lists the patch entries
channel-major, then patch-row, then patch-column, i.e. flat index
``ch*h*h + pr*h + pc``.  Columns enumerate output positions row-major.
Same padding places ``floor((h-1)/2)`` leading zeros on the top/left.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

GAUSSIAN = "gaussian"
ORTHOPROJECTOR = "orthoprojector"

_PADDINGS = ("same", "valid")


def seeded_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic generator for (seed, stream); streams are independent."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be a uint64, got {seed}")
    return np.random.Generator(np.random.Philox(key=[int(seed), int(stream)]))


@dataclass(frozen=True)
class ProjectionMatrix:
    """A fixed (non-trainable) random matrix plus the recipe that built it."""

    n: int
    d: int
    kind: str
    seed: int
    entries: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.d)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def as_matrix(a) -> np.ndarray:
    """Accept a ProjectionMatrix or any array-like; return a float64 2-D array."""
    if isinstance(a, ProjectionMatrix):
        a = a.entries
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def gaussian_matrix(n: int, d: int, seed: int) -> ProjectionMatrix:
    """[n, d] matrix with i.i.d. normal entries, mean 0, variance 1/n."""
    if n < 1 or d < 1:
        raise ValueError(f"matrix dims must be positive, got n={n}, d={d}")
    rng = seeded_rng(seed)
    entries = rng.standard_normal((n, d)) / np.sqrt(n)
    return ProjectionMatrix(n=n, d=d, kind=GAUSSIAN, seed=seed, entries=entries)


def random_orthoprojector(n: int, d: int, seed: int) -> ProjectionMatrix:
    """[n, d] matrix sqrt(d/n)*Phi where the rows of Phi are orthonormal.

    Phi comes from a QR factorization of a seeded Gaussian draw.  Degenerate
    draws are re-sampled on sub-streams (at most 8 attempts).
    """
    if n < 1 or d < 1:
        raise ValueError(f"matrix dims must be positive, got n={n}, d={d}")
    if n > d:
        raise ValueError(f"orthoprojector needs n <= d, got n={n}, d={d}")
    for attempt in range(8):
        g = seeded_rng(seed, stream=attempt).standard_normal((d, n))
        q, r = np.linalg.qr(g)
        if np.min(np.abs(np.diag(r))) > 1e-10 * np.sqrt(d):
            phi = q.T
            entries = np.sqrt(d / n) * phi
            return ProjectionMatrix(
                n=n, d=d, kind=ORTHOPROJECTOR, seed=seed, entries=entries
            )
    raise ValueError(f"rank-deficient Gaussian draws for 8 sub-seeds of {seed}")


# ---------------------------------------------------------------------------
# Patch matricization (im2col / col2im)
# ---------------------------------------------------------------------------


def conv_output_size(m: int, h: int, stride: int, padding: str) -> int:
    """Output spatial extent p for an m x m input."""
    if m < 1:
        raise ValueError(f"input size must be positive, got {m}")
    if h < 1 or stride < 1:
        raise ValueError(f"filter size and stride must be positive, got h={h}, stride={stride}")
    if padding not in _PADDINGS:
        raise ValueError(f"padding must be one of {_PADDINGS}, got {padding!r}")
    if padding == "same":
        return -(-m // stride)  # ceil(m / stride)
    if h > m:
        raise ValueError(f"filter h={h} larger than input m={m} under valid padding")
    return (m - h) // stride + 1


@lru_cache(maxsize=None)
def patch_indices(m: int, c: int, h: int, stride: int, padding: str):
    """Gather coordinates mapping a padded [M, M, c] image to im2col columns.

    Returns (p, pad, padded_size, rows, cols, chans) where rows/cols/chans are
    [c*h*h, p*p] integer arrays indexing the padded image.  Cached because the
    same geometry repeats for every sample of a batch.
    """
    p = conv_output_size(m, h, stride, padding)
    pad = (h - 1) // 2 if padding == "same" else 0
    padded_size = max(m + 2 * pad, (p - 1) * stride + h)

    k = np.arange(c * h * h)
    ch, rem = k // (h * h), k % (h * h)
    pr, pc = rem // h, rem % h

    j = np.arange(p * p)
    out_r, out_c = j // p, j % p

    rows = out_r[None, :] * stride + pr[:, None]
    cols = out_c[None, :] * stride + pc[:, None]
    chans = np.broadcast_to(ch[:, None], rows.shape)
    return p, pad, padded_size, rows, cols, chans


def _pad_image(x: np.ndarray, pad: int, padded_size: int, fill: float) -> np.ndarray:
    m = x.shape[-3]
    before = (0,) * (x.ndim - 3)
    out_shape = x.shape[: x.ndim - 3] + (padded_size, padded_size) + x.shape[-1:]
    padded = np.full(out_shape, fill, dtype=np.float64)
    padded[..., pad : pad + m, pad : pad + m, :] = x
    return padded


def im2col(x, h: int, stride: int = 1, padding: str = "same") -> np.ndarray:
    """Matricize an [m, m, c] image into patch columns of shape [c*h*h, p*p].

    Column j holds the patch at output position (j // p, j % p); zero fill
    outside the image under same padding.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected an [m, m, c] image, got shape {x.shape}")
    m, _, c = x.shape
    p, pad, padded_size, rows, cols, chans = patch_indices(m, c, h, stride, padding)
    padded = _pad_image(x, pad, padded_size, 0.0)
    return padded[rows, cols, chans]


def col2im(cols, m: int, c: int, h: int, stride: int = 1, padding: str = "same") -> np.ndarray:
    """Exact adjoint of im2col: scatter-add patch columns back to an image."""
    cols = np.asarray(cols, dtype=np.float64)
    p, pad, padded_size, rows, cidx, chans = patch_indices(m, c, h, stride, padding)
    if cols.shape != rows.shape:
        raise ValueError(f"expected cols of shape {rows.shape}, got {cols.shape}")
    flat = (rows * padded_size + cidx) * c + chans
    acc = np.bincount(flat.ravel(), weights=cols.ravel(), minlength=padded_size**2 * c)
    img = acc.reshape(padded_size, padded_size, c)
    return img[pad : pad + m, pad : pad + m, :]


# ---------------------------------------------------------------------------
# Standard dense kernels
# ---------------------------------------------------------------------------


def matmul(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape[-1] != b.shape[-2 if b.ndim > 1 else 0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a @ b


def add(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"add shape mismatch: {a.shape} vs {b.shape}")
    return a + b


def transpose(a) -> np.ndarray:
    return np.asarray(a, dtype=np.float64).T


def relu(a) -> np.ndarray:
    """Elementwise positive part, max(0, a_i)."""
    return np.maximum(np.asarray(a, dtype=np.float64), 0.0)
