"""Dataset loading and synthesis.

Binary formats are parsed bit-exactly:

* IDX (MNIST): big-endian magic 0x00000803 (images) / 0x00000801 (labels),
  big-endian 32-bit dimension sizes, then raw uint8 payload.
* CIFAR-10 batches: records of 3073 bytes, one label byte followed by 3072
  pixel bytes in channel-planar order (R plane, G plane, B plane, row-major).

Pixels are scaled to [0, 1]; CIFAR-10 additionally gets per-channel
standardization with training-set statistics recorded on the dataset so the
normalization is never applied twice.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .linalg import seeded_rng

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
CIFAR_RECORD_BYTES = 3073

MNIST_TRAIN_COUNT = 60_000
MNIST_TEST_COUNT = 10_000
CIFAR_TRAIN_COUNT = 50_000
CIFAR_TEST_COUNT = 10_000


class DataFormatError(ValueError):
    """A dataset file violates its documented binary format."""


@dataclass
class Dataset:
    inputs: np.ndarray
    labels: np.ndarray
    name: str
    normalization: dict = field(default_factory=dict)
    canonical: bool = True

    def __post_init__(self):
        if len(self.inputs) != len(self.labels):
            raise DataFormatError(
                f"image/label count mismatch: {len(self.inputs)} vs {len(self.labels)}"
            )

    @property
    def count(self) -> int:
        return len(self.labels)

    def subset(self, count: int) -> "Dataset":
        """First `count` examples (deterministic), same normalization record."""
        return Dataset(
            inputs=self.inputs[:count],
            labels=self.labels[:count],
            name=f"{self.name}[:{count}]",
            normalization=self.normalization,
            canonical=self.canonical,
        )


def _read_idx(path, magic: int, dims: int) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    header = 4 * (dims + 1)
    if len(raw) < header:
        raise DataFormatError(f"truncated payload: {path} shorter than its header")
    fields = struct.unpack(f">{dims + 1}I", raw[:header])
    if fields[0] != magic:
        raise DataFormatError(f"bad magic 0x{fields[0]:08x} in {path}, expected 0x{magic:08x}")
    shape = fields[1:]
    expected = math.prod(shape)
    payload = raw[header:]
    if len(payload) != expected:
        raise DataFormatError(
            f"truncated payload: {path} holds {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(shape)


def load_mnist(images_path, labels_path) -> Dataset:
    """IDX image/label pair as a Dataset with pixels scaled to [0, 1].

    Non-canonical example counts are accepted but flagged via
    ``dataset.canonical = False``.
    """
    images = _read_idx(images_path, IDX_IMAGE_MAGIC, dims=3)
    labels = _read_idx(labels_path, IDX_LABEL_MAGIC, dims=1)
    if images.shape[0] != labels.shape[0]:
        raise DataFormatError(
            f"image/label count mismatch: {images.shape[0]} vs {labels.shape[0]}"
        )
    inputs = images.astype(np.float64)[..., None] / 255.0
    return Dataset(
        inputs=inputs,
        labels=labels.astype(np.int64),
        name="mnist",
        normalization={"scale": "1/255"},
        canonical=images.shape[0] in (MNIST_TRAIN_COUNT, MNIST_TEST_COUNT),
    )


def write_idx_images(path, images_u8: np.ndarray) -> None:
    """Inverse of the IDX image reader; used for fixtures and stand-in data."""
    images_u8 = np.ascontiguousarray(images_u8, dtype=np.uint8)
    if images_u8.ndim != 3:
        raise DataFormatError(f"expected [count, rows, cols] uint8 images, got {images_u8.shape}")
    with open(path, "wb") as f:
        f.write(struct.pack(">4I", IDX_IMAGE_MAGIC, *images_u8.shape))
        f.write(images_u8.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise DataFormatError(f"expected a flat label array, got shape {labels.shape}")
    with open(path, "wb") as f:
        f.write(struct.pack(">2I", IDX_LABEL_MAGIC, labels.shape[0]))
        f.write(labels.tobytes())


def load_cifar10(batch_paths, stats: dict | None = None) -> Dataset:
    """CIFAR-10 binary batches as one Dataset.

    Pixels are scaled by 1/255 and standardized per channel.  Pass the
    ``normalization`` record of the training split via `stats` when loading
    test batches so both splits share the training statistics.
    """
    if isinstance(batch_paths, (str, bytes)) or not hasattr(batch_paths, "__iter__"):
        batch_paths = [batch_paths]
    images, labels = [], []
    for path in batch_paths:
        with open(path, "rb") as f:
            raw = f.read()
        if len(raw) == 0 or len(raw) % CIFAR_RECORD_BYTES != 0:
            raise DataFormatError(
                f"{path}: file length {len(raw)} is not a positive multiple of {CIFAR_RECORD_BYTES}"
            )
        records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD_BYTES)
        labels.append(records[:, 0])
        # channel-planar [3, 32, 32] -> [32, 32, 3]
        images.append(records[:, 1:].reshape(-1, 3, 32, 32).transpose(0, 2, 3, 1))
    inputs = np.concatenate(images).astype(np.float64) / 255.0
    labels = np.concatenate(labels).astype(np.int64)
    if stats is None:
        mean = inputs.mean(axis=(0, 1, 2))
        std = inputs.std(axis=(0, 1, 2))
        std = np.where(std == 0.0, 1.0, std)
    else:
        if not stats.get("applied"):
            raise DataFormatError("stats record does not describe an applied normalization")
        mean = np.asarray(stats["mean"], dtype=np.float64)
        std = np.asarray(stats["std"], dtype=np.float64)
    inputs = (inputs - mean) / std
    return Dataset(
        inputs=inputs,
        labels=labels,
        name="cifar10",
        normalization={"mean": mean.tolist(), "std": std.tolist(), "applied": True},
        canonical=len(labels) in (CIFAR_TRAIN_COUNT, CIFAR_TEST_COUNT),
    )


def write_cifar_batch(path, images_u8: np.ndarray, labels: np.ndarray) -> None:
    """Inverse of the CIFAR-10 batch reader (fixture writer)."""
    images_u8 = np.ascontiguousarray(images_u8, dtype=np.uint8)
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if images_u8.ndim != 4 or images_u8.shape[1:] != (32, 32, 3):
        raise DataFormatError(f"expected [count, 32, 32, 3] images, got {images_u8.shape}")
    planar = images_u8.transpose(0, 3, 1, 2).reshape(len(labels), -1)
    records = np.concatenate([labels[:, None], planar], axis=1)
    with open(path, "wb") as f:
        f.write(records.tobytes())


# ---------------------------------------------------------------------------
# Synthetic inputs
# ---------------------------------------------------------------------------


def synth_sparse(d: int, k: int, count: int, seed: int) -> np.ndarray:
    """[count, d] vectors with uniform random size-k supports, entries U[-1, 1]."""
    if k < 0 or k > d:
        raise ValueError(f"sparsity k={k} out of range for d={d}")
    rng = seeded_rng(seed)
    x = np.zeros((count, d))
    if k > 0 and count > 0:
        supports = np.argpartition(rng.random((count, d)), max(k - 1, 0), axis=1)[:, :k]
        values = rng.uniform(-1.0, 1.0, size=(count, k))
        np.put_along_axis(x, supports, values, axis=1)
    return x


@dataclass(frozen=True)
class ManifoldSpec:
    """A curve with known geometry, randomly rotated into R^d.

    The circle's condition-number radius tau and Euclidean diameter are
    analytic (tau = r, diameter = 2r).  The trefoil's are computed once from a
    dense sampling of its parametrization (reach from curvature and
    self-distance, diameter from pairwise chords) since no closed form exists.
    """

    kind: str
    radius: float
    ambient_dim: int
    rotation_seed: int
    tau: float = field(init=False)
    diameter: float = field(init=False)

    def __post_init__(self):
        if self.kind not in ("circle", "trefoil"):
            raise ValueError(f"unknown manifold kind {self.kind!r}")
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        min_dim = 2 if self.kind == "circle" else 3
        if self.ambient_dim < min_dim:
            raise ValueError(f"{self.kind} needs ambient dimension >= {min_dim}")
        if self.kind == "circle":
            tau, diameter = self.radius, 2.0 * self.radius
        else:
            tau, diameter = _trefoil_geometry(self.radius)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "diameter", diameter)


def _trefoil_curve(theta: np.ndarray, radius: float) -> np.ndarray:
    # (2,3) torus knot scaled so its far point sits at `radius` from the origin
    x = (2.0 + np.cos(3 * theta)) * np.cos(2 * theta)
    y = (2.0 + np.cos(3 * theta)) * np.sin(2 * theta)
    z = np.sin(3 * theta)
    return (radius / 3.0) * np.stack([x, y, z], axis=-1)


def _trefoil_geometry(radius: float, samples: int = 4096) -> tuple[float, float]:
    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    pts = _trefoil_curve(theta, radius)
    dt = 2.0 * np.pi / samples
    vel = np.gradient(pts, dt, axis=0)
    acc = np.gradient(vel, dt, axis=0)
    speed = np.linalg.norm(vel, axis=1)
    curvature = np.linalg.norm(np.cross(vel, acc), axis=1) / speed**3
    min_curv_radius = float(1.0 / np.max(curvature))
    diffs = pts[:, None, :] - pts[None, :, :]
    dists = np.linalg.norm(diffs, axis=-1)
    diameter = float(np.max(dists))
    # reach <= min(1/max curvature, half the closest approach between strands);
    # approximate the latter over parameter gaps of at least a quarter turn
    gap = samples // 4
    far = np.abs(np.subtract.outer(np.arange(samples), np.arange(samples)))
    far = np.minimum(far, samples - far) >= gap
    bottleneck = float(np.min(dists[far])) / 2.0
    return min(min_curv_radius, bottleneck), diameter


def _random_rotation(d: int, seed: int) -> np.ndarray:
    g = seeded_rng(seed, stream=7).standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def sample_manifold(spec: ManifoldSpec, count: int, seed: int) -> np.ndarray:
    """[count, d] points on the rotated curve, parameter uniform on [0, 2pi)."""
    rng = seeded_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
    if spec.kind == "circle":
        flat = spec.radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        intrinsic_dim = 2
    else:
        flat = _trefoil_curve(theta, spec.radius)
        intrinsic_dim = 3
    points = np.zeros((count, spec.ambient_dim))
    points[:, :intrinsic_dim] = flat
    rotation = _random_rotation(spec.ambient_dim, spec.rotation_seed)
    return points @ rotation.T
