"""Declarative architecture specs and the forward/backward drivers.

A NetworkSpec is the single source of truth shared by training and by the
complexity counter: it resolves the full shape chain once at construction,
compiles each declarative layer spec into an executable layer, and derives
the seed of every fixed projection matrix from the network seed when the
spec does not pin one explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linalg import seeded_rng
from . import layers as L

TRAIN = "train"
EVAL = "eval"


@dataclass(frozen=True)
class DenseSpec:
    d_out: int


@dataclass(frozen=True)
class RpDenseSpec:
    n: int
    d_out: int
    seed: int | None = None


@dataclass(frozen=True)
class ConvSpec:
    h: int
    c_out: int
    stride: int = 1
    padding: str = "same"


@dataclass(frozen=True)
class RpConvISpec:
    n: int
    h: int
    c_out: int
    stride: int = 1
    padding: str = "same"
    seed: int | None = None


@dataclass(frozen=True)
class RpConvIISpec:
    n: int
    h: int
    c_out: int
    stride: int = 1
    padding: str = "same"
    seed: int | None = None


@dataclass(frozen=True)
class MaxPoolSpec:
    h: int
    stride: int = 2
    padding: str = "same"


@dataclass(frozen=True)
class BatchNormSpec:
    epsilon: float = 1e-5
    momentum: float = 0.9


@dataclass(frozen=True)
class ReluSpec:
    pass


@dataclass(frozen=True)
class FlattenSpec:
    pass


def _derive_seed(network_seed: int, index: int) -> int:
    # splitmix-style mix so equal-shaped layers never share a projection
    return (int(network_seed) * 0x9E3779B97F4A7C15 + 0x1000 + index) % 2**64


def _positive(value: int, what: str) -> None:
    if value < 1:
        raise ValueError(f"{what} must be positive, got {value}")


class NetworkSpec:
    """Input shape + ordered layer specs + final affine classifier."""

    def __init__(self, input_shape, layer_specs, classes: int, seed: int = 0):
        self.input_shape = tuple(int(s) for s in input_shape)
        self.layer_specs = list(layer_specs)
        self.classes = int(classes)
        self.seed = int(seed)
        _positive(self.classes, "class count")
        if len(self.input_shape) not in (1, 3):
            raise ValueError(f"input shape must be flat or [m, m, c], got {self.input_shape}")

        self.layers = []
        shape = self.input_shape
        for index, spec in enumerate(self.layer_specs):
            layer = self._compile(spec, shape, index)
            self.layers.append(layer)
            shape = layer.out_shape
        if len(shape) != 1:
            raise ValueError(
                f"classifier input must be flat, got {shape}; add a Flatten layer"
            )
        self.classifier = L.Dense(shape[0], self.classes)
        self.output_shapes = [layer.out_shape for layer in self.layers]

    def _compile(self, spec, shape, index):
        def need_flat():
            if len(shape) != 1:
                raise ValueError(f"layer {index} ({type(spec).__name__}) needs flat input, got {shape}")

        def need_image():
            if len(shape) != 3 or shape[0] != shape[1]:
                raise ValueError(
                    f"layer {index} ({type(spec).__name__}) needs [m, m, c] input, got {shape}"
                )

        if isinstance(spec, DenseSpec):
            need_flat()
            _positive(spec.d_out, "dense width")
            return L.Dense(shape[0], spec.d_out)
        if isinstance(spec, RpDenseSpec):
            need_flat()
            _positive(spec.d_out, "dense width")
            _positive(spec.n, "projection dimension")
            seed = spec.seed if spec.seed is not None else _derive_seed(self.seed, index)
            return L.RpDense(shape[0], spec.n, spec.d_out, seed)
        if isinstance(spec, ConvSpec):
            need_image()
            _positive(spec.c_out, "channel count")
            return L.Conv(shape[0], shape[2], spec.h, spec.c_out, spec.stride, spec.padding)
        if isinstance(spec, RpConvISpec):
            need_image()
            _positive(spec.c_out, "channel count")
            _positive(spec.n, "projection dimension")
            seed = spec.seed if spec.seed is not None else _derive_seed(self.seed, index)
            return L.RpConvI(
                shape[0], shape[2], spec.n, spec.h, spec.c_out, spec.stride, spec.padding, seed
            )
        if isinstance(spec, RpConvIISpec):
            need_image()
            _positive(spec.c_out, "channel count")
            _positive(spec.n, "projection dimension")
            seed = spec.seed if spec.seed is not None else _derive_seed(self.seed, index)
            return L.RpConvII(
                shape[0], shape[2], spec.n, spec.h, spec.c_out, spec.stride, spec.padding, seed
            )
        if isinstance(spec, MaxPoolSpec):
            need_image()
            return L.MaxPool(shape[0], shape[2], spec.h, spec.stride, spec.padding)
        if isinstance(spec, BatchNormSpec):
            return L.BatchNorm(shape, spec.epsilon, spec.momentum)
        if isinstance(spec, ReluSpec):
            return L.Relu(shape)
        if isinstance(spec, FlattenSpec):
            need_image()
            return L.Flatten(shape)
        raise ValueError(f"unknown layer spec {spec!r}")

    @property
    def rp_seeds(self) -> dict[int, int]:
        return {
            i: layer.seed for i, layer in enumerate(self.layers) if hasattr(layer, "seed")
        }


def init_params(net: NetworkSpec, seed: int) -> list[dict]:
    """Per-layer parameter dicts; the classifier's dict sits last."""
    params = [
        layer.init_params(seeded_rng(seed, stream=i)) for i, layer in enumerate(net.layers)
    ]
    params.append(net.classifier.init_params(seeded_rng(seed, stream=len(net.layers))))
    return params


def forward(net: NetworkSpec, params: list[dict], batch: np.ndarray, mode: str = EVAL):
    """Run the network; returns (logits, cache) with cache consumed by backward."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.shape[1:] != net.input_shape:
        raise ValueError(f"batch shape {batch.shape[1:]} does not match input {net.input_shape}")
    if mode not in (TRAIN, EVAL):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    caches = []
    x = batch
    for layer, layer_params in zip(net.layers, params):
        x, cache = layer.forward(layer_params, x, mode)
        caches.append(cache)
    logits, classifier_cache = net.classifier.forward(params[-1], x, mode)
    caches.append(classifier_cache)
    return logits, caches


def backward(net: NetworkSpec, params: list[dict], caches: list, grad_logits: np.ndarray):
    """Exact gradients for every trainable tensor, aligned with `params`."""
    grads = [None] * len(params)
    grads[-1], gx = net.classifier.backward(params[-1], caches[-1], grad_logits)
    for i in range(len(net.layers) - 1, -1, -1):
        grads[i], gx = net.layers[i].backward(params[i], caches[i], gx)
    return grads


TRAINABLE_EXCLUDED = ("running_mean", "running_var")


def trainable_items(params: list[dict]):
    """(layer index, tensor name, array) for every gradient-bearing tensor."""
    for i, layer_params in enumerate(params):
        for name, value in layer_params.items():
            if name not in TRAINABLE_EXCLUDED:
                yield i, name, value
