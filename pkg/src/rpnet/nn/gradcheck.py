"""Central-difference verification of the analytic gradients."""

from __future__ import annotations

import numpy as np

from ..linalg import seeded_rng
from .loss import softmax_cross_entropy
from .network import (
    BatchNormSpec,
    ConvSpec,
    DenseSpec,
    FlattenSpec,
    MaxPoolSpec,
    NetworkSpec,
    ReluSpec,
    RpConvIISpec,
    RpConvISpec,
    RpDenseSpec,
    backward,
    forward,
    init_params,
    trainable_items,
)


def grad_check(net: NetworkSpec, seed: int, batch_size: int = 5, fd_step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Every entry of every trainable tensor is perturbed; the relative error
    denominator is floored at 1e-6 so near-zero gradients compare absolutely.
    """
    rng = seeded_rng(seed, stream=5000)
    batch = rng.standard_normal((batch_size,) + net.input_shape)
    labels = rng.integers(0, net.classes, size=batch_size)
    params = init_params(net, seed)

    logits, cache = forward(net, params, batch, mode="train")
    _, grad_logits = softmax_cross_entropy(logits, labels)
    grads = backward(net, params, cache, grad_logits)

    def loss_now() -> float:
        out, _ = forward(net, params, batch, mode="train")
        return softmax_cross_entropy(out, labels)[0]

    worst = 0.0
    for i, _name, tensor in trainable_items(params):
        analytic = grads[i][_name].reshape(-1)
        flat = tensor.reshape(-1)
        for idx in range(flat.size):
            saved = flat[idx]
            flat[idx] = saved + fd_step
            plus = loss_now()
            flat[idx] = saved - fd_step
            minus = loss_now()
            flat[idx] = saved
            numeric = (plus - minus) / (2.0 * fd_step)
            err = abs(analytic[idx] - numeric) / max(abs(analytic[idx]), abs(numeric), 1e-6)
            worst = max(worst, err)
    return worst


def battery_nets(seed: int = 0) -> dict[str, NetworkSpec]:
    """Small randomized instances covering every layer type."""
    rng = seeded_rng(seed, stream=6000)
    h = int(rng.integers(2, 4))
    stride = int(rng.integers(1, 3))
    return {
        "dense": NetworkSpec((6,), [DenseSpec(4), ReluSpec()], classes=3, seed=seed),
        "rp_dense": NetworkSpec((8,), [RpDenseSpec(4, 5), ReluSpec()], classes=3, seed=seed),
        "conv": NetworkSpec(
            (5, 5, 2), [ConvSpec(3, 3), ReluSpec(), FlattenSpec()], classes=2, seed=seed
        ),
        "conv_randomized": NetworkSpec(
            (6, 6, 2),
            [ConvSpec(h, 3, stride=stride, padding="valid"), ReluSpec(), FlattenSpec()],
            classes=2,
            seed=seed,
        ),
        "rp_conv_i": NetworkSpec(
            (5, 5, 2), [RpConvISpec(4, 3, 3), ReluSpec(), FlattenSpec()], classes=2, seed=seed
        ),
        "rp_conv_ii": NetworkSpec(
            (5, 5, 2), [RpConvIISpec(3, 3, 3), ReluSpec(), FlattenSpec()], classes=2, seed=seed
        ),
        "max_pool": NetworkSpec(
            (6, 6, 1),
            [ConvSpec(3, 2), ReluSpec(), MaxPoolSpec(3, 2), FlattenSpec()],
            classes=2,
            seed=seed,
        ),
        "batch_norm_dense": NetworkSpec(
            (6,), [DenseSpec(5), BatchNormSpec(), ReluSpec()], classes=3, seed=seed
        ),
        "batch_norm_conv": NetworkSpec(
            (5, 5, 2),
            [ConvSpec(3, 3), BatchNormSpec(), ReluSpec(), FlattenSpec()],
            classes=2,
            seed=seed,
        ),
    }


def grad_check_battery(seed: int = 0) -> dict[str, float]:
    return {name: grad_check(net, seed) for name, net in battery_nets(seed).items()}
