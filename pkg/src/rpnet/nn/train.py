"""Minibatch training driver with per-epoch reshuffling from derived seeds."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..linalg import seeded_rng
from . import optim
from .loss import softmax_cross_entropy
from .network import NetworkSpec, backward, forward, init_params

OPTIMIZERS = ("sgd_momentum", "adam")


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "sgd_momentum"
    lr: float = 0.01
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    halve_every: int = optim.HALVE_EVERY
    epochs: int = 1
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.lr <= 0:
            raise ValueError(f"learning rate must be positive, got {self.lr}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be at least 1")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    test_top1_error: float
    lr: float
    seconds: float


@dataclass(frozen=True)
class TrainReport:
    epochs: list[EpochRecord]
    final_test_top1_error: float
    total_seconds: float
    params: list[dict] = field(repr=False)


def top1_error(net: NetworkSpec, params, inputs, labels, batch_size: int = 512) -> float:
    """Fraction of eval-mode argmax predictions that miss the label."""
    wrong = 0
    for start in range(0, len(labels), batch_size):
        chunk = inputs[start : start + batch_size]
        logits, _ = forward(net, params, chunk, mode="eval")
        wrong += int(np.count_nonzero(logits.argmax(axis=1) != labels[start : start + batch_size]))
    return wrong / len(labels)


def train(net: NetworkSpec, train_set, test_set, config: TrainConfig) -> TrainReport:
    """SGD-momentum or Adam training; deterministic in (net seeds, config seed)."""
    inputs, labels = np.asarray(train_set.inputs), np.asarray(train_set.labels)
    if len(labels) == 0:
        raise ValueError("empty dataset")
    params = init_params(net, config.seed)
    grads_template = None
    state = None
    step = 0
    records = []
    t_start = time.perf_counter()
    for epoch in range(1, config.epochs + 1):
        t_epoch = time.perf_counter()
        order = seeded_rng(config.seed, stream=1_000_000 + epoch).permutation(len(labels))
        loss_sum = 0.0
        for start in range(0, len(order), config.batch_size):
            batch_idx = order[start : start + config.batch_size]
            logits, cache = forward(net, params, inputs[batch_idx], mode="train")
            loss, grad_logits = softmax_cross_entropy(logits, labels[batch_idx])
            grads = backward(net, params, cache, grad_logits)
            if state is None:
                grads_template = grads
                state = (
                    optim.init_sgd_state(grads_template)
                    if config.optimizer == "sgd_momentum"
                    else optim.init_adam_state(grads_template)
                )
            lr = optim.lr_at(step, config.lr, config.halve_every)
            if config.optimizer == "sgd_momentum":
                optim.sgd_momentum_step(params, grads, state, lr, config.momentum)
            else:
                optim.adam_step(
                    params, grads, state, lr, config.beta1, config.beta2, config.adam_eps
                )
            loss_sum += loss * len(batch_idx)
            step += 1
        test_err = top1_error(net, params, test_set.inputs, test_set.labels)
        records.append(
            EpochRecord(
                epoch=epoch,
                train_loss=loss_sum / len(order),
                test_top1_error=test_err,
                lr=optim.lr_at(step, config.lr, config.halve_every),
                seconds=time.perf_counter() - t_epoch,
            )
        )
    return TrainReport(
        epochs=records,
        final_test_top1_error=records[-1].test_top1_error,
        total_seconds=time.perf_counter() - t_start,
        params=params,
    )
