"""Optimizers and the step-halving learning-rate schedule."""

from __future__ import annotations

import numpy as np

HALVE_EVERY = 2400


def lr_at(step: int, base_lr: float, halve_every: int = HALVE_EVERY) -> float:
    """base_lr halved once per `halve_every` completed steps."""
    if step < 0:
        raise ValueError(f"step must be nonnegative, got {step}")
    return base_lr * 2.0 ** (-(step // halve_every))


def _zeros_like_grads(grads: list[dict]) -> list[dict]:
    return [{name: np.zeros_like(g) for name, g in layer.items()} for layer in grads]


def init_sgd_state(grads: list[dict]) -> dict:
    return {"velocity": _zeros_like_grads(grads)}


def sgd_momentum_step(params, grads, state, lr: float, momentum: float = 0.9) -> None:
    """v <- momentum * v + g;  p <- p - lr * v  (in place)."""
    for i, layer_grads in enumerate(grads):
        for name, g in layer_grads.items():
            v = state["velocity"][i][name]
            v *= momentum
            v += g
            params[i][name] -= lr * v


def init_adam_state(grads: list[dict]) -> dict:
    return {"m": _zeros_like_grads(grads), "v": _zeros_like_grads(grads), "t": 0}


def adam_step(
    params,
    grads,
    state,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Bias-corrected Adam update (in place)."""
    state["t"] += 1
    t = state["t"]
    for i, layer_grads in enumerate(grads):
        for name, g in layer_grads.items():
            m = state["m"][i][name]
            v = state["v"][i][name]
            m *= beta1
            m += (1.0 - beta1) * g
            v *= beta2
            v += (1.0 - beta2) * g * g
            m_hat = m / (1.0 - beta1**t)
            v_hat = v / (1.0 - beta2**t)
            params[i][name] -= lr * m_hat / (np.sqrt(v_hat) + eps)
