"""Losses producing (scalar, gradient-with-respect-to-logits) pairs."""

from __future__ import annotations

import numpy as np


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean negative log-likelihood with max-subtracted softmax.

    Gradient is (softmax - onehot) / batch_size.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    b, classes = logits.shape
    if labels.shape != (b,):
        raise ValueError(f"labels shape {labels.shape} does not match batch {b}")
    if np.any(labels < 0) or np.any(labels >= classes):
        raise ValueError(f"labels out of range [0, {classes})")
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    log_probs = shifted - np.log(exp.sum(axis=1, keepdims=True))
    loss = -float(log_probs[np.arange(b), labels].mean())
    grad = probs
    grad[np.arange(b), labels] -= 1.0
    return loss, grad / b


def mse_loss(preds: np.ndarray, targets: np.ndarray):
    """Mean squared error over all entries; gradient 2*(pred - target)/count."""
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64).reshape(preds.shape)
    diff = preds - targets
    return float(np.mean(diff**2)), 2.0 * diff / diff.size
