"""Regression probe of how compressing the input by a fixed random projection
affects approximation quality.

Protocol: a Lipschitz-1 target f(x) = sin(<w, x>) with a fixed unit vector w
is fit on k-sparse inputs from [-1, 1]^d.  For each projection width n an
RP network (fixed Gaussian [n, d] first layer, trainable stack after it) is
trained and its test RMSE recorded, alongside a full-input network whose
trainable parameter budget matches the RP network at a reference n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .data import synth_sparse
from .linalg import seeded_rng


@dataclass(frozen=True)
class ExpressivityConfig:
    d: int = 256
    k: int = 8
    n_grid: tuple[int, ...] = (8, 16, 32, 64)
    seeds: int = 5
    train_count: int = 4000
    test_count: int = 1000
    hidden: int = 64
    epochs: int = 40
    batch_size: int = 64
    lr: float = 1e-3
    seed: int = 0
    reference_n: int = 32
    rmse_slack: float = 0.05
    budget_ratio: float = 1.5

    def __post_init__(self):
        if not self.n_grid:
            raise ValueError("empty projection grid")
        if any(n < 1 or n > self.d for n in self.n_grid):
            raise ValueError(f"grid values must lie in [1, d={self.d}]")
        if self.reference_n not in self.n_grid:
            raise ValueError(f"reference n={self.reference_n} must be in the grid")


@dataclass(frozen=True)
class ExpressivityReport:
    rows: list[dict]
    baseline: dict
    trend_pass: bool
    budget_pass: bool
    config: dict = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.trend_pass and self.budget_pass


def trainable_param_count(net: nn.NetworkSpec) -> int:
    params = nn.init_params(net, seed=0)
    return sum(tensor.size for _, _, tensor in nn.trainable_items(params))


def _target_values(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.sin(x @ w)


def _train_regressor(net, x_train, y_train, x_test, y_test, cfg, seed) -> float:
    params = nn.init_params(net, seed)
    state = None
    step = 0
    order_rng_base = 2_000_000
    for epoch in range(1, cfg.epochs + 1):
        order = seeded_rng(seed, stream=order_rng_base + epoch).permutation(len(y_train))
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            preds, cache = nn.forward(net, params, x_train[idx], mode="train")
            _, grad = nn.mse_loss(preds[:, 0], y_train[idx])
            grads = nn.backward(net, params, cache, grad[:, None])
            if state is None:
                state = nn.init_adam_state(grads)
            nn.adam_step(params, grads, state, nn.lr_at(step, cfg.lr))
            step += 1
    preds, _ = nn.forward(net, params, x_test, mode="eval")
    return float(np.sqrt(np.mean((preds[:, 0] - y_test) ** 2)))


def rp_network(d: int, n: int, hidden: int, projection_seed: int, net_seed: int) -> nn.NetworkSpec:
    return nn.NetworkSpec(
        (d,),
        [nn.RpDenseSpec(n, hidden, seed=projection_seed), nn.ReluSpec()],
        classes=1,
        seed=net_seed,
    )


def full_network(d: int, hidden: int, net_seed: int) -> nn.NetworkSpec:
    return nn.NetworkSpec((d,), [nn.DenseSpec(hidden), nn.ReluSpec()], classes=1, seed=net_seed)


def matched_hidden_width(d: int, budget: int) -> int:
    """Hidden width whose Dense(h)->Dense(1) trainable count best matches budget."""
    best_h, best_gap = 1, None
    for h in range(1, max(2 * budget // (d + 2), 2)):
        count = h * (d + 1) + (h + 1)
        gap = abs(count - budget)
        if best_gap is None or gap < best_gap:
            best_h, best_gap = h, gap
    return best_h


def run_expressivity(cfg: ExpressivityConfig, target=None) -> ExpressivityReport:
    """Full sweep; `target` overrides the sin target (used by sanity tests)."""
    w = seeded_rng(cfg.seed, stream=3).standard_normal(cfg.d)
    w /= np.linalg.norm(w)
    target_fn = target if target is not None else (lambda x: _target_values(x, w))

    rows = []
    for n in cfg.n_grid:
        rmses = []
        for s in range(cfg.seeds):
            x_train = synth_sparse(cfg.d, cfg.k, cfg.train_count, seed=cfg.seed + 11 * s)
            x_test = synth_sparse(cfg.d, cfg.k, cfg.test_count, seed=cfg.seed + 11 * s + 5)
            net = rp_network(cfg.d, n, cfg.hidden, projection_seed=cfg.seed + 101 * s, net_seed=s)
            rmses.append(
                _train_regressor(
                    net, x_train, target_fn(x_train), x_test, target_fn(x_test), cfg, seed=s
                )
            )
        rows.append(
            {
                "n": n,
                "trainable_params": trainable_param_count(
                    rp_network(cfg.d, n, cfg.hidden, 0, 0)
                ),
                "rmse_per_seed": rmses,
                "median_rmse": float(np.median(rmses)),
            }
        )

    ref_budget = next(r["trainable_params"] for r in rows if r["n"] == cfg.reference_n)
    hidden = matched_hidden_width(cfg.d, ref_budget)
    base_rmses = []
    for s in range(cfg.seeds):
        x_train = synth_sparse(cfg.d, cfg.k, cfg.train_count, seed=cfg.seed + 11 * s)
        x_test = synth_sparse(cfg.d, cfg.k, cfg.test_count, seed=cfg.seed + 11 * s + 5)
        net = full_network(cfg.d, hidden, net_seed=s)
        base_rmses.append(
            _train_regressor(
                net, x_train, target_fn(x_train), x_test, target_fn(x_test), cfg, seed=s
            )
        )
    baseline = {
        "hidden": hidden,
        "trainable_params": trainable_param_count(full_network(cfg.d, hidden, 0)),
        "rmse_per_seed": base_rmses,
        "median_rmse": float(np.median(base_rmses)),
    }

    by_n = {r["n"]: r["median_rmse"] for r in rows}
    trend_pass = by_n[max(cfg.n_grid)] <= by_n[min(cfg.n_grid)] + cfg.rmse_slack
    budget_pass = by_n[cfg.reference_n] <= cfg.budget_ratio * baseline["median_rmse"]
    return ExpressivityReport(
        rows=rows,
        baseline=baseline,
        trend_pass=trend_pass,
        budget_pass=budget_pass,
        config={
            "d": cfg.d,
            "k": cfg.k,
            "n_grid": list(cfg.n_grid),
            "seeds": cfg.seeds,
            "train_count": cfg.train_count,
            "test_count": cfg.test_count,
            "hidden": cfg.hidden,
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "lr": cfg.lr,
            "seed": cfg.seed,
            "reference_n": cfg.reference_n,
            "rmse_slack": cfg.rmse_slack,
            "budget_ratio": cfg.budget_ratio,
        },
    )
