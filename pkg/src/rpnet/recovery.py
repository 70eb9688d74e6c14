"""First-order sparse recovery: ISTA for the Lagrangian l1 problem and
iterative hard thresholding, plus the undersampling phase-transition sweep.

Both solvers use the step size 1/L where L over-estimates sigma_max(A)^2 by a
1.05 safety factor on top of a 32-step power iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, gaussian_matrix, seeded_rng

POWER_ITERS = 32
LIPSCHITZ_SAFETY = 1.05


@dataclass(frozen=True)
class RecoveryProblem:
    a: np.ndarray
    b: np.ndarray
    sigma: float = 0.0
    k: int | None = None

    def __post_init__(self):
        a = as_matrix(self.a)
        b = np.asarray(self.b, dtype=np.float64)
        if b.shape != (a.shape[0],):
            raise ValueError(f"measurement shape {b.shape} incompatible with matrix {a.shape}")
        if self.sigma < 0:
            raise ValueError(f"noise bound must be nonnegative, got {self.sigma}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class RecoveryResult:
    x_hat: np.ndarray
    iterations: int
    residual_norm: float
    converged: bool
    objective_history: list[float] | None = field(default=None, repr=False)


def soft_threshold(v, tau: float) -> np.ndarray:
    """Entrywise sign(v) * max(|v| - tau, 0)."""
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def hard_threshold(v, k: int) -> np.ndarray:
    """Keep the k largest-magnitude entries; ties keep the lowest indices."""
    v = np.asarray(v, dtype=np.float64)
    if k >= v.size:
        return v.copy()
    out = np.zeros_like(v)
    if k > 0:
        keep = np.argsort(-np.abs(v), kind="stable")[:k]
        out[keep] = v[keep]
    return out


def lipschitz_upper_bound(a, seed: int = 0) -> float:
    """1.05 * power-iteration estimate of sigma_max(A)^2 (32 steps)."""
    a = as_matrix(a)
    gram_apply = lambda v: a.T @ (a @ v)
    v = seeded_rng(seed, stream=97).standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    lam = 1.0
    for _ in range(POWER_ITERS):
        w = gram_apply(v)
        lam = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return LIPSCHITZ_SAFETY * np.finfo(float).tiny
        v = w / norm
    return LIPSCHITZ_SAFETY * max(lam, np.finfo(float).tiny)


def _check_finite(problem: RecoveryProblem) -> None:
    if not (np.all(np.isfinite(problem.a)) and np.all(np.isfinite(problem.b))):
        raise ValueError("recovery problem contains non-finite entries")


def ista_l1(
    problem: RecoveryProblem,
    lam: float,
    max_iters: int = 5000,
    tol: float = 1e-10,
    track_objective: bool = False,
) -> RecoveryResult:
    """Proximal gradient descent on (1/2)||Ay - b||^2 + lam * ||y||_1."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    _check_finite(problem)
    a, b = problem.a, problem.b
    t = 1.0 / lipschitz_upper_bound(a)
    y = np.zeros(a.shape[1])
    history = [] if track_objective else None
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        residual = a @ y - b
        if track_objective:
            history.append(0.5 * float(residual @ residual) + lam * float(np.sum(np.abs(y))))
        y_next = soft_threshold(y - t * (a.T @ residual), t * lam)
        step = np.linalg.norm(y_next - y)
        y = y_next
        if step < tol:
            converged = True
            break
    return RecoveryResult(
        x_hat=y,
        iterations=iters,
        residual_norm=float(np.linalg.norm(a @ y - b)),
        converged=converged,
        objective_history=history,
    )


IHT_SHRINK = 0.1
IHT_KAPPA = 2.0


def iht(
    problem: RecoveryProblem,
    k: int,
    max_iters: int = 1000,
    tol: float = 1e-10,
) -> RecoveryResult:
    """Normalized iterative hard thresholding: y <- H_k(y + mu * A^T (b - A y)).

    The step is the exact line search restricted to the current support,
    mu = ||g_S||^2 / ||A_S g_S||^2, with the standard stability backtracking
    when the support changes; a fixed-step IHT stalls at spurious k-sparse
    fixed points on mildly under-determined instances.  With A = I this takes
    mu = 1 and recovers a k-sparse signal in a single iteration.
    """
    _check_finite(problem)
    a, b = problem.a, problem.b
    if k < 1 or k > a.shape[1]:
        raise ValueError(f"sparsity k={k} out of range for d={a.shape[1]}")
    t_fallback = 1.0 / lipschitz_upper_bound(a)
    y = np.zeros(a.shape[1])
    support = None
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        g = a.T @ (b - a @ y)
        if support is None:
            support = np.argsort(-np.abs(g), kind="stable")[:k]
        gs = g[support]
        denom = float(np.linalg.norm(a[:, support] @ gs) ** 2)
        mu = float(gs @ gs) / denom if denom > 0.0 else t_fallback
        y_next = hard_threshold(y + mu * g, k)
        new_support = np.flatnonzero(y_next)
        if new_support.size and set(new_support) != set(support):
            # support moved: backtrack until mu passes the stability bound
            for _ in range(64):
                diff = y_next - y
                pushed = a @ diff
                denom = float(pushed @ pushed)
                if denom == 0.0 or mu <= (1.0 - IHT_SHRINK) * float(diff @ diff) / denom:
                    break
                mu /= IHT_KAPPA * (1.0 - IHT_SHRINK)
                y_next = hard_threshold(y + mu * g, k)
        step = np.linalg.norm(y_next - y)
        y = y_next
        support = np.argsort(-np.abs(y), kind="stable")[:k]
        if step < tol:
            converged = True
            break
    return RecoveryResult(
        x_hat=y,
        iterations=iters,
        residual_norm=float(np.linalg.norm(a @ y - b)),
        converged=converged,
    )


def random_signed_sparse(d: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-sparse vector with +-1 entries on a uniform random support."""
    x = np.zeros(d)
    support = rng.choice(d, size=k, replace=False)
    x[support] = rng.choice([-1.0, 1.0], size=k)
    return x


def recovery_phase_experiment(
    d: int,
    k: int,
    n_grid: list[int],
    trials: int,
    seed: int,
    max_iters: int = 600,
    success_tol: float = 1e-2,
) -> list[tuple[int, float]]:
    """IHT success rate (relative error < success_tol) per measurement count n.

    Each trial uses a fresh Gaussian matrix and a +-1 k-sparse signal, with the
    trial seed derived as seed + trial index.
    """
    if not n_grid:
        raise ValueError("empty measurement grid")
    for n in n_grid:
        if n > d:
            raise ValueError(f"grid value n={n} exceeds dimension d={d}")
    rates = []
    for n in n_grid:
        successes = 0
        for trial in range(trials):
            trial_seed = seed + trial
            a = gaussian_matrix(n, d, seed=trial_seed).entries
            x = random_signed_sparse(d, k, seeded_rng(trial_seed, stream=1))
            result = iht(RecoveryProblem(a=a, b=a @ x), k=k, max_iters=max_iters)
            rel_err = np.linalg.norm(result.x_hat - x) / np.linalg.norm(x)
            successes += rel_err < success_tol
        rates.append((n, successes / trials if trials else 0.0))
    return rates
