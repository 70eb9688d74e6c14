"""Restricted-isometry constants: exact brute force, Monte Carlo bounds, and
manifold distortion.

All quantities use the non-squared-norm convention
``(1 - delta) ||y|| <= ||A y|| <= (1 + delta) ||y||`` over unit s-sparse
vectors; reports carry a ``convention`` tag so downstream consumers cannot
silently mix this with the squared-norm literature convention.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, seeded_rng

CONVENTION = "non-squared-norm"

DEFAULT_SUPPORT_CAP = 2_000_000


@dataclass(frozen=True)
class RipReport:
    s: int
    delta_exact: float | None
    delta_lower: float
    trials: int
    seed: int
    convention: str = CONVENTION


@dataclass(frozen=True)
class ManifoldDistortionReport:
    delta_observed: float
    pairs: int
    points: int


def _check_sparsity(d: int, s: int) -> None:
    if s < 1 or s > d:
        raise ValueError(f"sparsity s={s} out of range for d={d} columns")


def delta_exact(a, s: int, support_cap: int = DEFAULT_SUPPORT_CAP) -> float:
    """Exact RIP constant by enumerating every s-column submatrix.

    For each support S (lexicographic order) the extreme singular values of
    A_S come from the eigenvalues of the s x s Gram matrix; the constant is
    max(1 - sigma_min, sigma_max - 1) maximized over supports.
    """
    a = as_matrix(a)
    d = a.shape[1]
    _check_sparsity(d, s)
    n_supports = math.comb(d, s)
    if n_supports > support_cap:
        raise ValueError(
            f"instance too large for exact oracle: C({d},{s})={n_supports} supports "
            f"exceeds cap {support_cap}"
        )
    worst = 0.0
    for support in itertools.combinations(range(d), s):
        sub = a[:, support]
        evals = np.linalg.eigvalsh(sub.T @ sub)
        smin = math.sqrt(max(evals[0], 0.0))
        smax = math.sqrt(max(evals[-1], 0.0))
        worst = max(worst, 1.0 - smin, smax - 1.0)
    return worst


def random_unit_sparse(d: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-norm vector with a uniform random size-s support and Gaussian coefficients."""
    support = rng.choice(d, size=s, replace=False)
    coeffs = rng.standard_normal(s)
    norm = np.linalg.norm(coeffs)
    while norm == 0.0:  # probability-zero guard
        coeffs = rng.standard_normal(s)
        norm = np.linalg.norm(coeffs)
    y = np.zeros(d)
    y[support] = coeffs / norm
    return y


def delta_monte_carlo(a, s: int, trials: int, seed: int, chunk: int = 2048) -> float:
    """Randomized lower bound: max | ||A y|| - 1 | over random unit s-sparse y.

    Trials are drawn in chunks: each trial picks a uniform size-s support and
    unit-normalized Gaussian coefficients.  trials=0 returns 0.0 (empty max).
    """
    a = as_matrix(a)
    d = a.shape[1]
    _check_sparsity(d, s)
    if trials < 0:
        raise ValueError(f"trials must be nonnegative, got {trials}")
    rng = seeded_rng(seed)
    worst = 0.0
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        supports = np.argpartition(rng.random((t, d)), s - 1, axis=1)[:, :s]
        coeffs = rng.standard_normal((t, s))
        norms = np.linalg.norm(coeffs, axis=1, keepdims=True)
        coeffs /= np.where(norms == 0.0, 1.0, norms)
        y = np.zeros((t, d))
        np.put_along_axis(y, supports, coeffs, axis=1)
        vals = np.abs(np.linalg.norm(y @ a.T, axis=1) - 1.0)
        worst = max(worst, float(np.max(vals)))
        done += t
    return worst


def _check_orthogonal(w: np.ndarray, tol: float = 1e-8) -> None:
    d = w.shape[0]
    if w.shape != (d, d):
        raise ValueError(f"transform must be square, got shape {w.shape}")
    err = np.max(np.abs(w.T @ w - np.eye(d)))
    if err > tol:
        raise ValueError(f"transform is not orthogonal: max |W^T W - I| = {err:.3e}")


def delta_with_transform(
    a,
    w,
    s: int,
    mode: str = "exact",
    trials: int = 0,
    seed: int = 0,
    support_cap: int = DEFAULT_SUPPORT_CAP,
) -> float:
    """RIP constant over vectors sparse under an orthogonal transform W.

    For orthogonal W, y with ||W y||_0 <= s is exactly y = W^T z with z
    s-sparse and ||y|| = ||z||, so the constant equals that of A W^T at
    plain sparsity s; computed by that reduction.
    """
    a = as_matrix(a)
    w = as_matrix(w)
    if w.shape[0] != a.shape[1]:
        raise ValueError(f"transform shape {w.shape} incompatible with matrix {a.shape}")
    _check_orthogonal(w)
    reduced = a @ w.T
    if mode == "exact":
        return delta_exact(reduced, s, support_cap=support_cap)
    if mode == "monte_carlo":
        return delta_monte_carlo(reduced, s, trials=trials, seed=seed)
    raise ValueError(f"mode must be 'exact' or 'monte_carlo', got {mode!r}")


def manifold_distortion(a, points) -> ManifoldDistortionReport:
    """Max pairwise relative distortion | ||Ax - Ay|| / ||x - y|| - 1 |.

    Pairs closer than 1e-12 are skipped; at least two distinct points are
    required.
    """
    a = as_matrix(a)
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != a.shape[1]:
        raise ValueError(f"expected points of shape [count, {a.shape[1]}], got {pts.shape}")
    projected = pts @ a.T
    worst = 0.0
    pairs = 0
    for i in range(len(pts) - 1):
        diffs = pts[i + 1 :] - pts[i]
        dists = np.linalg.norm(diffs, axis=1)
        keep = dists > 1e-12
        if not np.any(keep):
            continue
        proj_dists = np.linalg.norm(projected[i + 1 :][keep] - projected[i], axis=1)
        ratios = np.abs(proj_dists / dists[keep] - 1.0)
        worst = max(worst, float(np.max(ratios)))
        pairs += int(np.count_nonzero(keep))
    if pairs == 0:
        raise ValueError("fewer than 2 distinct points")
    return ManifoldDistortionReport(delta_observed=worst, pairs=pairs, points=len(pts))


def rip_report(
    a,
    s: int,
    exact: bool = True,
    trials: int = 0,
    seed: int = 0,
    support_cap: int = DEFAULT_SUPPORT_CAP,
) -> RipReport:
    """Bundle exact and/or Monte Carlo estimates into a RipReport."""
    exact_val = delta_exact(a, s, support_cap=support_cap) if exact else None
    lower = delta_monte_carlo(a, s, trials=trials, seed=seed) if trials else 0.0
    return RipReport(s=s, delta_exact=exact_val, delta_lower=lower, trials=trials, seed=seed)
