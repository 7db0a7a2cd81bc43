"""Win probabilities and the two head-to-head objectives with their gradients.

Most Categories is evaluated with a layered scenario tree that prunes branches
already carrying too many losses to matter; for nine categories this needs 634
node products instead of the naive 2^9 enumeration's 2048.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

SQRT2 = np.sqrt(2.0)
SQRT2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class DifferentialDistribution:
    """Independent per-category normal model of the team-minus-opponent totals."""

    mean: np.ndarray
    variance: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "variance", np.asarray(self.variance, dtype=float))
        if np.any(self.variance <= 0):
            raise ValueError("variances must be positive")


@dataclass(frozen=True, eq=False)
class WinProbabilities:
    w: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))


def win_probabilities(dist: DifferentialDistribution) -> WinProbabilities:
    """Per-category probability the differential lands above zero."""
    z = dist.mean / np.sqrt(dist.variance)
    return WinProbabilities(0.5 * (1.0 + erf(z / SQRT2)))


def pdf_at_zero(dist: DifferentialDistribution) -> np.ndarray:
    """Density of each category differential at zero (the gradient kernel)."""
    sd = np.sqrt(dist.variance)
    z = dist.mean / sd
    return np.exp(-0.5 * z * z) / (sd * SQRT2PI)


def each_category_value(w: np.ndarray | WinProbabilities) -> float:
    """Expected number of categories won."""
    w = w.w if isinstance(w, WinProbabilities) else np.asarray(w, dtype=float)
    return float(w.sum())


def each_category_gradient(dist: DifferentialDistribution, d_mean: np.ndarray) -> np.ndarray:
    """Chain rule through the normal CDF: sum_c pdf_c(0) * d mean_c / d params."""
    d_mean = np.asarray(d_mean, dtype=float)
    return pdf_at_zero(dist) @ d_mean


def _tree_limits(n_cats: int) -> tuple[int, int]:
    """(min wins for a full win, max losses a live branch can carry)."""
    min_win = n_cats // 2 + 1
    max_losses = n_cats - min_win if n_cats % 2 == 1 else n_cats // 2
    return min_win, max_losses


def most_categories_value_with_stats(w: np.ndarray | WinProbabilities) -> tuple[float, int]:
    """Match win probability via the pruned scenario tree, plus its product count.

    Branches are dropped as soon as their loss count precludes reaching the
    minimum countable win total; with an even category count an exact split
    scores one half.
    """
    w = w.w if isinstance(w, WinProbabilities) else np.asarray(w, dtype=float)
    n = w.shape[0]
    if n < 1:
        raise ValueError("need at least one category")
    min_win, max_losses = _tree_limits(n)
    probs = np.array([w[0], 1.0 - w[0]])
    losses = np.array([0, 1])
    keep = losses <= max_losses
    probs, losses = probs[keep], losses[keep]
    mults = 0
    for c in range(1, n):
        win_children = probs * w[c]
        keep_loss = losses + 1 <= max_losses
        loss_children = probs[keep_loss] * (1.0 - w[c])
        mults += win_children.shape[0] + loss_children.shape[0]
        probs = np.concatenate([win_children, loss_children])
        losses = np.concatenate([losses, losses[keep_loss] + 1])
    wins = n - losses
    value = float(probs[wins >= min_win].sum())
    if n % 2 == 0:
        value += 0.5 * float(probs[wins == n // 2].sum())
    return value, mults


def most_categories_value(w: np.ndarray | WinProbabilities) -> float:
    """Probability of winning a strict majority (plus half of exact ties, even C)."""
    return most_categories_value_with_stats(w)[0]


def most_categories_value_batch(w: np.ndarray) -> np.ndarray:
    """Tree evaluation over a batch of probability vectors (rows)."""
    w = np.atleast_2d(np.asarray(w, dtype=float))
    n = w.shape[1]
    min_win, max_losses = _tree_limits(n)
    probs = np.stack([w[:, 0], 1.0 - w[:, 0]], axis=1)
    losses = np.array([0, 1])
    keep = losses <= max_losses
    probs, losses = probs[:, keep], losses[keep]
    for c in range(1, n):
        keep_loss = losses + 1 <= max_losses
        probs = np.concatenate(
            [probs * w[:, c : c + 1], probs[:, keep_loss] * (1.0 - w[:, c : c + 1])], axis=1
        )
        losses = np.concatenate([losses, losses[keep_loss] + 1])
    wins = n - losses
    values = probs[:, wins >= min_win].sum(axis=1)
    if n % 2 == 0:
        values = values + 0.5 * probs[:, wins == n // 2].sum(axis=1)
    return values


def _win_count_pmf(w: np.ndarray, skip: int | None = None) -> np.ndarray:
    """Distribution of the number of wins across categories (optionally skipping one)."""
    pmf = np.array([1.0])
    for c, wc in enumerate(w):
        if c == skip:
            continue
        nxt = np.zeros(pmf.shape[0] + 1)
        nxt[: pmf.shape[0]] += pmf * (1.0 - wc)
        nxt[1:] += pmf * wc
        pmf = nxt
    return pmf


def tipping_point(w: np.ndarray | WinProbabilities, category: int) -> float:
    """Probability the named category decides the match.

    With an odd category count the others must split evenly; with an even count
    either half-step split (one below or at the midpoint) leaves the category
    able to move the result.
    """
    w = w.w if isinstance(w, WinProbabilities) else np.asarray(w, dtype=float)
    n = w.shape[0]
    pmf = _win_count_pmf(w, skip=category)
    if n % 2 == 1:
        return float(pmf[(n - 1) // 2])
    return float(pmf[n // 2 - 1] + pmf[n // 2])


def tipping_points(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return np.array([tipping_point(w, c) for c in range(w.shape[0])])


def tipping_points_batch(w: np.ndarray) -> np.ndarray:
    """Tipping probabilities for every category of every row.

    Forward-backward win-count DP so each leave-one-out distribution is a single
    convolution slice rather than a full recount.
    """
    w = np.atleast_2d(np.asarray(w, dtype=float))
    n_rows, n = w.shape
    forward = [np.ones((n_rows, 1))]
    for c in range(n):
        prev = forward[-1]
        nxt = np.zeros((n_rows, prev.shape[1] + 1))
        nxt[:, :-1] += prev * (1.0 - w[:, c : c + 1])
        nxt[:, 1:] += prev * w[:, c : c + 1]
        forward.append(nxt)
    backward = [np.ones((n_rows, 1))]
    for c in range(n - 1, -1, -1):
        prev = backward[-1]
        nxt = np.zeros((n_rows, prev.shape[1] + 1))
        nxt[:, :-1] += prev * (1.0 - w[:, c : c + 1])
        nxt[:, 1:] += prev * w[:, c : c + 1]
        backward.append(nxt)
    backward.reverse()

    targets = [(n - 1) // 2] if n % 2 == 1 else [n // 2 - 1, n // 2]
    out = np.zeros((n_rows, n))
    for c in range(n):
        fwd, bwd = forward[c], backward[c + 1]
        for t in targets:
            k_lo = max(0, t - (bwd.shape[1] - 1))
            k_hi = min(fwd.shape[1] - 1, t)
            for k in range(k_lo, k_hi + 1):
                out[:, c] += fwd[:, k] * bwd[:, t - k]
    return out


def most_categories_gradient(dist: DifferentialDistribution, d_mean: np.ndarray) -> np.ndarray:
    """Each-category gradient with every category damped by its tipping probability."""
    w = win_probabilities(dist).w
    coeff = tipping_points(w) * pdf_at_zero(dist)
    if w.shape[0] % 2 == 0:
        coeff = 0.5 * coeff
    return coeff @ np.asarray(d_mean, dtype=float)


def average_over_opponents(
    values: list[float], gradients: list[np.ndarray]
) -> tuple[float, np.ndarray]:
    """Arithmetic mean of per-opponent objective values and gradients."""
    if not values:
        raise ValueError("need at least one opponent")
    if len(values) != len(gradients):
        raise ValueError("values and gradients must pair up")
    return float(np.mean(values)), np.mean(np.stack(gradients), axis=0)
