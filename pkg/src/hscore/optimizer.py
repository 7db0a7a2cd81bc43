"""Adam ascent over sum-normalized strategy weights.

Category weights live on the sum-to-one hyperplane (components may go negative
transiently); flex shares are clamped to [0, 1] before their renormalization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .future_picks import CollinearWeightsError
from .roster import FlexShares

INIT_PERTURBATION = 1.0 / 500.0
SUM_GUARD = 1e-8


class RenormalizationError(RuntimeError):
    """A parameter block's sum collapsed; dividing through is meaningless."""


@dataclass(frozen=True, eq=False)
class StrategyParams:
    """Category weights plus flex-share vectors, each summing to one."""

    j_c: np.ndarray
    shares: FlexShares

    def __post_init__(self) -> None:
        object.__setattr__(self, "j_c", np.asarray(self.j_c, dtype=float))

    def to_flat(self) -> np.ndarray:
        return np.concatenate([self.j_c, self.shares.j_u, self.shares.j_g, self.shares.j_f])

    @classmethod
    def from_flat(cls, flat: np.ndarray, n_categories: int) -> "StrategyParams":
        c = n_categories
        return cls(
            flat[:c],
            FlexShares(flat[c : c + 5], flat[c + 5 : c + 7], flat[c + 7 : c + 9]),
        )

    @classmethod
    def default(cls, j_c: np.ndarray) -> "StrategyParams":
        return cls(np.asarray(j_c, dtype=float).copy(), FlexShares.uniform())


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_iters: int = 100
    grad_tolerance: float = 1e-6
    init_mix: float = 0.5  # blend of default weights vs previous-round weights

    def __post_init__(self) -> None:
        if min(self.learning_rate, self.beta1, self.beta2, self.epsilon) <= 0:
            raise ValueError("optimizer constants must be positive")
        if not 0.0 <= self.init_mix <= 1.0:
            raise ValueError("init_mix must lie in [0, 1]")


ValueAndGrad = Callable[[StrategyParams], tuple[float, np.ndarray]]


def _normalize_sum(vec: np.ndarray, name: str) -> np.ndarray:
    total = float(vec.sum())
    if total <= SUM_GUARD:
        raise RenormalizationError(f"{name} sums to {total:.3e}; cannot renormalize")
    return vec / total


def renormalize(params: StrategyParams) -> StrategyParams:
    """Divide each block by its own sum; flex shares are clamped to [0, 1] first."""
    j_c = _normalize_sum(params.j_c, "j_c")
    shares = FlexShares(
        _normalize_sum(np.clip(params.shares.j_u, 0.0, 1.0), "j_u"),
        _normalize_sum(np.clip(params.shares.j_g, 0.0, 1.0), "j_g"),
        _normalize_sum(np.clip(params.shares.j_f, 0.0, 1.0), "j_f"),
    )
    return StrategyParams(j_c, shares)


def _sin_angle(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    cos = float(a @ b) / (na * nb)
    return float(np.sqrt(max(0.0, 1.0 - cos * cos)))


def _perturb_direction(direction: np.ndarray) -> np.ndarray:
    """Unit-sum copy of the direction, or a first-axis fallback when it cancels."""
    direction = np.asarray(direction, dtype=float)
    total = float(direction.sum())
    if not np.isfinite(total) or abs(total) < 1e-9:
        fallback = np.zeros(direction.shape[0])
        fallback[0] = 1.0
        return fallback
    return direction / total


def initialize(
    round_index: int,
    prev: StrategyParams | None,
    v: np.ndarray,
    candidate_direction: np.ndarray,
    config: OptimizerConfig | None = None,
) -> StrategyParams:
    """Starting point: default weights nudged toward the candidate, or a blend
    of default and previous-round weights. Never returns weights collinear with v."""
    config = config or OptimizerConfig()
    v = np.asarray(v, dtype=float)
    if round_index <= 1 or prev is None:
        j_c = _normalize_sum(v + INIT_PERTURBATION * _perturb_direction(candidate_direction), "j_c")
        shares = FlexShares.uniform()
    else:
        j_c = _normalize_sum(config.init_mix * v + (1.0 - config.init_mix) * prev.j_c, "j_c")
        shares = FlexShares(prev.shares.j_u.copy(), prev.shares.j_g.copy(), prev.shares.j_f.copy())
    if _sin_angle(j_c, v) < 1e-8:
        j_c = _normalize_sum(j_c + INIT_PERTURBATION * _perturb_direction(candidate_direction), "j_c")
        if _sin_angle(j_c, v) < 1e-8:
            bump = np.zeros(j_c.shape[0])
            bump[0] = INIT_PERTURBATION
            j_c = _normalize_sum(j_c + bump, "j_c")
    return StrategyParams(j_c, shares)


def _nudge_off_baseline(params: StrategyParams, v: np.ndarray | None) -> StrategyParams:
    """Move the iterate 1e-6 away from the baseline direction after a singularity."""
    j_c = params.j_c
    if v is None:
        d = np.zeros(j_c.shape[0])
        d[0] = 1.0
    else:
        d = j_c - v
        if np.linalg.norm(d) < 1e-12:
            d = np.zeros(j_c.shape[0])
            d[0] = 1.0
            d = d - v
    d = d / np.linalg.norm(d)
    return renormalize(StrategyParams(j_c + 1e-6 * d, params.shares))


@dataclass
class OptimizeResult:
    params: StrategyParams
    value: float
    gradient: np.ndarray
    trace: list[dict] = field(default_factory=list)


def optimize(
    initial: StrategyParams,
    value_and_grad: ValueAndGrad,
    config: OptimizerConfig | None = None,
    baseline: np.ndarray | None = None,
) -> OptimizeResult:
    """Adam ascent with renormalization after every step; returns the best iterate.

    Singular evaluations (weights collinear with the baseline) nudge the iterate
    off the baseline and continue; five failures abort with the best so far.
    """
    config = config or OptimizerConfig()
    n_cat = initial.j_c.shape[0]
    params = renormalize(initial)
    trace: list[dict] = []
    failures = 0

    def evaluate(p: StrategyParams) -> tuple[StrategyParams, float, np.ndarray] | None:
        nonlocal failures
        while True:
            try:
                value, grad = value_and_grad(p)
                return p, float(value), np.asarray(grad, dtype=float)
            except CollinearWeightsError:
                failures += 1
                if failures >= 5:
                    return None
                p = _nudge_off_baseline(p, baseline)

    first = evaluate(params)
    if first is None:
        raise CollinearWeightsError("could not evaluate the objective near the start point")
    params, value, grad = first
    best = OptimizeResult(params, value, grad, trace)
    trace.append({"iteration": 0, "value": value, "grad_norm": float(np.abs(grad).max())})
    if config.max_iters == 0 or float(np.abs(grad).max()) < config.grad_tolerance:
        return best

    theta = params.to_flat()
    m = np.zeros_like(theta)
    u = np.zeros_like(theta)
    for step in range(1, config.max_iters + 1):
        m = config.beta1 * m + (1.0 - config.beta1) * grad
        u = config.beta2 * u + (1.0 - config.beta2) * grad * grad
        m_hat = m / (1.0 - config.beta1**step)
        u_hat = u / (1.0 - config.beta2**step)
        theta = theta + config.learning_rate * m_hat / (np.sqrt(u_hat) + config.epsilon)
        try:
            params = renormalize(StrategyParams.from_flat(theta, n_cat))
        except RenormalizationError:
            break
        theta = params.to_flat()
        result = evaluate(params)
        if result is None:
            break
        params, value, grad = result
        theta = params.to_flat()
        grad_norm = float(np.abs(grad).max())
        trace.append({"iteration": step, "value": value, "grad_norm": grad_norm})
        if value > best.value:
            best = OptimizeResult(params, value, grad, trace)
        if grad_norm < config.grad_tolerance:
            break
    best.trace = trace
    return best


def write_trace(trace: list[dict], path: str | Path) -> None:
    """Dump an optimization trace as JSON lines for offline inspection."""
    with open(path, "w", encoding="utf-8") as fh:
        for entry in trace:
            fh.write(json.dumps(entry) + "\n")
