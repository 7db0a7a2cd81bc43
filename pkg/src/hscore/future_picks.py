"""Statistics of not-yet-made picks under a weighted drafting strategy.

Future picks are modeled as draws from a multivariate normal over category
X-scores, conditioned on opponents drafting by generic value. A manager who
weights categories with j gains omega*sigma in the j basis and concedes
gamma*sigma of generic value, where sigma is the spread of j-weighted value
across candidates after projecting out the generic direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import POSITIONS, LeagueConfig
from .ingest import PlayerRecord
from .scoring import CategoryVector, LeagueAggregates, x_score_matrix

COLLINEAR_SIN_TOL = 1e-8
DENOM_TOL = 1e-14


class CollinearWeightsError(ValueError):
    """Weights are (anti)parallel to the baseline; the differential is undefined."""


class DegenerateCovarianceError(ValueError):
    """The covariance gives the baseline direction zero spread."""


class GroupSizeError(ValueError):
    """A position group is too small to estimate a covariance."""


class DegenerateRegressionError(ValueError):
    """Calibration observations carry no sigma variation to regress on."""


@dataclass(frozen=True, eq=False)
class CategoryCovariance:
    """Cross-category covariance of player X-scores, averaged over positions."""

    sigma_mat: np.ndarray


@dataclass(frozen=True)
class DeltaParams:
    """Proportionality constants linking sigma to weighted gain and generic loss.

    Fitted values are allowed any finite magnitude; operational defaults are
    positive.
    """

    omega: float = 0.7
    gamma: float = 0.25

    def __post_init__(self) -> None:
        if not (np.isfinite(self.omega) and np.isfinite(self.gamma)):
            raise ValueError("omega and gamma must be finite")


@dataclass(frozen=True)
class CalibrationResult:
    params: DeltaParams
    r_squared_omega: float
    r_squared_gamma: float
    stderr_omega: float
    stderr_gamma: float
    n_observations: int


def category_covariance(
    q: list[PlayerRecord], agg: LeagueAggregates, config: LeagueConfig | None = None
) -> CategoryCovariance:
    """Weighted covariance of X-scores per position group, averaged over groups.

    A player eligible for k positions joins each of their groups with weight 1/k.
    """
    config = config or agg.config
    x = x_score_matrix(q, agg)
    mats = []
    for pos in POSITIONS:
        idx = [i for i, rec in enumerate(q) if pos in rec.eligible_positions]
        if len(idx) < 2:
            raise GroupSizeError(f"position {pos} has {len(idx)} eligible players; need >= 2")
        w = np.array([1.0 / len(q[i].eligible_positions) for i in idx])
        rows = x[idx]
        mean = (w[:, None] * rows).sum(axis=0) / w.sum()
        centered = rows - mean
        mats.append((w[:, None, None] * np.einsum("ni,nj->nij", centered, centered)).sum(axis=0) / w.sum())
    avg = np.mean(mats, axis=0)
    return CategoryCovariance(0.5 * (avg + avg.T))


def _check_direction(j: np.ndarray, v: np.ndarray) -> None:
    nj, nv = np.linalg.norm(j), np.linalg.norm(v)
    if nj == 0 or nv == 0:
        raise CollinearWeightsError("zero-length weight vector")
    cos = float(j @ v) / (nj * nv)
    sin_sq = max(0.0, 1.0 - cos * cos)
    if np.sqrt(sin_sq) < COLLINEAR_SIN_TOL:
        raise CollinearWeightsError("weights are collinear with the baseline vector")


def sigma_of_weights(j_c: np.ndarray, v: np.ndarray, cov: CategoryCovariance) -> float:
    """Standard deviation of j-weighted candidate value with the baseline projected out."""
    j = np.asarray(j_c, dtype=float)
    v = np.asarray(v, dtype=float)
    s = cov.sigma_mat
    alpha = float(v @ s @ v)
    if alpha <= 0:
        raise DegenerateCovarianceError("baseline direction has nonpositive variance")
    u = j - v * float(v @ s @ j) / alpha
    var = float(u @ s @ u)
    if var < -1e-12:
        raise DegenerateCovarianceError(f"negative projected variance {var}")
    return float(np.sqrt(max(var, 0.0)))


def _delta_core(
    j: np.ndarray, v: np.ndarray, s: np.ndarray, omega: float, gamma: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-pick differential and its Jacobian with respect to the weights.

    The differential is the minimum-Mahalanobis-norm vector satisfying
    j^T x = omega*sigma and v^T x = -gamma*sigma.
    """
    _check_direction(j, v)
    a = s @ v
    b = s @ j
    alpha = float(v @ a)
    if alpha <= 0:
        raise DegenerateCovarianceError("baseline direction has nonpositive variance")
    beta = float(a @ j)
    kappa = float(j @ b)
    d = kappa * alpha - beta * beta
    if d <= DENOM_TOL:
        raise CollinearWeightsError("weights are collinear with the baseline under the covariance")
    p = -gamma * kappa - omega * beta
    qq = -gamma * beta - omega * alpha
    root = np.sqrt(alpha * d)
    vec = a * p - b * qq
    x = vec / root

    dp = -2.0 * gamma * b - omega * a
    dq = -gamma * a
    dd = 2.0 * (alpha * b - beta * a)
    jac = (np.outer(a, dp) - qq * s - np.outer(b, dq)) / root
    jac -= np.outer(vec, dd) * (alpha / (2.0 * root**3))
    return x, jac


def x_delta(
    j_c: np.ndarray,
    params: DeltaParams,
    cov: CategoryCovariance,
    v: np.ndarray,
    picks_remaining: int,
) -> CategoryVector:
    """Expected aggregate differential of the remaining picks, scaled by their count."""
    if picks_remaining < 0:
        raise ValueError("picks_remaining must be >= 0")
    j = np.asarray(j_c, dtype=float)
    if picks_remaining == 0:
        return CategoryVector(np.zeros(j.shape[0]), basis="x")
    x, _ = _delta_core(j, np.asarray(v, dtype=float), cov.sigma_mat, params.omega, params.gamma)
    return CategoryVector(picks_remaining * x, basis="x")


def x_delta_gradient(
    j_c: np.ndarray,
    params: DeltaParams,
    cov: CategoryCovariance,
    v: np.ndarray,
    picks_remaining: int,
) -> np.ndarray:
    """Jacobian of the aggregate differential with respect to the weights."""
    if picks_remaining < 0:
        raise ValueError("picks_remaining must be >= 0")
    j = np.asarray(j_c, dtype=float)
    if picks_remaining == 0:
        return np.zeros((j.shape[0], j.shape[0]))
    _, jac = _delta_core(j, np.asarray(v, dtype=float), cov.sigma_mat, params.omega, params.gamma)
    return picks_remaining * jac


def x_delta_and_gradient(
    j_c: np.ndarray,
    params: DeltaParams,
    cov: CategoryCovariance,
    v: np.ndarray,
    picks_remaining: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Value and Jacobian in one pass (the optimizer's hot path)."""
    j = np.asarray(j_c, dtype=float)
    if picks_remaining == 0:
        c = j.shape[0]
        return np.zeros(c), np.zeros((c, c))
    x, jac = _delta_core(j, np.asarray(v, dtype=float), cov.sigma_mat, params.omega, params.gamma)
    return picks_remaining * x, picks_remaining * jac


def calibrate(observations: list[tuple[float, float, float]]) -> CalibrationResult:
    """Fit omega (m on sigma) and gamma (k on sigma) by through-origin least squares."""
    obs = np.asarray(observations, dtype=float)
    if obs.ndim != 2 or obs.shape[1] != 3 or obs.shape[0] < 2:
        raise ValueError("need at least two (sigma, m, k) observations")
    sig, m, k = obs[:, 0], obs[:, 1], obs[:, 2]
    if sig.std() == 0:
        raise DegenerateRegressionError("sigma observations carry no variation")
    ss = float(sig @ sig)
    n = obs.shape[0]

    def fit(y: np.ndarray) -> tuple[float, float, float]:
        slope = float(sig @ y) / ss
        resid = y - slope * sig
        ss_res = float(resid @ resid)
        ss_tot = float(y @ y)
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
        se = float(np.sqrt(ss_res / (n - 1) / ss))
        return slope, r2, se

    omega, r2_m, se_m = fit(m)
    gamma, r2_k, se_k = fit(k)
    return CalibrationResult(DeltaParams(omega, gamma), r2_m, r2_k, se_m, se_k, n)
