"""League aggregates over the relevant set and the X / G scoring bases.

The X basis standardizes every category by week-to-week spread only, with
turnovers sign-flipped so larger is always better. The G basis restores
player-to-player spread via the per-category conversion components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import COUNTING, LeagueConfig
from .ingest import PlayerRecord


class DegenerateCategoryError(ValueError):
    """A category has zero week-to-week spread, so standardization is undefined."""


@dataclass(frozen=True, eq=False)
class CategoryVector:
    """Length-C per-category vector tagged with the basis its numbers live in."""

    values: np.ndarray
    basis: str = "raw"

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __array__(self, dtype=None, copy=None):
        arr = np.asarray(self.values, dtype=dtype)
        return arr.copy() if copy else arr

    def sum(self) -> float:
        return float(self.values.sum())


@dataclass(frozen=True, eq=False)
class LeagueAggregates:
    """Pooled per-category statistics over the relevant set Q.

    For counting categories ``mu``/``tau``/``sigma`` describe player weekly
    means directly. For percentage categories they describe the volume-weighted
    impact quantity (a_q/a_mu)*(r_q - r_mu), with ``mu`` holding the pooled make
    rate r_mu and ``att_mu`` the mean weekly attempt volume a_mu.
    """

    config: LeagueConfig
    mu: np.ndarray
    tau: np.ndarray
    sigma: np.ndarray
    att_mu: np.ndarray
    x_sigma_sq: np.ndarray


def _weekly_value_rows(q: list[PlayerRecord], cat, r_mu: float, a_mu: float) -> list[np.ndarray]:
    """Per-player arrays of the category's weekly values (impact units for percentages)."""
    rows = []
    for rec in q:
        wks = rec.sampling_weeks
        if cat.kind == COUNTING:
            rows.append(np.array([w.value(cat.name) for w in wks], dtype=float))
        else:
            made = np.array([w.value(cat.made_field) for w in wks], dtype=float)
            att = np.array([w.value(cat.att_field) for w in wks], dtype=float)
            rows.append((made - r_mu * att) / a_mu if a_mu > 0 else np.zeros(len(wks)))
    return rows


def _pct_pool_stats(q: list[PlayerRecord], cat) -> tuple[float, float]:
    made = sum(r.category_means[cat.made_field] for r in q)
    att = sum(r.category_means[cat.att_field] for r in q)
    r_mu = made / att if att > 0 else 0.0
    a_mu = float(np.mean([r.category_means[cat.att_field] for r in q]))
    return r_mu, a_mu


def league_aggregates(q: list[PlayerRecord], config: LeagueConfig) -> LeagueAggregates:
    """Compute mu/tau/sigma per category over Q plus the X-score variances.

    tau pools week-to-week spread as the root mean square of per-player weekly
    standard deviations; sigma is the player-to-player spread of player means.
    """
    if len(q) < 2:
        raise ValueError("need at least two players to aggregate")
    if any(len(r.sampling_weeks) < 2 for r in q):
        raise ValueError("every player needs at least two non-injured weeks")
    C = config.num_categories
    mu = np.zeros(C)
    tau = np.zeros(C)
    sigma = np.zeros(C)
    att_mu = np.ones(C)
    for ci, cat in enumerate(config.categories):
        if cat.kind == COUNTING:
            r_mu, a_mu = 0.0, 1.0
        else:
            r_mu, a_mu = _pct_pool_stats(q, cat)
            att_mu[ci] = a_mu
        rows = _weekly_value_rows(q, cat, r_mu, a_mu)
        player_means = np.array([row.mean() for row in rows])
        weekly_vars = np.array([row.var(ddof=1) for row in rows])
        tau[ci] = float(np.sqrt(weekly_vars.mean()))
        if tau[ci] <= 0 or not np.isfinite(tau[ci]):
            raise DegenerateCategoryError(
                f"category {cat.name!r} has zero week-to-week spread over Q"
            )
        sigma[ci] = float(player_means.std())
        mu[ci] = r_mu if cat.kind != COUNTING else float(player_means.mean())
    agg = LeagueAggregates(config, mu, tau, sigma, att_mu, np.zeros(C))
    x = x_score_matrix(q, agg)
    object.__setattr__(agg, "x_sigma_sq", x.var(axis=0))
    return agg


def _x_row(rec: PlayerRecord, agg: LeagueAggregates) -> np.ndarray:
    config = agg.config
    out = np.zeros(config.num_categories)
    for ci, cat in enumerate(config.categories):
        if cat.kind == COUNTING:
            raw = (rec.category_means[cat.name] - agg.mu[ci]) / agg.tau[ci]
        else:
            rate, att = rec.rate_and_volume(cat.made_field, cat.att_field)
            raw = (att / agg.att_mu[ci]) * (rate - agg.mu[ci]) / agg.tau[ci]
        out[ci] = cat.sign * raw
    return out


def x_score(player: PlayerRecord, agg: LeagueAggregates) -> CategoryVector:
    """Week-to-week standardized score; all categories oriented larger-is-better."""
    return CategoryVector(_x_row(player, agg), basis="x")


def x_score_matrix(q: list[PlayerRecord], agg: LeagueAggregates) -> np.ndarray:
    return np.array([_x_row(rec, agg) for rec in q])


def conversion_components(agg: LeagueAggregates) -> np.ndarray:
    """Un-normalized per-category X-to-G conversion: tau / sqrt(tau^2 + sigma^2)."""
    return agg.tau / np.sqrt(agg.tau**2 + agg.sigma**2)


def v_vector(agg: LeagueAggregates) -> CategoryVector:
    """Conversion components normalized to sum to one (the default weighting)."""
    raw = conversion_components(agg)
    return CategoryVector(raw / raw.sum(), basis="weight")


def g_score(player: PlayerRecord, agg: LeagueAggregates) -> tuple[CategoryVector, float]:
    """Per-category G-scores (X times un-normalized conversion) and their total."""
    g = _x_row(player, agg) * conversion_components(agg)
    return CategoryVector(g, basis="g"), float(g.sum())


def g_totals(q: list[PlayerRecord], agg: LeagueAggregates) -> np.ndarray:
    comps = conversion_components(agg)
    return np.array([float((_x_row(rec, agg) * comps).sum()) for rec in q])
