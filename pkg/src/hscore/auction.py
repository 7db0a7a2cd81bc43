"""Auction adaptation: replacement profiles, per-dollar benefit, cash equivalents.

Auction valuation reuses the draft decomposition but swaps unknown future picks
for replacement-level players plus a money term: extra roster spots are worth
the replacement profile R and extra dollars are worth the per-dollar benefit D.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import EACH_CATEGORY, FLEX_COVERAGE, POSITIONS, LeagueConfig
from .draft import ValuationModel, _objective_closure, _CandidateSetup
from .objective import DifferentialDistribution, win_probabilities
from .optimizer import OptimizerConfig, StrategyParams, initialize, optimize
from .roster import build_reward_matrix, open_slot_summary, position_rewards, solve_assignment

CASH_GRID_POINTS = 41


class AuctionError(RuntimeError):
    """The auction state cannot support the requested valuation."""


def replacement_profile(model: ValuationModel, drafted: set[str]) -> np.ndarray:
    """Replacement-level player spread across categories in X-score units.

    The replacement G total is shared evenly with the sign inverted for
    lower-is-better categories, then divided by the conversion components.
    """
    g_repl = _replacement_g(model, drafted)
    return _spread_g_value(g_repl, model)


def _replacement_g(model: ValuationModel, drafted: set[str]) -> float:
    undrafted = [pid for pid in model.order if pid not in drafted]
    if not undrafted:
        raise AuctionError("no undrafted players remain")
    open_slots = model.config.num_teams * model.config.roster_size - len(drafted)
    idx = min(open_slots, len(undrafted) - 1)
    return model.g_total[undrafted[idx]]


def _spread_g_value(total: float, model: ValuationModel) -> np.ndarray:
    signs = np.array(model.config.signs())
    n_neg = int((signs < 0).sum())
    divisor = model.config.num_categories - 2 * n_neg
    if divisor <= 0:
        raise AuctionError("too many inverted categories to spread a scalar value")
    return signs * (total / divisor) / model.v_raw


def dollar_benefit(model: ValuationModel, drafted: set[str], money_remaining: float) -> np.ndarray:
    """Expected per-dollar category benefit from the remaining above-replacement pool."""
    if money_remaining <= 0:
        raise AuctionError("no money remains in the pool")
    g_repl = _replacement_g(model, drafted)
    undrafted = [pid for pid in model.order if pid not in drafted]
    open_slots = model.config.num_teams * model.config.roster_size - len(drafted)
    surplus = sum(
        max(model.g_total[pid] - g_repl, 0.0) for pid in undrafted[:open_slots]
    )
    return _spread_g_value(surplus / money_remaining, model)


@dataclass(eq=False)
class AuctionState:
    """Rosters plus per-team budgets over a fixed valuation model."""

    model: ValuationModel
    rosters: list[list[str]] = field(default_factory=list)
    money: list[float] = field(default_factory=list)
    budget: float = 200.0
    opt_config: OptimizerConfig = field(default_factory=OptimizerConfig)
    prev_params: dict[int, StrategyParams] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = self.model.config.num_teams
        if not self.rosters:
            self.rosters = [[] for _ in range(n)]
        if not self.money:
            self.money = [float(self.budget)] * n
        if any(m < 0 for m in self.money):
            raise AuctionError("negative budget")

    @property
    def drafted(self) -> set[str]:
        return {pid for roster in self.rosters for pid in roster}

    def money_in_pool(self) -> float:
        return float(sum(self.money))


def _team_x(state: AuctionState, team: int) -> np.ndarray:
    c = state.model.config.num_categories
    roster = state.rosters[team]
    return np.sum([state.model.x[pid] for pid in roster], axis=0) if roster else np.zeros(c)


def _auction_setup(
    state: AuctionState,
    team: int,
    candidate_x: np.ndarray,
    candidate_positions: tuple[str, ...],
    extra_cash: float,
    j_c: np.ndarray,
) -> _CandidateSetup:
    model = state.model
    config = model.config
    r_vec = replacement_profile(model, state.drafted)
    d_vec = dollar_benefit(model, state.drafted, state.money_in_pool())
    my_count = len(state.rosters[team]) + 1
    remaining = config.roster_size - my_count
    x_own = _team_x(state, team) + candidate_x
    diffs = []
    for opp in range(config.num_teams):
        if opp == team:
            continue
        m_extra = my_count - len(state.rosters[opp])
        l_extra = state.money[team] + extra_cash - state.money[opp]
        diffs.append(x_own - _team_x(state, opp) + m_extra * r_vec + l_extra * d_vec)
    variance = 2.0 * config.roster_size + remaining * model.aggregates.x_sigma_sq
    eligs = [model.players[pid].eligible_positions for pid in state.rosters[team]]
    eligs.append(candidate_positions)
    rewards = position_rewards(j_c, model.pos_means)
    assignment, _ = solve_assignment(build_reward_matrix(eligs, model.structure, rewards))
    fixed, flex = open_slot_summary(assignment, len(eligs), model.structure)
    return _CandidateSetup(np.array(diffs), variance, remaining, fixed, flex)


def auction_differential(
    state: AuctionState,
    team: int,
    candidate: str,
    params: StrategyParams,
    opponent: int,
) -> DifferentialDistribution:
    """Differential distribution versus one opponent in the auction decomposition."""
    model = state.model
    setup = _auction_setup(
        state, team, model.x[candidate], model.players[candidate].eligible_positions, 0.0, params.j_c
    )
    closure_mean = _auction_mean(setup, model, params)
    opp_index = [t for t in range(model.config.num_teams) if t != team].index(opponent)
    return DifferentialDistribution(closure_mean[opp_index], setup.variance)


def _auction_mean(setup: _CandidateSetup, model: ValuationModel, params: StrategyParams) -> np.ndarray:
    from .future_picks import x_delta_and_gradient

    if setup.picks_remaining > 0:
        delta, _ = x_delta_and_gradient(
            params.j_c, model.delta_params, model.covariance, model.v, setup.picks_remaining
        )
    else:
        delta = np.zeros(model.config.num_categories)
    counts = setup.fixed_counts.copy()
    counts += setup.flex_counts["UTIL"] * params.shares.j_u
    for share, pos in zip(params.shares.j_g, FLEX_COVERAGE["G"]):
        counts[POSITIONS.index(pos)] += setup.flex_counts["G"] * share
    for share, pos in zip(params.shares.j_f, FLEX_COVERAGE["F"]):
        counts[POSITIONS.index(pos)] += setup.flex_counts["F"] * share
    return setup.base_diffs + delta + model.pos_means.matrix.T @ counts


def auction_h_score(
    state: AuctionState,
    team: int,
    candidate_x: np.ndarray,
    candidate_positions: tuple[str, ...],
    extra_cash: float = 0.0,
    warm_start: StrategyParams | None = None,
) -> tuple[float, StrategyParams, np.ndarray]:
    """Optimized objective for an arbitrary candidate profile plus optional cash."""
    model = state.model
    k = len(state.rosters[team])
    init = warm_start or initialize(k + 1, state.prev_params.get(team), model.v, candidate_x, state.opt_config)
    setup = _auction_setup(state, team, candidate_x, candidate_positions, extra_cash, init.j_c)
    closure = _objective_closure(setup, model)
    result = optimize(init, closure, state.opt_config, baseline=model.v)
    means = _auction_mean(setup, model, result.params)
    w = np.array(
        [win_probabilities(DifferentialDistribution(m, setup.variance)).w for m in means]
    )
    return result.value, result.params, w.mean(axis=0)


@dataclass(eq=False)
class CashCurve:
    grid: np.ndarray
    values: np.ndarray


def cash_curve(state: AuctionState, team: int, n_points: int = CASH_GRID_POINTS) -> CashCurve:
    """H-scores of a replacement-level pick at increasing levels of extra cash.

    Each grid point warm-starts from the previous optimum so the curve
    inherits the objective's monotonicity in cash.
    """
    model = state.model
    repl = replacement_profile(model, state.drafted)
    top = 2.0 * max(state.money)
    grid = np.linspace(0.0, top, n_points)
    values = np.zeros(n_points)
    warm: StrategyParams | None = None
    for i, cash in enumerate(grid):
        value, params, _ = auction_h_score(state, team, repl, tuple(POSITIONS), cash, warm_start=warm)
        values[i] = value
        warm = params
    return CashCurve(grid, values)


def cash_equivalent(
    state: AuctionState,
    team: int,
    candidate: str,
    curve: CashCurve | None = None,
) -> tuple[float, bool]:
    """Dollar value whose cash-only H-score matches the candidate's H-score.

    Returns (dollars, saturated); saturated means the candidate exceeded the
    curve's maximum and the top of the grid was returned.
    """
    model = state.model
    value, _, _ = auction_h_score(
        state, team, model.x[candidate], model.players[candidate].eligible_positions
    )
    if curve is None:
        curve = cash_curve(state, team)
    return invert_cash_curve(curve, value)


def invert_cash_curve(curve: CashCurve, value: float) -> tuple[float, bool]:
    grid = curve.grid
    vals = np.maximum.accumulate(curve.values)  # guard hairline non-monotonicity
    if value >= vals[-1]:
        return float(grid[-1]), True
    if value <= vals[0]:
        return 0.0, False
    hi = int(np.searchsorted(vals, value, side="left"))
    lo = hi - 1
    span = vals[hi] - vals[lo]
    frac = 0.0 if span <= 0 else (value - vals[lo]) / span
    return float(grid[lo] + frac * (grid[hi] - grid[lo])), False
