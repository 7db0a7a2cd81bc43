"""Snake-draft decision engine: matchup decomposition and dynamic pick valuation.

Every candidate is scored by optimizing category weights and flex shares for
the matchup objective averaged over all opponents; the candidate with the
highest optimized value is taken.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .config import EACH_CATEGORY, FLEX_COVERAGE, POSITIONS, LeagueConfig
from .future_picks import (
    CategoryCovariance,
    DeltaParams,
    category_covariance,
    sigma_of_weights,
    x_delta_and_gradient,
)
from .ingest import PlayerRecord
from .objective import (
    DifferentialDistribution,
    most_categories_value_batch,
    pdf_at_zero,
    tipping_points_batch,
    win_probabilities,
)
from .optimizer import OptimizerConfig, OptimizeResult, StrategyParams, initialize, optimize
from .roster import (
    PositionMeans,
    SlotStructure,
    build_reward_matrix,
    open_slot_summary,
    position_means,
    position_rewards,
    roster_completable,
    roster_feasible,
    solve_assignment,
)
from .scoring import (
    LeagueAggregates,
    conversion_components,
    league_aggregates,
    v_vector,
    x_score_matrix,
)

SQRT2 = np.sqrt(2.0)
SQRT2PI = np.sqrt(2.0 * np.pi)


class DraftError(RuntimeError):
    """The draft cannot proceed (no feasible candidate, inconsistent state)."""


class PoolExhaustionError(DraftError):
    """Not enough undrafted players remain to estimate an opponent fill."""


@dataclass(frozen=True, eq=False)
class ObjectiveReport:
    """Valuation of one candidate: objective value, win probabilities, weights."""

    player_id: str
    value: float
    win_probs: np.ndarray
    params: StrategyParams
    gradient: np.ndarray | None = None
    feasible: bool = True


@dataclass(eq=False)
class ValuationModel:
    """Per-draft immutable data: the relevant set and everything derived from it."""

    config: LeagueConfig
    players: dict[str, PlayerRecord]
    order: tuple[str, ...]  # relevant set sorted by G total (desc, then id)
    aggregates: LeagueAggregates
    covariance: CategoryCovariance
    pos_means: PositionMeans
    v: np.ndarray
    v_raw: np.ndarray
    x: dict[str, np.ndarray]
    g_total: dict[str, float]
    delta_params: DeltaParams
    structure: SlotStructure

    @classmethod
    def build(
        cls,
        q: list[PlayerRecord],
        config: LeagueConfig,
        delta_params: DeltaParams | None = None,
    ) -> "ValuationModel":
        agg = league_aggregates(q, config)
        xmat = x_score_matrix(q, agg)
        comps = conversion_components(agg)
        g = xmat @ comps
        ids = [rec.player_id for rec in q]
        g_map = {pid: float(g[i]) for i, pid in enumerate(ids)}
        order = tuple(sorted(ids, key=lambda pid: (-g_map[pid], pid)))
        return cls(
            config=config,
            players={rec.player_id: rec for rec in q},
            order=order,
            aggregates=agg,
            covariance=category_covariance(q, agg, config),
            pos_means=position_means(q, agg),
            v=v_vector(agg).values,
            v_raw=comps,
            x={pid: xmat[i] for i, pid in enumerate(ids)},
            g_total=g_map,
            delta_params=delta_params or DeltaParams(config.omega, config.gamma),
            structure=SlotStructure.from_config(config),
        )


def snake_team_for_pick(ordinal: int, num_teams: int) -> int:
    """Team on the clock for a 1-based overall pick in a serpentine draft."""
    if ordinal < 1:
        raise ValueError("pick ordinals are 1-based")
    round_index, offset = divmod(ordinal - 1, num_teams)
    return offset if round_index % 2 == 0 else num_teams - 1 - offset


@dataclass(eq=False)
class DraftState:
    """Mutable draft bookkeeping over a fixed valuation model."""

    model: ValuationModel
    rosters: list[list[str]] = field(default_factory=list)
    drafted: set[str] = field(default_factory=set)
    pick_ordinal: int = 1
    prev_params: dict[int, StrategyParams] = field(default_factory=dict)
    shortlist_size: int = 50
    opt_config: OptimizerConfig = field(default_factory=OptimizerConfig)
    last_report: ObjectiveReport | None = None

    def __post_init__(self) -> None:
        if not self.rosters:
            self.rosters = [[] for _ in range(self.model.config.num_teams)]

    @property
    def config(self) -> LeagueConfig:
        return self.model.config

    @property
    def total_picks(self) -> int:
        return self.config.num_teams * self.config.roster_size

    @property
    def complete(self) -> bool:
        return self.pick_ordinal > self.total_picks

    @property
    def team_on_clock(self) -> int:
        return snake_team_for_pick(self.pick_ordinal, self.config.num_teams)

    def undrafted_by_g(self) -> list[str]:
        return [pid for pid in self.model.order if pid not in self.drafted]

    def apply_pick(self, team: int, player_id: str) -> None:
        if player_id in self.drafted:
            raise DraftError(f"{player_id} is already drafted")
        if player_id not in self.model.players:
            raise DraftError(f"{player_id} is not in the relevant set")
        self.rosters[team].append(player_id)
        self.drafted.add(player_id)
        self.pick_ordinal += 1

    def roster_eligibilities(self, team: int) -> list[tuple[str, ...]]:
        return [self.model.players[pid].eligible_positions for pid in self.rosters[team]]


def fill_vector(state: DraftState) -> np.ndarray:
    """Mean X-score of the next generic players in G order (opponent fill proxy).

    Uses up to num_teams undrafted players, fewer near the end of the draft.
    """
    pool = state.undrafted_by_g()
    n = min(state.config.num_teams, len(pool))
    if n == 0:
        raise PoolExhaustionError("no undrafted players remain to estimate a fill")
    return np.mean([state.model.x[pid] for pid in pool[:n]], axis=0)


def opponent_fill(state: DraftState, opponent: int) -> np.ndarray:
    """Known X-score total of an opponent, topped up to K+1 players when needed."""
    me = state.team_on_clock
    k = len(state.rosters[me])
    opp_n = len(state.rosters[opponent])
    total = np.sum([state.model.x[pid] for pid in state.rosters[opponent]], axis=0) if opp_n else np.zeros(state.config.num_categories)
    if opp_n == k + 1:
        return total
    if opp_n == k:
        return total + fill_vector(state)
    raise DraftError(f"opponent {opponent} has {opp_n} picks while manager has {k}")


@dataclass(eq=False)
class _CandidateSetup:
    base_diffs: np.ndarray  # n_opponents x C
    variance: np.ndarray
    picks_remaining: int
    fixed_counts: np.ndarray
    flex_counts: dict[str, int]


def _open_counts_for(state: DraftState, team: int, candidate: str, j_c: np.ndarray):
    eligs = state.roster_eligibilities(team) + [state.model.players[candidate].eligible_positions]
    rewards = position_rewards(j_c, state.model.pos_means)
    matrix = build_reward_matrix(eligs, state.model.structure, rewards)
    assignment, _ = solve_assignment(matrix)
    return open_slot_summary(assignment, len(eligs), state.model.structure)


def _candidate_setup(
    state: DraftState, candidate: str, fill: np.ndarray, j_c: np.ndarray
) -> _CandidateSetup:
    model = state.model
    me = state.team_on_clock
    k = len(state.rosters[me])
    n = state.config.roster_size
    remaining = n - k - 1
    x_own = np.sum([model.x[pid] for pid in state.rosters[me]], axis=0) if k else np.zeros(
        state.config.num_categories
    )
    x_own = x_own + model.x[candidate]
    diffs = []
    for opp in range(state.config.num_teams):
        if opp == me:
            continue
        opp_roster = state.rosters[opp]
        opp_total = (
            np.sum([model.x[pid] for pid in opp_roster], axis=0)
            if opp_roster
            else np.zeros(state.config.num_categories)
        )
        # opponents are known to K+1 players; top up shorter rosters with the
        # generic fill (out-of-order picks can leave them more than one short)
        missing = max(0, k + 1 - len(opp_roster))
        if missing:
            opp_total = opp_total + missing * fill
        diffs.append(x_own - opp_total)
    variance = 2.0 * n + remaining * model.aggregates.x_sigma_sq
    fixed, flex = _open_counts_for(state, me, candidate, j_c)
    return _CandidateSetup(np.array(diffs), variance, remaining, fixed, flex)


def _objective_closure(setup: _CandidateSetup, model: ValuationModel):
    """Averaged-over-opponents objective value and gradient in the flat param layout."""
    config = model.config
    mu = model.pos_means.matrix  # 5 x C
    sd = np.sqrt(setup.variance)
    guard_positions = [POSITIONS.index(p) for p in FLEX_COVERAGE["G"]]
    forward_positions = [POSITIONS.index(p) for p in FLEX_COVERAGE["F"]]
    n_u, n_g, n_f = (setup.flex_counts[k] for k in ("UTIL", "G", "F"))

    def value_and_grad(params: StrategyParams) -> tuple[float, np.ndarray]:
        if setup.picks_remaining > 0:
            delta, jac = x_delta_and_gradient(
                params.j_c, model.delta_params, model.covariance, model.v, setup.picks_remaining
            )
        else:
            delta = np.zeros(config.num_categories)
            jac = np.zeros((config.num_categories, config.num_categories))
        counts = setup.fixed_counts.copy()
        counts += n_u * params.shares.j_u
        for share, pos in zip(params.shares.j_g, guard_positions):
            counts[pos] += n_g * share
        for share, pos in zip(params.shares.j_f, forward_positions):
            counts[pos] += n_f * share
        mean = setup.base_diffs + delta + mu.T @ counts
        z = mean / sd
        w = 0.5 * (1.0 + erf(z / SQRT2))
        pdf0 = np.exp(-0.5 * z * z) / (sd * SQRT2PI)
        if config.format == EACH_CATEGORY:
            value = float(w.sum(axis=1).mean())
            coeff = pdf0
        else:
            value = float(most_categories_value_batch(w).mean())
            coeff = pdf0 * tipping_points_batch(w)
            if config.num_categories % 2 == 0:
                coeff = 0.5 * coeff
        alpha = coeff.mean(axis=0)  # d(value)/d(mean_c)
        grad_jc = jac.T @ alpha
        pos_grad = mu @ alpha  # d(value)/d(counts) per position
        grad_ju = n_u * pos_grad
        grad_jg = n_g * pos_grad[guard_positions]
        grad_jf = n_f * pos_grad[forward_positions]
        return value, np.concatenate([grad_jc, grad_ju, grad_jg, grad_jf])

    return value_and_grad


def matchup_distribution(
    state: DraftState,
    candidate: str,
    params: StrategyParams,
    opponent: int,
) -> DifferentialDistribution:
    """Differential distribution for one opponent at the given strategy parameters."""
    fill = fill_vector(state) if _any_fill_needed(state) else np.zeros(state.config.num_categories)
    setup = _candidate_setup(state, candidate, fill, params.j_c)
    opp_index = [t for t in range(state.config.num_teams) if t != state.team_on_clock].index(opponent)
    if setup.picks_remaining > 0:
        delta, _ = x_delta_and_gradient(
            params.j_c, state.model.delta_params, state.model.covariance, state.model.v, setup.picks_remaining
        )
    else:
        delta = np.zeros(state.config.num_categories)
    counts = setup.fixed_counts.copy()
    counts += setup.flex_counts["UTIL"] * params.shares.j_u
    for share, pos in zip(params.shares.j_g, FLEX_COVERAGE["G"]):
        counts[POSITIONS.index(pos)] += setup.flex_counts["G"] * share
    for share, pos in zip(params.shares.j_f, FLEX_COVERAGE["F"]):
        counts[POSITIONS.index(pos)] += setup.flex_counts["F"] * share
    mean = setup.base_diffs[opp_index] + delta + state.model.pos_means.matrix.T @ counts
    return DifferentialDistribution(mean, setup.variance)


def _any_fill_needed(state: DraftState) -> bool:
    me = state.team_on_clock
    k = len(state.rosters[me])
    return any(len(state.rosters[t]) < k + 1 for t in range(state.config.num_teams) if t != me)


def candidate_feasible(state: DraftState, candidate: str) -> bool:
    eligs = state.roster_eligibilities(state.team_on_clock)
    eligs.append(state.model.players[candidate].eligible_positions)
    return roster_feasible(eligs, state.model.structure)


def candidate_completable(state: DraftState, candidate: str) -> bool:
    """Feasible now AND the open slots remain fillable from the undrafted pool."""
    eligs = state.roster_eligibilities(state.team_on_clock)
    eligs.append(state.model.players[candidate].eligible_positions)
    pool = [
        state.model.players[pid].eligible_positions
        for pid in state.undrafted_by_g()
        if pid != candidate
    ]
    return roster_completable(eligs, state.model.structure, pool)


def h_score(state: DraftState, candidate: str) -> ObjectiveReport:
    """Optimize the format objective for one candidate and report the result."""
    model = state.model
    me = state.team_on_clock
    if candidate in state.drafted:
        raise DraftError(f"{candidate} is already drafted")
    if not candidate_feasible(state, candidate):
        return ObjectiveReport(
            candidate, -np.inf, np.full(state.config.num_categories, np.nan),
            StrategyParams.default(model.v), feasible=False,
        )
    k = len(state.rosters[me])
    init = initialize(k + 1, state.prev_params.get(me), model.v, model.x[candidate], state.opt_config)
    fill = fill_vector(state) if _any_fill_needed(state) else np.zeros(state.config.num_categories)
    setup = _candidate_setup(state, candidate, fill, init.j_c)
    closure = _objective_closure(setup, model)
    result: OptimizeResult = optimize(init, closure, state.opt_config, baseline=model.v)

    dist_means = _means_at(setup, model, result.params)
    w = np.array([win_probabilities(DifferentialDistribution(m, setup.variance)).w for m in dist_means])
    return ObjectiveReport(candidate, result.value, w.mean(axis=0), result.params, result.gradient)


def _means_at(setup: _CandidateSetup, model: ValuationModel, params: StrategyParams) -> np.ndarray:
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


def _shortlist(state: DraftState) -> list[str]:
    """Top undrafted by G total, preferring candidates the pool can still complete."""
    undrafted = state.undrafted_by_g()
    short = undrafted[: state.shortlist_size]
    completable = [pid for pid in short if candidate_completable(state, pid)]
    if completable:
        return completable
    feasible = [pid for pid in undrafted if candidate_feasible(state, pid)]
    if feasible:
        return feasible[: state.shortlist_size]
    return short


def best_report(state: DraftState) -> ObjectiveReport:
    reports = [h_score(state, pid) for pid in _shortlist(state)]
    feasible = [r for r in reports if r.feasible]
    if not feasible:
        raise DraftError("no feasible candidate remains")
    return min(feasible, key=lambda r: (-r.value, r.player_id))


def make_pick(state: DraftState) -> str:
    """Highest-valued feasible candidate; stores its weights for the next round."""
    report = best_report(state)
    state.prev_params[state.team_on_clock] = report.params
    state.last_report = report
    return report.player_id


def g_score_pick(state: DraftState) -> str:
    """Static baseline agent: best G total whose addition stays assignable.

    Prefers picks the remaining pool can still complete; falls back to plain
    feasibility when a cross-team positional race has closed that off.
    """
    undrafted = state.undrafted_by_g()
    for pid in undrafted:
        if candidate_completable(state, pid):
            return pid
    for pid in undrafted:
        if candidate_feasible(state, pid):
            return pid
    raise DraftError("no feasible candidate remains")


@dataclass(eq=False)
class DraftOutcome:
    rosters: list[list[str]]
    transcript: list[dict]
    calibration: list[tuple[float, float, float]]


def run_draft(
    model: ValuationModel,
    h_seats: frozenset[int] | set[int] = frozenset(),
    shortlist_size: int = 50,
    opt_config: OptimizerConfig | None = None,
    collect_calibration: bool = False,
) -> DraftOutcome:
    """Full serpentine draft with dynamic agents at ``h_seats`` and static ones elsewhere."""
    state = DraftState(
        model,
        shortlist_size=shortlist_size,
        opt_config=opt_config or OptimizerConfig(),
    )
    transcript: list[dict] = []
    pending: list[dict] = []  # one entry per dynamic-seat decision, accumulating future picks
    while not state.complete:
        team = state.team_on_clock
        ordinal = state.pick_ordinal
        # generic-best alternative: what a static drafter would take right now
        baseline = model.x[state.undrafted_by_g()[0]] if collect_calibration else None
        if team in h_seats:
            try:
                pid = make_pick(state)
            except DraftError:
                # positional race lost: structure cannot be satisfied, take best remaining
                pid = state.undrafted_by_g()[0]
                state.last_report = ObjectiveReport(
                    pid, float("nan"), np.full(model.config.num_categories, np.nan),
                    StrategyParams.default(model.v), feasible=False,
                )
            report = state.last_report
            entry = {
                "ordinal": ordinal,
                "team": team,
                "player_id": pid,
                "method": "h",
                "V": report.value if np.isfinite(report.value) else None,
                "w": [round(float(x), 6) for x in report.win_probs] if report.feasible else None,
                "j_C": [round(float(x), 6) for x in report.params.j_c] if report.feasible else None,
            }
        else:
            try:
                pid = g_score_pick(state)
            except DraftError:
                pid = state.undrafted_by_g()[0]
            entry = {
                "ordinal": ordinal,
                "team": team,
                "player_id": pid,
                "method": "g",
                "V": None,
                "w": None,
                "j_C": None,
            }
        if collect_calibration:
            # earlier decisions by this team observe this pick relative to a generic player
            x_diff = model.x[pid] - baseline
            for item in pending:
                if item["team"] == team:
                    item["future"].append(x_diff)
            if team in h_seats and report.feasible:
                pending.append(
                    {
                        "team": team,
                        "j_c": report.params.j_c.copy(),
                        "sigma": sigma_of_weights(report.params.j_c, model.v, model.covariance),
                        "future": [],
                    }
                )
        state.apply_pick(team, pid)
        transcript.append(entry)
    calibration: list[tuple[float, float, float]] = []
    for item in pending:
        if not item["future"]:
            continue
        diffs = np.stack(item["future"])
        m = float(np.mean(diffs @ item["j_c"]))
        k = float(-np.mean(diffs @ model.v))
        calibration.append((item["sigma"], m, k))
    return DraftOutcome(state.rosters, transcript, calibration)
