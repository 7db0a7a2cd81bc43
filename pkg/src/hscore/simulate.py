"""Bootstrap season simulation, seat experiments, and correlated sensitivity analysis.

Seasons resample each player's real (or synthetic) weeks with replacement;
weekly pairings rotate through a circle-method round robin. Drafting is
deterministic, so one draft per seat feeds many bootstrap seasons.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import COUNTING, EACH_CATEGORY, MOST_CATEGORIES, LeagueConfig
from .draft import DraftOutcome, ValuationModel, run_draft
from .ingest import PlayerRecord, WeeklyLine, build_pool, select_q
from .optimizer import OptimizerConfig


@dataclass(frozen=True)
class SeasonConfig:
    weeks: int = 20
    seasons: int = 1000
    seed: int = 0
    format: str = MOST_CATEGORIES
    h_seat: int | None = 0

    def __post_init__(self) -> None:
        if self.weeks < 1 or self.seasons < 1:
            raise ValueError("weeks and seasons must be >= 1")


@dataclass(eq=False)
class SeasonResult:
    points: np.ndarray  # season points per team
    category_points: np.ndarray  # category wins per team (ties count half)
    champion: int
    weekly_outcomes: list[list[dict]]  # per week, per matchup


@dataclass(eq=False)
class ExperimentResult:
    seat: int | None
    seasons: int
    championship_rate: float
    standard_error: float
    champion_counts: np.ndarray
    category_cells: np.ndarray  # seasons x C win rates for the tracked seat
    calibration: list[tuple[float, float, float]]
    transcript: list[dict]
    rosters: list[list[str]]


def round_robin_pairs(n_teams: int, week: int) -> list[tuple[int, int]]:
    """Circle-method pairings for a 0-based week; all teams play each week."""
    if n_teams % 2 != 0:
        raise ValueError("round robin needs an even team count")
    round_index = week % (n_teams - 1)
    circle = [0] + [1 + (i + round_index) % (n_teams - 1) for i in range(n_teams - 1)]
    half = n_teams // 2
    return [(circle[i], circle[n_teams - 1 - i]) for i in range(half)]


def sample_week(player: PlayerRecord, rng: np.random.Generator) -> WeeklyLine:
    """Uniform draw (with replacement) from the player's non-injured weeks."""
    weeks = player.sampling_weeks
    if not weeks:
        raise ValueError(f"{player.player_id} has no non-injured weeks to sample")
    return weeks[int(rng.integers(len(weeks)))]


def _team_totals(lines: list[WeeklyLine]) -> dict[str, float]:
    from .ingest import STAT_FIELDS

    return {f: float(sum(line.value(f) for line in lines)) for f in STAT_FIELDS}


def _compare_totals(a: dict[str, float], b: dict[str, float], config: LeagueConfig) -> np.ndarray:
    out = np.zeros(config.num_categories, dtype=int)
    for ci, cat in enumerate(config.categories):
        if cat.kind == COUNTING:
            diff = cat.sign * (a[cat.name] - b[cat.name])
        else:
            # cross-multiplied make rates; zero attempts on both sides tie
            diff = a[cat.made_field] * b[cat.att_field] - b[cat.made_field] * a[cat.att_field]
        out[ci] = 0 if diff == 0 else (1 if diff > 0 else -1)
    return out


def score_matchup(
    team_a_lines: list[WeeklyLine],
    team_b_lines: list[WeeklyLine],
    config: LeagueConfig,
) -> np.ndarray:
    """Per-category outcome from team A's perspective: +1 win, 0 tie, -1 loss.

    Percentage categories aggregate makes over attempts at the team level.
    """
    return _compare_totals(_team_totals(team_a_lines), _team_totals(team_b_lines), config)


def ec_points(outcomes: np.ndarray) -> float:
    """Each Category: one point per category won, half per tie."""
    return float((outcomes > 0).sum() + 0.5 * (outcomes == 0).sum())


def mc_point(outcomes: np.ndarray) -> float:
    """Most Categories: 1 for winning the majority, 0.5 for an overall tie."""
    wins, losses = int((outcomes > 0).sum()), int((outcomes < 0).sum())
    if wins > losses:
        return 1.0
    return 0.5 if wins == losses else 0.0


def _stack_roster(roster: list[PlayerRecord]) -> list[np.ndarray]:
    """Per player: (n_sampling_weeks x n_fields) matrix of raw weekly totals."""
    from .ingest import STAT_FIELDS

    stacks = []
    for rec in roster:
        weeks = rec.sampling_weeks
        if not weeks:
            raise ValueError(f"{rec.player_id} has no sampleable weeks")
        stacks.append(np.array([[w.value(f) for f in STAT_FIELDS] for w in weeks]))
    return stacks


def _simulate_batch(
    rosters: list[list[PlayerRecord]],
    config: LeagueConfig,
    weeks: int,
    seasons: int,
    rng: np.random.Generator,
    fmt: str | None = None,
) -> dict:
    """Vectorized bootstrap: returns points, category win rates, champions."""
    from .ingest import STAT_FIELDS

    fmt = fmt or config.format
    n_teams = len(rosters)
    n_cats = config.num_categories
    field_index = {f: i for i, f in enumerate(STAT_FIELDS)}

    totals = np.zeros((n_teams, seasons, weeks, len(STAT_FIELDS)))
    for t, roster in enumerate(rosters):
        for stack in _stack_roster(roster):
            idx = rng.integers(stack.shape[0], size=(seasons, weeks))
            totals[t] += stack[idx]

    # per-category signed comparison values; percentages handled by cross-multiplication
    points = np.zeros((n_teams, seasons))
    cat_points = np.zeros((n_teams, seasons))
    cat_wins = np.zeros((n_teams, seasons, n_cats))

    for w in range(weeks):
        for a, b in round_robin_pairs(n_teams, w):
            ta, tb = totals[a, :, w, :], totals[b, :, w, :]
            outcome = np.zeros((seasons, n_cats))
            for ci, cat in enumerate(config.categories):
                if cat.kind == COUNTING:
                    fi = field_index[cat.name]
                    diff = cat.sign * (ta[:, fi] - tb[:, fi])
                else:
                    mi, ai = field_index[cat.made_field], field_index[cat.att_field]
                    diff = ta[:, mi] * tb[:, ai] - tb[:, mi] * ta[:, ai]
                outcome[:, ci] = np.sign(diff)
            wins_a = (outcome > 0).sum(axis=1)
            ties = (outcome == 0).sum(axis=1)
            losses_a = n_cats - wins_a - ties
            cat_score_a = wins_a + 0.5 * ties
            cat_score_b = losses_a + 0.5 * ties
            cat_points[a] += cat_score_a
            cat_points[b] += cat_score_b
            cat_wins[a] += (outcome > 0) + 0.5 * (outcome == 0)
            cat_wins[b] += (outcome < 0) + 0.5 * (outcome == 0)
            if fmt == EACH_CATEGORY:
                points[a] += cat_score_a
                points[b] += cat_score_b
            else:
                points[a] += np.where(wins_a > losses_a, 1.0, np.where(wins_a == losses_a, 0.5, 0.0))
                points[b] += np.where(losses_a > wins_a, 1.0, np.where(wins_a == losses_a, 0.5, 0.0))

    champions = np.empty(seasons, dtype=int)
    for s in range(seasons):
        champions[s] = max(
            range(n_teams), key=lambda t: (points[t, s], cat_points[t, s], -t)
        )
    return {
        "points": points,
        "cat_points": cat_points,
        "cat_winrate": cat_wins / weeks,
        "champions": champions,
    }


def simulate_season(
    rosters: list[list[PlayerRecord]],
    config: LeagueConfig,
    rng: np.random.Generator,
    weeks: int | None = None,
    fmt: str | None = None,
) -> SeasonResult:
    """One bootstrap season with full weekly detail."""
    weeks = weeks or config.weeks_per_season
    fmt = fmt or config.format
    n_teams = len(rosters)
    n_cats = config.num_categories
    points = np.zeros(n_teams)
    cat_points = np.zeros(n_teams)
    weekly_outcomes: list[list[dict]] = []
    for w in range(weeks):
        sampled = [[sample_week(rec, rng) for rec in roster] for roster in rosters]
        row = []
        for a, b in round_robin_pairs(n_teams, w):
            outcome = score_matchup(sampled[a], sampled[b], config)
            cat_points[a] += ec_points(outcome)
            cat_points[b] += ec_points(-outcome)
            if fmt == EACH_CATEGORY:
                points[a] += ec_points(outcome)
                points[b] += ec_points(-outcome)
            else:
                points[a] += mc_point(outcome)
                points[b] += mc_point(-outcome)
            row.append({"teams": (a, b), "outcome": outcome})
        weekly_outcomes.append(row)
    champion = max(range(n_teams), key=lambda t: (points[t], cat_points[t], -t))
    return SeasonResult(points, cat_points, champion, weekly_outcomes)


def build_model(
    records: list[PlayerRecord],
    config: LeagueConfig,
    min_weeks: int = 10,
) -> ValuationModel:
    """Pool filter, relevant-set cut, and valuation tables in one step."""
    pool = build_pool(records, min_weeks)
    q = select_q(pool, config)
    return ValuationModel.build(q, config)


def run_experiment(
    model: ValuationModel,
    seat: int | None,
    season_config: SeasonConfig,
    shortlist_size: int = 50,
    opt_config: OptimizerConfig | None = None,
) -> ExperimentResult:
    """Draft once (dynamic agent at ``seat``, static elsewhere), then simulate."""
    config = model.config
    fmt = season_config.format
    draft_config = config if config.format == fmt else LeagueConfig.from_dict(
        {**config.to_dict(), "format": fmt}
    )
    if draft_config is not config:
        model = _with_config(model, draft_config)
    h_seats = set() if seat is None else {seat}
    outcome: DraftOutcome = run_draft(
        model, h_seats, shortlist_size=shortlist_size, opt_config=opt_config,
        collect_calibration=bool(h_seats),
    )
    rosters = [[model.players[pid] for pid in roster] for roster in outcome.rosters]
    rng = np.random.default_rng(season_config.seed)
    batch = _simulate_batch(
        rosters, draft_config, season_config.weeks, season_config.seasons, rng, fmt
    )
    counts = np.bincount(batch["champions"], minlength=config.num_teams)
    track = seat if seat is not None else 0
    rate = counts[track] / season_config.seasons
    se = float(np.sqrt(max(rate * (1 - rate), 1e-12) / season_config.seasons))
    return ExperimentResult(
        seat=seat,
        seasons=season_config.seasons,
        championship_rate=float(rate),
        standard_error=se,
        champion_counts=counts,
        category_cells=batch["cat_winrate"][track],
        calibration=outcome.calibration,
        transcript=outcome.transcript,
        rosters=outcome.rosters,
    )


def _with_config(model: ValuationModel, config: LeagueConfig) -> ValuationModel:
    from dataclasses import replace

    return replace(model, config=config)


def run_seat_sweep(
    model: ValuationModel,
    season_config: SeasonConfig,
    seats: list[int] | None = None,
    shortlist_size: int = 50,
    opt_config: OptimizerConfig | None = None,
) -> list[ExperimentResult]:
    seats = list(range(model.config.num_teams)) if seats is None else seats
    results = []
    for i, seat in enumerate(seats):
        cfg = SeasonConfig(
            weeks=season_config.weeks,
            seasons=season_config.seasons,
            seed=season_config.seed + i,
            format=season_config.format,
            h_seat=seat,
        )
        results.append(run_experiment(model, seat, cfg, shortlist_size, opt_config))
    return results


def run_control(
    model: ValuationModel,
    season_config: SeasonConfig,
    shuffle_seats: bool = True,
) -> np.ndarray:
    """All-static draft; returns per-seat championship rates.

    With ``shuffle_seats`` each season's rosters are randomly permuted across
    seats, isolating seat effects from roster quality.
    """
    outcome = run_draft(model, frozenset())
    rosters = [[model.players[pid] for pid in roster] for roster in outcome.rosters]
    rng = np.random.default_rng(season_config.seed)
    batch = _simulate_batch(
        rosters, model.config, season_config.weeks, season_config.seasons, rng,
        season_config.format,
    )
    n = model.config.num_teams
    champions = batch["champions"]
    if not shuffle_seats:
        return np.bincount(champions, minlength=n) / season_config.seasons
    seat_wins = np.zeros(n)
    for champ in champions:
        perm = rng.permutation(n)  # roster -> seat
        seat_wins[perm[champ]] += 1
    return seat_wins / season_config.seasons


def gradient_analysis(
    correlation: np.ndarray,
    advantage_levels: list[float],
    config: LeagueConfig | None = None,
    fmt: str | None = None,
    samples: int = 200_000,
    seed: int = 0,
    step: float = 0.25,
) -> list[dict]:
    """Monte Carlo objective sensitivity per category under correlated weekly play.

    Weekly category differentials draw from N(mu, correlation); the advantage
    level shifts counting categories (negatively for lower-is-better ones) and
    leaves percentage categories centered. Sensitivities are central finite
    differences of the victory metric on common random numbers.
    """
    config = config or LeagueConfig()
    fmt = fmt or config.format
    n_cats = config.num_categories
    corr = np.asarray(correlation, dtype=float)
    if corr.shape != (n_cats, n_cats):
        raise ValueError(f"correlation must be {n_cats}x{n_cats}")
    if not np.allclose(corr, corr.T, atol=1e-9):
        raise ValueError("correlation matrix must be symmetric")
    chol = np.linalg.cholesky(corr + 1e-10 * np.eye(n_cats))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, n_cats)) @ chol.T
    direction = np.array(
        [cat.sign if cat.kind == COUNTING else 0.0 for cat in config.categories]
    )

    def mc_victory(win_matrix: np.ndarray) -> float:
        wins = win_matrix.sum(axis=1)
        value = float((wins > n_cats / 2).mean())
        if n_cats % 2 == 0:
            value += 0.5 * float((wins == n_cats // 2).mean())
        return value

    rows = []
    for level in advantage_levels:
        mu = level * direction
        won = (z + mu) > 0
        if fmt == MOST_CATEGORIES:
            victory = mc_victory(won)
        else:
            victory = float(won.mean())
        base_wins = won.sum(axis=1)
        sens = np.zeros(n_cats)
        for c in range(n_cats):
            up = (z[:, c] + mu[c] + step) > 0
            down = (z[:, c] + mu[c] - step) > 0
            if fmt == MOST_CATEGORIES:
                wins_wo = base_wins - won[:, c]
                v_up = _mc_from_wins(wins_wo + up, n_cats)
                v_down = _mc_from_wins(wins_wo + down, n_cats)
            else:
                v_up, v_down = float(up.mean()), float(down.mean())
            sens[c] = (v_up - v_down) / (2.0 * step)
        rows.append(
            {
                "advantage": float(level),
                "victory_probability": victory,
                "sensitivities": sens,
            }
        )
    return rows


def _mc_from_wins(wins: np.ndarray, n_cats: int) -> float:
    value = float((wins > n_cats / 2).mean())
    if n_cats % 2 == 0:
        value += 0.5 * float((wins == n_cats // 2).mean())
    return value


# ---------------------------------------------------------------------------
# File outputs consumed by the CLI and downstream calibration


def write_winrates_csv(path: str | Path, results: list[ExperimentResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seat", "seasons", "championship_rate", "standard_error"])
        for res in results:
            writer.writerow([res.seat, res.seasons, f"{res.championship_rate:.6f}", f"{res.standard_error:.6f}"])


def write_category_hist_csv(path: str | Path, config: LeagueConfig, results: list[ExperimentResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seat", "season", "category", "win_rate"])
        for res in results:
            for s in range(res.category_cells.shape[0]):
                for ci, name in enumerate(config.category_names):
                    writer.writerow([res.seat, s, name, f"{res.category_cells[s, ci]:.4f}"])


def write_calibration_csv(path: str | Path, results: list[ExperimentResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sigma", "m", "k"])
        for res in results:
            for sigma, m, k in res.calibration:
                writer.writerow([f"{sigma:.8f}", f"{m:.8f}", f"{k:.8f}"])


def load_calibration_csv(path: str | Path) -> list[tuple[float, float, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["sigma", "m", "k"]:
            raise ValueError("calibration file must have header sigma,m,k")
        return [(float(r[0]), float(r[1]), float(r[2])) for r in reader if r]


def write_transcript_jsonl(path: str | Path, results: list[ExperimentResult]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for res in results:
            for entry in res.transcript:
                fh.write(json.dumps({"seat": res.seat, **entry}) + "\n")


def load_correlation_csv(path: str | Path) -> np.ndarray:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if row:
                rows.append([float(x) for x in row])
    return np.array(rows)


def write_gradient_analysis_csv(path: str | Path, config: LeagueConfig, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["advantage", "victory_probability", *config.category_names])
        for row in rows:
            writer.writerow(
                [f"{row['advantage']:.4f}", f"{row['victory_probability']:.4f}"]
                + [f"{s:.6f}" for s in row["sensitivities"]]
            )
