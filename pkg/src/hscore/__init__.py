"""Dynamic draft valuation for head-to-head fantasy basketball category leagues."""

from .config import (
    EACH_CATEGORY,
    MOST_CATEGORIES,
    POSITIONS,
    CategorySpec,
    LeagueConfig,
    default_categories,
    load_league_config,
)
from .ingest import PlayerRecord, WeeklyLine, build_pool, load_weekly_stats, select_q
from .scoring import (
    CategoryVector,
    LeagueAggregates,
    g_score,
    league_aggregates,
    v_vector,
    x_score,
)
from .future_picks import (
    CalibrationResult,
    CategoryCovariance,
    DeltaParams,
    calibrate,
    category_covariance,
    sigma_of_weights,
    x_delta,
    x_delta_gradient,
)
from .roster import FlexShares, PositionMeans, SlotStructure, solve_assignment
from .objective import (
    DifferentialDistribution,
    WinProbabilities,
    each_category_value,
    most_categories_value,
    tipping_point,
    win_probabilities,
)
from .optimizer import OptimizerConfig, StrategyParams, optimize, renormalize
from .draft import DraftState, ObjectiveReport, ValuationModel, h_score, make_pick, run_draft
from .simulate import SeasonConfig, gradient_analysis, run_experiment, simulate_season
from .synth import synthetic_pool

__version__ = "0.1.0"
