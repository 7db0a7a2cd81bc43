import numpy as np
import pytest

from hscore.config import CategorySpec, LeagueConfig
from hscore.ingest import PlayerRecord, WeeklyLine
from hscore.synth import synthetic_pool


@pytest.fixture(scope="session")
def config():
    return LeagueConfig()


@pytest.fixture(scope="session")
def tiny_config():
    """4-team league over the same 9 categories with a 5-slot structure."""
    return LeagueConfig(
        num_teams=4,
        roster_size=5,
        position_structure=("UTIL", "UTIL", "G", "F", "C"),
    )


@pytest.fixture(scope="session")
def pool200():
    return synthetic_pool(n_players=200, n_weeks=26, seed=7)


@pytest.fixture(scope="session")
def pool60():
    return synthetic_pool(n_players=60, n_weeks=20, seed=13)


@pytest.fixture(scope="session")
def q156(pool200, config):
    from hscore.ingest import build_pool, select_q

    return select_q(build_pool(pool200, 10), config)


@pytest.fixture(scope="session")
def aggregates(q156, config):
    from hscore.scoring import league_aggregates

    return league_aggregates(q156, config)


@pytest.fixture(scope="session")
def model200(q156, config):
    from hscore.draft import ValuationModel

    return ValuationModel.build(q156, config)


def make_line(player_id, week, games=3, injured=False, **stats):
    base = dict(pts=30, reb=12, ast=6, stl=2, blk=1, tpm=3, tov=4,
                fgm=11, fga=24, ftm=5, fta=7)
    base.update(stats)
    if injured:
        base = {k: 0 for k in base}
        games = 0
    return WeeklyLine(player_id, week, games, *[float(base[f]) for f in
                      ("pts", "reb", "ast", "stl", "blk", "tpm", "tov",
                       "fgm", "fga", "ftm", "fta")], injured=injured)


def make_player(player_id, positions=("C",), n_weeks=12, name=None, seed=None, **stats):
    """Player with optionally jittered weekly lines (deterministic per seed);
    seed="constant" repeats the same line every week."""
    entropy = 0 if seed == "constant" else (seed if seed is not None else hash(player_id) % 2**32)
    rng = np.random.default_rng(entropy)
    weeks = []
    for w in range(1, n_weeks + 1):
        jitter = {}
        if seed != "constant":
            for f in ("pts", "reb", "ast", "stl", "blk", "tpm", "tov"):
                base = stats.get(f, dict(pts=30, reb=12, ast=6, stl=2, blk=1, tpm=3, tov=4)[f])
                jitter[f] = max(0.0, base + rng.integers(-2, 3))
            fga = max(1.0, stats.get("fga", 24) + rng.integers(-3, 4))
            fgm = min(fga, max(0.0, stats.get("fgm", 11) + rng.integers(-2, 3)))
            fta = max(1.0, stats.get("fta", 7) + rng.integers(-2, 3))
            ftm = min(fta, max(0.0, stats.get("ftm", 5) + rng.integers(-1, 2)))
            jitter.update(fgm=fgm, fga=fga, ftm=ftm, fta=fta)
        else:
            jitter = stats
        weeks.append(make_line(player_id, w, **jitter))
    return PlayerRecord.from_weeks(player_id, name or player_id, tuple(positions), tuple(weeks))


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_covariance(rng, n=9, scale=1.0):
    a = rng.normal(size=(n, n))
    mat = a @ a.T / n + 0.1 * np.eye(n)
    return scale * mat


def random_simplex(rng, n=9):
    vec = rng.uniform(0.2, 1.8, size=n)
    return vec / vec.sum()
