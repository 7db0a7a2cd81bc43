import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hscore.config import LeagueConfig
from hscore.ingest import (
    CSV_HEADER,
    PoolSizeError,
    StatsParseError,
    StatsValidationError,
    build_pool,
    load_weekly_stats,
    select_q,
    write_weekly_stats,
    z_score_totals,
)

from conftest import make_line, make_player

HEADER = ",".join(CSV_HEADER)


def write(tmp_path, text, name="stats.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_header_only_gives_empty_list(tmp_path, config):
    path = write(tmp_path, HEADER + "\n")
    assert load_weekly_stats(path, config) == []


def test_missing_header_rejected(tmp_path, config):
    path = write(tmp_path, "")
    with pytest.raises(StatsParseError):
        load_weekly_stats(path, config)


def test_wrong_header_rejected(tmp_path, config):
    path = write(tmp_path, HEADER.replace("pts", "points") + "\n")
    with pytest.raises(StatsParseError):
        load_weekly_stats(path, config)


def test_two_rows_same_player_group_into_one_record(tmp_path, config):
    rows = [
        "p1,Ann Example,PG|SG,1,3,30,5,9,2,0,3,3,11,24,5,6,0",
        "p1,Ann Example,PG|SG,2,4,41,6,11,3,1,4,4,15,30,7,9,0",
    ]
    path = write(tmp_path, HEADER + "\n" + "\n".join(rows) + "\n")
    records = load_weekly_stats(path, config)
    assert len(records) == 1
    assert len(records[0].weeks) == 2
    assert records[0].eligible_positions == ("PG", "SG")
    assert records[0].category_means["pts"] == pytest.approx(35.5)


def test_ft_made_above_attempts_is_validation_error(tmp_path, config):
    row = "p1,A,C,1,3,30,5,9,2,0,3,3,11,24,5,3,0"  # ftm=5 > fta=3
    path = write(tmp_path, HEADER + "\n" + row + "\n")
    with pytest.raises(StatsValidationError):
        load_weekly_stats(path, config)


def test_malformed_row_names_line_number(tmp_path, config):
    rows = [
        "p1,A,C,1,3,30,5,9,2,0,3,3,11,24,5,6,0",
        "p2,B,C,not_a_week,3,30,5,9,2,0,3,3,11,24,5,6,0",
    ]
    path = write(tmp_path, HEADER + "\n" + "\n".join(rows) + "\n")
    with pytest.raises(StatsParseError, match="line 3"):
        load_weekly_stats(path, config)


def test_nonzero_totals_with_zero_games_rejected(tmp_path, config):
    row = "p1,A,C,1,0,30,5,9,2,0,3,3,11,24,5,6,0"
    path = write(tmp_path, HEADER + "\n" + row + "\n")
    with pytest.raises(StatsValidationError):
        load_weekly_stats(path, config)


def test_round_trip(tmp_path, config, pool60):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    write_weekly_stats(pool60, first)
    loaded = load_weekly_stats(first, config)
    write_weekly_stats(loaded, second)
    reloaded = load_weekly_stats(second, config)
    assert loaded == reloaded
    by_id = {r.player_id: r for r in loaded}
    for rec in pool60:
        assert by_id[rec.player_id] == rec


def test_injured_weeks_kept_but_flagged(tmp_path, config):
    rows = [
        "p1,A,C,1,3,30,5,9,2,0,3,3,11,24,5,6,0",
        "p1,A,C,2,0,0,0,0,0,0,0,0,0,0,0,0,1",
    ]
    path = write(tmp_path, HEADER + "\n" + "\n".join(rows) + "\n")
    (rec,) = load_weekly_stats(path, config)
    assert len(rec.weeks) == 2
    assert len(rec.sampling_weeks) == 1
    assert rec.category_means["pts"] == pytest.approx(30.0)  # injured week excluded


class TestBuildPool:
    def test_nine_weeks_excluded(self):
        rec = make_player("p1", n_weeks=9)
        assert build_pool([rec], 10) == []

    def test_ten_weeks_included(self):
        rec = make_player("p1", n_weeks=10)
        assert build_pool([rec], 10) == [rec]

    def test_injured_weeks_do_not_count(self):
        weeks = tuple(make_line("p1", w) for w in range(1, 6)) + tuple(
            make_line("p1", w, injured=True) for w in range(6, 16)
        )
        from hscore.ingest import PlayerRecord

        rec = PlayerRecord.from_weeks("p1", "p1", ("C",), weeks)
        assert len(rec.weeks) == 15
        assert build_pool([rec], 10) == []

    @given(st.lists(st.integers(min_value=1, max_value=25), max_size=12))
    @settings(max_examples=25, deadline=None)
    def test_idempotent(self, week_counts):
        records = [make_player(f"p{i}", n_weeks=n) for i, n in enumerate(week_counts)]
        once = build_pool(records, 10)
        assert build_pool(once, 10) == once

    def test_min_weeks_validated(self):
        with pytest.raises(ValueError):
            build_pool([], 0)


class TestSelectQ:
    def test_sizes(self, pool200, config):
        pool = build_pool(pool200, 10)
        q = select_q(pool, config)
        assert len(q) == 156
        assert set(r.player_id for r in q) <= set(r.player_id for r in pool)

    def test_boundary_pool_equals_q(self, config):
        pool = [make_player(f"p{i:03d}", n_weeks=12, seed=i) for i in range(156)]
        q = select_q(pool, config)
        assert sorted(r.player_id for r in q) == sorted(r.player_id for r in pool)

    def test_too_small_pool_raises(self, config):
        pool = [make_player(f"p{i}", n_weeks=12) for i in range(100)]
        with pytest.raises(PoolSizeError):
            select_q(pool, config)

    def test_sorted_descending_by_z(self, pool200, config):
        pool = build_pool(pool200, 10)
        q = select_q(pool, config)
        totals = z_score_totals(q, config)
        # recompute on the pool for the same players to check ordering source
        pool_totals = z_score_totals(pool, config)
        by_id = {rec.player_id: pool_totals[i] for i, rec in enumerate(pool)}
        zs = [by_id[r.player_id] for r in q]
        assert all(zs[i] >= zs[i + 1] - 1e-12 for i in range(len(zs) - 1))
        del totals

    def test_tie_breaks_lexicographic(self, tiny_config):
        # two exact clones at the cut line: lower player_id wins
        pool = [make_player(f"p{i:02d}", n_weeks=12, seed=i) for i in range(19)]
        clone_weeks = pool[0].weeks
        from hscore.ingest import PlayerRecord

        a = PlayerRecord.from_weeks("tie_a", "A", ("C",), clone_weeks)
        b = PlayerRecord.from_weeks("tie_b", "B", ("C",), clone_weeks)
        # pool of 21 for a 20-player league: exactly one of the clones misses
        q = select_q(pool[:19] + [b, a], tiny_config)
        ids = {r.player_id for r in q}
        assert ("tie_a" in ids) or ("tie_b" in ids)
        if ("tie_a" in ids) != ("tie_b" in ids):
            assert "tie_a" in ids  # lexicographic winner kept
