import numpy as np
import pytest

from hscore.config import EACH_CATEGORY, LeagueConfig
from hscore.draft import (
    DraftError,
    DraftState,
    ValuationModel,
    best_report,
    candidate_completable,
    candidate_feasible,
    fill_vector,
    g_score_pick,
    h_score,
    make_pick,
    matchup_distribution,
    opponent_fill,
    run_draft,
    snake_team_for_pick,
)
from hscore.future_picks import x_delta_and_gradient
from hscore.ingest import PlayerRecord
from hscore.objective import (
    each_category_value,
    most_categories_value,
    win_probabilities,
)
from hscore.optimizer import OptimizerConfig, StrategyParams
from hscore.roster import FlexShares

from conftest import make_player

FAST = OptimizerConfig(max_iters=15)


def flat_league(num_teams=2, roster_size=3, fmt=EACH_CATEGORY):
    """League whose slots are all UTIL so positional effects vanish."""
    return LeagueConfig(
        num_teams=num_teams,
        roster_size=roster_size,
        position_structure=("UTIL",) * roster_size,
        format=fmt,
    )


def small_model(config, n_players=None, seed_base=100, clones=()):
    n = n_players or (config.num_teams * config.roster_size + 4)
    players = [
        make_player(f"p{i:02d}", positions=("C", "PG", "SG", "PF", "SF"), n_weeks=10, seed=seed_base + i)
        for i in range(n)
    ]
    for clone_of, clone_id in clones:
        src = players[clone_of]
        players.append(PlayerRecord.from_weeks(clone_id, clone_id, src.eligible_positions, src.weeks))
    from hscore.ingest import select_q

    q = select_q(players, config)
    return ValuationModel.build(q, config)


class TestSnakeOrder:
    def test_matches_manual_serpentine(self):
        teams = 4
        expected = [0, 1, 2, 3, 3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]
        got = [snake_team_for_pick(p, teams) for p in range(1, 17)]
        assert got == expected

    def test_first_and_last_pick_of_round(self):
        assert snake_team_for_pick(1, 12) == 0
        assert snake_team_for_pick(12, 12) == 11
        assert snake_team_for_pick(13, 12) == 11
        assert snake_team_for_pick(24, 12) == 0

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            snake_team_for_pick(0, 12)


class TestOpponentFill:
    def test_equal_plus_one_is_exact_sum(self, model200):
        state = DraftState(model200, opt_config=FAST)
        order = list(model200.order)
        state.apply_pick(0, order[0])  # manager 0 has K=1... on clock is now team 1
        # team 1 on clock with K=0; opponent 0 has K+1=1 picks
        got = opponent_fill(state, 0)
        assert np.allclose(got, model200.x[order[0]])

    def test_short_opponent_gets_fill_mean(self, model200):
        state = DraftState(model200, opt_config=FAST)
        # pick 1: team 0 on clock with K=0; all opponents have K=0 picks
        fill = fill_vector(state)
        expected = np.mean([model200.x[pid] for pid in model200.order[:12]], axis=0)
        assert np.allclose(fill, expected)
        assert np.allclose(opponent_fill(state, 3), fill)

    def test_identical_rosters_identical_fill(self, model200):
        state = DraftState(model200, opt_config=FAST)
        fills = [opponent_fill(state, t) for t in range(1, 12)]
        for f in fills[1:]:
            assert np.allclose(f, fills[0])


class TestMatchupDistribution:
    def test_last_pick_variance_and_zero_delta(self):
        config = flat_league(num_teams=2, roster_size=3)
        model = small_model(config)
        state = DraftState(model, opt_config=FAST)
        order = list(model.order)
        # snake(2): teams 0,1,1,0,0 for picks 1-5; manager 1 then sits at their
        # last pick (K = 2) with the opponent already holding K+1 = 3
        for ordinal, pid in enumerate(order[:5], start=1):
            team = snake_team_for_pick(ordinal, 2)
            state.rosters[team].append(pid)
            state.drafted.add(pid)
            state.pick_ordinal += 1
        assert state.team_on_clock == 1 and len(state.rosters[1]) == 2
        candidate = order[5]
        params = StrategyParams.default(model.v)
        dist = matchup_distribution(state, candidate, params, 0)
        assert np.allclose(dist.variance, 2.0 * config.roster_size)
        own = sum(model.x[p] for p in state.rosters[1]) + model.x[candidate]
        opp = sum(model.x[p] for p in state.rosters[0])
        assert np.allclose(dist.mean, own - opp, atol=1e-12)

    def test_mirror_rosters_at_last_pick_are_even(self):
        config = flat_league(num_teams=2, roster_size=2)
        base = [
            make_player(f"p{i:02d}", positions=("C", "PG", "SG", "PF", "SF"), n_weeks=10, seed=100 + i)
            for i in range(2)
        ]
        clones = [
            PlayerRecord.from_weeks(f"c{i:02d}", f"c{i:02d}", b.eligible_positions, b.weeks)
            for i, b in enumerate(base)
        ]
        from hscore.ingest import select_q

        model = ValuationModel.build(select_q(base + clones, config), config)
        state = DraftState(model, opt_config=FAST)
        # manager 0 holds p00; opponent holds the clone c00 plus c01
        for team, pid in [(0, "p00"), (1, "c00"), (1, "c01")]:
            state.rosters[team].append(pid)
            state.drafted.add(pid)
            state.pick_ordinal += 1
        assert state.team_on_clock == 0
        dist = matchup_distribution(state, "p01", StrategyParams.default(model.v), 1)
        assert np.allclose(dist.mean, 0.0, atol=1e-10)
        w = win_probabilities(dist).w
        assert np.allclose(w, 0.5, atol=1e-10)

    def test_component_sum_oracle(self, model200):
        """Engine mean equals the sum of independently computed parts."""
        model = model200
        state = DraftState(model, opt_config=FAST)
        order = list(model.order)
        for ordinal, pid in enumerate(order[:24], start=1):
            team = snake_team_for_pick(ordinal, 12)
            state.rosters[team].append(pid)
            state.drafted.add(pid)
            state.pick_ordinal += 1
        me = state.team_on_clock
        candidate = state.undrafted_by_g()[0]
        j = model.v.copy()
        j[0] += 0.03
        j /= j.sum()
        params = StrategyParams(j, FlexShares.uniform())
        opponent = (me + 1) % 12
        dist = matchup_distribution(state, candidate, params, opponent)

        own = sum(model.x[p] for p in state.rosters[me]) + model.x[candidate]
        opp = sum(model.x[p] for p in state.rosters[opponent])
        k = len(state.rosters[me])
        if len(state.rosters[opponent]) == k:  # short opponent gets the generic fill
            opp = opp + fill_vector(state)
        remaining = model.config.roster_size - k - 1
        delta, _ = x_delta_and_gradient(j, model.delta_params, model.covariance, model.v, remaining)
        from hscore.roster import (
            build_reward_matrix,
            future_position_counts,
            position_rewards,
            positional_adjustment,
            solve_assignment,
        )

        eligs = [model.players[p].eligible_positions for p in state.rosters[me]]
        eligs.append(model.players[candidate].eligible_positions)
        matrix = build_reward_matrix(eligs, model.structure, position_rewards(j, model.pos_means))
        assignment, _ = solve_assignment(matrix)
        counts = future_position_counts(assignment, len(eligs), model.structure, params.shares)
        adjustment = positional_adjustment(counts, model.pos_means)
        expected = own - opp + delta + adjustment
        assert np.allclose(dist.mean, expected, atol=1e-10)
        expected_var = 2.0 * 13 + remaining * model.aggregates.x_sigma_sq
        assert np.allclose(dist.variance, expected_var, atol=1e-12)


class TestHScore:
    def test_identical_candidates_identical_value(self):
        config = flat_league(num_teams=2, roster_size=3)
        model = small_model(config, n_players=8, clones=[(2, "a_clone")])
        state = DraftState(model, opt_config=FAST)
        target = "p02"
        assert np.allclose(model.x[target], model.x["a_clone"])
        ra = h_score(state, target)
        rb = h_score(state, "a_clone")
        assert ra.value == pytest.approx(rb.value, abs=1e-12)

    def test_last_pick_equals_direct_objective(self):
        config = flat_league(num_teams=2, roster_size=2, fmt=EACH_CATEGORY)
        model = small_model(config, n_players=8)
        state = DraftState(model, opt_config=FAST)
        order = list(model.order)
        for team, pid in [(0, order[0]), (1, order[1]), (1, order[2])]:
            state.rosters[team].append(pid)
            state.drafted.add(pid)
            state.pick_ordinal += 1
        candidate = order[3]
        report = h_score(state, candidate)
        own = model.x[order[0]] + model.x[candidate]
        opp = model.x[order[1]] + model.x[order[2]]
        from hscore.objective import DifferentialDistribution

        dist = DifferentialDistribution(own - opp, np.full(9, 2.0 * 2))
        expected = each_category_value(win_probabilities(dist).w)
        assert report.value == pytest.approx(expected, abs=1e-9)
        assert np.allclose(report.win_probs, win_probabilities(dist).w, atol=1e-9)

    def test_componentwise_boost_never_lowers_value(self, model200):
        state = DraftState(model200, opt_config=FAST, shortlist_size=10)
        candidate = list(model200.order)[20]
        base = h_score(state, candidate)
        rec = model200.players[candidate]
        model200.players["boost"] = PlayerRecord(
            "boost", "Boost", rec.eligible_positions, rec.weeks, dict(rec.category_means)
        )
        model200.x["boost"] = model200.x[candidate] + 0.4
        model200.g_total["boost"] = model200.g_total[candidate] + 1.0
        try:
            boosted = h_score(state, "boost")
            assert boosted.value >= base.value - 1e-9
        finally:
            for table in (model200.players, model200.x, model200.g_total):
                table.pop("boost", None)

    def test_drafted_candidate_rejected(self, model200):
        state = DraftState(model200, opt_config=FAST)
        pid = list(model200.order)[0]
        state.apply_pick(0, pid)
        with pytest.raises(DraftError):
            h_score(state, pid)


class TestPicks:
    def test_single_feasible_candidate_selected(self):
        config = flat_league(num_teams=2, roster_size=2)
        model = small_model(config, n_players=8)
        state = DraftState(model, opt_config=FAST, shortlist_size=1)
        pick = make_pick(state)
        assert pick == state.undrafted_by_g()[0]

    def test_tie_breaks_lexicographic(self):
        config = flat_league(num_teams=2, roster_size=3)
        probe = small_model(config, n_players=8)
        top = probe.order[0]
        players = [
            make_player(f"p{i:02d}", positions=("C", "PG", "SG", "PF", "SF"), n_weeks=10, seed=100 + i)
            for i in range(8)
        ]
        src = next(p for p in players if p.player_id == top)
        clone = PlayerRecord.from_weeks("a_clone", "a_clone", src.eligible_positions, src.weeks)
        from hscore.ingest import select_q

        model = ValuationModel.build(select_q(players + [clone], config), config)
        state = DraftState(model, opt_config=FAST)
        order = state.undrafted_by_g()
        assert {order[0], order[1]} == {top, "a_clone"}  # clones share the top G total
        assert make_pick(state) == min(top, "a_clone")  # lexicographically first id

    def test_dominant_candidate_selected(self):
        config = flat_league(num_teams=2, roster_size=3)
        everywhere = ("C", "PG", "SG", "PF", "SF")
        players = [
            make_player(f"p{i:02d}", positions=everywhere, n_weeks=10, seed=i,
                        pts=20, reb=8, ast=4, tov=5)
            for i in range(9)
        ]
        dom = make_player("dom", positions=everywhere, n_weeks=10, seed=77,
                          pts=60, reb=20, ast=12, stl=4, blk=3, tpm=6, tov=1,
                          fgm=22, fga=36, ftm=12, fta=13)
        from hscore.ingest import select_q

        q = select_q(players + [dom], config)
        model = ValuationModel.build(q, config)
        state = DraftState(model, opt_config=FAST)
        assert make_pick(state) == "dom"
        assert g_score_pick(state) == "dom"

    def test_make_pick_stores_previous_weights(self, model200):
        state = DraftState(model200, opt_config=FAST, shortlist_size=5)
        pid = make_pick(state)
        assert 0 in state.prev_params
        assert state.prev_params[0].j_c.sum() == pytest.approx(1.0, abs=1e-10)
        assert state.last_report.player_id == pid

    def test_g_pick_empty_roster_takes_leader(self, model200):
        state = DraftState(model200, opt_config=FAST)
        assert g_score_pick(state) == model200.order[0]

    def test_g_pick_skips_infeasible(self):
        config = LeagueConfig(
            num_teams=2, roster_size=3, position_structure=("C", "C", "PG")
        )
        players = [
            make_player(f"c{i}", positions=("C", "PF"), n_weeks=10, seed=i, pts=40 - i)
            for i in range(4)
        ] + [
            make_player(f"g{i}", positions=("PG", "SG", "SF"), n_weeks=10, seed=10 + i, pts=20 - i)
            for i in range(2)
        ]
        from hscore.ingest import select_q

        q = select_q(players, config)
        model = ValuationModel.build(q, config)
        state = DraftState(model, opt_config=FAST)
        # hand-built: team 1 holds two centers and is on the clock (ordinal 3)
        for team, pid in [(0, "c0"), (1, "c1"), (1, "c2")]:
            state.rosters[team].append(pid)
            state.drafted.add(pid)
        state.pick_ordinal = 3
        assert snake_team_for_pick(3, 2) == 1
        # the best remaining player by G is a center, but team 1's open slot is PG
        assert state.undrafted_by_g()[0] == "c3"
        pick = g_score_pick(state)
        assert pick.startswith("g")


class TestRunDraft:
    def test_complete_and_duplicate_free(self, model200):
        out = run_draft(model200, frozenset(), opt_config=FAST)
        all_picks = [pid for roster in out.rosters for pid in roster]
        assert len(all_picks) == 156
        assert len(set(all_picks)) == 156
        assert all(len(r) == 13 for r in out.rosters)

    def test_transcript_snake_consistent(self, model200):
        out = run_draft(model200, frozenset(), opt_config=FAST)
        for entry in out.transcript:
            assert entry["team"] == snake_team_for_pick(entry["ordinal"], 12)

    def test_h_seat_entries_carry_reports(self):
        config = flat_league(num_teams=2, roster_size=3)
        model = small_model(config, n_players=10)
        out = run_draft(model, {0}, shortlist_size=4, opt_config=FAST, collect_calibration=True)
        h_entries = [e for e in out.transcript if e["method"] == "h"]
        assert len(h_entries) == 3
        for entry in h_entries:
            assert entry["V"] is not None
            assert len(entry["w"]) == 9
            assert abs(sum(entry["j_C"]) - 1.0) < 1e-4
        # every decision except the last produces a calibration observation
        assert len(out.calibration) == 2


class TestCompletabilityIntegration:
    def test_completable_implies_feasible(self, model200):
        state = DraftState(model200, opt_config=FAST)
        for pid in list(model200.order)[:8]:
            if candidate_completable(state, pid):
                assert candidate_feasible(state, pid)

    def test_best_report_prefers_feasible(self, model200):
        state = DraftState(model200, opt_config=FAST, shortlist_size=6)
        report = best_report(state)
        assert report.feasible
        assert np.isfinite(report.value)
