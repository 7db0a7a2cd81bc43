"""HTTP facade for live draft assistance: sessions, picks, recommendations.

Sessions are in-memory with an append-only pick log (undo appends a marker and
state is rebuilt by replay), so every response is a deterministic function of
the log, the config, and the loaded stats.
"""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from .auction import AuctionState, auction_h_score, cash_curve, invert_cash_curve
from .config import LeagueConfig
from .draft import (
    DraftState,
    ObjectiveReport,
    ValuationModel,
    candidate_feasible,
    h_score,
    snake_team_for_pick,
)
from .ingest import PlayerRecord, build_pool, load_weekly_stats, select_q
from .optimizer import OptimizerConfig, StrategyParams


class SessionConfigBody(BaseModel):
    stats_path: str
    config: dict[str, Any] | None = None
    mode: str = "snake"
    budget: float = 200.0
    min_weeks: int = 10
    shortlist_size: int = 50
    max_iters: int = 60


class PickBody(BaseModel):
    team: int
    player_id: str
    override: bool = False
    price: float = Field(default=0.0, ge=0.0)


@dataclass
class Session:
    session_id: str
    model: ValuationModel
    mode: str
    budget: float
    shortlist_size: int
    opt_config: OptimizerConfig
    pick_log: list[dict] = field(default_factory=list)  # picks and undo markers
    lock: threading.Lock = field(default_factory=threading.Lock)
    _cache: dict = field(default_factory=dict)

    def effective_picks(self) -> list[dict]:
        picks: list[dict] = []
        for event in self.pick_log:
            if event["type"] == "pick":
                picks.append(event)
            elif event["type"] == "undo":
                if picks:
                    picks.pop()
        return picks

    def draft_state(self) -> DraftState:
        state = DraftState(
            self.model,
            shortlist_size=self.shortlist_size,
            opt_config=self.opt_config,
        )
        for pick in self.effective_picks():
            state.rosters[pick["team"]].append(pick["player_id"])
            state.drafted.add(pick["player_id"])
            state.pick_ordinal += 1
        return state

    def prev_params_for(self, team: int) -> StrategyParams | None:
        """Weights the team 'used' for its latest pick: the h_score result for
        that pick at the pre-pick state, chained through the team's earlier
        picks. Memoized by pick index; determined entirely by the pick log."""
        picks = self.effective_picks()
        memo: dict[int, StrategyParams | None] = self._cache.setdefault("prev_params", {})
        replay = DraftState(self.model, shortlist_size=self.shortlist_size, opt_config=self.opt_config)
        params: StrategyParams | None = None
        for i, pick in enumerate(picks):
            if pick["team"] == team:
                if i in memo:
                    params = memo[i]
                else:
                    params = self._pick_weights(replay, team, pick["player_id"], params)
                    memo[i] = params
            replay.rosters[pick["team"]].append(pick["player_id"])
            replay.drafted.add(pick["player_id"])
            replay.pick_ordinal += 1
        return params

    def _pick_weights(
        self,
        pre_state: DraftState,
        team: int,
        player_id: str,
        carry: StrategyParams | None,
    ) -> StrategyParams | None:
        on_clock = snake_team_for_pick(pre_state.pick_ordinal, self.model.config.num_teams)
        if on_clock != team or player_id not in self.model.players:
            return carry  # out-of-order pick: keep whatever weights we had
        if carry is not None:
            pre_state.prev_params[team] = carry
        try:
            report = h_score(pre_state, player_id)
        except Exception:
            return carry
        return report.params if report.feasible else carry

    def auction_state(self) -> AuctionState:
        rosters = [[] for _ in range(self.model.config.num_teams)]
        money = [float(self.budget)] * self.model.config.num_teams
        for pick in self.effective_picks():
            rosters[pick["team"]].append(pick["player_id"])
            money[pick["team"]] = max(0.0, money[pick["team"]] - pick.get("price", 0.0))
        return AuctionState(self.model, rosters, money, self.budget, self.opt_config)


def _report_payload(model: ValuationModel, report: ObjectiveReport, rank: int) -> dict:
    rec = model.players[report.player_id]
    return {
        "rank": rank,
        "player_id": report.player_id,
        "name": rec.display_name,
        "positions": list(rec.eligible_positions),
        "feasible": bool(report.feasible),
        "V": None if not np.isfinite(report.value) else float(report.value),
        "w": [float(x) for x in report.win_probs] if report.feasible else None,
        "j_C": [float(x) for x in report.params.j_c] if report.feasible else None,
        "baseline": [float(x) for x in model.v],
        "g_total": model.g_total[report.player_id],
    }


def create_app(preloaded: dict[str, list[PlayerRecord]] | None = None) -> FastAPI:
    """Build the service; ``preloaded`` maps stats names to in-memory pools."""
    app = FastAPI(title="draft assistant")
    app.state.pools = dict(preloaded or {})
    app.state.sessions: dict[str, Session] = {}
    app.state.counter = itertools.count(1)

    def get_session(session_id: str) -> Session:
        session = app.state.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.post("/sessions")
    def create_session(body: SessionConfigBody) -> dict:
        if body.mode not in ("snake", "auction"):
            raise HTTPException(status_code=400, detail=f"unknown mode {body.mode!r}")
        try:
            config = LeagueConfig.from_dict(body.config) if body.config else LeagueConfig()
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=f"bad config: {exc}") from None
        records = app.state.pools.get(body.stats_path)
        if records is None:
            path = Path(body.stats_path)
            if not path.exists():
                raise HTTPException(status_code=400, detail=f"stats not found: {body.stats_path}")
            records = load_weekly_stats(path)
        try:
            pool = build_pool(records, body.min_weeks)
            q = select_q(pool, config)
            model = ValuationModel.build(q, config)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        session_id = f"s{next(app.state.counter):06d}"
        app.state.sessions[session_id] = Session(
            session_id=session_id,
            model=model,
            mode=body.mode,
            budget=body.budget,
            shortlist_size=body.shortlist_size,
            opt_config=OptimizerConfig(max_iters=body.max_iters),
        )
        return {"session_id": session_id}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str) -> dict:
        session = get_session(session_id)
        state = session.draft_state()
        picks = session.effective_picks()
        model = session.model
        return {
            "session_id": session_id,
            "mode": session.mode,
            "pick_ordinal": state.pick_ordinal,
            "complete": state.complete,
            "on_clock": None if state.complete else state.team_on_clock,
            "round": (state.pick_ordinal - 1) // model.config.num_teams + 1,
            "num_teams": model.config.num_teams,
            "roster_size": model.config.roster_size,
            "categories": list(model.config.category_names),
            "rosters": [list(r) for r in state.rosters],
            "picks": [
                {"ordinal": i + 1, "team": p["team"], "player_id": p["player_id"]}
                for i, p in enumerate(picks)
            ],
            "log_length": len(session.pick_log),
            "undrafted": [
                {
                    "player_id": pid,
                    "name": model.players[pid].display_name,
                    "positions": list(model.players[pid].eligible_positions),
                    "g_total": model.g_total[pid],
                }
                for pid in state.undrafted_by_g()
            ],
        }

    @app.post("/sessions/{session_id}/picks")
    def apply_pick(session_id: str, body: PickBody) -> dict:
        session = get_session(session_id)
        with session.lock:
            state = session.draft_state()
            if body.player_id not in session.model.players:
                raise HTTPException(status_code=404, detail=f"unknown player {body.player_id}")
            if body.player_id in state.drafted:
                raise HTTPException(status_code=409, detail=f"{body.player_id} already drafted")
            if not 0 <= body.team < session.model.config.num_teams:
                raise HTTPException(status_code=400, detail="team out of range")
            if session.mode == "snake" and not body.override and body.team != state.team_on_clock:
                raise HTTPException(
                    status_code=409,
                    detail=f"team {body.team} is not on the clock (team {state.team_on_clock} is)",
                )
            if len(state.rosters[body.team]) >= session.model.config.roster_size:
                raise HTTPException(status_code=409, detail=f"team {body.team} roster is full")
            session.pick_log.append(
                {"type": "pick", "team": body.team, "player_id": body.player_id, "price": body.price}
            )
            session._cache.clear()
        return get_state(session_id)

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            if not session.effective_picks():
                raise HTTPException(status_code=409, detail="nothing to undo")
            session.pick_log.append({"type": "undo"})
            session._cache.clear()
        return get_state(session_id)

    @app.get("/sessions/{session_id}/recommendations")
    def recommendations(
        session_id: str,
        top_k: int = Query(default=10, ge=1, le=200),
        team: int | None = None,
    ) -> dict:
        session = get_session(session_id)
        state = session.draft_state()
        if state.complete:
            return {"team": None, "candidates": [], "reason": "draft complete"}
        target = state.team_on_clock if team is None else team
        cache_key = ("rec", len(session.effective_picks()), target, top_k)
        cached = session._cache.get(cache_key)
        if cached is not None:
            return cached
        reports = _ranked_reports(session, state, target)
        if not reports:
            payload = {"team": target, "candidates": [], "reason": "no feasible candidates"}
            session._cache[cache_key] = payload
            return payload
        payload = {
            "team": target,
            "candidates": [
                _report_payload(session.model, rep, rank + 1)
                for rank, rep in enumerate(reports[:top_k])
            ],
        }
        if session.mode == "auction":
            _attach_dollars(session, payload)
        session._cache[cache_key] = payload
        return payload

    @app.get("/sessions/{session_id}/whatif/{player_id}")
    def what_if(session_id: str, player_id: str) -> dict:
        session = get_session(session_id)
        state = session.draft_state()
        if player_id not in session.model.players:
            raise HTTPException(status_code=404, detail=f"unknown player {player_id}")
        if player_id in state.drafted:
            raise HTTPException(status_code=409, detail=f"{player_id} already drafted")
        if state.complete:
            raise HTTPException(status_code=409, detail="draft complete")
        target = state.team_on_clock
        prev = session.prev_params_for(target)
        if prev is not None:
            state.prev_params[target] = prev
        report = h_score(state, player_id)
        return _report_payload(session.model, report, 0)

    def _ranked_reports(session: Session, state: DraftState, target: int) -> list[ObjectiveReport]:
        eval_state = _as_team(state, target)
        prev = session.prev_params_for(target)
        if prev is not None:
            eval_state.prev_params[target] = prev
        shortlist = [
            pid for pid in eval_state.undrafted_by_g()[: session.shortlist_size]
            if candidate_feasible(eval_state, pid)
        ]
        reports = [h_score(eval_state, pid) for pid in shortlist]
        feasible = [r for r in reports if r.feasible]
        return sorted(feasible, key=lambda r: (-r.value, r.player_id))

    def _as_team(state: DraftState, team: int) -> DraftState:
        if team == state.team_on_clock:
            return state
        # shift the ordinal so the requested team is on the clock for evaluation
        clone = DraftState(
            state.model,
            rosters=[list(r) for r in state.rosters],
            drafted=set(state.drafted),
            pick_ordinal=state.pick_ordinal,
            prev_params=dict(state.prev_params),
            shortlist_size=state.shortlist_size,
            opt_config=state.opt_config,
        )
        for ordinal in range(state.pick_ordinal, state.total_picks + 1):
            if snake_team_for_pick(ordinal, state.config.num_teams) == team:
                clone.pick_ordinal = ordinal
                break
        return clone

    def _attach_dollars(session: Session, payload: dict) -> None:
        auction = session.auction_state()
        team = payload["team"]
        curve_key = ("curve", len(session.effective_picks()), team)
        curve = session._cache.get(curve_key)
        if curve is None:
            curve = cash_curve(auction, team, n_points=21)
            session._cache[curve_key] = curve
        for cand in payload["candidates"]:
            if cand["V"] is None:
                cand["dollars"] = None
                continue
            value, _, _ = auction_h_score(
                auction,
                team,
                session.model.x[cand["player_id"]],
                session.model.players[cand["player_id"]].eligible_positions,
            )
            dollars, saturated = invert_cash_curve(curve, value)
            cand["dollars"] = round(dollars, 2)
            cand["dollars_saturated"] = saturated

    frontend = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if frontend.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend, html=True), name="ui")

    return app


def main_serve(stats_path: str, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    app = create_app()
    app.state.pools[stats_path] = load_weekly_stats(stats_path)
    uvicorn.run(app, host=host, port=port)
