"""Positional model: slot structures, assignment rewards, and future-slot counts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import FLEX_COVERAGE, POSITIONS, LeagueConfig
from .ingest import PlayerRecord
from .scoring import LeagueAggregates, x_score_matrix

NEG_INF = -1e18
INFEASIBLE_CUTOFF = -1e17

# Small bonuses steering flex slots toward future (not yet drafted) players.
FLEX_BONUS = {"G": 1e-4, "F": 1e-4, "UTIL": 2e-4}


class RosterStructureError(ValueError):
    """Roster does not fit the slot structure's shape."""


class InfeasibleRosterError(ValueError):
    """No assignment places every chosen player in an eligible slot."""


@dataclass(frozen=True)
class SlotStructure:
    """Ordered list of slot kinds; flex kinds cover several positions."""

    slots: tuple[str, ...]

    @classmethod
    def from_config(cls, config: LeagueConfig) -> "SlotStructure":
        return cls(tuple(config.position_structure))

    def __len__(self) -> int:
        return len(self.slots)

    @staticmethod
    def covered(kind: str) -> tuple[str, ...]:
        return FLEX_COVERAGE.get(kind, (kind,))

    @staticmethod
    def is_flex(kind: str) -> bool:
        return kind in FLEX_COVERAGE


@dataclass(frozen=True, eq=False)
class PositionMeans:
    """Average category X-score per position (rows ordered as POSITIONS)."""

    matrix: np.ndarray  # 5 x C

    def __post_init__(self) -> None:
        if self.matrix.shape[0] != len(POSITIONS):
            raise ValueError("position means need one row per position")


@dataclass(frozen=True, eq=False)
class FlexShares:
    """Expected fraction of each flex kind's slots devoted to each position."""

    j_u: np.ndarray  # over POSITIONS
    j_g: np.ndarray  # over (PG, SG)
    j_f: np.ndarray  # over (PF, SF)

    def __post_init__(self) -> None:
        for name, vec, size in (("j_u", self.j_u, 5), ("j_g", self.j_g, 2), ("j_f", self.j_f, 2)):
            arr = np.asarray(vec, dtype=float)
            object.__setattr__(self, name, arr)
            if arr.shape != (size,):
                raise ValueError(f"{name} must have length {size}")

    @classmethod
    def uniform(cls) -> "FlexShares":
        return cls(np.full(5, 0.2), np.full(2, 0.5), np.full(2, 0.5))


def position_means(
    q: list[PlayerRecord], agg: LeagueAggregates, config: LeagueConfig | None = None
) -> PositionMeans:
    """Per-position average X-scores; k-position players weigh 1/k in each group."""
    del config
    x = x_score_matrix(q, agg)
    rows = []
    for pos in POSITIONS:
        idx = [i for i, rec in enumerate(q) if pos in rec.eligible_positions]
        if not idx:
            raise RosterStructureError(f"no players eligible at {pos}")
        w = np.array([1.0 / len(q[i].eligible_positions) for i in idx])
        rows.append((w[:, None] * x[idx]).sum(axis=0) / w.sum())
    return PositionMeans(np.array(rows))


def position_rewards(j_c: np.ndarray, mu: PositionMeans) -> np.ndarray:
    """Per-position desirability of a future pick under the category weights."""
    return mu.matrix @ np.asarray(j_c, dtype=float)


def build_reward_matrix(
    eligibilities: Sequence[Iterable[str]],
    structure: SlotStructure,
    rewards: np.ndarray,
) -> np.ndarray:
    """Square assignment rewards: chosen players first, then future-player rows.

    Chosen players score 0 in slots they are eligible for and -inf elsewhere.
    Future rows take the slot position's reward; flex columns take the max over
    covered positions plus the flex bonus so open flex slots are kept for them.
    """
    n = len(structure)
    if len(eligibilities) > n:
        raise RosterStructureError(f"{len(eligibilities)} players exceed {n} slots")
    reward_by_pos = dict(zip(POSITIONS, np.asarray(rewards, dtype=float)))
    matrix = np.full((n, n), NEG_INF)
    for r, elig in enumerate(eligibilities):
        elig = set(elig)
        for c, kind in enumerate(structure.slots):
            if elig & set(SlotStructure.covered(kind)):
                matrix[r, c] = 0.0
    for r in range(len(eligibilities), n):
        for c, kind in enumerate(structure.slots):
            covered = SlotStructure.covered(kind)
            value = max(reward_by_pos[p] for p in covered)
            if SlotStructure.is_flex(kind):
                value += FLEX_BONUS[kind]
            matrix[r, c] = value
    return matrix


def solve_assignment(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """Maximize total reward over row-to-column assignments (Jonker-Volgenant)."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("assignment matrix must be square")
    rows, cols = linear_sum_assignment(matrix, maximize=True)
    chosen = matrix[rows, cols]
    if np.any(chosen <= INFEASIBLE_CUTOFF):
        raise InfeasibleRosterError("no feasible assignment covers every slot")
    assignment = np.empty(matrix.shape[0], dtype=int)
    assignment[rows] = cols
    return assignment, float(chosen.sum())


def roster_feasible(eligibilities: Sequence[Iterable[str]], structure: SlotStructure) -> bool:
    """True when every chosen player can occupy some eligible slot."""
    matrix = build_reward_matrix(eligibilities, structure, np.zeros(len(POSITIONS)))
    try:
        solve_assignment(matrix)
    except InfeasibleRosterError:
        return False
    return True


def roster_completable(
    eligibilities: Sequence[Iterable[str]],
    structure: SlotStructure,
    pool_eligibilities: Sequence[Iterable[str]],
) -> bool:
    """True when the roster fits the structure AND the open slots can be filled
    with distinct players from the remaining pool.

    One rectangular assignment over slots x (roster + pool) entities; roster
    entities carry a large must-use reward so the optimum saturates them first.
    """
    n = len(structure)
    n_chosen = len(eligibilities)
    if n_chosen > n:
        return False
    entities = list(eligibilities) + list(pool_eligibilities)
    if len(entities) < n:
        return False
    matrix = np.full((n, len(entities)), NEG_INF)
    for e, elig in enumerate(entities):
        elig = set(elig)
        use_reward = 1e6 if e < n_chosen else 1.0
        for c, kind in enumerate(structure.slots):
            if elig & set(SlotStructure.covered(kind)):
                matrix[c, e] = use_reward
    rows, cols = linear_sum_assignment(matrix, maximize=True)
    chosen = matrix[rows, cols]
    if np.any(chosen <= INFEASIBLE_CUTOFF):
        return False
    return int((cols < n_chosen).sum()) == n_chosen


def open_slot_summary(
    assignment: np.ndarray, n_chosen: int, structure: SlotStructure
) -> tuple[np.ndarray, dict[str, int]]:
    """Open non-flex slots per position and open flex-slot counts by kind."""
    fixed = np.zeros(len(POSITIONS))
    flex = {kind: 0 for kind in FLEX_COVERAGE}
    pos_index = {p: i for i, p in enumerate(POSITIONS)}
    for row in range(n_chosen, len(assignment)):
        kind = structure.slots[assignment[row]]
        if SlotStructure.is_flex(kind):
            flex[kind] += 1
        else:
            fixed[pos_index[kind]] += 1
    return fixed, flex


def future_position_counts(
    assignment: np.ndarray,
    n_chosen: int,
    structure: SlotStructure,
    shares: FlexShares,
) -> np.ndarray:
    """Expected future players per position: open fixed slots plus flex shares."""
    if sorted(assignment.tolist()) != list(range(len(structure))):
        raise ValueError("assignment must cover every slot exactly once")
    fixed, flex = open_slot_summary(assignment, n_chosen, structure)
    counts = fixed.copy()
    counts += flex["UTIL"] * shares.j_u
    for share, pos in zip(shares.j_g, FLEX_COVERAGE["G"]):
        counts[POSITIONS.index(pos)] += flex["G"] * share
    for share, pos in zip(shares.j_f, FLEX_COVERAGE["F"]):
        counts[POSITIONS.index(pos)] += flex["F"] * share
    return counts


def positional_adjustment(counts: np.ndarray, mu: PositionMeans) -> np.ndarray:
    """Expected category contribution of the open slots: mu^T P."""
    return mu.matrix.T @ np.asarray(counts, dtype=float)
